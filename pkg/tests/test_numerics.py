import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pf_channels import numerics as nx
from pf_channels.errors import NotHermitian, NotPSD

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_default_tolerances():
    t = nx.Tolerance()
    assert (t.eig_zero, t.entry_zero, t.residual) == (1e-9, 1e-9, 1e-8)


def test_scaled_and_env(monkeypatch):
    assert nx.Tolerance.scaled(1e-6).residual == pytest.approx(1e-5)
    monkeypatch.setenv(nx.ENV_TOL, "1e-7")
    assert nx.Tolerance.from_env().eig_zero == 1e-7
    monkeypatch.delenv(nx.ENV_TOL)
    assert nx.Tolerance.from_env() == nx.Tolerance()


def test_negative_tolerance_rejected():
    with pytest.raises(ValueError):
        nx.Tolerance(eig_zero=-1)


@given(arrays(float, (3, 4), elements=finite))
def test_vec_unvec_roundtrip(m):
    v = nx.vec(m)
    assert v[1 + 2 * 3] == m[1, 2]
    np.testing.assert_array_equal(nx.unvec(v, 3, 4), m)


@given(arrays(float, (4, 3), elements=finite))
def test_gram_vectors_reconstruct(a):
    m = a @ a.T
    g = nx.gram_vectors(m)
    assert g.shape[1] == nx.rank(m)
    assert nx.max_abs(nx.gram_matrix(g) - m) <= 1e-8 * max(1.0, nx.max_abs(m))


def test_gram_vectors_complex(rng):
    a = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    m = a @ a.conj().T
    g = nx.gram_vectors(m)
    assert g.shape == (4, 2)
    assert nx.max_abs(nx.gram_matrix(g) - m) < 1e-12


def test_not_psd_and_not_hermitian():
    with pytest.raises(NotPSD):
        nx.gram_vectors(np.diag([1.0, -1.0]))
    with pytest.raises(NotHermitian):
        nx.is_psd(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigenvalues_descending(rng):
    a = rng.standard_normal((5, 5))
    w, v = nx.hermitian_eig(a + a.T)
    assert np.all(np.diff(w) <= 0)
    assert np.isrealobj(v)


def test_rank_cutoff():
    assert nx.rank(np.diag([1.0, 1e-10, 0.0])) == 1
    assert nx.rank(np.diag([1.0, 1e-8, 0.0])) == 2


def test_realify():
    m = np.array([[1 + 1e-12j]])
    assert np.isrealobj(nx.realify(m))
    assert np.iscomplexobj(nx.realify(np.array([[1 + 1e-3j]])))


@given(arrays(float, (2, 4), elements=finite))
def test_null_vector_is_orthogonal(rows):
    x = nx.null_vector(rows)
    assert x is not None
    assert np.linalg.norm(x) == pytest.approx(1.0)
    assert nx.max_abs(rows @ x) <= 1e-6 * max(1.0, nx.max_abs(rows))


def test_null_vector_none_for_full_rank():
    assert nx.null_vector(np.eye(3)) is None
    assert nx.null_vector(np.zeros((0, 2))) is not None


def test_vector_rank_and_smallest_eig():
    v = np.array([[1.0, 0, 0], [0, 1.0, 0], [1.0, 1.0, 0]])
    assert nx.vector_rank(v) == 2
    assert nx.smallest_kept_eig(v) == pytest.approx(1.0)
    assert nx.vector_rank(np.zeros((0, 3))) == 0
