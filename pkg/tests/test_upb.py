from itertools import combinations

import networkx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pf_channels import kernels
from pf_channels.errors import NotUnitVector, TooManyVectors, WrongSize, ZeroVector
from pf_channels.schur import PENTAGON_EDGES, pentagon_vectors
from pf_channels.upb import (
    Extendible,
    NonCPSDCertificate,
    NotApplicable,
    OrthGraph,
    UPBCandidate,
    is_unextendible,
    minimal_upb_gram_check,
    non_cpsd_certificate,
    orth_graph,
    span_condition,
    vertex_connectivity_check,
)

RELABEL = [0, 2, 4, 1, 3]  # i -> 2i mod 5


def pentagon_upb():
    v = pentagon_vectors()
    return UPBCandidate(v, v[RELABEL])


def generic_pentagon_family(rng):
    """Five unit vectors in R^3 whose orthogonality graph is the pentagon C5."""
    v0, v1 = rng.standard_normal(3), rng.standard_normal(3)
    v3 = np.cross(v0, v1)
    v2 = np.cross(v0, rng.standard_normal(3))
    v4 = np.cross(v1, v2)
    v = np.array([v0, v1, v2, v3, v4])
    v = v / np.linalg.norm(v, axis=1)[:, None]
    # keep well-conditioned draws: every triple must be far from dependent
    if min(abs(np.linalg.det(v[list(t)])) for t in combinations(range(5), 3)) < 1e-2:
        return generic_pentagon_family(rng)
    return v


def generic_upb(rng):
    return UPBCandidate(generic_pentagon_family(rng), generic_pentagon_family(rng)[RELABEL])


def test_candidate_validation():
    with pytest.raises(NotUnitVector):
        UPBCandidate([[2.0, 0.0]], [[1.0, 0.0]])
    with pytest.raises(ZeroVector):
        UPBCandidate([[0.0, 0.0]], [[1.0, 0.0]])
    with pytest.raises(ValueError):
        UPBCandidate([[1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]])
    c = UPBCandidate.normalized([[2.0, 0.0]], [[0.0, 3.0]])
    assert c.us[0, 0] == pytest.approx(1.0)


def test_pentagon_upb_suite():
    upb = pentagon_upb()
    ok, _, worst = upb.product_orthogonality()
    assert ok and worst < 1e-15
    assert orth_graph(upb.us).edges == PENTAGON_EDGES
    assert is_unextendible(upb)
    span = span_condition(upb)
    assert span.ok and not span.warnings
    assert vertex_connectivity_check(orth_graph(upb.us), 2)
    rep = minimal_upb_gram_check(upb)
    assert rep.passed, rep.to_dict()
    assert isinstance(rep.certificate, NonCPSDCertificate)


@given(st.integers(0, 100_000))
def test_generic_minimal_upb(seed):
    upb = generic_upb(np.random.default_rng(seed))
    assert upb.product_orthogonality()[0]
    assert orth_graph(upb.us).edges == PENTAGON_EDGES
    assert is_unextendible(upb)
    rep = minimal_upb_gram_check(upb)
    assert rep.passed, rep.to_dict()
    assert rep.certificate.conclusion in ("not_cpsd", "not_dnn")


def test_extendible_family():
    e = np.eye(3)
    upb = UPBCandidate(e, np.array([e[0], e[0], e[0]]))
    ext = is_unextendible(upb)
    assert isinstance(ext, Extendible)
    overlaps = [abs(np.vdot(u, ext.x) * np.vdot(v, ext.y)) for u, v in zip(upb.us, upb.vs)]
    assert max(overlaps) < 1e-12
    assert np.linalg.norm(ext.x) == pytest.approx(1) and np.linalg.norm(ext.y) == pytest.approx(1)


def test_extendible_with_complex_vectors(rng):
    upb = generic_upb(rng)
    us, vs = upb.us[:4] * np.exp(1j * 0.3), upb.vs[:4]
    ext = is_unextendible(UPBCandidate(us, vs))
    assert not ext
    assert max(abs(np.vdot(u, ext.x) * np.vdot(v, ext.y)) for u, v in zip(us, vs)) < 1e-10


def test_near_degenerate_extension_is_flagged():
    # the fifth pair is within tolerance of spanning the orthogonal complement
    upb = pentagon_upb()
    us = upb.us.copy()
    us[4] = us[4] + 1e-5 * us[0]
    us[4] /= np.linalg.norm(us[4])
    res = is_unextendible(UPBCandidate(us, upb.vs))
    assert bool(res) or res.overlap <= 10 * np.sqrt(1e-9)


def test_partition_limit():
    v = np.tile(np.eye(2)[0], (21, 1))
    with pytest.raises(TooManyVectors):
        is_unextendible(UPBCandidate(v, v))


def test_span_condition_fails_for_basis():
    e = np.eye(3)
    res = span_condition(UPBCandidate(e, e))
    assert not res and res.subset == (0,)


def test_wrong_size():
    e = np.eye(3)
    with pytest.raises(WrongSize):
        minimal_upb_gram_check(UPBCandidate(e, e))


def test_span_failure_stops_chain():
    # orthonormal-basis style family of size 2d-1 with d = 2: fails the span condition
    u = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
    rep = minimal_upb_gram_check(UPBCandidate(u, u))
    assert rep.stopped_at == "span_condition"
    assert rep.certificate is None


def test_certificate_not_applicable_for_identity():
    # orthonormal vectors: every pair is orthogonal, so no pair qualifies
    assert isinstance(non_cpsd_certificate(np.eye(3)), NotApplicable)


def test_certificate_not_dnn():
    v = pentagon_vectors().copy()
    v[0] = -v[0]
    cert = non_cpsd_certificate(v)
    assert isinstance(cert, NonCPSDCertificate) and cert.conclusion == "not_dnn"


def test_certificate_expansions():
    v = pentagon_vectors()
    cert = non_cpsd_certificate(v)
    np.testing.assert_allclose(cert.coeffs_i @ v[list(cert.closed_j)], v[cert.i], atol=1e-12)
    np.testing.assert_allclose(cert.coeffs_j @ v[list(cert.closed_i)], v[cert.j], atol=1e-12)


def test_orth_graph_zero_vector():
    with pytest.raises(ZeroVector):
        orth_graph([[0.0, 0.0], [1.0, 0.0]])


def test_graph_helpers():
    g = OrthGraph.cycle(5)
    assert g.min_degree() == 2 and g.neighbors(0) == [1, 4]
    assert g.complement().complement() == g
    assert OrthGraph.cycle(5, 2).edges == PENTAGON_EDGES


def _to_nx(g):
    h = networkx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


@given(st.integers(3, 9), st.floats(0.1, 0.9), st.integers(0, 10_000), st.integers(1, 4))
def test_connectivity_matches_networkx(n, p, seed, k):
    h = networkx.gnp_random_graph(n, p, seed=seed)
    g = OrthGraph(n, frozenset(tuple(sorted(e)) for e in h.edges))
    assert vertex_connectivity_check(g, k) == (networkx.node_connectivity(h) >= k)


def test_connectivity_small_cases():
    assert vertex_connectivity_check(OrthGraph.cycle(5), 2)
    assert not vertex_connectivity_check(OrthGraph.cycle(5), 3)
    assert vertex_connectivity_check(OrthGraph(1, frozenset()), 0)
    assert not vertex_connectivity_check(OrthGraph(2, frozenset()), 1)


def _random_family(rng, n, d, complex_):
    v = rng.standard_normal((n, d))
    if complex_:
        v = v + 1j * rng.standard_normal((n, d))
    # plant repeats so that deficient subsets are common
    v[rng.integers(0, n, n // 2)] = v[0]
    return v / np.linalg.norm(v, axis=1)[:, None]


@pytest.mark.skipif(kernels.compiled_backend is None, reason="compiled backend not active")
@given(st.integers(0, 10_000), st.integers(1, 8), st.integers(1, 4), st.booleans())
def test_partition_backends_agree(seed, n, d, complex_):
    rng = np.random.default_rng(seed)
    us, vs = _random_family(rng, n, d, complex_), _random_family(rng, n, d, complex_)
    us, vs = us.astype(complex), vs.astype(complex)
    a = kernels.python_backend.first_extending_partition(us, vs, 1e-9)
    b = kernels.compiled_backend.first_extending_partition(us, vs, 1e-9)
    assert a == b


@pytest.mark.skipif(kernels.compiled_backend is None, reason="compiled backend not active")
@given(st.integers(2, 9), st.floats(0.1, 0.9), st.integers(0, 10_000), st.integers(0, 4))
def test_separator_backends_agree(n, p, seed, size):
    h = networkx.gnp_random_graph(n, p, seed=seed)
    adj = networkx.to_numpy_array(h, dtype=np.uint8)
    a = kernels.python_backend.find_separator(adj, size)
    b = kernels.compiled_backend.find_separator(adj, size)
    assert (None if a is None else list(a)) == (None if b is None else list(b))


def test_first_partition_is_lowest_mask():
    e = np.eye(2, dtype=complex)
    us = np.array([e[0], e[0]])
    vs = np.array([e[0], e[1]])
    mask = kernels.first_extending_partition(us, vs, 1e-9)
    # brute force over masks in increasing order
    for m in range(4):
        s_in = [i for i in range(2) if m >> i & 1]
        s_out = [i for i in range(2) if not m >> i & 1]
        def deficient(f, idx, d=2):
            return np.linalg.matrix_rank(f[idx]) < d if idx else True
        if deficient(us, s_in) and deficient(vs, s_out):
            assert mask == m
            break
    else:
        assert mask == -1
