"""Dense linear-algebra kernel shared by every other module.

Matrices are plain ``numpy.ndarray`` objects (real or complex).  All
comparisons go through a :class:`Tolerance`; nothing is compared bitwise.

Vectorization is column stacking: ``vec(M)[i + j * rows] == M[i, j]``.
With this convention the Choi matrix of a channel with Kraus operators
``K_q`` is ``sum_q vec(K_q) vec(K_q)^*``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, NotPSD

ENV_TOL = "PF_CHANNELS_TOL"


@dataclass(frozen=True)
class Tolerance:
    """Cutoffs used throughout the library.

    Attributes
    ----------
    eig_zero : float
        Eigenvalues at or below this are treated as zero (absolute cutoff).
    entry_zero : float
        Matrix entries with magnitude at or below this are treated as zero.
    residual : float
        Largest acceptable residual of an identity that should hold exactly.
    """

    eig_zero: float = 1e-9
    entry_zero: float = 1e-9
    residual: float = 1e-8

    def __post_init__(self):
        for name in ("eig_zero", "entry_zero", "residual"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"tolerance field {name} must be nonnegative")

    @classmethod
    def scaled(cls, base):
        """Tolerance with ``eig_zero = entry_zero = base`` and ``residual = 10 * base``."""
        base = float(base)
        return cls(eig_zero=base, entry_zero=base, residual=10.0 * base)

    @classmethod
    def from_env(cls, default=None):
        """Read ``PF_CHANNELS_TOL`` if set, else return ``default`` (or the defaults)."""
        raw = os.environ.get(ENV_TOL)
        if raw is None or not raw.strip():
            return default if default is not None else cls()
        return cls.scaled(float(raw))

    def as_dict(self):
        return {"eig_zero": self.eig_zero, "entry_zero": self.entry_zero, "residual": self.residual}


DEFAULT_TOL = Tolerance()


def as_matrix(m):
    """Coerce ``m`` to a 2-D float or complex array (no copy when possible)."""
    a = np.asarray(m)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.issubdtype(a.dtype, np.complexfloating):
        a = a.astype(float, copy=False)
    return a


def max_abs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_real(m, tol=DEFAULT_TOL):
    m = np.asarray(m)
    if not np.iscomplexobj(m):
        return True
    return max_abs(m.imag) <= tol.entry_zero


def realify(m, tol=DEFAULT_TOL):
    """Drop a negligible imaginary part; leave genuinely complex input alone."""
    m = np.asarray(m)
    if np.iscomplexobj(m) and is_real(m, tol):
        return np.ascontiguousarray(m.real)
    return m


def _check_hermitian(m, tol):
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NotHermitian(f"matrix is not square: {m.shape}")
    dev = max_abs(m - m.conj().T)
    if dev > tol.residual:
        raise NotHermitian(f"max |m - m^*| = {dev:.3e} exceeds {tol.residual:.1e}")
    return m


def hermitian_eig(m, tol=DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns eigenvalues in descending order and the matching orthonormal
    eigenvectors as columns.  Real symmetric input (imaginary part below
    ``tol.entry_zero``) goes through the real solver, so the eigenvectors
    come back real.
    """
    m = _check_hermitian(m, tol)
    m = realify(m, tol)
    # symmetrize away the sub-tolerance skew part before calling LAPACK
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def rank(m, tol=DEFAULT_TOL):
    w, _ = hermitian_eig(m, tol)
    return int(np.count_nonzero(w > tol.eig_zero))


def is_psd(m, tol=DEFAULT_TOL):
    w, _ = hermitian_eig(m, tol)
    return bool(w.size == 0 or w[-1] >= -tol.eig_zero)


def min_eig(m, tol=DEFAULT_TOL):
    w, _ = hermitian_eig(m, tol)
    return float(w[-1])


def gram_vectors(m, tol=DEFAULT_TOL):
    """Rows ``g_i`` with ``<g_i, g_j> = m[i, j]``.

    The inner product is conjugate-linear in the first slot,
    ``<x, y> = sum(conj(x) * y)``.  The result has shape ``(n, rank(m))``.
    """
    w, v = hermitian_eig(m, tol)
    if w.size and w[-1] < -tol.eig_zero:
        raise NotPSD(f"minimum eigenvalue {w[-1]:.3e} below -{tol.eig_zero:.1e}")
    keep = w > tol.eig_zero
    return np.conj(v[:, keep]) * np.sqrt(w[keep])


def gram_matrix(vectors):
    """``G[i, j] = <g_i, g_j>`` for the rows of ``vectors``."""
    g = np.asarray(vectors)
    return g.conj() @ g.T


def vec(m):
    """Column-stacking vectorization."""
    return np.asarray(m).reshape(-1, order="F")


def unvec(v, rows, cols=None):
    cols = rows if cols is None else cols
    v = np.asarray(v)
    if v.size != rows * cols:
        raise ValueError(f"cannot reshape vector of length {v.size} to {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def matrix_unit(n, i, j, dtype=float):
    e = np.zeros((n, n), dtype=dtype)
    e[i, j] = 1
    return e


def vector_rank(vectors, tol=DEFAULT_TOL):
    """Dimension of the span of the rows of ``vectors`` (Gram eigenvalue cutoff)."""
    g = np.asarray(vectors)
    if g.shape[0] == 0:
        return 0
    return rank(gram_matrix(g), tol)


def smallest_kept_eig(vectors, tol=DEFAULT_TOL):
    """Smallest Gram eigenvalue counted towards the rank (``inf`` for rank 0)."""
    g = np.asarray(vectors)
    if g.shape[0] == 0:
        return np.inf
    w, _ = hermitian_eig(gram_matrix(g), tol)
    kept = w[w > tol.eig_zero]
    return float(kept[-1]) if kept.size else np.inf


def null_vector(rows, tol=DEFAULT_TOL):
    """A unit vector ``x`` with ``rows @ x == 0`` (``None`` if only the zero vector)."""
    rows = np.atleast_2d(np.asarray(rows))
    dim = rows.shape[1]
    if rows.shape[0] == 0:
        x = np.zeros(dim, dtype=rows.dtype if rows.size else float)
        x[0] = 1
        return x
    _, s, vh = np.linalg.svd(rows)
    s_full = np.zeros(dim)
    s_full[: s.size] = s
    # same cutoff as the Gram-eigenvalue rank: sigma^2 <= eig_zero
    null = np.nonzero(s_full**2 <= tol.eig_zero)[0]
    if null.size == 0:
        return None
    return vh[null[-1]].conj()
