"""Quantum channels on M_n stored as Kraus families.

Choi block convention: the Choi matrix ``J = sum_ij E_ij (x) Phi(E_ij)`` is
indexed so that ``J[i*n + k, j*n + l] == Phi(E_ij)[k, l]``; the first tensor
factor labels the block.  Equivalently ``J = sum_q vec(K_q) vec(K_q)^*`` with
column-stacking ``vec``.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from . import numerics as nx
from .errors import ChoiNotReal, DimensionMismatch, NotPSD, NotTracePreserving
from .numerics import DEFAULT_TOL


class Channel:
    """Completely positive map ``X -> sum_i K_i X K_i^*`` on n x n matrices.

    Instances are treated as immutable.  Use :meth:`from_kraus` or
    :meth:`from_choi` rather than the constructor.
    """

    def __init__(self, kraus, trace_preserving, tp_residual):
        self._kraus = kraus
        self._kraus.setflags(write=False)
        self.trace_preserving = trace_preserving
        self.tp_residual = tp_residual

    @classmethod
    def from_kraus(cls, mats, tol=DEFAULT_TOL, allow_non_tp=False):
        """Build a channel from Kraus matrices.

        Raises :class:`NotTracePreserving` unless ``allow_non_tp`` is set.
        """
        mats = [np.asarray(k) for k in mats]
        if not mats:
            raise DimensionMismatch("at least one Kraus operator is required")
        n = mats[0].shape[0] if mats[0].ndim == 2 else -1
        for k in mats:
            if k.ndim != 2 or k.shape != (n, n):
                raise DimensionMismatch(
                    f"Kraus operators must all be {n}x{n}; got shape {k.shape}"
                )
        dtype = complex if any(np.iscomplexobj(k) for k in mats) else float
        kraus = nx.realify(np.array(mats, dtype=dtype), tol)
        s = np.einsum("qki,qkj->ij", kraus.conj(), kraus)
        residual = nx.max_abs(s - np.eye(n))
        tp = residual <= tol.residual
        if not tp and not allow_non_tp:
            raise NotTracePreserving(residual)
        return cls(kraus, tp, residual)

    @classmethod
    def from_choi(cls, j, n, tol=DEFAULT_TOL, allow_non_tp=False):
        """Kraus operators ``sqrt(lambda_q) unvec(x_q)`` from the eigenpairs of ``j``.

        Only eigenvalues above ``tol.eig_zero`` are kept, so the Kraus count
        equals the Choi rank and the family is linearly independent.  Real
        ``j`` yields real Kraus operators.  Output order is descending
        eigenvalue, ties broken lexicographically on rounded entries; each
        eigenvector's phase is fixed so its first non-negligible entry is
        positive real.
        """
        j = nx.as_matrix(j)
        if j.shape != (n * n, n * n):
            raise DimensionMismatch(f"Choi matrix must be {n*n}x{n*n}, got {j.shape}")
        w, v = nx.hermitian_eig(j, tol)
        if w[-1] < -tol.eig_zero:
            raise NotPSD(f"Choi matrix has eigenvalue {w[-1]:.3e}")
        keep = w > tol.eig_zero
        w, v = w[keep], v[:, keep]
        v = _fix_phases(v, tol)
        order = sorted(
            range(w.size),
            key=lambda q: (-round(float(w[q]), 9), _sort_key(v[:, q])),
        )
        kraus = [np.sqrt(w[q]) * nx.unvec(v[:, q], n) for q in order]
        if not kraus:
            kraus = [np.zeros((n, n))]
        return cls.from_kraus(kraus, tol, allow_non_tp=allow_non_tp)

    @property
    def kraus(self):
        """Kraus operators as a read-only ``(d, n, n)`` array."""
        return self._kraus

    @property
    def n(self):
        return self._kraus.shape[1]

    @property
    def num_kraus(self):
        return self._kraus.shape[0]

    @cached_property
    def choi(self):
        """``sum_ij E_ij (x) Phi(E_ij)`` in the module's block convention."""
        vecs = np.stack([nx.vec(k) for k in self._kraus], axis=1)
        j = vecs @ vecs.conj().T
        j = nx.realify(j, DEFAULT_TOL) if np.iscomplexobj(j) else j
        j.setflags(write=False)
        return j

    def choi_rank(self, tol=DEFAULT_TOL):
        return nx.rank(self.choi, tol)

    def apply(self, x):
        x = np.asarray(x)
        if x.shape != (self.n, self.n):
            raise DimensionMismatch(f"input must be {self.n}x{self.n}, got {x.shape}")
        k = self._kraus
        return np.einsum("qab,bc,qdc->ad", k, x, k.conj())

    __call__ = apply

    def is_real(self, tol=DEFAULT_TOL):
        return not np.iscomplexobj(self._kraus) or nx.is_real(self._kraus, tol)

    def compose(self, first):
        """The channel ``self o first`` (apply ``first``, then ``self``)."""
        if first.n != self.n:
            raise DimensionMismatch("channels act on different dimensions")
        kraus = [s @ k for s in self._kraus for k in first.kraus]
        return Channel.from_kraus(kraus, allow_non_tp=True)

    def mix(self, other, lam):
        """``lam * self + (1 - lam) * other`` as a Kraus family."""
        if other.n != self.n:
            raise DimensionMismatch("channels act on different dimensions")
        kraus = [np.sqrt(lam) * k for k in self._kraus]
        kraus += [np.sqrt(1 - lam) * s for s in other.kraus]
        return Channel.from_kraus(kraus, allow_non_tp=True)

    def same_map(self, other, tol=DEFAULT_TOL):
        """Max deviation of the two maps over all matrix units, compared to ``tol.residual``."""
        return self.map_distance(other) <= tol.residual

    def map_distance(self, other):
        if other.n != self.n:
            return np.inf
        return nx.max_abs(self.choi - other.choi)

    def __repr__(self):
        return f"Channel(n={self.n}, kraus={self.num_kraus}, tp={self.trace_preserving})"


def _fix_phases(v, tol):
    v = v.copy()
    for q in range(v.shape[1]):
        col = v[:, q]
        idx = np.nonzero(np.abs(col) > max(tol.entry_zero, 1e-12))[0]
        if idx.size:
            ph = col[idx[0]] / abs(col[idx[0]])
            v[:, q] = col / ph
    return nx.realify(v, tol)


def _sort_key(col):
    col = np.asarray(col)
    if np.iscomplexobj(col):
        return tuple(np.round(np.column_stack([col.real, col.imag]).ravel(), 9))
    return tuple(np.round(col, 9))


def choi(ch):
    return ch.choi


def from_kraus(mats, tol=DEFAULT_TOL, allow_non_tp=False):
    return Channel.from_kraus(mats, tol, allow_non_tp)


def from_choi(j, n, tol=DEFAULT_TOL, allow_non_tp=False):
    """Channel from a Choi matrix; trace preservation is read off the output partial trace."""
    j = nx.as_matrix(j)
    if j.shape != (n * n, n * n):
        raise DimensionMismatch(f"Choi matrix must be {n*n}x{n*n}, got {j.shape}")
    # Tr Phi(E_ij) = delta_ij  <=>  tracing out the output factor leaves I_n
    ptrace = np.einsum("ikjk->ij", j.reshape(n, n, n, n))
    residual = nx.max_abs(ptrace - np.eye(n))
    if residual > tol.residual and not allow_non_tp:
        raise NotTracePreserving(residual, f"partial trace of Choi deviates from I by {residual:.3e}")
    return Channel.from_choi(j, n, tol, allow_non_tp=allow_non_tp)


def apply(ch, x):
    return ch.apply(x)


def canonical_real_kraus(ch, tol=DEFAULT_TOL):
    """Equivalent channel with real, linearly independent Kraus operators.

    Raises :class:`ChoiNotReal` when the Choi matrix has an imaginary part
    above ``tol.entry_zero``; such a channel is never positively factorizable.
    """
    j = ch.choi
    if np.iscomplexobj(j):
        imag = np.abs(j.imag)
        loc = np.unravel_index(int(np.argmax(imag)), imag.shape)
        if imag[loc] > tol.entry_zero:
            raise ChoiNotReal(imag[loc], choi_index(loc, ch.n))
        j = j.real
    return Channel.from_choi(j, ch.n, tol, allow_non_tp=not ch.trace_preserving)


def choi_index(flat, n):
    """Translate a flat Choi position ``(r, c)`` into block labels ``((i, k), (j, l))``."""
    r, c = int(flat[0]), int(flat[1])
    return (divmod(r, n), divmod(c, n))


def min_choi_entry(ch):
    """Smallest real Choi entry and its location as ``((i, k), (j, l))``."""
    j = np.real(ch.choi)
    flat = np.unravel_index(int(np.argmin(j)), j.shape)
    return float(j[flat]), choi_index(flat, ch.n)


# ---------------------------------------------------------------- examples


def identity_channel(n):
    return Channel.from_kraus([np.eye(n)])


def depolarizing(n):
    """``X -> Tr(X) I / n`` with Kraus ``{E_ij / sqrt(n)}``."""
    kraus = [nx.matrix_unit(n, i, j) / np.sqrt(n) for i in range(n) for j in range(n)]
    return Channel.from_kraus(kraus)


def werner_holevo():
    """``X -> (Tr(X) I - X^T) / 2`` on M_3 with the three antisymmetric Kraus operators."""
    s = 1 / np.sqrt(2)
    k1 = np.array([[0, 0, 0], [0, 0, s], [0, -s, 0]])
    k2 = np.array([[0, 0, -s], [0, 0, 0], [s, 0, 0]])
    k3 = np.array([[0, s, 0], [-s, 0, 0], [0, 0, 0]])
    return Channel.from_kraus([k1, k2, k3])


def permutation_matrix(perm):
    perm = list(perm)
    p = np.zeros((len(perm), len(perm)))
    p[perm, range(len(perm))] = 1
    return p


def permutation_mixture(perms, weights):
    """``X -> sum_s q_s P_s X P_s^T``."""
    weights = np.asarray(weights, dtype=float)
    kraus = [np.sqrt(q) * permutation_matrix(p) for p, q in zip(perms, weights)]
    return Channel.from_kraus(kraus)
