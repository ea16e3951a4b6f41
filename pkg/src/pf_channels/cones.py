"""Polyhedral cones, nonnegativity cones of Kraus families, and the self-dual screen.

For real Kraus operators ``K_1..K_d`` the nonnegativity cone is

    NC(K) = { v in R^d : sum_q v_q K_q >= 0 entrywise }.

Its dual is generated by the vectors ``w[i, j] = (K_1[i, j], ..., K_d[i, j])``,
which are Gram vectors of the Choi matrix:
``<w[k, i], w[l, j]> == J[i*n + k, j*n + l]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import nnls

from . import numerics as nx
from .channel import canonical_real_kraus
from .errors import DimensionMismatch, DimensionTooLarge
from .numerics import DEFAULT_TOL

MAX_DUAL_DIM = 8
_CHUNK = 4096


class PolyhedralCone:
    """Finitely generated cone ``{sum_s a_s g_s : a_s >= 0}`` in R^dim.

    Generators are stored with unit norm; zero generators are dropped, and
    an empty generator list is the zero cone.
    """

    def __init__(self, generators, dim=None, tol=DEFAULT_TOL, max_dim=MAX_DUAL_DIM):
        g = np.asarray(generators, dtype=float)
        if g.size == 0:
            if dim is None:
                raise ValueError("dimension is required for a cone without generators")
            g = np.zeros((0, dim))
        g = np.atleast_2d(g)
        if dim is not None and g.shape[1] != dim:
            raise DimensionMismatch(f"generators have length {g.shape[1]}, expected {dim}")
        norms = np.linalg.norm(g, axis=1)
        g = g[norms > tol.entry_zero] / norms[norms > tol.entry_zero, None]
        self.generators = _dedupe(g)
        self.dim = g.shape[1]
        self.tol = tol
        self.max_dim = max_dim

    def __repr__(self):
        return f"PolyhedralCone(dim={self.dim}, generators={len(self.generators)})"

    @property
    def is_zero(self):
        return len(self.generators) == 0

    @cached_property
    def dual_generators(self):
        return _dual_generators(self.generators, self.dim, self.tol, self.max_dim)

    def dual(self):
        return PolyhedralCone(self.dual_generators, self.dim, self.tol, self.max_dim)

    def contains(self, x, tol=None):
        """Membership by nonnegative least squares against the generators."""
        tol = tol or self.tol
        x = np.asarray(x, dtype=float)
        norm = np.linalg.norm(x)
        if norm <= tol.entry_zero:
            return True
        if self.is_zero:
            return False
        _, res = nnls(self.generators.T, x / norm)
        return bool(res <= tol.residual)

    def dual_contains(self, y, tol=None):
        tol = tol or self.tol
        if self.is_zero:
            return True
        return bool(np.min(self.generators @ np.asarray(y, dtype=float)) >= -tol.entry_zero)

    def span_rank(self):
        return nx.vector_rank(self.generators, self.tol) if len(self.generators) else 0

    def to_dict(self):
        return {"dim": self.dim, "generators": self.generators.tolist()}

    @classmethod
    def from_dict(cls, data, tol=DEFAULT_TOL):
        return cls(data.get("generators", []), dim=int(data["dim"]), tol=tol)


def dual_cone(c):
    """Generators of ``{y : <y, g> >= 0 for every generator g}``.

    Extreme rays come from enumerating (r-1)-subsets of generators inside
    their span of dimension r; the orthogonal complement of the span is
    added as a lineality space.
    """
    return c.dual()


def cones_equal(a, b, tol=DEFAULT_TOL):
    """Mutual generator membership."""
    if a.dim != b.dim:
        return False
    return all(b.contains(g, tol) for g in a.generators) and all(
        a.contains(g, tol) for g in b.generators
    )


def _dedupe(g, atol=1e-9):
    kept = []
    for row in g:
        if not any(np.max(np.abs(row - k)) <= atol for k in kept):
            kept.append(row)
    return np.array(kept).reshape(len(kept), g.shape[1])


def _dual_generators(gens, dim, tol, max_dim):
    if dim > max_dim:
        raise DimensionTooLarge(f"dual cone enumeration is capped at dimension {max_dim}, got {dim}")
    if len(gens) == 0:
        eye = np.eye(dim)
        return np.vstack([eye, -eye])
    # orthonormal basis of the span (columns), and of its complement
    u, s, _ = np.linalg.svd(gens.T)
    r = int(np.count_nonzero(s**2 > tol.eig_zero))
    basis, complement = u[:, :r], u[:, r:]
    g = gens @ basis  # coordinates inside the span; full rank r
    rays = []
    if r == 1:
        for z in (np.array([1.0]), np.array([-1.0])):
            if np.min(g @ z) >= -tol.entry_zero:
                rays.append(z)
    else:
        subsets = np.array(list(itertools.combinations(range(len(g)), r - 1)), dtype=int)
        for start in range(0, len(subsets), _CHUNK):
            block = g[subsets[start : start + _CHUNK]]
            _, sv, vh = np.linalg.svd(block, full_matrices=True)
            ok = sv[:, -1] ** 2 > tol.eig_zero
            z = vh[ok, -1, :]
            pairing = z @ g.T
            pos = pairing.min(axis=1) >= -tol.entry_zero
            neg = pairing.max(axis=1) <= tol.entry_zero
            rays.extend(z[pos])
            rays.extend(-z[neg & ~pos])
    out = [basis @ z for z in rays]
    out += list(complement.T) + list(-complement.T)
    if not out:
        return np.zeros((0, dim))
    out = np.array(out)
    out /= np.linalg.norm(out, axis=1)[:, None]
    return _dedupe(out, atol=1e-7)


# ------------------------------------------------------------------ 2-D cones


@dataclass(frozen=True)
class Degenerate:
    """Planar cone without two distinct boundary rays.

    ``kind`` is one of ``zero``, ``ray``, ``line``, ``halfplane``, ``full``.
    ``normal`` is the inward normal of a halfplane, and ``direction`` the
    spanning direction of a ray or line.
    """

    kind: str
    normal: np.ndarray | None = None
    direction: np.ndarray | None = None


def extreme_rays_2d(c, angle_tol=1e-9):
    """Boundary rays ``(u1, u2)`` of a pointed planar cone, counterclockwise from u1."""
    if c.dim != 2:
        raise DimensionMismatch("extreme_rays_2d needs a cone in R^2")
    g = c.generators
    if len(g) == 0:
        return Degenerate("zero")
    ang = np.sort(np.mod(np.arctan2(g[:, 1], g[:, 0]), 2 * np.pi))
    gaps = np.diff(np.append(ang, ang[0] + 2 * np.pi))
    k = int(np.argmax(gaps))
    big = gaps[k]
    start = ang[(k + 1) % len(ang)]  # first ray after the largest gap
    end = ang[k]
    unit = lambda t: np.array([np.cos(t), np.sin(t)])
    if big >= 2 * np.pi - angle_tol:
        return Degenerate("ray", direction=unit(start))
    if big > np.pi + angle_tol:
        return unit(start), unit(end)
    if big >= np.pi - angle_tol:
        # the two rays bounding the gap are opposite
        inner = np.count_nonzero(gaps > angle_tol)
        if inner <= 2:
            return Degenerate("line", direction=unit(start))
        return Degenerate("halfplane", normal=unit(start + np.pi / 2))
    return Degenerate("full")


# ---------------------------------------------- nonnegativity cone machinery


@dataclass(frozen=True)
class GramFamily:
    """Gram vectors ``w[i, j]`` of a Choi matrix (or of a correlation matrix).

    For ``source == "choi"`` the array has shape ``(n, n, d)`` and
    ``w[i, j, q] == kraus[q][i, j]``.  For ``source == "correlation"`` it has
    shape ``(n, d)``.
    """

    vectors: np.ndarray
    source: str
    kraus: np.ndarray | None = None

    def flat(self):
        """Rows in Choi order: row ``i*n + k`` is ``w[k, i]``, so ``flat @ flat.T == J``."""
        if self.source != "choi":
            return self.vectors
        n, _, d = self.vectors.shape
        return self.vectors.transpose(1, 0, 2).reshape(n * n, d)

    def cone(self, tol=DEFAULT_TOL):
        return PolyhedralCone(self.flat(), dim=self.vectors.shape[-1], tol=tol)


def real_kraus(ch, tol=DEFAULT_TOL):
    """Stored Kraus operators if they are real, else a canonical real family."""
    if ch.is_real(tol):
        return np.real(ch.kraus)
    return np.real(canonical_real_kraus(ch, tol).kraus)


def nc_generators_dual(ch, tol=DEFAULT_TOL):
    """Generators ``w[i, j]`` of the dual of NC(K).

    Coordinates refer to the channel's own Kraus operators when those are
    real; otherwise to :func:`canonical_real_kraus` (``ChoiNotReal`` if the
    Choi matrix is complex).
    """
    k = real_kraus(ch, tol)
    return GramFamily(np.ascontiguousarray(k.transpose(1, 2, 0)), "choi", k)


@dataclass(frozen=True)
class Membership:
    ok: bool
    entry: tuple | None = None
    value: float | None = None

    def __bool__(self):
        return self.ok


def combine(kraus, v):
    """``K(v) = sum_q v_q K_q``."""
    return np.tensordot(np.asarray(v), kraus, axes=(0, 0))


def nc_membership(ch, v, tol=DEFAULT_TOL):
    """Is ``K(v)`` entrywise nonnegative?  Reports the most negative entry when not."""
    k = real_kraus(ch, tol)
    v = np.asarray(v)
    if v.shape != (k.shape[0],):
        raise DimensionMismatch(f"vector must have length {k.shape[0]}, got {v.shape}")
    m = np.real(combine(k, v))
    if np.iscomplexobj(v) and nx.max_abs(combine(k, v.imag)) > tol.entry_zero:
        loc = np.unravel_index(int(np.argmax(np.abs(combine(k, v.imag)))), m.shape)
        return Membership(False, (int(loc[0]), int(loc[1])), float(m[loc]))
    loc = np.unravel_index(int(np.argmin(m)), m.shape)
    val = float(m[loc])
    if val >= -tol.entry_zero:
        return Membership(True)
    return Membership(False, (int(loc[0]), int(loc[1])), val)


def nc_cone(ch, tol=DEFAULT_TOL):
    """NC(K) itself, computed as the dual of the cone on the Gram vectors."""
    return nc_generators_dual(ch, tol).cone(tol).dual()


@dataclass(frozen=True)
class ScreenResult:
    """Outcome of testing ``NC(K)^* subset NC(K)``.

    On failure ``generator`` is the index pair ``(a, b)`` of a Gram vector
    ``w[a, b]`` outside NC(K), ``entry`` the Kraus position ``(c, d)`` where
    ``K(w[a, b])`` is negative, and ``choi_entry`` the same number located
    in the Choi matrix.
    """

    ok: bool
    generator: tuple | None = None
    entry: tuple | None = None
    value: float | None = None
    choi_entry: tuple | None = None

    def __bool__(self):
        return self.ok


def self_dual_screen(ch, tol=DEFAULT_TOL):
    """Check every generator of NC(K)^* for membership in NC(K)."""
    canon = ch if _independent_real(ch, tol) else canonical_real_kraus(ch, tol)
    fam = nc_generators_dual(canon, tol)
    n = ch.n
    worst = None
    for a in range(n):
        for b in range(n):
            mem = nc_membership(canon, fam.vectors[a, b], tol)
            if not mem and (worst is None or mem.value < worst[2]):
                worst = ((a, b), mem.entry, mem.value)
    if worst is None:
        return ScreenResult(True)
    (a, b), (c, d), val = worst
    # <w[a,b], w[c,d]> = J[b*n + a, d*n + c]
    return ScreenResult(False, (a, b), (c, d), val, ((b, a), (d, c)))


def contains_self_dual_test(ch, tol=DEFAULT_TOL):
    """Necessary condition for PF: NC(K) contains a self-dual cone.

    A classical result on self-dual cones says this holds iff
    ``NC(K)^* subset NC(K)``, which is what is tested.  ``False`` certifies that ``ch`` is not positively factorizable.
    """
    return self_dual_screen(ch, tol).ok


def _independent_real(ch, tol):
    if not ch.is_real(tol):
        return False
    k = np.real(ch.kraus).reshape(ch.num_kraus, -1)
    return nx.vector_rank(k, tol) == ch.num_kraus


__all__ = [
    "PolyhedralCone",
    "GramFamily",
    "Degenerate",
    "Membership",
    "ScreenResult",
    "dual_cone",
    "cones_equal",
    "extreme_rays_2d",
    "nc_generators_dual",
    "nc_membership",
    "nc_cone",
    "self_dual_screen",
    "contains_self_dual_test",
    "combine",
    "real_kraus",
]
