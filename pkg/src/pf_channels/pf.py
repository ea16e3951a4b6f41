"""Positive-factorization witnesses and decision procedures.

A witness is finite-dimensional data ``(kraus, ops, weights)`` defining

    Z = sum_i K_i (x) A_i,     tau(X) = sum_s weights[s] * X[s, s],

and it certifies that the channel is PF when every block ``Z(a, b)`` is
positive semidefinite and ``(id (x) tau)(Z (X (x) 1) Z^*)`` reproduces the
channel.  Two trace families are supported:

``abelian``
    diagonal ``A_i``; ``weights`` is the probability vector of the trace.
``block``
    arbitrary Hermitian ``A_i`` in M_m.  The default trace is the normalized
    matrix trace; non-uniform weights describe a direct sum of matrix blocks
    and must be constant on each block (checked through traciality on the
    operators).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import nnls

from . import numerics as nx
from .channel import Channel, canonical_real_kraus, min_choi_entry
from .cones import (
    MAX_DUAL_DIM,
    Degenerate,
    PolyhedralCone,
    combine,
    extreme_rays_2d,
    nc_cone,
    nc_membership,
    real_kraus,
    self_dual_screen,
)
from .errors import (
    ChoiNotReal,
    DimensionMismatch,
    DimensionTooLarge,
    FrameNotInCone,
    FrameNotResolution,
    InvalidWitness,
    InvariantViolation,
    LambdaOutOfRange,
    NotTracePreserving,
    NotUnitVector,
    WrongRank,
)
from .numerics import DEFAULT_TOL

KINDS = ("abelian", "block")


@dataclass(frozen=True, eq=False)
class PFWitness:
    kind: str
    weights: np.ndarray
    ops: np.ndarray
    kraus: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidWitness(f"unknown witness kind {self.kind!r}")
        ops = np.asarray(self.ops)
        kraus = np.asarray(self.kraus)
        weights = np.asarray(self.weights, dtype=float)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise InvalidWitness(f"ops must be a stack of square matrices, got {ops.shape}")
        if kraus.ndim != 3 or kraus.shape[1] != kraus.shape[2]:
            raise InvalidWitness(f"kraus must be a stack of square matrices, got {kraus.shape}")
        if ops.shape[0] != kraus.shape[0]:
            raise DimensionMismatch(f"{ops.shape[0]} operators for {kraus.shape[0]} Kraus matrices")
        if weights.shape != (ops.shape[1],):
            raise DimensionMismatch(f"weights must have length m={ops.shape[1]}")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "kraus", kraus)
        object.__setattr__(self, "weights", weights)

    @property
    def m(self):
        return self.ops.shape[1]

    @property
    def n(self):
        return self.kraus.shape[1]

    @property
    def d(self):
        return self.ops.shape[0]

    def trace(self, x):
        """``tau`` applied to the trailing two axes of ``x``."""
        return np.einsum("...ss,s->...", x, self.weights)

    @cached_property
    def z_blocks(self):
        """``Z(a, b) = sum_i K_i[a, b] A_i`` as an ``(n, n, m, m)`` array."""
        return np.einsum("iab,ist->abst", self.kraus, self.ops)

    @property
    def z(self):
        n, m = self.n, self.m
        return self.z_blocks.transpose(0, 2, 1, 3).reshape(n * m, n * m)

    def channel(self, tol=DEFAULT_TOL):
        """The channel given by the witness's own Kraus family."""
        return Channel.from_kraus(list(self.kraus), tol, allow_non_tp=True)

    def choi_from_z(self):
        """Choi matrix of ``X -> (id (x) tau)(Z (X (x) 1) Z^*)``.

        Entry ``[i*n + a, j*n + b]`` is ``tau(Z(a, i) Z(b, j)^*)``.
        """
        zb = self.z_blocks
        t = np.einsum("aist,bjst,s->iajb", zb, zb.conj(), self.weights)
        n = self.n
        return t.reshape(n * n, n * n)


@dataclass
class Verification:
    ok: bool
    residual: float
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"verified": self.ok, "residual": self.residual, "failures": list(self.failures)}


def verify_witness(ch, w, tol=DEFAULT_TOL):
    """Check the witness invariants and that it reproduces ``ch`` on all matrix units."""
    if w.n != ch.n:
        raise DimensionMismatch(f"witness acts on n={w.n}, channel on n={ch.n}")
    failures = []
    ops = w.ops
    herm = nx.max_abs(ops - ops.conj().transpose(0, 2, 1))
    if herm > tol.residual:
        failures.append(f"operators not Hermitian (deviation {herm:.3e})")
    wt = w.weights
    if wt.min() < -tol.entry_zero or abs(wt.sum() - 1) > tol.residual:
        failures.append("trace weights are not a probability vector")
    if w.kind == "abelian":
        off = ops - np.einsum("iss->is", ops)[:, :, None] * np.eye(w.m)
        if nx.max_abs(off) > tol.entry_zero:
            failures.append("abelian witness has non-diagonal operators")
    else:
        prods = np.einsum("ist,jtu->ijsu", ops, ops)
        tr = w.trace(prods)
        if nx.max_abs(tr - tr.T) > tol.residual:
            failures.append("trace weights are not tracial on the operators")
    gram = w.trace(np.einsum("its,jtu->ijsu", ops.conj(), ops))
    orth = nx.max_abs(gram - np.eye(w.d))
    if orth > tol.residual:
        failures.append(f"operators not trace-orthonormal (deviation {orth:.3e})")
    zb = w.z_blocks
    for a in range(w.n):
        for b in range(w.n):
            blk = zb[a, b]
            if nx.max_abs(blk - blk.conj().T) > tol.residual:
                failures.append(f"Z({a},{b}) is not Hermitian")
                continue
            lo = np.linalg.eigvalsh(0.5 * (blk + blk.conj().T))[0]
            if lo < -tol.eig_zero:
                failures.append(f"Z({a},{b}) not PSD (min eigenvalue {lo:.3e})")
    residual = nx.max_abs(w.choi_from_z() - ch.choi)
    if residual > tol.residual:
        failures.append(f"factorization residual {residual:.3e} exceeds {tol.residual:.1e}")
    return Verification(not failures, float(residual), failures)


# --------------------------------------------------------------- frames


@dataclass(frozen=True, eq=False)
class Frame:
    """Vectors ``v_s`` (rows) and weights ``p`` with ``sum_s p_s v_s v_s^T = I / d``."""

    vectors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        p = np.asarray(self.weights, dtype=float)
        if p.shape != (v.shape[0],):
            raise DimensionMismatch("one weight per frame vector is required")
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "weights", p)

    @property
    def d(self):
        return self.vectors.shape[1]

    def resolution_residual(self):
        v, p = self.vectors, self.weights
        s = (v * p[:, None]).T @ v
        return nx.max_abs(s - np.eye(self.d) / self.d)

    @classmethod
    def orthonormal(cls, basis):
        basis = np.atleast_2d(np.asarray(basis, dtype=float))
        return cls(basis, np.full(basis.shape[0], 1.0 / basis.shape[0]))


def abelian_witness_from_frame(ch, frame, tol=DEFAULT_TOL):
    """Diagonal witness with ``(A_i)[s, s] = sqrt(d) * v_s[i]`` and ``tau(E_ss) = p_s``."""
    k = real_kraus(ch, tol)
    d = k.shape[0]
    if frame.d != d:
        raise DimensionMismatch(f"frame vectors have length {frame.d}, channel has {d} Kraus operators")
    p = frame.weights
    if p.min() < -tol.entry_zero or abs(p.sum() - 1) > tol.residual:
        raise FrameNotResolution("frame weights are not a probability vector")
    res = frame.resolution_residual()
    if res > tol.residual:
        raise FrameNotResolution(f"sum p v v^T deviates from I/d by {res:.3e}")
    for s, v in enumerate(frame.vectors):
        mem = nc_membership(ch, v, tol)
        if not mem:
            raise FrameNotInCone(s, mem.entry, mem.value)
    m = len(frame.vectors)
    ops = np.zeros((d, m, m))
    idx = np.arange(m)
    ops[:, idx, idx] = np.sqrt(d) * frame.vectors.T
    return PFWitness("abelian", p, ops, k)


# --------------------------------------------------------------- verdicts


@dataclass
class Verdict:
    verdict: str  # "pf" | "not_pf" | "unknown"
    certificate: dict = field(default_factory=dict)
    witness: PFWitness | None = None
    residual: float | None = None

    def to_dict(self):
        from .io import witness_to_dict

        out = {
            "verdict": self.verdict,
            "certificate": self.certificate,
            "residual": self.residual,
        }
        if self.witness is not None:
            out["witness"] = witness_to_dict(self.witness)
        return out


def _negative_entry_certificate(ch):
    val, (row, col) = min_choi_entry(ch)
    return {"kind": "negative_choi_entry", "row": list(row), "col": list(col), "value": val}


def _orthonormal_pair_inside(rays, tol):
    """An orthonormal pair inside a planar cone that contains a rotated orthant."""
    if isinstance(rays, Degenerate):
        if rays.kind == "full":
            return np.eye(2)
        if rays.kind == "halfplane":
            t = np.arctan2(rays.normal[1], rays.normal[0])
        else:
            raise InvariantViolation(f"nonnegative Choi matrix but NC(K) is degenerate ({rays.kind})")
        angles = (t - np.pi / 4, t + np.pi / 4)
    else:
        u1, u2 = rays
        t1 = np.arctan2(u1[1], u1[0])
        span = np.mod(np.arctan2(u2[1], u2[0]) - t1, 2 * np.pi)
        if span < np.pi / 2 - 1e-6:
            raise InvariantViolation(
                f"nonnegative Choi matrix but NC(K) has opening angle {np.degrees(span):.6f} deg"
            )
        mid = t1 + span / 2
        angles = (mid - np.pi / 4, mid + np.pi / 4)
    return np.array([[np.cos(a), np.sin(a)] for a in angles])


def decide_rank2(ch, tol=DEFAULT_TOL):
    """Exact decision for Choi rank 2: PF iff the Choi matrix is entrywise nonnegative.

    Returns a :class:`Verdict`; a ``pf`` verdict carries a verified abelian
    witness built from an orthonormal pair inside NC(K), a ``not_pf`` verdict
    the location of a negative Choi entry.
    """
    if not ch.trace_preserving:
        raise NotTracePreserving(ch.tp_residual)
    canon = canonical_real_kraus(ch, tol)
    if canon.num_kraus != 2:
        raise WrongRank(f"Choi rank is {canon.num_kraus}, decide_rank2 needs 2")
    val, _ = min_choi_entry(canon)
    if val < -tol.entry_zero:
        return Verdict("not_pf", _negative_entry_certificate(canon))
    rays = extreme_rays_2d(nc_cone(canon, tol))
    pair = _orthonormal_pair_inside(rays, tol)
    witness = abelian_witness_from_frame(canon, Frame.orthonormal(pair), tol)
    check = verify_witness(ch, witness, tol)
    if not check:
        raise InvariantViolation("rank-2 witness failed verification: " + "; ".join(check.failures))
    cert = {"kind": "orthonormal_frame_in_nc", "frame": pair.tolist()}
    return Verdict("pf", cert, witness, check.residual)


# ---------------------------------------------------- CP (abelian) search


@dataclass
class CPResult:
    status: str  # "yes" | "no" | "unknown"
    kraus: np.ndarray | None = None
    witness: PFWitness | None = None
    certificate: dict = field(default_factory=dict)
    residual: float | None = None
    attempts: int = 0


def _polar(m):
    u, _, vt = np.linalg.svd(m, full_matrices=False)
    return u @ vt


def _random_orthogonal(rng, r):
    q, rr = np.linalg.qr(rng.standard_normal((r, r)))
    return q * np.sign(np.diag(rr))


_POLISH = 200
_MAX_CHUNKS = 60


def _ap_search(b, q, iterations, tol, max_chunks=_MAX_CHUNKS):
    """Alternating projections between {B Q : Q orthogonal} and the nonnegative orthant.

    Runs in chunks of ``iterations`` steps.  Convergence is often sublinear
    near the solution, so another chunk is granted while the norm of the
    negative part keeps dropping by at least 10% per chunk.
    """
    prev = np.inf
    for _ in range(max_chunks):
        for _ in range(iterations):
            x = b @ q
            if x.min() >= -tol.entry_zero:
                return q, True
            q = _polar(b.T @ np.maximum(x, 0.0))
        neg = np.linalg.norm(np.minimum(b @ q, 0.0))
        if neg > 0.9 * prev:
            break
        prev = neg
    return q, (b @ q).min() >= -tol.entry_zero


def _extreme_ray_search(j, b, tol):
    """Try ``J = sum_k c_k x_k x_k^T`` over extreme rays ``x_k`` of ``range(J) & R^N_+``.

    Every column of a nonnegative factorization lies in the polyhedral cone
    ``{B c : B c >= 0}``.  When the factors are extreme rays of that cone the
    nonnegative least-squares fit below is exact.  Returns the factor columns
    or ``None``.
    """
    r = b.shape[1]
    if r > MAX_DUAL_DIM:
        return None
    rays = PolyhedralCone(b, dim=r, tol=tol).dual_generators
    if len(rays) == 0:
        return None
    x = np.maximum(b @ rays.T, 0.0)
    x = x[:, np.linalg.norm(x, axis=0) > tol.entry_zero]
    iu = np.triu_indices(j.shape[0])
    a = np.stack([np.outer(c, c)[iu] for c in x.T], axis=1)
    coef, _ = nnls(a, j[iu], maxiter=50 * a.shape[1])
    keep = coef > tol.eig_zero
    return x[:, keep] * np.sqrt(coef[keep])


def lemma_certificate_for_choi(ch, tol=DEFAULT_TOL):
    """Run the orthogonality-graph non-CPSD certificate on the Choi Gram vectors.

    Only rows with a nonzero diagonal are used (a principal submatrix of a
    CPSD matrix is CPSD, and rescaling preserves CPSD).  Returns ``None``
    when the certificate does not apply.
    """
    from .upb import NonCPSDCertificate, non_cpsd_certificate

    j = np.real(ch.choi)
    n = ch.n
    rows = np.nonzero(np.diag(j) > tol.entry_zero)[0]
    if rows.size < 2:
        return None
    g = nx.gram_vectors(j[np.ix_(rows, rows)], tol)
    g = g / np.linalg.norm(g, axis=1)[:, None]
    cert = non_cpsd_certificate(g, tol)
    if not isinstance(cert, NonCPSDCertificate):
        return None
    out = cert.to_dict()
    out["kind"] = "orthogonality_graph_lemma"
    out["choi_rows"] = [list(divmod(int(r), n)) for r in rows]
    out["pair_choi_rows"] = [list(divmod(int(rows[cert.i]), n)), list(divmod(int(rows[cert.j]), n))]
    return out


def _certify_columns(ch, cols, j, tol):
    """Nonnegative factor columns to (kraus, witness, certificate, residual), or ``None``."""
    n = ch.n
    cols = cols[:, np.linalg.norm(cols, axis=0) > np.sqrt(tol.eig_zero)]
    if cols.shape[1] == 0 or cols.min() < 0:
        return None
    recon = nx.max_abs(cols @ cols.T - j)
    if recon > tol.residual:
        return None
    kraus = np.array([nx.unvec(c, n) for c in cols.T])
    lch = Channel.from_kraus(list(kraus), tol, allow_non_tp=True)
    witness = abelian_witness_from_frame(lch, Frame.orthonormal(np.eye(len(kraus))), tol)
    check = verify_witness(ch, witness, tol)
    if not check:
        return None
    return kraus, witness, {"kind": "nonnegative_kraus", "kraus_count": len(kraus)}, max(recon, check.residual)


def is_cp_choi(ch, tol=DEFAULT_TOL, restarts=50, iterations=500, seed=0, max_extra_width=3):
    """Semi-decision of whether the Choi matrix is completely positive.

    ``yes``: nonnegative Kraus operators were found and certified, together
    with an abelian witness.  ``no``: a negative Choi entry, or the
    orthogonality-graph certificate on a nonnegative Choi matrix.
    ``unknown``: the randomized search exhausted its budget.
    """
    j = ch.choi
    if np.iscomplexobj(j):
        canonical_real_kraus(ch, tol)  # raises ChoiNotReal
        j = np.real(j)
    n = ch.n
    if j.min() < -tol.entry_zero:
        return CPResult("no", certificate=_negative_entry_certificate(ch))
    cert = lemma_certificate_for_choi(ch, tol)
    if cert is not None and cert.get("conclusion") == "not_cpsd":
        return CPResult("no", certificate=cert)

    b0 = np.real(nx.gram_vectors(j, tol))
    r = b0.shape[1]
    cols = _extreme_ray_search(j, b0, tol)
    if cols is not None and cols.size:
        found = _certify_columns(ch, cols, j, tol)
        if found is not None:
            return CPResult("yes", *found, attempts=0)
    rng = np.random.default_rng(seed)
    widths = [r + e for e in range(0, min(max_extra_width, n * n - r) + 1)]
    attempts = 0
    for k in range(restarts + 1):
        width = widths[k % len(widths)] if k else r
        b = np.hstack([b0, np.zeros((b0.shape[0], width - r))])
        q0 = np.eye(width) if k == 0 else _random_orthogonal(rng, width)
        attempts += 1
        q, ok = _ap_search(b, q0, iterations, tol)
        if not ok:
            continue
        for _ in range(_POLISH):
            x = b @ q
            if x.min() >= 0.0:
                break
            q = _polar(b.T @ np.maximum(x, 0.0))
        # the residual check in _certify_columns bounds what clipping can change
        found = _certify_columns(ch, np.maximum(b @ q, 0.0), j, tol)
        if found is not None:
            return CPResult("yes", *found, attempts=attempts)
    return CPResult("unknown", certificate={"kind": "search_exhausted", "attempts": attempts}, attempts=attempts)


# ----------------------------------------------------- closure operations


def _require_valid(w, tol, label):
    check = verify_witness(w.channel(tol), w, tol)
    if not check:
        raise InvalidWitness(f"{label} witness is invalid: " + "; ".join(check.failures))


def compose_witnesses(w_outer, w_inner, tol=DEFAULT_TOL):
    """Witness for ``Psi o Phi`` from witnesses of ``Psi`` (outer) and ``Phi`` (inner).

    The algebra is the tensor product: operators ``A_i (x) B_l`` for Kraus
    ``S_l K_i``, trace weights ``kron(p_A, p_B)``; block ``(a, b)`` equals
    ``sum_k Z(k, b) (x) W(a, k)``.
    """
    if w_outer.n != w_inner.n:
        raise DimensionMismatch("witnesses act on different dimensions")
    _require_valid(w_outer, tol, "outer")
    _require_valid(w_inner, tol, "inner")
    kraus, ops = [], []
    for a_i, k_i in zip(w_inner.ops, w_inner.kraus):
        for b_l, s_l in zip(w_outer.ops, w_outer.kraus):
            kraus.append(s_l @ k_i)
            ops.append(np.kron(a_i, b_l))
    kind = "abelian" if w_outer.kind == w_inner.kind == "abelian" else "block"
    weights = np.kron(w_inner.weights, w_outer.weights)
    return PFWitness(kind, weights, np.array(ops), np.array(kraus))


def convex_combine_witnesses(w1, w2, lam, tol=DEFAULT_TOL):
    """Witness for ``lam * Phi + (1 - lam) * Psi`` on the direct sum of the two algebras."""
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise LambdaOutOfRange(f"lambda must lie in (0, 1), got {lam}")
    if w1.n != w2.n:
        raise DimensionMismatch("witnesses act on different dimensions")
    _require_valid(w1, tol, "first")
    _require_valid(w2, tol, "second")
    m1, m2 = w1.m, w2.m
    dtype = np.result_type(w1.ops, w2.ops)
    ops = []
    for a in w1.ops:
        c = np.zeros((m1 + m2, m1 + m2), dtype=dtype)
        c[:m1, :m1] = a / np.sqrt(lam)
        ops.append(c)
    for b in w2.ops:
        c = np.zeros((m1 + m2, m1 + m2), dtype=dtype)
        c[m1:, m1:] = b / np.sqrt(1 - lam)
        ops.append(c)
    kraus = [np.sqrt(lam) * k for k in w1.kraus] + [np.sqrt(1 - lam) * s for s in w2.kraus]
    weights = np.concatenate([lam * w1.weights, (1 - lam) * w2.weights])
    kind = "abelian" if w1.kind == w2.kind == "abelian" else "block"
    return PFWitness(kind, weights, np.array(ops), np.array(kraus))


# ------------------------------------------- spectrahedron / numerical range


def spectrahedron_contains(w, y, tol=DEFAULT_TOL):
    """Is ``sum_i y_i A_i`` positive semidefinite?"""
    y = np.asarray(y, dtype=float)
    if y.shape != (w.d,):
        raise DimensionMismatch(f"y must have length {w.d}")
    return nx.is_psd(combine(w.ops, y), tol)


def numerical_range_point(w, x, tol=DEFAULT_TOL):
    """``(x^* A_1 x, ..., x^* A_d x)`` for a unit vector ``x``."""
    x = np.asarray(x)
    if x.shape != (w.m,):
        raise DimensionMismatch(f"x must have length {w.m}")
    if abs(np.linalg.norm(x) - 1) > tol.residual:
        raise NotUnitVector(f"|x| = {np.linalg.norm(x):.12g}")
    return np.real(np.einsum("s,ist,t->i", x.conj(), w.ops, x))


# --------------------------------------------------------- full pipeline


def pf_check(ch, tol=DEFAULT_TOL, seed=0, restarts=50, iterations=500):
    """Run the necessary screens, then the exact or semi-decision procedures."""
    if not ch.trace_preserving:
        raise NotTracePreserving(ch.tp_residual)
    try:
        canon = canonical_real_kraus(ch, tol)
    except ChoiNotReal as exc:
        return Verdict(
            "not_pf",
            {"kind": "choi_not_real", "max_imag": exc.max_imag,
             "location": [list(exc.location[0]), list(exc.location[1])]},
        )
    screen = self_dual_screen(canon, tol)
    if not screen:
        cert = {
            "kind": "self_dual_screen_failed",
            "generator": list(screen.generator),
            "entry": list(screen.entry),
            "value": screen.value,
            "choi_entry": [list(screen.choi_entry[0]), list(screen.choi_entry[1])],
        }
        try:
            nc = nc_cone(canon, tol)
        except DimensionTooLarge:
            nc = None
        if nc is not None and nc.is_zero:
            cert["kind"] = "empty_nonnegativity_cone"
        return Verdict("not_pf", cert)
    if canon.num_kraus == 2:
        return decide_rank2(ch, tol)
    if canon.num_kraus == 1:
        # rank one: NC(K) is a half-line and J >= 0 means K_1 >= 0 up to sign
        k = canon.kraus[0]
        sign = 1.0 if k.sum() >= 0 else -1.0
        w = abelian_witness_from_frame(canon, Frame.orthonormal([[sign]]), tol)
        check = verify_witness(ch, w, tol)
        if not check:
            raise InvariantViolation("rank-1 witness failed: " + "; ".join(check.failures))
        return Verdict("pf", {"kind": "orthonormal_frame_in_nc", "frame": [[sign]]}, w, check.residual)
    res = is_cp_choi(ch, tol, restarts=restarts, iterations=iterations, seed=seed)
    if res.status == "yes":
        return Verdict("pf", res.certificate, res.witness, res.residual)
    if res.status == "no":
        return Verdict("not_pf", res.certificate)
    return Verdict("unknown", res.certificate)
