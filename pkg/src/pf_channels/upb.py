"""Unextendible product bases, orthogonality graphs, and non-CPSD certificates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from . import numerics as nx
from .errors import (
    DimensionMismatch,
    InvariantViolation,
    NotUnitVector,
    TooManyVectors,
    WrongSize,
    ZeroVector,
)
from .numerics import DEFAULT_TOL

MAX_PARTITION_N = 20


def _as_vectors(vectors):
    v = np.atleast_2d(np.asarray(vectors))
    if not np.iscomplexobj(v):
        v = v.astype(float)
    return v


def _normalized(vectors, tol):
    v = _as_vectors(vectors)
    norms = np.linalg.norm(v, axis=1)
    bad = np.nonzero(norms <= tol.entry_zero)[0]
    if bad.size:
        raise ZeroVector(f"vector {int(bad[0])} is zero")
    return v / norms[:, None]


@dataclass(frozen=True, eq=False)
class UPBCandidate:
    """Paired families ``u_i in C^d1`` and ``v_i in C^d2`` (rows), all unit vectors."""

    us: np.ndarray
    vs: np.ndarray
    tol: nx.Tolerance = DEFAULT_TOL

    def __post_init__(self):
        us, vs = _as_vectors(self.us), _as_vectors(self.vs)
        if us.shape[0] != vs.shape[0]:
            raise DimensionMismatch(f"{us.shape[0]} u-vectors but {vs.shape[0]} v-vectors")
        for name, fam in (("us", us), ("vs", vs)):
            norms = np.linalg.norm(fam, axis=1)
            if np.any(norms <= self.tol.entry_zero):
                raise ZeroVector(f"{name} contains a zero vector")
            worst = float(np.max(np.abs(norms - 1)))
            if worst > self.tol.residual:
                raise NotUnitVector(f"{name} has a vector with norm off by {worst:.3e}")
        object.__setattr__(self, "us", us)
        object.__setattr__(self, "vs", vs)

    @classmethod
    def normalized(cls, us, vs, tol=DEFAULT_TOL):
        return cls(_normalized(us, tol), _normalized(vs, tol), tol)

    @property
    def n(self):
        return self.us.shape[0]

    @property
    def d1(self):
        return self.us.shape[1]

    @property
    def d2(self):
        return self.vs.shape[1]

    def product_orthogonality(self, tol=None):
        """Largest ``|<u_i,u_j><v_i,v_j>|`` over ``i != j`` and where it occurs."""
        tol = tol or self.tol
        prod = np.abs(nx.gram_matrix(self.us) * nx.gram_matrix(self.vs))
        np.fill_diagonal(prod, 0)
        loc = np.unravel_index(int(np.argmax(prod)), prod.shape) if self.n > 1 else (0, 0)
        worst = float(prod[loc]) if self.n > 1 else 0.0
        return worst <= tol.entry_zero, (int(loc[0]), int(loc[1])), worst


@dataclass(frozen=True)
class OrthGraph:
    """Orthogonality graph: edge ``(i, j)`` (with ``i < j``) iff ``<u_i, u_j> = 0``."""

    n: int
    edges: frozenset

    def neighbors(self, i):
        return sorted({b for a, b in self.edges if a == i} | {a for a, b in self.edges if b == i})

    def closed_neighborhood(self, i):
        return sorted(set(self.neighbors(i)) | {i})

    def degree(self, i):
        return len(self.neighbors(i))

    def min_degree(self):
        return min((self.degree(i) for i in range(self.n)), default=0)

    def adjacency(self):
        a = np.zeros((self.n, self.n), dtype=np.uint8)
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1
        return a

    def complement(self):
        pairs = itertools.combinations(range(self.n), 2)
        return OrthGraph(self.n, frozenset(p for p in pairs if p not in self.edges))

    def complement_consistent(self, partner, tol=DEFAULT_TOL):
        """Every non-edge must be an orthogonal pair of the partner family."""
        other = orth_graph(partner, tol)
        return self.complement().edges <= other.edges

    @classmethod
    def cycle(cls, n, step=1):
        return cls(n, frozenset(tuple(sorted((i, (i + step) % n))) for i in range(n)))


def orth_graph(vectors, tol=DEFAULT_TOL):
    """Graph of vanishing inner products (vectors are normalized first)."""
    u = _normalized(vectors, tol)
    g = np.abs(nx.gram_matrix(u))
    n = len(u)
    edges = frozenset((i, j) for i in range(n) for j in range(i + 1, n) if g[i, j] <= tol.entry_zero)
    return OrthGraph(n, edges)


# ------------------------------------------------------------ unextendibility


@dataclass(frozen=True)
class Unextendible:
    partitions_checked: int

    def __bool__(self):
        return True


@dataclass(frozen=True, eq=False)
class Extendible:
    """A product vector ``x (x) y`` orthogonal to every ``u_i (x) v_i``.

    ``subset`` is the partition side ``S`` with ``x`` orthogonal to
    ``{u_i : i in S}`` and ``y`` orthogonal to ``{v_j : j not in S}``.
    """

    subset: tuple
    x: np.ndarray
    y: np.ndarray
    overlap: float
    near_degenerate: bool = False

    def __bool__(self):
        return False


def is_unextendible(upb, tol=DEFAULT_TOL):
    """Exact decision by enumerating all ``2^n`` partitions (lowest bitmask wins)."""
    n = upb.n
    if n > MAX_PARTITION_N:
        raise TooManyVectors(f"partition enumeration is limited to n <= {MAX_PARTITION_N}, got {n}")
    us = np.ascontiguousarray(upb.us, dtype=complex)
    vs = np.ascontiguousarray(upb.vs, dtype=complex)
    mask = kernels.first_extending_partition(us, vs, tol.eig_zero)
    if mask < 0:
        return Unextendible(1 << n)
    s_in = [i for i in range(n) if mask >> i & 1]
    s_out = [i for i in range(n) if not mask >> i & 1]
    x = nx.null_vector(us[s_in].conj(), tol) if s_in else _first_unit(upb.d1)
    y = nx.null_vector(vs[s_out].conj(), tol) if s_out else _first_unit(upb.d2)
    if x is None or y is None:
        raise InvariantViolation(f"partition {s_in} reported deficient but no orthogonal vector found")
    overlap = float(np.max(np.abs((us.conj() @ x) * (vs.conj() @ y))))
    # a subset counts as deficient when its residual is below sqrt(eig_zero),
    # so overlaps up to that scale are a tolerance effect, not a bug
    if overlap > 10 * np.sqrt(tol.eig_zero):
        raise InvariantViolation(f"extension vector overlaps the basis ({overlap:.3e})")
    return Extendible(tuple(s_in), x, y, overlap, overlap > tol.residual)


def _first_unit(d):
    e = np.zeros(d, dtype=complex)
    e[0] = 1
    return e


# ----------------------------------------------------------- span condition


@dataclass
class SpanResult:
    ok: bool
    family: str | None = None
    subset: tuple | None = None
    min_kept_eig: float = np.inf
    warnings: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def span_condition(upb, tol=DEFAULT_TOL):
    """Every subset of size ``n - d + 1`` of each family must span C^d."""
    if upb.d1 != upb.d2:
        raise DimensionMismatch("span condition needs d1 == d2")
    d, n = upb.d1, upb.n
    size = n - d + 1
    smallest = np.inf
    warnings = []
    for name, fam in (("u", upb.us), ("v", upb.vs)):
        for subset in itertools.combinations(range(n), max(size, 0)):
            sub = fam[list(subset)]
            r = nx.vector_rank(sub, tol)
            if r < d:
                return SpanResult(False, name, subset, smallest, warnings)
            smallest = min(smallest, nx.smallest_kept_eig(sub, tol))
    if smallest < 10 * tol.eig_zero:
        warnings.append(f"near-degenerate subset: smallest kept Gram eigenvalue {smallest:.3e}")
    return SpanResult(True, min_kept_eig=smallest, warnings=warnings)


# ---------------------------------------------------------- connectivity


def vertex_connectivity_check(g, k):
    """Is ``g`` k-vertex-connected (more than k vertices, connected after removing any k-1)?"""
    if k <= 0:
        return True
    if g.n <= k:
        return False
    return kernels.find_separator(g.adjacency(), k - 1) is None


# ------------------------------------------------------- non-CPSD certificate


@dataclass(frozen=True, eq=False)
class NonCPSDCertificate:
    """Pair ``(i, j)`` for which the closed neighbourhoods give two bases.

    ``coeffs_i`` expands ``u_i`` over ``N[j]`` and ``coeffs_j`` expands ``u_j``
    over ``N[i]``.  Any PSD Gram representation would force ``A_i^2`` and
    ``A_j^2`` to be nonzero multiples of each other, contradicting linear
    independence.  ``conclusion`` is ``not_cpsd`` when the Gram matrix is
    doubly nonnegative and ``not_dnn`` otherwise.
    """

    i: int
    j: int
    closed_i: tuple
    closed_j: tuple
    coeffs_i: np.ndarray
    coeffs_j: np.ndarray
    gram_ij: complex
    dim: int
    conclusion: str

    def to_dict(self):
        return {
            "pair": [self.i, self.j],
            "closed_neighborhood_i": list(self.closed_i),
            "closed_neighborhood_j": list(self.closed_j),
            "coeffs_i_over_Nj": _plain(self.coeffs_i),
            "coeffs_j_over_Ni": _plain(self.coeffs_j),
            "gram_ij": _plain(np.asarray(self.gram_ij)),
            "dim": self.dim,
            "conclusion": self.conclusion,
        }


@dataclass(frozen=True)
class NotApplicable:
    reason: str

    def to_dict(self):
        return {"applicable": False, "reason": self.reason}


def _plain(a):
    a = np.asarray(a)
    if np.iscomplexobj(a) and nx.max_abs(a.imag) > 0:
        return np.stack([a.real, a.imag], axis=-1).tolist()
    return np.real(a).tolist()


def is_dnn(gram, tol=DEFAULT_TOL):
    g = np.asarray(gram)
    if not nx.is_real(g, tol):
        return False
    g = np.real(g)
    return bool(g.min() >= -tol.entry_zero and nx.is_psd(g, tol))


def non_cpsd_certificate(vectors, tol=DEFAULT_TOL):
    """Search pairs ``(i, j)`` satisfying the closed-neighbourhood basis hypotheses.

    Hypotheses checked by rank computations, with ``d`` the dimension of the
    span of the family: ``N[i]`` and ``N[j]`` each have ``d`` linearly
    independent members, ``u_i`` and ``u_j`` are independent, and
    ``<u_i, u_j> != 0`` (for an orthogonal pair both expansion coefficients
    vanish and no contradiction follows).
    """
    u = _normalized(vectors, tol)
    n = len(u)
    d = nx.vector_rank(u, tol)
    g = orth_graph(u, tol)
    gram = nx.gram_matrix(u)
    closed = [g.closed_neighborhood(i) for i in range(n)]
    basis_ok = [len(c) == d and nx.vector_rank(u[c], tol) == d for c in closed]
    for i in range(n):
        if not basis_ok[i]:
            continue
        for j in range(i + 1, n):
            if not basis_ok[j] or abs(gram[i, j]) <= tol.entry_zero:
                continue
            if nx.vector_rank(u[[i, j]], tol) < 2:
                continue
            ci = _expand(u[i], u[closed[j]])
            cj = _expand(u[j], u[closed[i]])
            conclusion = "not_cpsd" if is_dnn(gram, tol) else "not_dnn"
            return NonCPSDCertificate(
                i, j, tuple(closed[i]), tuple(closed[j]), ci, cj, complex(gram[i, j]), d, conclusion
            )
    return NotApplicable("no pair satisfies the closed-neighbourhood basis hypotheses")


def _expand(target, basis_rows):
    coeffs, *_ = np.linalg.lstsq(basis_rows.T, target, rcond=None)
    return nx.realify(coeffs)


# ---------------------------------------------------------- minimal UPB chain


@dataclass
class LemmaReport:
    checks: list = field(default_factory=list)
    certificate: NonCPSDCertificate | NotApplicable | None = None
    stopped_at: str | None = None
    warnings: list = field(default_factory=list)

    def add(self, name, passed, **detail):
        self.checks.append({"check": name, "passed": bool(passed), **detail})
        return passed

    @property
    def passed(self):
        return self.stopped_at is None and all(c["passed"] for c in self.checks)

    def to_dict(self):
        cert = self.certificate.to_dict() if self.certificate is not None else None
        return {
            "checks": self.checks,
            "certificate": cert,
            "stopped_at": self.stopped_at,
            "all_passed": self.passed,
            "warnings": self.warnings,
        }


def minimal_upb_gram_check(upb, tol=DEFAULT_TOL):
    """Run the lemma chain for a UPB candidate of minimal size ``n = 2d - 1``.

    Orthogonality, exact unextendibility, minimum degree and connectivity
    ``n - d`` of the orthogonality graph, the span condition, existence of an
    orthogonal pair, then the non-CPSD certificate on the ``u`` family.
    """
    if upb.d1 != upb.d2:
        raise WrongSize(f"local dimensions differ ({upb.d1} vs {upb.d2})")
    d, n = upb.d1, upb.n
    if n != 2 * d - 1:
        raise WrongSize(f"minimal UPB size is 2d-1 = {2 * d - 1}, got n = {n}")
    rep = LemmaReport()
    ok, pair, worst = upb.product_orthogonality(tol)
    rep.add("product_orthogonality", ok, worst_pair=list(pair), worst_overlap=worst)
    ext = is_unextendible(upb, tol)
    rep.add(
        "unextendible",
        bool(ext),
        partitions_checked=1 << n,
        extension_subset=None if ext else list(ext.subset),
        near_degenerate=False if ext else ext.near_degenerate,
    )
    g = orth_graph(upb.us, tol)
    rep.add("min_degree_at_least_n_minus_d", g.min_degree() >= n - d, min_degree=g.min_degree(), required=n - d)
    rep.add("vertex_connectivity_n_minus_d", vertex_connectivity_check(g, n - d), k=n - d)
    rep.add(
        "complement_graph_matches_partner",
        g.complement_consistent(upb.vs, tol),
        edges=sorted(list(e) for e in g.edges),
    )
    span = span_condition(upb, tol)
    rep.warnings.extend(span.warnings)
    if not rep.add(
        "span_condition",
        span.ok,
        violating_family=span.family,
        violating_subset=None if span.subset is None else list(span.subset),
    ):
        rep.stopped_at = "span_condition"
        return rep
    if not rep.add("orthogonal_pair_exists", bool(g.edges)):
        rep.stopped_at = "orthogonal_pair_exists"
        return rep
    cert = non_cpsd_certificate(upb.us, tol)
    rep.certificate = cert
    rep.add("non_cpsd_certificate", isinstance(cert, NonCPSDCertificate))
    return rep
