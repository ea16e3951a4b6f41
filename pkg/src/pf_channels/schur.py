"""Schur multiplier channels ``X -> C o X`` and the pentagon counterexample."""

from __future__ import annotations

from functools import cached_property

import numpy as np

from . import numerics as nx
from .channel import Channel
from .cones import GramFamily, cones_equal
from .errors import InvalidWitness, NotCorrelation, NotHermitian, NotPSD
from .numerics import DEFAULT_TOL
from .pf import PFWitness, Verification, pf_check
from .upb import NonCPSDCertificate, OrthGraph, is_dnn, non_cpsd_certificate, orth_graph


class CorrelationMatrix:
    """Real symmetric PSD matrix with unit diagonal.

    Parameters
    ----------
    entries : array_like
        The ``n x n`` matrix.
    tol : Tolerance, optional
        Cutoffs for symmetry, diagonal and eigenvalue checks.

    Raises
    ------
    NotCorrelation
        If any of the defining properties fails.
    """

    def __init__(self, entries, tol=DEFAULT_TOL):
        c = nx.as_matrix(entries)
        if c.shape[0] != c.shape[1]:
            raise NotCorrelation(f"correlation matrix must be square, got {c.shape}")
        if not nx.is_real(c, tol):
            raise NotCorrelation("correlation matrix must be real")
        c = np.real(c).astype(float)
        asym = nx.max_abs(c - c.T)
        if asym > tol.residual:
            raise NotCorrelation(f"not symmetric (max asymmetry {asym:.3e})")
        diag = nx.max_abs(np.diag(c) - 1)
        if diag > tol.residual:
            raise NotCorrelation(f"diagonal is not all ones (max deviation {diag:.3e})")
        c = (c + c.T) / 2
        try:
            psd = nx.is_psd(c, tol)
        except (NotHermitian, NotPSD) as exc:  # pragma: no cover - symmetric by now
            raise NotCorrelation(str(exc)) from exc
        if not psd:
            raise NotCorrelation(f"not positive semidefinite (min eigenvalue {nx.min_eig(c, tol):.3e})")
        self.entries = c
        self.entries.flags.writeable = False
        self.tol = tol

    @property
    def n(self):
        return self.entries.shape[0]

    @cached_property
    def gram(self):
        """Unit vectors ``w_i`` (rows) with ``<w_i, w_j> = c_ij``."""
        g = np.real(nx.gram_vectors(self.entries, self.tol))
        return g / np.linalg.norm(g, axis=1)[:, None]

    @property
    def rank(self):
        return self.gram.shape[1]

    def __repr__(self):
        return f"CorrelationMatrix(n={self.n}, rank={self.rank})"


def _corr(c, tol):
    return c if isinstance(c, CorrelationMatrix) else CorrelationMatrix(c, tol)


def schur_channel(c, tol=DEFAULT_TOL):
    """Channel ``X -> C o X`` with Kraus operators ``diag(column q of the Gram factor)``."""
    c = _corr(c, tol)
    kraus = [np.diag(col) for col in c.gram.T]
    return Channel.from_kraus(kraus, tol)


def schur_gram_family(c, tol=DEFAULT_TOL):
    c = _corr(c, tol)
    return GramFamily(c.gram, "correlation")


def schur_nc_cone(c, tol=DEFAULT_TOL):
    """NC of the diagonal Kraus family: the dual of ``cone{w_i}``."""
    return schur_gram_family(c, tol).cone(tol).dual()


def schur_form_witness(zs, weights=None, kind="block"):
    """Witness whose Kraus operators are ``E_kk`` and operators are ``Z_k``."""
    zs = np.asarray(zs)
    n, m = zs.shape[0], zs.shape[1]
    if weights is None:
        weights = np.full(m, 1.0 / m)
    kraus = np.array([nx.matrix_unit(n, k, k) for k in range(n)])
    return PFWitness(kind, np.asarray(weights, dtype=float), zs, kraus)


def schur_pf_witness_check(c, w, tol=DEFAULT_TOL):
    """Check a witness for ``S_C`` in Schur form.

    ``Z`` must be block diagonal, each diagonal block ``Z_k`` PSD, and
    ``tau(Z_i Z_j) == c_ij``.  Returns a :class:`Verification` (truthy on success).
    """
    c = _corr(c, tol)
    if w.n != c.n:
        raise InvalidWitness(f"witness acts on dimension {w.n}, matrix has n = {c.n}")
    zb = w.z_blocks
    failures = []
    off = zb.copy()
    idx = np.arange(c.n)
    off[idx, idx] = 0
    off_norm = nx.max_abs(off)
    if off_norm > tol.residual:
        failures.append(f"Z is not block diagonal (max off-diagonal block entry {off_norm:.3e})")
        return Verification(False, off_norm, failures)
    blocks = zb[idx, idx]
    for k, b in enumerate(blocks):
        herm = nx.max_abs(b - b.conj().T)
        if herm > tol.residual:
            failures.append(f"Z_{k} is not Hermitian")
        elif not nx.is_psd((b + b.conj().T) / 2, tol):
            failures.append(f"Z_{k} is not PSD")
    gram = np.real(np.einsum("ist,jts,s->ij", blocks, blocks, w.weights))
    residual = nx.max_abs(gram - c.entries)
    if residual > tol.residual:
        failures.append(f"tau(Z_i Z_j) differs from C by {residual:.3e}")
    return Verification(not failures, residual, failures)


def schur_check(c, tol=DEFAULT_TOL, seed=0, restarts=50, iterations=500):
    """Full PF pipeline on ``S_C``, with the correlation-level certificate attached."""
    c = _corr(c, tol)
    verdict = pf_check(schur_channel(c, tol), tol, seed=seed, restarts=restarts, iterations=iterations)
    cert = non_cpsd_certificate(c.gram, tol)
    if isinstance(cert, NonCPSDCertificate):
        verdict.certificate = dict(verdict.certificate, correlation_certificate=cert.to_dict())
    return verdict


# ------------------------------------------------------------- pentagon


def pentagon_vectors():
    """The five unit vectors in R^3 whose Gram matrix is ``W``."""
    s2, s3 = np.sqrt(2.0), np.sqrt(3.0)
    return np.array(
        [
            [1, 1, 1] / s3,
            [0, 1, 1] / s2,
            [-1, 0, 1] / s2,
            [0, -1, 1] / s2,
            [1, -1, 1] / s3,
        ]
    )


def pentagon_matrix():
    """``W`` written out entrywise (independently of :func:`pentagon_vectors`)."""
    a = 2.0 / np.sqrt(6.0)
    w = np.eye(5)
    for (i, j), v in {(0, 1): a, (0, 4): 1 / 3, (1, 2): 0.5, (2, 3): 0.5, (3, 4): a}.items():
        w[i, j] = w[j, i] = v
    return w


PENTAGON_EDGES = frozenset({(0, 2), (0, 3), (1, 3), (1, 4), (2, 4)})


def pentagon_counterexample_replay(tol=DEFAULT_TOL):
    """Recompute every claim about the pentagon matrix ``W``.

    Returns a dict of named checks, each with ``passed`` and the measured
    quantity, plus the non-CPSD certificate and the channel verdict.
    """
    v = pentagon_vectors()
    w_vec = v @ v.T
    w = pentagon_matrix()
    checks = {}

    def add(name, passed, **detail):
        checks[name] = {"passed": bool(passed), **detail}

    norms = np.linalg.norm(v, axis=1)
    add("unit_vectors", nx.max_abs(norms - 1) <= 1e-12, max_deviation=nx.max_abs(norms - 1))
    gap = nx.max_abs(w_vec - w)
    add("gram_matches_entries", gap <= 1e-12, max_deviation=gap)
    c = CorrelationMatrix(w, tol)
    add("psd", nx.is_psd(w, tol), min_eig=nx.min_eig(w, tol))
    add("rank_3", nx.rank(w, tol) == 3, rank=nx.rank(w, tol))
    add("entrywise_nonnegative", w.min() >= 0, min_entry=float(w.min()))
    add("doubly_nonnegative", is_dnn(w, tol))
    g = orth_graph(v, tol)
    add("orthogonality_graph_is_c5", g.edges == PENTAGON_EDGES, edges=sorted(list(e) for e in g.edges))
    add("graph_is_5_cycle", g == OrthGraph.cycle(5, 2), min_degree=g.min_degree())
    cert = non_cpsd_certificate(v, tol)
    ok = isinstance(cert, NonCPSDCertificate) and cert.conclusion == "not_cpsd"
    add("non_cpsd_certificate", ok)
    if ok:
        a = 2.0 / np.sqrt(6.0)
        # the pair (0, 1): u_0 over N[1] = {1, 3, 4}, u_1 over N[0] = {0, 2, 3}
        ci = dict(zip(cert.closed_j, cert.coeffs_i))
        cj = dict(zip(cert.closed_i, cert.coeffs_j))
        add(
            "certificate_coefficients",
            (cert.i, cert.j) == (0, 1) and abs(ci[1] - a) <= 1e-12 and abs(cj[0] - a) <= 1e-12,
            pair=[cert.i, cert.j],
            coeff_on_u1=float(ci.get(1, np.nan)),
            coeff_on_u0=float(cj.get(0, np.nan)),
        )
    ch = schur_channel(c, tol)
    add("schur_choi_nonnegative", ch.choi.min() >= -tol.entry_zero, min_entry=float(np.min(ch.choi)))
    verdict = pf_check(ch, tol)
    add("channel_not_pf", verdict.verdict == "not_pf", certificate_kind=verdict.certificate.get("kind"))
    gram_cone = schur_gram_family(c, tol).cone(tol)
    facts = {
        # reported, not asserted: whether cone{w_i} equals NC of the Schur channel
        "gram_cone_self_dual": cones_equal(gram_cone, gram_cone.dual(), tol),
        "nc_cone_generators": len(schur_nc_cone(c, tol).generators),
    }
    return {
        "matrix": w.tolist(),
        "checks": checks,
        "facts": facts,
        "certificate": cert.to_dict(),
        "verdict": "W is DNN, not CPSD-representable by the orthogonality-graph certificate",
        "all_passed": all(chk["passed"] for chk in checks.values()),
    }
