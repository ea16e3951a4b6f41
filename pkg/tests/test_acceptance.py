"""Acceptance criteria, each with its tolerance and runtime budget.

Every test records a one-line PASS/FAIL summary; the lines are written to the
terminal at the end of the module (and printed when run as a script).
"""

import io
import json
import time

import numpy as np
import pytest

import helpers as H
from pf_channels import cli
from pf_channels import numerics as nx
from pf_channels.channel import Channel, depolarizing, werner_holevo
from pf_channels.cones import contains_self_dual_test, nc_membership
from pf_channels.io import channel_to_dict, dumps
from pf_channels.pf import compose_witnesses, convex_combine_witnesses, decide_rank2, is_cp_choi, pf_check, verify_witness
from pf_channels.schur import PENTAGON_EDGES, pentagon_matrix, pentagon_vectors, schur_check
from pf_channels.upb import (
    NonCPSDCertificate,
    UPBCandidate,
    is_unextendible,
    minimal_upb_gram_check,
    non_cpsd_certificate,
    orth_graph,
    span_condition,
    vertex_connectivity_check,
    OrthGraph,
)

RESULTS = {}


def record(number, title, ok, elapsed, budget, detail=""):
    ok = bool(ok) and (budget is None or elapsed < budget)
    limit = f" (limit {budget:g} s)" if budget is not None else ""
    RESULTS[number] = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {elapsed:.2f} s{limit} {detail}".rstrip()
    return ok


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    lines = [RESULTS[k] for k in sorted(RESULTS)]
    if reporter is not None:
        reporter.write_line("")
        for line in lines:
            reporter.write_line(line)
    else:  # pragma: no cover
        print("\n".join(lines))


def _cli(argv):
    out = io.StringIO()
    code = cli.run(argv, stdout=out)
    return code, json.loads(out.getvalue())


def test_criterion_1_werner_holevo(tmp_path):
    t0 = time.perf_counter()
    ch = werner_holevo()
    path = tmp_path / "wh.json"
    path.write_text(dumps(channel_to_dict(ch)))
    code, rep = _cli(["pf-check", "--channel", str(path)])
    verdict_ok = code == 0 and rep["result"]["verdict"] == "not_pf"
    cone_ok = rep["result"]["certificate"]["kind"] == "empty_nonnegativity_cone"
    signed = np.vstack([np.eye(3), -np.eye(3)])
    rng = np.random.default_rng(2024)
    rand = rng.standard_normal((1000, 3))
    rand /= np.linalg.norm(rand, axis=1)[:, None]
    rejected = sum(not nc_membership(ch, v) for v in np.vstack([signed, rand]))
    elapsed = time.perf_counter() - t0
    ok = record(1, "Werner-Holevo not PF, NC(K) = {0}", verdict_ok and cone_ok and rejected == 1006, elapsed, 1.0,
                f"rejected {rejected}/1006")
    assert ok, RESULTS[1]


def test_criterion_2_pentagon(tmp_path):
    t0 = time.perf_counter()
    v = pentagon_vectors()
    a = 2 / np.sqrt(6)
    expect = np.array(
        [[1, a, 0, 0, 1 / 3], [a, 1, 0.5, 0, 0], [0, 0.5, 1, 0.5, 0], [0, 0, 0.5, 1, a], [1 / 3, 0, 0, a, 1]]
    )
    w = v @ v.T
    entries_ok = nx.max_abs(w - expect) <= 1e-12 and nx.max_abs(pentagon_matrix() - expect) <= 1e-12
    psd_ok = nx.is_psd(w) and nx.rank(w) == 3
    graph_ok = orth_graph(v).edges == PENTAGON_EDGES
    cert = non_cpsd_certificate(v)
    cert_ok = (
        isinstance(cert, NonCPSDCertificate)
        and nx.vector_rank(v[list(cert.closed_i)]) == 3
        and nx.vector_rank(v[list(cert.closed_j)]) == 3
    )
    path = tmp_path / "w.csv"
    np.savetxt(path, pentagon_matrix(), delimiter=",")
    code, rep = _cli(["schur-check", "--correlation", str(path)])
    schur_ok = code == 0 and rep["result"]["verdict"] == "not_pf"
    elapsed = time.perf_counter() - t0
    ok = record(2, "pentagon W is DNN but S_W is not PF", entries_ok and psd_ok and graph_ok and cert_ok and schur_ok,
                elapsed, 1.0, f"certificate pair {(cert.i, cert.j) if cert_ok else None}")
    assert ok, RESULTS[2]


def test_criterion_3_rank2_exactness():
    t0 = time.perf_counter()
    mismatches, bad_witness, pf_count = 0, 0, 0
    for seed in range(200):
        rng = np.random.default_rng(10_000 + seed)
        ch = H.random_rank2_channel(rng, 2 + seed % 2)
        assert ch.choi_rank() == 2
        v = decide_rank2(ch)
        sign = ch.choi.min() >= -1e-9
        mismatches += (v.verdict == "pf") != sign
        if v.verdict == "pf":
            pf_count += 1
            bad_witness += not (verify_witness(ch, v.witness).residual <= 1e-8)
    elapsed = time.perf_counter() - t0
    ok = record(3, "rank-2 decision equals Choi sign test", mismatches == 0 and bad_witness == 0, elapsed, 30.0,
                f"{pf_count} pf / {200 - pf_count} not_pf, {mismatches} mismatches")
    assert ok, RESULTS[3]


def test_criterion_4_abelian_certification():
    t0 = time.perf_counter()
    chans = [depolarizing(2), depolarizing(3)]
    chans += [H.random_permutation_mixture(np.random.default_rng(500 + s)) for s in range(20)]
    good = 0
    worst = 0.0
    for ch in chans:
        r = is_cp_choi(ch)
        if r.status != "yes" or r.kraus.min() < 0:
            continue
        recon = nx.max_abs(sum(np.outer(nx.vec(k), nx.vec(k)) for k in r.kraus) - ch.choi)
        worst = max(worst, recon)
        good += recon <= 1e-8
    elapsed = time.perf_counter() - t0
    ok = record(4, "CP Choi certified by nonnegative Kraus", good == len(chans), elapsed, 60.0,
                f"{good}/{len(chans)} certified, worst residual {worst:.1e}")
    assert ok, RESULTS[4]


def test_criterion_5_closure():
    t0 = time.perf_counter()
    failures = 0
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(700 + seed)
        n = 2 + seed % 2
        c1, w1 = H.random_abelian_witnessed(rng, n)
        c2, w2 = H.random_abelian_witnessed(rng, n)
        res = verify_witness(c2.compose(c1), compose_witnesses(w2, w1))
        worst = max(worst, res.residual)
        failures += not (res and res.residual <= 1e-8)
        for lam in (0.3, 0.5, 0.9):
            res = verify_witness(c1.mix(c2, lam), convex_combine_witnesses(w1, w2, lam))
            worst = max(worst, res.residual)
            failures += not (res and res.residual <= 1e-8)
    elapsed = time.perf_counter() - t0
    ok = record(5, "composition and convex combination witnesses", failures == 0, elapsed, 30.0,
                f"{failures} failures, worst residual {worst:.1e}")
    assert ok, RESULTS[5]


def _screen_channel(rng, k):
    n = int(rng.integers(2, 4))
    kind = k % 5
    if kind == 0:
        return H.random_real_channel(rng, n, int(rng.integers(1, 5)))
    if kind == 1:
        return H.random_nonneg_gauss_channel(rng, n, int(rng.integers(1, 5)))
    if kind == 2:
        return H.random_abelian_witnessed(rng, n)[0]
    if kind == 3:
        return H.rank2_nonneg_channel(rng, n)
    # complex Kraus operators with a real Choi matrix (per-operator phases)
    ch = H.random_real_channel(rng, n, int(rng.integers(1, 4)))
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, ch.num_kraus))
    return Channel.from_kraus([p * k for p, k in zip(phases, ch.kraus)])


def test_criterion_6_self_dual_screen():
    t0 = time.perf_counter()
    disagreements, nonneg = 0, 0
    for seed in range(300):
        rng = np.random.default_rng(900 + seed)
        ch = _screen_channel(rng, seed)
        sign = bool(np.real(ch.choi).min() >= -1e-9)
        nonneg += sign
        disagreements += contains_self_dual_test(ch) != sign
    elapsed = time.perf_counter() - t0
    ok = record(6, "self-dual screen agrees with Choi nonnegativity", disagreements == 0, elapsed, None,
                f"{disagreements} disagreements, {nonneg} nonnegative / {300 - nonneg} not")
    assert ok, RESULTS[6]


def test_criterion_7_upb_suite():
    t0 = time.perf_counter()
    v = pentagon_vectors()
    upb = UPBCandidate(v, v[[(2 * i) % 5 for i in range(5)]])
    ortho = upb.product_orthogonality()[0]
    unext = bool(is_unextendible(upb))
    span = span_condition(upb).ok
    conn = vertex_connectivity_check(OrthGraph.cycle(5), 2)
    rep = minimal_upb_gram_check(upb)
    chain_ok = rep.passed and isinstance(rep.certificate, NonCPSDCertificate)
    elapsed = time.perf_counter() - t0
    ok = record(7, "pentagon UPB lemma chain", ortho and unext and span and conn and chain_ok, elapsed, 5.0,
                f"{len(rep.checks)} checks passed" if chain_ok else "")
    assert ok, RESULTS[7]


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(pytest.main([__file__, "-q"]))
