"""Command-line front end: ``pf-channels <command> [options]``.

Exit status is 0 when the analysis completed (whatever the verdict), 1 for
bad usage or bad input, and 2 when an internal consistency check failed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from . import numerics as nx
from .channel import canonical_real_kraus
from .cones import Degenerate, extreme_rays_2d, nc_cone, self_dual_screen
from .errors import InvariantViolation, PFError
from .io import (
    InputError,
    channel_to_dict,
    dumps,
    load_channel,
    load_choi,
    load_correlation,
    load_upb,
    load_witness,
    matrix_to_json,
    witness_to_dict,
)
from .pf import compose_witnesses, convex_combine_witnesses, pf_check, verify_witness
from .schur import pentagon_counterexample_replay, schur_check
from .upb import is_unextendible, minimal_upb_gram_check, span_condition

COMMANDS = (
    "choi",
    "kraus",
    "nc-cone",
    "pf-check",
    "schur-check",
    "upb-check",
    "pentagon",
    "verify-witness",
    "compose",
    "convex",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--channel", metavar="FILE", help="channel JSON (Kraus or Choi)")
    common.add_argument("--choi", metavar="FILE", help="Choi matrix CSV (needs --n) or JSON")
    common.add_argument("--n", type=int, help="input dimension for --choi")
    common.add_argument("--correlation", metavar="FILE", help="correlation matrix CSV or JSON")
    common.add_argument("--upb", metavar="FILE", help="UPB candidate JSON")
    common.add_argument(
        "--witness", metavar="FILE", action="append", default=[],
        help="witness JSON; repeat for compose/convex (application order)",
    )
    common.add_argument("--lambda", dest="lam", type=float, help="mixing weight for convex")
    common.add_argument("--tol", type=float, help="base tolerance (overrides PF_CHANNELS_TOL)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=50, help="restarts for the CP search")
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = _Parser(prog="pf-channels", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


# ----------------------------------------------------------------- inputs


def _tolerance(args):
    if args.tol is not None:
        if not args.tol > 0:
            raise UsageError("--tol must be positive")
        return nx.Tolerance.scaled(args.tol)
    return nx.Tolerance.from_env()


def _channel(args, tol):
    if args.channel and args.choi:
        raise UsageError("give either --channel or --choi, not both")
    if args.channel:
        return load_channel(args.channel, tol)
    if args.choi:
        return load_choi(args.choi, args.n, tol)
    raise UsageError("this command needs --channel FILE or --choi FILE --n INT")


def _need(value, flag):
    if not value:
        raise UsageError(f"this command needs {flag}")
    return value


# --------------------------------------------------------------- commands


def cmd_choi(args, tol):
    ch = _channel(args, tol)
    j = ch.choi
    val, (row, col) = _min_entry(j, ch.n)
    return {
        "n": ch.n,
        "choi": matrix_to_json(j),
        "choi_rank": ch.choi_rank(tol),
        "min_entry": {"value": val, "row": row, "col": col},
        "trace_preserving_residual": ch.tp_residual,
    }


def _min_entry(j, n):
    r = np.real(j)
    flat = int(np.argmin(r))
    row, col = divmod(flat, r.shape[1])
    return float(r.flat[flat]), [list(divmod(row, n)), list(divmod(col, n))]


def cmd_kraus(args, tol):
    ch = _channel(args, tol)
    try:
        canon = canonical_real_kraus(ch, tol)
        real = True
    except PFError:
        canon, real = ch, False
    return {"real_canonical": real, **channel_to_dict(canon)}


def cmd_nc_cone(args, tol):
    ch = _channel(args, tol)
    canon = canonical_real_kraus(ch, tol)
    nc = nc_cone(canon, tol)
    out = {
        "kraus_count": canon.num_kraus,
        "cone": nc.to_dict(),
        "is_zero": nc.is_zero,
        "screen_passed": bool(self_dual_screen(canon, tol)),
    }
    if nc.dim == 2:
        rays = extreme_rays_2d(nc)
        if isinstance(rays, Degenerate):
            out["planar"] = {"degenerate": rays.kind}
        else:
            out["planar"] = {"extreme_rays": [rays[0].tolist(), rays[1].tolist()]}
    return out


def cmd_pf_check(args, tol):
    ch = _channel(args, tol)
    return pf_check(ch, tol, seed=args.seed, restarts=args.budget).to_dict()


def cmd_schur_check(args, tol):
    c = load_correlation(_need(args.correlation, "--correlation FILE"))
    return schur_check(c, tol, seed=args.seed, restarts=args.budget).to_dict()


def cmd_upb_check(args, tol):
    upb = load_upb(_need(args.upb, "--upb FILE"), tol)
    if upb.d1 == upb.d2 and upb.n == 2 * upb.d1 - 1:
        return {"minimal": True, **minimal_upb_gram_check(upb, tol).to_dict()}
    ok, pair, worst = upb.product_orthogonality(tol)
    ext = is_unextendible(upb, tol)
    out = {
        "minimal": False,
        "product_orthogonality": {"passed": ok, "worst_pair": list(pair), "worst_overlap": worst},
        "unextendible": bool(ext),
    }
    if not ext:
        out["extension"] = {"subset": list(ext.subset), "x": matrix_to_json(ext.x), "y": matrix_to_json(ext.y)}
    if upb.d1 == upb.d2:
        span = span_condition(upb, tol)
        out["span_condition"] = {"passed": span.ok, "family": span.family,
                                 "subset": None if span.subset is None else list(span.subset)}
    return out


def cmd_pentagon(args, tol):
    return pentagon_counterexample_replay(tol)


def cmd_verify_witness(args, tol):
    paths = _need(args.witness, "--witness FILE")
    if len(paths) != 1:
        raise UsageError("verify-witness takes exactly one --witness")
    w = load_witness(paths[0])
    ch = _channel(args, tol) if (args.channel or args.choi) else w.channel(tol)
    return verify_witness(ch, w, tol).to_dict()


def _two_witnesses(args):
    paths = _need(args.witness, "--witness FILE (twice)")
    if len(paths) != 2:
        raise UsageError("this command takes exactly two --witness files")
    return load_witness(paths[0]), load_witness(paths[1])


def cmd_compose(args, tol):
    first, second = _two_witnesses(args)
    w = compose_witnesses(second, first, tol)
    return {"witness": witness_to_dict(w), **verify_witness(w.channel(tol), w, tol).to_dict()}


def cmd_convex(args, tol):
    if args.lam is None:
        raise UsageError("convex needs --lambda")
    w1, w2 = _two_witnesses(args)
    w = convex_combine_witnesses(w1, w2, args.lam, tol)
    return {"witness": witness_to_dict(w), **verify_witness(w.channel(tol), w, tol).to_dict()}


HANDLERS = {
    "choi": cmd_choi,
    "kraus": cmd_kraus,
    "nc-cone": cmd_nc_cone,
    "pf-check": cmd_pf_check,
    "schur-check": cmd_schur_check,
    "upb-check": cmd_upb_check,
    "pentagon": cmd_pentagon,
    "verify-witness": cmd_verify_witness,
    "compose": cmd_compose,
    "convex": cmd_convex,
}


# ----------------------------------------------------------------- output


def _describe_certificate(cert):
    kind = cert.get("kind")
    if kind == "negative_choi_entry":
        return f"negative Choi entry {cert['value']:.6g} at row {tuple(cert['row'])}, column {tuple(cert['col'])}"
    if kind == "empty_nonnegativity_cone":
        return "the nonnegativity cone NC(K) is {0}, so no frame of nonnegative combinations exists"
    if kind == "self_dual_screen_failed":
        return (
            f"NC(K) does not contain its dual: Choi entry {tuple(map(tuple, cert['choi_entry']))} "
            f"equals {cert['value']:.6g} < 0"
        )
    if kind == "choi_not_real":
        return f"Choi matrix is not real (max imaginary part {cert['max_imag']:.3e})"
    if kind == "orthogonality_graph_lemma":
        return (
            f"orthogonality-graph certificate at pair {tuple(cert['pair'])}: the closed neighbourhoods "
            "are bases, so the Gram matrix is not CPSD"
        )
    if kind == "orthonormal_frame_in_nc":
        return "orthonormal frame inside NC(K) gives an abelian witness"
    if kind == "nonnegative_kraus":
        return "entrywise nonnegative Kraus operators found (completely positive Choi matrix)"
    if kind == "search_exhausted":
        return f"search exhausted after {cert['attempts']} attempts; no certificate either way"
    return str(kind)


def render_text(command, report):
    res = report["result"]
    lines = [f"pf-channels {report['version']}  {command}  seed={report['seed']}"]
    if "verdict" in res and isinstance(res.get("certificate"), dict) and command != "pentagon":
        lines.append(f"verdict: {res['verdict']}")
        lines.append(f"reason: {_describe_certificate(res['certificate'])}")
        if res.get("residual") is not None:
            lines.append(f"witness residual: {res['residual']:.3e}")
    elif command == "pentagon":
        for name, chk in res["checks"].items():
            lines.append(f"[{'ok' if chk['passed'] else 'FAIL'}] {name}")
        lines.append(f"verdict: {res['verdict']}")
    elif "checks" in res:
        for chk in res["checks"]:
            lines.append(f"[{'ok' if chk['passed'] else 'FAIL'}] {chk['check']}")
        if res.get("stopped_at"):
            lines.append(f"stopped at: {res['stopped_at']}")
    elif "verified" in res:
        lines.append(f"verified: {res['verified']}  residual: {res['residual']:.3e}")
        lines.extend(f"  - {f}" for f in res["failures"])
    else:
        for key, val in res.items():
            if isinstance(val, (list, dict)):
                continue
            lines.append(f"{key}: {val}")
    return "\n".join(lines) + "\n"


def run(argv=None, stdout=None):
    """Parse ``argv``, run the command, write the report, return the exit status."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        tol = _tolerance(args)
        result = HANDLERS[args.command](args, tol)
    except (UsageError, InputError) as exc:
        sys.stderr.write(f"pf-channels: error: {exc}\n")
        return 1
    except InvariantViolation as exc:
        sys.stderr.write(f"pf-channels: internal invariant violated: {exc}\n")
        return 2
    except PFError as exc:
        src = args.channel or args.choi or args.correlation or args.upb or ",".join(args.witness) or "input"
        sys.stderr.write(f"pf-channels: error: {src}: {type(exc).__name__}: {exc}\n")
        return 1
    report = {
        "tool": "pf-channels",
        "version": __version__,
        "command": args.command,
        "tolerances": tol.as_dict(),
        "seed": args.seed,
        "result": result,
    }
    stdout.write(dumps(report) if args.format == "json" else render_text(args.command, report))
    return 0


def main(argv=None):
    raise SystemExit(run(argv))


if __name__ == "__main__":
    main()
