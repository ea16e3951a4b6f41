"""File formats and deterministic JSON output.

Matrices are nested lists, row-major.  A complex entry is a pair
``[re, im]``; a plain number is real.  Every float is written with 17
significant digits so that reports round-trip exactly and are
byte-identical across runs.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .channel import Channel
from .cones import PolyhedralCone
from .numerics import DEFAULT_TOL, realify
from .pf import PFWitness
from .upb import UPBCandidate


class InputError(ValueError):
    """A file is missing, malformed, or has an offending field."""

    def __init__(self, source, msg):
        super().__init__(f"{source}: {msg}")
        self.source = source


# ------------------------------------------------------------- encoding


def _entry(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex entry must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValueError(f"matrix entry must be a number or [re, im], got {x!r}")
    return float(x)


def parse_matrix(rows, field="matrix"):
    """Nested row lists (entries numbers or ``[re, im]``) to a 2-D array."""
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValueError(f"{field} must be a non-empty list of rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{field} has ragged rows")
    try:
        vals = [[_entry(x) for x in r] for r in rows]
    except ValueError as exc:
        raise ValueError(f"{field}: {exc}") from None
    a = np.array(vals, dtype=complex)
    if np.all(a.imag == 0):
        return a.real.copy()
    return a


def parse_vectors(rows, field="vectors"):
    return parse_matrix(rows, field)


def matrix_to_json(m):
    """Array to nested lists; complex arrays with nonzero imaginary part use ``[re, im]``."""
    a = np.asarray(m)
    if np.iscomplexobj(a) and np.any(a.imag != 0):
        return np.stack([a.real, a.imag], axis=-1).tolist()
    return np.real(a).astype(float).tolist()


def _fmt_float(x):
    if not math.isfinite(x):
        return "null"
    if x == int(x) and abs(x) < 1e16:
        return f"{int(x)}.0"
    return format(x, ".17g")


def dumps(obj, indent=2):
    """Deterministic JSON with 17-significant-digit floats (keys keep insertion order)."""
    out = []

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None or isinstance(o, (bool, np.bool_)):
            out.append(json.dumps(None if o is None else bool(o)))
        elif isinstance(o, (int, np.integer)):
            out.append(str(int(o)))
        elif isinstance(o, (float, np.floating)):
            out.append(_fmt_float(float(o)))
        elif isinstance(o, (complex, np.complexfloating)):
            enc([o.real, o.imag], level)
        elif isinstance(o, str):
            out.append(json.dumps(o))
        elif isinstance(o, np.ndarray):
            enc(matrix_to_json(o) if o.ndim else o.item(), level)
        elif isinstance(o, dict):
            if not o:
                out.append("{}")
                return
            out.append("{\n")
            for k, (key, val) in enumerate(o.items()):
                out.append(pad + json.dumps(str(key)) + ": ")
                enc(val, level + 1)
                out.append(",\n" if k < len(o) - 1 else "\n")
            out.append(end + "}")
        elif isinstance(o, (list, tuple)):
            if not o:
                out.append("[]")
                return
            if all(isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool) for x in o):
                out.append("[")
                for k, x in enumerate(o):
                    enc(x, level)
                    if k < len(o) - 1:
                        out.append(", ")
                out.append("]")
                return
            out.append("[\n")
            for k, x in enumerate(o):
                out.append(pad)
                enc(x, level + 1)
                out.append(",\n" if k < len(o) - 1 else "\n")
            out.append(end + "]")
        else:
            raise TypeError(f"cannot serialize {type(o).__name__}")

    enc(obj, 0)
    return "".join(out) + "\n"


# ------------------------------------------------------------- reading


def read_json(path):
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(path, f"cannot read file ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(path, f"invalid JSON at line {exc.lineno}: {exc.msg}") from None


def read_csv_matrix(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(path, f"cannot read file ({exc.strerror})") from None
    try:
        return np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise InputError(path, f"non-numeric entry ({exc})") from None


def _field(data, key, source):
    if not isinstance(data, dict) or key not in data:
        raise InputError(source, f"missing field '{key}'")
    return data[key]


def channel_from_dict(data, tol=DEFAULT_TOL, source="<channel>"):
    """Channel from ``{"n", "kraus"}`` or ``{"n", "choi"}``."""
    if isinstance(data, dict) and "kraus" in data:
        raw = data["kraus"]
        if not isinstance(raw, list) or not raw:
            raise InputError(source, "field 'kraus' must be a non-empty list of matrices")
        try:
            mats = [parse_matrix(k, f"kraus[{i}]") for i, k in enumerate(raw)]
        except ValueError as exc:
            raise InputError(source, str(exc)) from None
        if "n" in data and any(k.shape != (data["n"], data["n"]) for k in mats):
            raise InputError(source, f"field 'kraus' has matrices that are not {data['n']}x{data['n']}")
        return Channel.from_kraus(mats, tol)
    if isinstance(data, dict) and "choi" in data:
        n = _field(data, "n", source)
        try:
            j = parse_matrix(data["choi"], "choi")
        except ValueError as exc:
            raise InputError(source, str(exc)) from None
        return Channel.from_choi(j, int(n), tol)
    raise InputError(source, "expected a 'kraus' or 'choi' field")


def channel_to_dict(ch):
    return {"n": ch.n, "kraus": [matrix_to_json(k) for k in ch.kraus]}


def load_channel(path, tol=DEFAULT_TOL):
    return channel_from_dict(read_json(path), tol, str(path))


def load_choi(path, n, tol=DEFAULT_TOL):
    """Choi matrix from CSV (real) or JSON with a ``choi`` key."""
    if str(path).endswith(".json"):
        data = read_json(path)
        if isinstance(data, dict) and "n" not in data and n is not None:
            data = dict(data, n=n)
        return channel_from_dict(data, tol, str(path))
    if n is None:
        raise InputError(path, "a CSV Choi matrix needs --n")
    j = read_csv_matrix(path)
    if j.shape != (n * n, n * n):
        raise InputError(path, f"Choi matrix must be {n * n}x{n * n}, got {j.shape[0]}x{j.shape[1] if j.ndim == 2 else 0}")
    return Channel.from_choi(j, n, tol)


def load_correlation(path):
    if str(path).endswith(".json"):
        data = read_json(path)
        rows = data.get("matrix", data.get("correlation")) if isinstance(data, dict) else data
        try:
            return parse_matrix(rows, "correlation")
        except ValueError as exc:
            raise InputError(path, str(exc)) from None
    return read_csv_matrix(path)


def upb_from_dict(data, tol=DEFAULT_TOL, source="<upb>"):
    try:
        us = parse_vectors(_field(data, "us", source), "us")
        vs = parse_vectors(_field(data, "vs", source), "vs")
    except ValueError as exc:
        raise InputError(source, str(exc)) from None
    for key, fam in (("d1", us), ("d2", vs)):
        if key in data and fam.shape[1] != data[key]:
            raise InputError(source, f"field '{key}' = {data[key]} but vectors have length {fam.shape[1]}")
    return UPBCandidate(us, vs, tol)


def upb_to_dict(upb):
    return {"d1": upb.d1, "d2": upb.d2, "us": matrix_to_json(upb.us), "vs": matrix_to_json(upb.vs)}


def load_upb(path, tol=DEFAULT_TOL):
    return upb_from_dict(read_json(path), tol, str(path))


def cone_to_dict(c):
    return c.to_dict()


def cone_from_dict(data, tol=DEFAULT_TOL):
    return PolyhedralCone.from_dict(data, tol)


# ------------------------------------------------------------- witnesses


def witness_to_dict(w):
    return {
        "kind": w.kind,
        "m": w.m,
        "weights": [float(x) for x in w.weights],
        "ops": [matrix_to_json(a) for a in w.ops],
        "n": w.n,
        "kraus": [matrix_to_json(k) for k in w.kraus],
    }


def witness_from_dict(data, source="<witness>"):
    # accept a full CLI report or a verdict as well as a bare witness
    if isinstance(data, dict) and isinstance(data.get("result"), dict):
        data = data["result"]
    if isinstance(data, dict) and "witness" in data and "ops" not in data:
        data = data["witness"]
    elif isinstance(data, dict) and "verdict" in data:
        raise InputError(source, f"report has verdict '{data['verdict']}' and carries no witness")
    try:
        kind = _field(data, "kind", source)
        weights = np.asarray(_field(data, "weights", source), dtype=float)
        ops = np.array([parse_matrix(a, f"ops[{i}]") for i, a in enumerate(_field(data, "ops", source))])
        kraus = np.array([parse_matrix(k, f"kraus[{i}]") for i, k in enumerate(_field(data, "kraus", source))])
    except (ValueError, TypeError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(source, str(exc)) from None
    if "m" in data and ops.shape[1] != data["m"]:
        raise InputError(source, f"field 'm' = {data['m']} but operators are {ops.shape[1]}x{ops.shape[1]}")
    if "n" in data and kraus.shape[1] != data["n"]:
        raise InputError(source, f"field 'n' = {data['n']} but Kraus operators are {kraus.shape[1]}x{kraus.shape[1]}")
    return PFWitness(kind, weights, realify(ops) if np.iscomplexobj(ops) else ops, kraus)


def load_witness(path):
    return witness_from_dict(read_json(path), str(path))
