"""Compare the compiled and pure-Python combinatorial kernels.

Usage: python3 benchmarks/bench_kernels.py [--sizes 10 12 14] [--repeat 3]
"""

import argparse
import time

import numpy as np

from pf_channels import kernels


def _best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_partitions(sizes, repeat, rng):
    rows = []
    for n in sizes:
        # generic vectors in C^3: no partition is deficient, so all 2^n masks are scanned
        us = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
        vs = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
        us /= np.linalg.norm(us, axis=1)[:, None]
        vs /= np.linalg.norm(vs, axis=1)[:, None]
        row = {"kernel": "first_extending_partition", "n": n}
        for name, mod in (("python", kernels.python_backend), ("cython", kernels.compiled_backend)):
            if mod is None:
                continue
            row[name], row[f"{name}_result"] = _best_of(lambda: mod.first_extending_partition(us, vs, 1e-9), repeat)
        rows.append(row)
    return rows


def bench_separators(sizes, repeat):
    rows = []
    for n in sizes:
        # circulant graph with connections to the 3 nearest neighbours on each side: 6-connected
        adj = np.zeros((n, n), dtype=np.uint8)
        for i in range(n):
            for s in (1, 2, 3):
                adj[i, (i + s) % n] = adj[(i + s) % n, i] = 1
        row = {"kernel": "find_separator", "n": n}
        for name, mod in (("python", kernels.python_backend), ("cython", kernels.compiled_backend)):
            if mod is None:
                continue
            row[name], row[f"{name}_result"] = _best_of(lambda: mod.find_separator(adj, 5), repeat)
        rows.append(row)
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[8, 10, 12, 14])
    parser.add_argument("--graph-sizes", type=int, nargs="+", default=[12, 16, 20])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    if kernels.compiled_backend is None:
        print("compiled extension not available; timing the Python backend only")
    rows = bench_partitions(args.sizes, args.repeat, rng) + bench_separators(args.graph_sizes, args.repeat)
    print(f"{'kernel':<27}{'n':>4}{'python [s]':>13}{'cython [s]':>13}{'speedup':>10}  agree")
    for r in rows:
        py, cy = r.get("python"), r.get("cython")
        speed = f"{py / cy:9.1f}x" if cy else "      n/a"
        agree = r.get("python_result") == r.get("cython_result") if cy else "n/a"
        cy_s = f"{cy:13.4f}" if cy else f"{'n/a':>13}"
        print(f"{r['kernel']:<27}{r['n']:>4}{py:13.4f}{cy_s}{speed}  {agree}")


if __name__ == "__main__":
    main()
