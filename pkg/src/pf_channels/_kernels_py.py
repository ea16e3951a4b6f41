"""Pure-Python reference implementations of the combinatorial kernels.

These mirror ``_kernels.pyx`` line for line and are used whenever the
compiled extension is unavailable (or ``PF_CHANNELS_PURE=1``).
"""

import itertools


def _deficient(vecs, idx, d, tol):
    """True when the vectors ``vecs[i] for i in idx`` fail to span C^d.

    Modified Gram-Schmidt with one re-orthogonalization pass; a vector joins
    the basis when its residual squared norm exceeds ``tol``.
    """
    basis = []
    for i in idx:
        r = list(vecs[i])
        for _ in range(2):
            for b in basis:
                c = sum(b[t].conjugate() * r[t] for t in range(d))
                for t in range(d):
                    r[t] -= c * b[t]
        nrm2 = sum((x.real * x.real + x.imag * x.imag) for x in r)
        if nrm2 > tol:
            s = nrm2**0.5
            basis.append([x / s for x in r])
            if len(basis) == d:
                return False
    return len(basis) < d


def first_extending_partition(us, vs, tol):
    """Smallest bitmask ``S`` such that ``{u_i : i in S}`` and ``{v_j : j not in S}`` both fail to span.

    Returns -1 when every partition has a spanning side (the product family
    is unextendible).
    """
    n = len(us)
    d1 = len(us[0]) if n else 0
    d2 = len(vs[0]) if n else 0
    us = [[complex(x) for x in row] for row in us]
    vs = [[complex(x) for x in row] for row in vs]
    for mask in range(1 << n):
        s_in = [i for i in range(n) if mask >> i & 1]
        if not _deficient(us, s_in, d1, tol):
            continue
        s_out = [i for i in range(n) if not mask >> i & 1]
        if _deficient(vs, s_out, d2, tol):
            return mask
    return -1


def _connected_without(adj, removed):
    n = len(adj)
    alive = [i for i in range(n) if i not in removed]
    if len(alive) <= 1:
        return True
    seen = {alive[0]}
    stack = [alive[0]]
    while stack:
        a = stack.pop()
        for b in range(n):
            if adj[a][b] and b not in removed and b not in seen:
                seen.add(b)
                stack.append(b)
    return len(seen) == len(alive)


def find_separator(adj, size):
    """First (lexicographic) vertex subset of ``size`` whose removal disconnects the graph."""
    n = len(adj)
    adj = [[bool(x) for x in row] for row in adj]
    for combo in itertools.combinations(range(n), size):
        if not _connected_without(adj, set(combo)):
            return list(combo)
    return None
