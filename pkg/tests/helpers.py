"""Seeded random generators shared by the test modules."""

import numpy as np
from scipy.linalg import sqrtm

from pf_channels.channel import Channel, permutation_matrix
from pf_channels.pf import Frame, abelian_witness_from_frame


def random_orthogonal(rng, r):
    q, rr = np.linalg.qr(rng.standard_normal((r, r)))
    return q * np.sign(np.diag(rr))


def normalize_kraus(mats):
    """Make ``sum K^T K = I`` by right-multiplying with ``S^{-1/2}``."""
    s = sum(k.conj().T @ k for k in mats)
    inv = np.linalg.inv(np.real_if_close(sqrtm(s)))
    return [k @ inv for k in mats]


def rotate_kraus(rng, mats):
    """Same channel, different real Kraus family."""
    o = random_orthogonal(rng, len(mats))
    return [sum(o[q, p] * mats[p] for p in range(len(mats))) for q in range(len(mats))]


def rank2_nonneg_channel(rng, n):
    """Rank-2 channel with a nonnegative Choi matrix, in a rotated Kraus basis."""
    b = rng.uniform(0.05, 0.95, n)
    while True:
        p1, p2 = permutation_matrix(rng.permutation(n)), permutation_matrix(rng.permutation(n))
        k1, k2 = p1 @ np.diag(np.sqrt(b)), p2 @ np.diag(np.sqrt(1 - b))
        ch = Channel.from_kraus(rotate_kraus(rng, [k1, k2]))
        if ch.choi_rank() == 2:
            return ch


def random_real_channel(rng, n, d):
    return Channel.from_kraus(normalize_kraus([rng.standard_normal((n, n)) for _ in range(d)]))


def random_nonneg_gauss_channel(rng, n, d):
    """Nonnegative seeds normalized by ``S^{-1/2}``: Choi sign pattern varies."""
    return Channel.from_kraus(normalize_kraus([rng.uniform(0, 1, (n, n)) ** 3 for _ in range(d)]))


def random_rank2_channel(rng, n):
    """Mixed family: roughly half PF, half not."""
    kind = rng.integers(3)
    if kind == 0:
        return rank2_nonneg_channel(rng, n)
    if kind == 1:
        return random_real_channel(rng, n, 2)
    return random_nonneg_gauss_channel(rng, n, 2)


def random_abelian_witnessed(rng, n, d=None):
    """Channel with nonnegative Kraus ``P_q diag(sqrt(b_q))`` and its abelian witness.

    Each column of ``b`` is a probability vector, so the family is trace preserving.
    """
    d = d or int(rng.integers(1, 4))
    b = rng.dirichlet(np.ones(d), size=n).T
    mats = [permutation_matrix(rng.permutation(n)) @ np.diag(np.sqrt(b[q])) for q in range(d)]
    ch = Channel.from_kraus(mats)
    w = abelian_witness_from_frame(ch, Frame.orthonormal(np.eye(d)))
    return ch, w


def random_permutation_mixture(rng, n=4):
    from pf_channels.channel import permutation_mixture

    k = int(rng.integers(2, 6))
    perms = [rng.permutation(n) for _ in range(k)]
    return permutation_mixture(perms, rng.dirichlet(np.ones(k)))
