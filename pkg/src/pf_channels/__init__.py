"""Positive factorizability of quantum channels.

Decide, certify, and construct witnesses for positive factorizability of
quantum channels: nonnegativity cones of Kraus families, the exact rank-2
decision, completely positive Choi matrices, Schur multiplier channels, and
orthogonality-graph certificates built from unextendible product bases.
"""

__version__ = "0.1.0"

from .channel import Channel, depolarizing, identity_channel, permutation_mixture, werner_holevo
from .cones import PolyhedralCone, contains_self_dual_test, extreme_rays_2d, nc_cone, self_dual_screen
from .errors import InvariantViolation, PFError
from .kernels import BACKEND
from .numerics import DEFAULT_TOL, Tolerance
from .pf import (
    Frame,
    PFWitness,
    Verdict,
    abelian_witness_from_frame,
    compose_witnesses,
    convex_combine_witnesses,
    decide_rank2,
    is_cp_choi,
    pf_check,
    verify_witness,
)
from .schur import CorrelationMatrix, pentagon_counterexample_replay, schur_channel, schur_pf_witness_check
from .upb import (
    UPBCandidate,
    is_unextendible,
    minimal_upb_gram_check,
    non_cpsd_certificate,
    orth_graph,
    span_condition,
    vertex_connectivity_check,
)

__all__ = [
    "BACKEND",
    "Channel",
    "CorrelationMatrix",
    "DEFAULT_TOL",
    "Frame",
    "InvariantViolation",
    "PFError",
    "PFWitness",
    "PolyhedralCone",
    "Tolerance",
    "UPBCandidate",
    "Verdict",
    "abelian_witness_from_frame",
    "compose_witnesses",
    "contains_self_dual_test",
    "convex_combine_witnesses",
    "decide_rank2",
    "depolarizing",
    "extreme_rays_2d",
    "identity_channel",
    "is_cp_choi",
    "is_unextendible",
    "minimal_upb_gram_check",
    "nc_cone",
    "non_cpsd_certificate",
    "orth_graph",
    "pentagon_counterexample_replay",
    "permutation_mixture",
    "pf_check",
    "schur_channel",
    "schur_pf_witness_check",
    "self_dual_screen",
    "span_condition",
    "vertex_connectivity_check",
    "verify_witness",
    "werner_holevo",
]
