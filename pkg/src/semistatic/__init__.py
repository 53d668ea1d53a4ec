"""Exact and Monte Carlo laboratory for non-closedness of semi-static outcome spaces."""

from .blocks import BlockModel, BlockParams, build_block, canonical_decomposition, verify_block
from .continuous import ContinuousBlockParams, hitting_prob, mc_verify, sample_outcome, simulate_path
from .decompose import (
    decomposition_dual_value,
    max_u_correlation,
    max_v_correlation,
    min_l1_decomposition,
)
from .lp import LinearProgram, LPSolution, solve, verify_certificate
from .market import (
    PredictableStrategy,
    PriceProcess,
    StaticClaim,
    evaluate_static,
    stochastic_integral,
    terminal_partition,
    verify_martingale,
)
from .pasting import (
    PastedModel,
    PastingSchedule,
    convergence_table,
    default_schedule,
    divergence_check,
    g_partial_decomposition,
    paste,
)
from .probspace import (
    FiniteFilteredSpace,
    RandomVariable,
    cond_expectation,
    event_probability,
    make_space,
    moment,
)

__version__ = "0.1.0"

__all__ = [
    "BlockModel",
    "BlockParams",
    "build_block",
    "canonical_decomposition",
    "verify_block",
    "ContinuousBlockParams",
    "hitting_prob",
    "mc_verify",
    "sample_outcome",
    "simulate_path",
    "decomposition_dual_value",
    "max_u_correlation",
    "max_v_correlation",
    "min_l1_decomposition",
    "LinearProgram",
    "LPSolution",
    "solve",
    "verify_certificate",
    "PredictableStrategy",
    "PriceProcess",
    "StaticClaim",
    "evaluate_static",
    "stochastic_integral",
    "terminal_partition",
    "verify_martingale",
    "PastedModel",
    "PastingSchedule",
    "convergence_table",
    "default_schedule",
    "divergence_check",
    "g_partial_decomposition",
    "paste",
    "FiniteFilteredSpace",
    "RandomVariable",
    "cond_expectation",
    "event_probability",
    "make_space",
    "moment",
]
