"""Penalized stochastic multi-armed bandits: simulation and analysis.

Policies trade cumulative reward against per-arm fairness targets; a
known-means prophet benchmark makes the penalized regret of any run
computable in closed form.
"""

from .distributions import RngStream, derive_stream, sample, sample_many
from .engine import BatchResult, Trajectory, run, run_batch
from .errors import (
    BadDistribution,
    CountMismatch,
    DivisionByZeroCount,
    FairnessInfeasible,
    FileUnreadable,
    HorizonTooShort,
    NoArmsSurvive,
    PenBanditsError,
    SchemaMismatch,
    TiedSums,
    TooFewArms,
    TooLarge,
    TooManyMalformed,
    UnknownSetting,
)
from .harness import ExperimentConfig, preset, run_sweep
from .ingest import RatingRecord, build_instance, parse_ratings
from .model import (
    ArmClassification,
    ArmSpec,
    BanditInstance,
    Bernoulli,
    Beta,
    Categorical,
    Deterministic,
    Gaussian,
    classify_arms,
    instance_from_config,
    instance_to_config,
    validate_instance,
)
from .oracle import (
    GapDependentBound,
    ProphetAllocation,
    RegretReport,
    brute_force_l_star,
    gap_dependent_bound,
    gap_independent_bound,
    l_star,
    maximal_deficit_coefficients,
    penalized_regret,
    prophet_allocation,
)
from .plots import emit_plot
from .policies import (
    POLICY_NAMES,
    PolicyDecision,
    PolicyState,
    ht_ucb_index,
    init_state,
    make_policy,
    observe,
    select_arm,
    soft_ucb_index,
)

__version__ = "0.1.0"

__all__ = [
    "ArmClassification",
    "ArmSpec",
    "BadDistribution",
    "BanditInstance",
    "BatchResult",
    "Bernoulli",
    "Beta",
    "Categorical",
    "CountMismatch",
    "Deterministic",
    "DivisionByZeroCount",
    "ExperimentConfig",
    "FairnessInfeasible",
    "FileUnreadable",
    "GapDependentBound",
    "Gaussian",
    "HorizonTooShort",
    "NoArmsSurvive",
    "POLICY_NAMES",
    "PenBanditsError",
    "PolicyDecision",
    "PolicyState",
    "ProphetAllocation",
    "RatingRecord",
    "RegretReport",
    "RngStream",
    "SchemaMismatch",
    "TiedSums",
    "TooFewArms",
    "TooLarge",
    "TooManyMalformed",
    "Trajectory",
    "UnknownSetting",
    "brute_force_l_star",
    "build_instance",
    "classify_arms",
    "derive_stream",
    "emit_plot",
    "gap_dependent_bound",
    "gap_independent_bound",
    "ht_ucb_index",
    "init_state",
    "instance_from_config",
    "instance_to_config",
    "l_star",
    "make_policy",
    "maximal_deficit_coefficients",
    "observe",
    "parse_ratings",
    "penalized_regret",
    "preset",
    "prophet_allocation",
    "run",
    "run_batch",
    "run_sweep",
    "sample",
    "sample_many",
    "select_arm",
    "soft_ucb_index",
    "validate_instance",
]
