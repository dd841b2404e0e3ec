"""Sequential binary hypothesis testing over unreliable broadcast channels.

Nodes decide in a fixed order from a private signal plus a window of
earlier, channel-corrupted decisions.  The package computes the resulting
error probabilities three ways (exact window recursion, deterministic rate
recursion, Monte Carlo) and fits the observed decay laws.
"""

from __future__ import annotations

from .analysis import (
    FitResult,
    SeriesResult,
    default_grid,
    fit_power,
    fit_power_of_log,
    fit_reciprocal_log,
    read_series_csv,
    series_from_csv,
    theta_sandwich,
    write_series_csv,
)
from .belief_model import BeliefModel, cdf, density, private_likelihood_ratio, sample, tail_constants
from .channels import (
    ERASED,
    Channel,
    ErasureSchedule,
    FlipSchedule,
    erasure_level,
    erasure_levels,
    flip_for_informativeness,
    flip_prob,
    flip_probs,
    informativeness,
    target_informativeness,
    transmit,
)
from .exact_dp import (
    MAX_CAPACITY,
    MartingaleReport,
    StageErrors,
    WindowDistribution,
    evolve_window,
    exact_error_series,
    initial_window,
    martingale_check,
    window_alphabet,
)
from .montecarlo import (
    ChainEstimate,
    ExperimentConfig,
    HerdingReport,
    HerdingRow,
    TrialRecord,
    config_hash,
    estimate_chain_success,
    estimate_error_series,
    herding_stats,
    run_trial,
)
from .presets import Overrides, PRESET_INFO, UnknownPresetError, list_presets, run_preset
from .recursions import (
    LimitClassification,
    RecursionSpec,
    SandwichResult,
    StepSizeError,
    informativeness_delta,
    iterate_recursion,
    lemma3_sandwich,
    lemma4_classify,
    rate_recursion,
    type1_lower_bound,
)
from .strategy import (
    MAP_RULE,
    PublicBeliefState,
    ThresholdRule,
    advance_public_belief,
    belief_cutoff_from_public,
    clamp_belief,
    conditional_decision_probs,
    decide,
    likelihood_threshold,
    map_belief_cutoff,
    tandem_posterior,
    update_public_belief,
)
from .topology import (
    MemorySchedule,
    backward_search_depth,
    chain_success_probability,
    memory_size,
)

__version__ = "0.1.0"

__all__ = [
    "BeliefModel",
    "ChainEstimate",
    "Channel",
    "ERASED",
    "ErasureSchedule",
    "ExperimentConfig",
    "FitResult",
    "FlipSchedule",
    "HerdingReport",
    "HerdingRow",
    "LimitClassification",
    "MAP_RULE",
    "MAX_CAPACITY",
    "MartingaleReport",
    "MemorySchedule",
    "Overrides",
    "PRESET_INFO",
    "PublicBeliefState",
    "RecursionSpec",
    "SandwichResult",
    "SeriesResult",
    "StageErrors",
    "StepSizeError",
    "ThresholdRule",
    "TrialRecord",
    "UnknownPresetError",
    "WindowDistribution",
    "advance_public_belief",
    "backward_search_depth",
    "belief_cutoff_from_public",
    "cdf",
    "chain_success_probability",
    "clamp_belief",
    "conditional_decision_probs",
    "config_hash",
    "decide",
    "default_grid",
    "density",
    "erasure_level",
    "erasure_levels",
    "estimate_chain_success",
    "estimate_error_series",
    "evolve_window",
    "exact_error_series",
    "fit_power",
    "fit_power_of_log",
    "fit_reciprocal_log",
    "flip_for_informativeness",
    "flip_prob",
    "flip_probs",
    "herding_stats",
    "informativeness",
    "informativeness_delta",
    "initial_window",
    "iterate_recursion",
    "lemma3_sandwich",
    "lemma4_classify",
    "likelihood_threshold",
    "list_presets",
    "map_belief_cutoff",
    "martingale_check",
    "memory_size",
    "private_likelihood_ratio",
    "rate_recursion",
    "read_series_csv",
    "run_preset",
    "run_trial",
    "sample",
    "series_from_csv",
    "tail_constants",
    "tandem_posterior",
    "target_informativeness",
    "theta_sandwich",
    "transmit",
    "type1_lower_bound",
    "update_public_belief",
    "window_alphabet",
]
