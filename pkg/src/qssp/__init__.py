"""Measured qubit sources: classically controlled qubit emitters, the
classical processes their measurements induce, belief-state presentations
of those processes, and randomness/structure metrics over them."""

from .errors import (
    AlphabetMismatch,
    BlockTooLarge,
    ConvergenceFailure,
    IdenticalStates,
    InputError,
    InsufficientLinearRegime,
    NegativeEntry,
    NoisyObjectiveWarning,
    NonStochasticRow,
    NotUnifilar,
    QsspError,
    ReducibleChain,
    SampledKindUnsupported,
    UnknownSymbol,
    ValidationError,
    ZeroProbabilitySymbol,
)
from .hmc import (
    LabeledHMC,
    UnifilarityReport,
    ValidationResult,
    block_entropy,
    ensure_valid,
    entropy_rate_unifilar,
    minimize_unifilar,
    sample_sequence,
    state_entropy,
    stationary_distribution,
    unifilarity,
    validate,
    word_probability,
)
from .quantum import (
    Measurement,
    QubitPureState,
    outcome_probability,
    projective_basis,
    qubit_from_bloch,
    trace_distance,
    usd_povm,
)
from .measured import (
    CCQS,
    MeasuredHMC,
    PreservationReport,
    derive_measured_hmc,
    memoryless_basis,
    unifilarity_preservation_check,
)
from .msp import (
    EXACT_FINITE,
    SAMPLED,
    TRUNCATED_COUNTABLE,
    BlackwellSample,
    MixedStatePresentation,
    MspMetrics,
    build_msp,
    evolve_mixed_state,
    msp_metrics,
    sample_blackwell,
    truncation_series,
)
from .metrics import (
    DimensionFit,
    MetricsReport,
    blackwell_entropy_rate,
    coarse_grained_entropy,
    dimension_from_points,
    process_metrics,
    statistical_complexity_dimension,
)
from .sweep import (
    EstimatorConfig,
    OptimizeResult,
    SweepResult,
    SweepRow,
    UsdStudyRow,
    optimize_measurement,
    sweep_grid,
    sweep_theta,
    usd_alpha_study,
)
from .modelio import (
    bundled_model_path,
    canonical_json,
    dumps_model,
    load_bundled,
    load_model,
    loads_model,
    model_digest,
    save_model,
)
from . import examples

__version__ = "0.1.0"

__all__ = [
    "AlphabetMismatch",
    "BlackwellSample",
    "BlockTooLarge",
    "CCQS",
    "ConvergenceFailure",
    "DimensionFit",
    "EstimatorConfig",
    "EXACT_FINITE",
    "IdenticalStates",
    "InputError",
    "InsufficientLinearRegime",
    "LabeledHMC",
    "Measurement",
    "MeasuredHMC",
    "MetricsReport",
    "MixedStatePresentation",
    "MspMetrics",
    "NegativeEntry",
    "NoisyObjectiveWarning",
    "NonStochasticRow",
    "NotUnifilar",
    "OptimizeResult",
    "PreservationReport",
    "QsspError",
    "QubitPureState",
    "ReducibleChain",
    "SAMPLED",
    "SampledKindUnsupported",
    "SweepResult",
    "SweepRow",
    "TRUNCATED_COUNTABLE",
    "UnifilarityReport",
    "UnknownSymbol",
    "UsdStudyRow",
    "ValidationError",
    "ValidationResult",
    "ZeroProbabilitySymbol",
    "block_entropy",
    "blackwell_entropy_rate",
    "build_msp",
    "bundled_model_path",
    "canonical_json",
    "coarse_grained_entropy",
    "derive_measured_hmc",
    "dimension_from_points",
    "dumps_model",
    "ensure_valid",
    "entropy_rate_unifilar",
    "evolve_mixed_state",
    "examples",
    "load_bundled",
    "load_model",
    "loads_model",
    "memoryless_basis",
    "minimize_unifilar",
    "model_digest",
    "msp_metrics",
    "optimize_measurement",
    "outcome_probability",
    "process_metrics",
    "projective_basis",
    "qubit_from_bloch",
    "sample_blackwell",
    "sample_sequence",
    "save_model",
    "state_entropy",
    "stationary_distribution",
    "statistical_complexity_dimension",
    "sweep_grid",
    "sweep_theta",
    "trace_distance",
    "truncation_series",
    "unifilarity",
    "unifilarity_preservation_check",
    "usd_alpha_study",
    "usd_povm",
    "validate",
    "word_probability",
]
