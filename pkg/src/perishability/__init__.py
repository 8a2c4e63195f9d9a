"""Quantify how fast time-stamped text loses its training value.

The package measures the effectiveness of old training data against a
recent reference, fits exponential decay laws to the resulting series,
and provides an executable model of what those decay rates imply for
keeping or dropping aged data.
"""

from .backend import (
    EvalRecord,
    Manifest,
    NGramConfig,
    NGramModel,
    TrainJob,
    best_records,
    evaluate,
    ngram_train,
    run_external_backend,
    validate_backend_result,
)
from .config import RunConfig
from .corpus import (
    Document,
    ParseResult,
    PeriodSlice,
    SubsetLadder,
    build_subset_ladder,
    filter_min_score,
    make_splits,
    parse_flat_corpus,
    slice_periods,
    write_flat_corpus,
)
from .curves import (
    EffectivenessPoint,
    EffectivenessSeries,
    Inversion,
    LearningCurveFit,
    LearningCurvePoint,
    build_effectiveness_series,
    effective_size,
    fit_native_curves,
    fit_power_law,
    invert_curve,
)
from .decay import (
    Band,
    DecayFit,
    FormComparison,
    HalfLife,
    PairwiseFit,
    compare_functional_forms,
    fit_exponential_decay,
    half_life,
    pairwise_decay_difference,
    render_band_matrix,
    render_effectiveness_csv,
    render_rate_table,
    significance_band,
)
from .errors import (
    BackendMismatchError,
    CorpusFormatError,
    DataError,
    DegenerateFitError,
    FitError,
    InsufficientDataError,
    PerishabilityError,
    SaturationError,
)
from .periods import month_range
from .pipeline import (
    SyntheticRun,
    TopicAnalysis,
    analyze_topic,
    pick_reference,
    prepare_documents,
    run_synthetic_pipeline,
    slice_topic,
    train_topic,
)
from .stats import LinearFit, fit_line, fit_through_origin, student_t_two_sided
from .synth import DriftProcess, exponential_schedule, generate_corpus
from .theory import (
    DatasetComposition,
    DriftShift,
    EquivalenceModel,
    OffloadCheck,
    OffloadStep,
    OffloadTrajectory,
    OrderingVerdict,
    PureExponential,
    SamplingDensity,
    Theorem1Report,
    check_perishability_order,
    composition_equivalent_size,
    equivalent_time,
    greedy_offload,
    linear_drift,
    net_distribution,
    offload_condition,
    theorem1_property,
    uniform_exponential_t_star,
)

__version__ = "0.1.0"

__all__ = [
    "BackendMismatchError",
    "Band",
    "CorpusFormatError",
    "DataError",
    "DatasetComposition",
    "DecayFit",
    "DegenerateFitError",
    "Document",
    "DriftProcess",
    "DriftShift",
    "EffectivenessPoint",
    "EffectivenessSeries",
    "EquivalenceModel",
    "EvalRecord",
    "FitError",
    "FormComparison",
    "HalfLife",
    "InsufficientDataError",
    "Inversion",
    "LearningCurveFit",
    "LearningCurvePoint",
    "LinearFit",
    "Manifest",
    "NGramConfig",
    "NGramModel",
    "OffloadCheck",
    "OffloadStep",
    "OffloadTrajectory",
    "OrderingVerdict",
    "ParseResult",
    "PeriodSlice",
    "PerishabilityError",
    "PureExponential",
    "RunConfig",
    "SamplingDensity",
    "SaturationError",
    "SubsetLadder",
    "SyntheticRun",
    "Theorem1Report",
    "TopicAnalysis",
    "TrainJob",
    "analyze_topic",
    "best_records",
    "build_effectiveness_series",
    "build_subset_ladder",
    "check_perishability_order",
    "compare_functional_forms",
    "composition_equivalent_size",
    "effective_size",
    "equivalent_time",
    "evaluate",
    "exponential_schedule",
    "filter_min_score",
    "fit_exponential_decay",
    "fit_line",
    "fit_native_curves",
    "fit_power_law",
    "fit_through_origin",
    "generate_corpus",
    "greedy_offload",
    "half_life",
    "invert_curve",
    "linear_drift",
    "make_splits",
    "month_range",
    "net_distribution",
    "ngram_train",
    "offload_condition",
    "pairwise_decay_difference",
    "parse_flat_corpus",
    "pick_reference",
    "prepare_documents",
    "render_band_matrix",
    "render_effectiveness_csv",
    "render_rate_table",
    "run_external_backend",
    "run_synthetic_pipeline",
    "significance_band",
    "slice_periods",
    "slice_topic",
    "student_t_two_sided",
    "theorem1_property",
    "train_topic",
    "uniform_exponential_t_star",
    "validate_backend_result",
    "write_flat_corpus",
]
