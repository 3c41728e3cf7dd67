"""Lifelong-learning metrics over experience-level performance logs."""

from .lifetime import (
    EVAL,
    LEARN,
    BlockInfo,
    ExperienceRecord,
    LifetimeLog,
    LogFormatError,
    Regime,
    TaskKey,
    ValidationReport,
    dumps_log,
    learning_curve,
    parse_csv,
    parse_log,
    read_log,
    task_series,
    validate,
    write_log,
)
from .metrics import (
    METRIC_NAMES,
    BlockSummary,
    MetricResult,
    UndefinedContrastError,
    backward_transfer,
    block_summaries,
    contrast,
    evaluation_performance,
    forward_transfer,
    performance_maintenance,
    terminal_learning_performance,
)
from .preprocess import (
    NormalizationParams,
    PreprocessConfig,
    Preprocessed,
    clamp_and_scale,
    compute_clamp_bounds,
    preprocess,
    smooth_block,
    smoothing_window,
)
from .report import (
    AggregateReport,
    LifetimeReport,
    aggregate,
    compute_metrics,
    compute_report,
    load_report,
    render,
)
from .ste import SteCurve, SteStore, load_ste, relative_performance, sample_efficiency, saturation
from .supplemental import (
    cumulative_gain,
    learn_burn,
    performance_recovery,
    recovery_time,
    theil_sen_slope,
)
from .synthetic import (
    LearnerProfile,
    ScenarioSpec,
    TaskProfile,
    expected_values,
    generate_lifetime,
    generate_ste,
)

__version__ = "0.1.0"
