"""Confidence-cascaded multi-stage reader inference and its evaluation.

The package replays (or live-drives) a cascade of QA reader stages — a cheap
closed-book stage followed by progressively larger open-book stages — where a
question only escalates to the next stage when the current stage's answer
confidence falls below a threshold. It accounts FLOPs per question, sweeps
thresholds into accuracy-cost curves, and compares against random and
length-heuristic escalation baselines.
"""

from .cascade import (
    CascadeOutcome,
    CascadePolicy,
    LiveFailure,
    LiveRunResult,
    Question,
    StageSpec,
    decide_exit,
    group_records,
    run_live,
    run_offline,
    validate_policy,
)
from .costs import (
    CostMode,
    CostModel,
    EscalationPath,
    StageKind,
    dataset_cost,
    instance_cost,
    stage_cost,
)
from .curves import (
    AccuracyCostCurve,
    CurvePoint,
    accuracy,
    auc,
    baseline_heuristic,
    baseline_random,
    baseline_random_sampled,
    build_curve_k1,
    common_cost_range,
    cost_at_accuracy,
    pareto_frontier,
    stage_anchor_points,
    sweep_multi,
)
from .errors import (
    BackendUnreachable,
    DuplicateRecord,
    GridTooLarge,
    InvalidInput,
    MalformedBackendResponse,
    MalformedLine,
    MissingStageRecord,
    PolicyError,
    QCascadeError,
    SchemaViolation,
    TargetUnreachable,
)
from .logio import (
    curve_to_csv,
    load_policy,
    load_questions,
    load_synth_config,
    outcome_to_json,
    parse_logs,
    read_curve_csv,
    read_records,
    record_to_json,
    write_curve_csv,
    write_outcomes,
    write_records,
)
from .prediction import (
    ConfidenceMethod,
    PredictionRecord,
    TokenProbs,
    confidence,
    exact_match,
    normalize_answer,
)
from .synth import CalibrationReport, SynthConfig, SynthStage, calibration_report, generate

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # cascade
    "CascadeOutcome",
    "CascadePolicy",
    "LiveFailure",
    "LiveRunResult",
    "Question",
    "StageSpec",
    "decide_exit",
    "group_records",
    "run_live",
    "run_offline",
    "validate_policy",
    # costs
    "CostMode",
    "CostModel",
    "EscalationPath",
    "StageKind",
    "dataset_cost",
    "instance_cost",
    "stage_cost",
    # curves
    "AccuracyCostCurve",
    "CurvePoint",
    "accuracy",
    "auc",
    "baseline_heuristic",
    "baseline_random",
    "baseline_random_sampled",
    "build_curve_k1",
    "common_cost_range",
    "cost_at_accuracy",
    "pareto_frontier",
    "stage_anchor_points",
    "sweep_multi",
    # errors
    "BackendUnreachable",
    "DuplicateRecord",
    "GridTooLarge",
    "InvalidInput",
    "MalformedBackendResponse",
    "MalformedLine",
    "MissingStageRecord",
    "PolicyError",
    "QCascadeError",
    "SchemaViolation",
    "TargetUnreachable",
    # logio
    "curve_to_csv",
    "load_policy",
    "load_questions",
    "load_synth_config",
    "outcome_to_json",
    "parse_logs",
    "read_curve_csv",
    "read_records",
    "record_to_json",
    "write_curve_csv",
    "write_outcomes",
    "write_records",
    # prediction
    "ConfidenceMethod",
    "PredictionRecord",
    "TokenProbs",
    "confidence",
    "exact_match",
    "normalize_answer",
    # synth
    "CalibrationReport",
    "SynthConfig",
    "SynthStage",
    "calibration_report",
    "generate",
]
