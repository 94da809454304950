"""Check framework: configuration, execution context and the check contract.

Each check is a pure function from (context, config, threshold) to a
CheckOutcome; the runner turns outcomes into CheckResults, mapping
InsufficientData to a skipped status and any other exception to an error
status so a suite run never crashes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping

import numpy as np

from ..frame import PredictionSet, TableFrame, format_label
from ..model import CheckCategory, ColumnKind, TaskKind
from .stats import InsufficientData

DEFAULT_THRESHOLDS: dict[str, float] = {
    "percent_of_nulls": 0.05,
    "mixed_nulls": 1.0,
    "mixed_data_types": 0.1,
    "string_mismatch": 0.0,
    "special_characters": 0.001,
    "is_single_value": 0.0,
    "class_imbalance": 0.1,
    "data_duplicates": 0.05,
    "conflicting_labels": 0.0,
    "outlier_sample_detection": 0.01,
    "feature_label_correlation": 0.9,
    "feature_feature_correlation": 0.9,
    "datasets_size_comparison": 0.1,
    "new_label": 0.0,
    "new_category": 0.01,
    "index_leakage": 0.0,
    "train_test_samples_mix": 0.01,
    "label_drift": 0.15,
    "feature_drift": 0.2,
    "multivariate_drift": 0.25,
    "single_dataset_performance": 0.0,
    "train_test_performance": 0.1,
    "confusion_matrix_report": 0.0,
    "roc_report": 0.7,
    "calibration_score": 0.1,
    "simple_model_comparison": 1.1,
    "weak_segments_performance": 0.0,
    "prediction_drift": 0.2,
}

# Valid range for each configurable threshold.
THRESHOLD_RANGES: dict[str, tuple[float, float]] = {
    "percent_of_nulls": (0.0, 1.0),
    "mixed_nulls": (1.0, 10.0),
    "mixed_data_types": (0.0, 1.0),
    "string_mismatch": (0.0, 1e9),
    "special_characters": (0.0, 1.0),
    "is_single_value": (0.0, 1e9),
    "class_imbalance": (0.0, 1.0),
    "data_duplicates": (0.0, 1.0),
    "conflicting_labels": (0.0, 1e9),
    "outlier_sample_detection": (0.0, 1.0),
    "feature_label_correlation": (0.0, 1.0),
    "feature_feature_correlation": (0.0, 1.0),
    "datasets_size_comparison": (0.0, 10.0),
    "new_label": (0.0, 1.0),
    "new_category": (0.0, 1.0),
    "index_leakage": (0.0, 1.0),
    "train_test_samples_mix": (0.0, 1.0),
    "label_drift": (0.0, 1.0),
    "feature_drift": (0.0, 1.0),
    "multivariate_drift": (0.0, 1.0),
    "single_dataset_performance": (0.0, 1.0),
    "train_test_performance": (0.0, 1.0),
    "confusion_matrix_report": (0.0, 1.0),
    "roc_report": (0.0, 1.0),
    "calibration_score": (0.0, 1.0),
    "simple_model_comparison": (1.0, 100.0),
    "weak_segments_performance": (0.0, 1e9),
    "prediction_drift": (0.0, 1.0),
}

OUTLIER_SCORE_CUT = 3.5  # robust z above which a row counts as an outlier
WEAK_SEGMENT_MIN_FRACTION = 0.05
WEAK_SEGMENT_ACC_DROP = 0.2
FEATURE_DRIFT_TOP_N = 5


@dataclass
class CheckConfig:
    """Tunable knobs shared by the whole suite run."""

    thresholds: dict[str, float] = field(default_factory=dict)
    outlier_z_cap: float = 10.0
    ece_bins: int = 10
    drift_tree_depth: int = 3
    random_seed: int = 0

    def __post_init__(self) -> None:
        if self.ece_bins < 2:
            raise ValueError("ece_bins must be >= 2")
        if self.drift_tree_depth < 1:
            raise ValueError("drift_tree_depth must be >= 1")
        if self.outlier_z_cap <= 0:
            raise ValueError("outlier_z_cap must be positive")
        for check_id, value in self.thresholds.items():
            if check_id not in DEFAULT_THRESHOLDS:
                raise ValueError(f"unknown check id in thresholds: {check_id!r}")
            lo, hi = THRESHOLD_RANGES[check_id]
            if not (lo <= value <= hi):
                raise ValueError(f"threshold for {check_id!r} must lie in [{lo}, {hi}]")

    def threshold(self, check_id: str) -> float:
        return self.thresholds.get(check_id, DEFAULT_THRESHOLDS[check_id])

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CheckConfig":
        known = {"thresholds", "outlier_z_cap", "ece_bins", "drift_tree_depth", "random_seed"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown check config field(s): {', '.join(sorted(unknown))}")
        kwargs: dict[str, Any] = {}
        if "thresholds" in data:
            kwargs["thresholds"] = {str(k): float(v) for k, v in dict(data["thresholds"]).items()}
        for key in ("outlier_z_cap",):
            if key in data:
                kwargs[key] = float(data[key])
        for key in ("ece_bins", "drift_tree_depth", "random_seed"):
            if key in data:
                kwargs[key] = int(data[key])
        return cls(**kwargs)


@dataclass
class CheckContext:
    """Everything a suite run can look at."""

    train: TableFrame
    test: TableFrame | None = None
    train_predictions: PredictionSet | None = None
    test_predictions: PredictionSet | None = None
    config: CheckConfig = field(default_factory=CheckConfig)

    def __post_init__(self) -> None:
        if self.test is not None and self.test.schema.to_dict() != self.train.schema.to_dict():
            raise ValueError("test schema must equal train schema")
        if self.train_predictions is not None:
            self.train_predictions.validate_against(self.train)
        if self.test_predictions is not None:
            if self.test is None:
                raise ValueError("test predictions supplied without a test dataset")
            self.test_predictions.validate_against(self.test)

    @property
    def schema(self):
        return self.train.schema


@dataclass
class CheckOutcome:
    """What a check function reports back to the runner."""

    metrics: dict[str, float]
    summary: str
    details: dict[str, float] = field(default_factory=dict)
    violated: bool | None = None  # None: runner compares primary metric
    primary_metric: str | None = None  # overrides CheckSpec.metric


@dataclass(frozen=True)
class CheckSpec:
    check_id: str
    category: CheckCategory
    metric: str
    comparator: str  # "<=", ">=", "==" or "report"
    warn_on_fail: bool
    fn: Callable[[CheckContext, CheckConfig, float], CheckOutcome]


def scaled_config(config: CheckConfig, **overrides: Any) -> CheckConfig:
    return replace(config, **overrides)


# ---------------------------------------------------------------------------
# guards shared by check implementations
# ---------------------------------------------------------------------------


def require_test(ctx: CheckContext) -> TableFrame:
    if ctx.test is None:
        raise InsufficientData("no test dataset provided")
    return ctx.test


def require_label(ctx: CheckContext) -> str:
    label = ctx.schema.label_column
    if label is None:
        raise InsufficientData("no label column declared")
    return label


def require_classification(ctx: CheckContext) -> str:
    if ctx.schema.task is not TaskKind.CLASSIFICATION:
        raise InsufficientData("check applies to classification tasks only")
    return require_label(ctx)


def require_predictions(ctx: CheckContext, ref: str) -> PredictionSet:
    preds = ctx.test_predictions if ref == "test" else ctx.train_predictions
    if preds is None:
        raise InsufficientData(f"no {ref} predictions provided")
    return preds


def require_probabilities(preds: PredictionSet) -> np.ndarray:
    if preds.probabilities is None:
        raise InsufficientData("predictions carry no probabilities")
    return preds.probabilities


def label_vector(frame: TableFrame) -> list:
    """Label cells aligned with rows; None marks null for either task."""
    name = frame.schema.label_column
    col = frame.columns[name]
    if isinstance(col, np.ndarray):
        return [None if np.isnan(v) else float(v) for v in col]
    return list(col)


def classification_accuracy(truth: list, predicted: list) -> float:
    """Fraction of rows with matching labels; null-label rows are dropped."""
    pairs = [(t, p) for t, p in zip(truth, predicted) if t is not None]
    if not pairs:
        raise InsufficientData("no labelled rows to score")
    hits = sum(1 for t, p in pairs if format_label(t) == format_label(p))
    return hits / len(pairs)


def r_squared(truth: list, predicted: list) -> float:
    pairs = [(t, float(p)) for t, p in zip(truth, predicted) if t is not None]
    if len(pairs) < 2:
        raise InsufficientData("fewer than 2 labelled rows")
    y = np.asarray([t for t, _ in pairs], dtype=np.float64)
    f = np.asarray([p for _, p in pairs], dtype=np.float64)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise InsufficientData("label variance is zero")
    ss_res = float(((y - f) ** 2).sum())
    return 1.0 - ss_res / ss_tot


def row_frame(frame: TableFrame, include_label: bool) -> Any:
    """DataFrame of feature columns (plus label) for row-identity checks.

    Identifier-kind and index columns are excluded: they make every row
    unique and would mask genuine duplicates.
    """
    columns = [spec.name for spec in frame.schema.feature_columns()]
    label = frame.schema.label_column
    if include_label and label is not None:
        columns.append(label)
    if not columns:
        raise InsufficientData("no feature columns")
    return frame.to_pandas()[columns]
