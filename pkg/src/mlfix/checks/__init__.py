"""Diagnostic check engine: statistics, registry and suite execution."""

from .core import CheckConfig, CheckContext, CheckOutcome, CheckSpec, DEFAULT_THRESHOLDS
from .profile import compute_dataset_statistics
from .runner import REGISTRY, UnknownCheckError, run_check, run_suite
from .stats import (
    DegenerateMargin,
    InsufficientData,
    auc_roc,
    chi_square,
    confusion_matrix,
    correlation_ratio,
    cramers_v,
    expected_calibration_error,
    ks_statistic,
    pearson,
    robust_outlier_scores,
)
from .tree import domain_classifier_drift

__all__ = [
    "CheckConfig",
    "CheckContext",
    "CheckOutcome",
    "CheckSpec",
    "DEFAULT_THRESHOLDS",
    "REGISTRY",
    "UnknownCheckError",
    "run_check",
    "run_suite",
    "compute_dataset_statistics",
    "chi_square",
    "cramers_v",
    "ks_statistic",
    "correlation_ratio",
    "pearson",
    "robust_outlier_scores",
    "auc_roc",
    "expected_calibration_error",
    "confusion_matrix",
    "domain_classifier_drift",
    "InsufficientData",
    "DegenerateMargin",
]
