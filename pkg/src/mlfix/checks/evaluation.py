"""Model-evaluation checks: performance, calibration and prediction drift.

All checks score the test split when test predictions are available;
single-dataset performance falls back to train predictions. Accuracy-based
checks are classification-only and skip for regression tasks.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from ..frame import format_label
from ..model import CheckCategory, ColumnKind, TaskKind
from . import stats
from .core import (
    WEAK_SEGMENT_ACC_DROP,
    WEAK_SEGMENT_MIN_FRACTION,
    CheckConfig,
    CheckContext,
    CheckOutcome,
    CheckSpec,
    classification_accuracy,
    label_vector,
    r_squared,
    require_classification,
    require_label,
    require_predictions,
    require_probabilities,
    require_test,
)
from .stats import InsufficientData
from .validation import _origin_drift


def _performance(ctx: CheckContext, split: str) -> tuple[str, float]:
    frame = ctx.train if split == "train" else require_test(ctx)
    preds = require_predictions(ctx, split)
    require_label(ctx)
    truth = label_vector(frame)
    if ctx.schema.task is TaskKind.CLASSIFICATION:
        return "accuracy", classification_accuracy(truth, preds.predicted_labels)
    return "r2", r_squared(truth, preds.predicted_labels)


def check_single_dataset_performance(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    split = "test" if ctx.test_predictions is not None else "train"
    name, value = _performance(ctx, split)
    return CheckOutcome(
        metrics={name: value},
        summary=f"{split} {name} is {value:.4g}",
        primary_metric=name,
        violated=False,
    )


def check_train_test_performance(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    name, train_value = _performance(ctx, "train")
    _, test_value = _performance(ctx, "test")
    gap = train_value - test_value
    return CheckOutcome(
        metrics={"performance_gap": gap, f"train_{name}": train_value, f"test_{name}": test_value},
        summary=f"train-to-test {name} gap is {gap:.4g}",
    )


def check_confusion_matrix(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    require_classification(ctx)
    test = require_test(ctx)
    preds = require_predictions(ctx, "test")
    truth = label_vector(test)
    pairs = [(format_label(t), format_label(p)) for t, p in zip(truth, preds.predicted_labels) if t is not None]
    if not pairs:
        raise InsufficientData("no labelled rows to score")
    labels, matrix, precision, recall = stats.confusion_matrix([t for t, _ in pairs], [p for _, p in pairs])
    details: dict[str, float] = {}
    for i, true_label in enumerate(labels):
        for j, pred_label in enumerate(labels):
            if matrix[i, j]:
                details[f"true={true_label}|pred={pred_label}"] = float(matrix[i, j])
    for i, label in enumerate(labels):
        details[f"precision[{label}]"] = float(precision[i])
        details[f"recall[{label}]"] = float(recall[i])
    accuracy = float(np.diag(matrix).sum() / matrix.sum())
    return CheckOutcome(
        metrics={"accuracy": accuracy},
        details=details,
        summary=f"confusion matrix over {len(labels)} classes; accuracy {accuracy:.4g}",
        violated=False,
    )


def check_roc_report(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    require_classification(ctx)
    test = require_test(ctx)
    preds = require_predictions(ctx, "test")
    matrix = require_probabilities(preds)
    truth = label_vector(test)
    keep = [i for i, t in enumerate(truth) if t is not None]
    if not keep:
        raise InsufficientData("no labelled rows to score")
    details = {}
    for j, cls in enumerate(preds.class_order):
        scores = matrix[keep, j]
        binary = np.asarray([1.0 if format_label(truth[i]) == str(cls) else 0.0 for i in keep])
        try:
            details[f"auc[{cls}]"] = stats.auc_roc(scores, binary)
        except InsufficientData:
            continue
    if not details:
        raise InsufficientData("no class has both positive and negative rows")
    worst = min(details.values())
    return CheckOutcome(
        metrics={"min_class_auc": worst},
        details=details,
        summary=f"lowest one-vs-rest class AUC is {worst:.4g}",
    )


def check_calibration(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    require_classification(ctx)
    test = require_test(ctx)
    preds = require_predictions(ctx, "test")
    matrix = require_probabilities(preds)
    truth = label_vector(test)
    keep = [i for i, t in enumerate(truth) if t is not None]
    if not keep:
        raise InsufficientData("no labelled rows to score")
    ece = stats.expected_calibration_error(
        matrix[keep],
        [format_label(truth[i]) for i in keep],
        bins=cfg.ece_bins,
        class_order=[str(c) for c in preds.class_order],
    )
    return CheckOutcome(
        metrics={"ece": ece},
        summary=f"expected calibration error over {cfg.ece_bins} bins is {ece:.4g}",
    )


def check_simple_model_comparison(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    require_classification(ctx)
    test = require_test(ctx)
    preds = require_predictions(ctx, "test")
    train_labels = [format_label(v) for v in ctx.train.label_values()]
    if not train_labels:
        raise InsufficientData("train split has no labelled rows")
    majority = sorted(Counter(train_labels).items(), key=lambda item: (-item[1], item[0]))[0][0]
    truth = label_vector(test)
    accuracy = classification_accuracy(truth, preds.predicted_labels)
    baseline = classification_accuracy(truth, [majority] * len(truth))
    # finite-metric invariant: cap the ratio when the baseline is degenerate
    ratio = min(accuracy / baseline, 1000.0) if baseline > 0 else 1000.0
    return CheckOutcome(
        metrics={"accuracy_ratio": ratio, "accuracy": accuracy, "baseline_accuracy": baseline},
        summary=f"model accuracy is {ratio:.4g}x the majority-class baseline",
    )


def _segments(frame, spec) -> list[tuple[str, np.ndarray]]:
    if spec.kind is ColumnKind.NUMERIC:
        col = frame.numeric(spec.name)
        values = col[~np.isnan(col)]
        if values.size == 0:
            return []
        q1, q2, q3 = np.quantile(values, [0.25, 0.5, 0.75])
        edges = [-np.inf, q1, q2, q3, np.inf]
        out = []
        for b in range(4):
            lo, hi = edges[b], edges[b + 1]
            mask = (col > lo) & (col <= hi) if b > 0 else (col <= hi)
            mask &= ~np.isnan(col)
            out.append((f"{spec.name}[q{b + 1}]", mask))
        return out
    cells = frame.strings(spec.name)
    categories = sorted(Counter(v for v in cells if v is not None))[:20]
    arr = np.asarray([v if v is not None else "" for v in cells], dtype=object)
    return [(f"{spec.name}={cat}", arr == cat) for cat in categories]


def check_weak_segments(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    require_classification(ctx)
    test = require_test(ctx)
    preds = require_predictions(ctx, "test")
    truth = label_vector(test)
    predicted = preds.predicted_labels
    labelled = np.asarray([t is not None for t in truth])
    if not labelled.any():
        raise InsufficientData("no labelled rows to score")
    correct = np.asarray(
        [t is not None and format_label(t) == format_label(p) for t, p in zip(truth, predicted)], dtype=np.float64
    )
    total = int(labelled.sum())
    global_acc = float(correct[labelled].mean())
    details = {}
    for spec in ctx.schema.feature_columns():
        if spec.kind not in (ColumnKind.NUMERIC, ColumnKind.CATEGORICAL):
            continue
        for name, mask in _segments(test, spec):
            seg = mask & labelled
            n = int(seg.sum())
            if n < WEAK_SEGMENT_MIN_FRACTION * total or n == 0:
                continue
            acc = float(correct[seg].mean())
            if acc < global_acc - WEAK_SEGMENT_ACC_DROP:
                details[name] = acc
    return CheckOutcome(
        metrics={"weak_segment_count": float(len(details)), "global_accuracy": global_acc},
        details=details,
        summary=(
            f"{len(details)} one-dimensional segment(s) underperform the global accuracy by more than "
            f"{WEAK_SEGMENT_ACC_DROP:g} (higher-order segments are not scanned)"
        ),
    )


def check_prediction_drift(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    require_test(ctx)
    train_preds = require_predictions(ctx, "train")
    test_preds = require_predictions(ctx, "test")
    if ctx.schema.task is TaskKind.CLASSIFICATION:
        name, value = _origin_drift(
            [format_label(v) for v in train_preds.predicted_labels],
            [format_label(v) for v in test_preds.predicted_labels],
            ColumnKind.CATEGORICAL,
        )
    else:
        name, value = _origin_drift(
            [float(v) for v in train_preds.predicted_labels],
            [float(v) for v in test_preds.predicted_labels],
            ColumnKind.NUMERIC,
        )
    return CheckOutcome(
        metrics={name: value},
        summary=f"prediction distribution distance between splits is {value:.4g} ({name})",
        primary_metric=name,
    )


SPECS = (
    CheckSpec("single_dataset_performance", CheckCategory.MODEL_EVALUATION, "accuracy", "report", False, check_single_dataset_performance),
    CheckSpec("train_test_performance", CheckCategory.MODEL_EVALUATION, "performance_gap", "<=", False, check_train_test_performance),
    CheckSpec("confusion_matrix_report", CheckCategory.MODEL_EVALUATION, "accuracy", "report", False, check_confusion_matrix),
    CheckSpec("roc_report", CheckCategory.MODEL_EVALUATION, "min_class_auc", ">=", False, check_roc_report),
    CheckSpec("calibration_score", CheckCategory.MODEL_EVALUATION, "ece", "<=", False, check_calibration),
    CheckSpec("simple_model_comparison", CheckCategory.MODEL_EVALUATION, "accuracy_ratio", ">=", False, check_simple_model_comparison),
    CheckSpec("weak_segments_performance", CheckCategory.MODEL_EVALUATION, "weak_segment_count", "==", False, check_weak_segments),
    CheckSpec("prediction_drift", CheckCategory.MODEL_EVALUATION, "cramers_v", "<=", False, check_prediction_drift),
)
