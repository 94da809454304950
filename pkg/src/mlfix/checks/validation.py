"""Train/test validation checks: split quality, leakage and drift."""

from __future__ import annotations

from collections import Counter

import numpy as np

from ..frame import format_label
from ..model import CheckCategory, ColumnKind, TaskKind
from . import stats
from .core import (
    FEATURE_DRIFT_TOP_N,
    CheckConfig,
    CheckContext,
    CheckOutcome,
    CheckSpec,
    require_classification,
    require_label,
    require_test,
    row_frame,
)
from .stats import InsufficientData
from .tree import domain_classifier_drift


def check_datasets_size(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    test = require_test(ctx)
    if ctx.train.row_count == 0:
        raise InsufficientData("train dataset is empty")
    ratio = test.row_count / ctx.train.row_count
    return CheckOutcome(
        metrics={"size_ratio": ratio, "train_rows": float(ctx.train.row_count), "test_rows": float(test.row_count)},
        summary=f"test split holds {ratio:.4g} of the train split's rows",
    )


def check_new_label(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    test = require_test(ctx)
    require_classification(ctx)
    train_labels = {format_label(v) for v in ctx.train.label_values()}
    test_counts = Counter(format_label(v) for v in test.label_values())
    if not test_counts:
        raise InsufficientData("test split has no labelled rows")
    unseen = sorted(label for label in test_counts if label not in train_labels)
    ratio = len(unseen) / len(test_counts)
    return CheckOutcome(
        metrics={"new_label_ratio": ratio, "new_label_count": float(len(unseen))},
        details={label: float(test_counts[label]) for label in unseen},
        summary=f"{len(unseen)} of {len(test_counts)} distinct test labels never appear in training",
    )


def check_new_category(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    test = require_test(ctx)
    details = {}
    measured = 0
    for spec in ctx.schema.feature_columns():
        if spec.kind is not ColumnKind.CATEGORICAL:
            continue
        measured += 1
        train_cats = {v for v in ctx.train.strings(spec.name) if v is not None}
        test_col = [v for v in test.strings(spec.name) if v is not None]
        if not test_col:
            continue
        unseen_rows = sum(1 for v in test_col if v not in train_cats)
        if unseen_rows:
            details[spec.name] = unseen_rows / len(test_col)
    if measured == 0:
        raise InsufficientData("no categorical features")
    worst = max(details.values(), default=0.0)
    return CheckOutcome(
        metrics={"max_new_category_fraction": worst},
        details=details,
        summary=f"{len(details)} feature(s) show test categories unseen in training",
    )


def check_index_leakage(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    test = require_test(ctx)
    index = ctx.schema.index_column
    if index is None:
        raise InsufficientData("no index column declared")
    train_ids = {v for v in _index_values(ctx.train, index) if v is not None}
    test_ids = [v for v in _index_values(test, index) if v is not None]
    if not test_ids:
        raise InsufficientData("test split has no index values")
    overlap = sum(1 for v in test_ids if v in train_ids)
    ratio = overlap / len(test_ids)
    return CheckOutcome(
        metrics={"index_overlap_ratio": ratio, "index_overlap_count": float(overlap)},
        summary=f"{overlap} test index value(s) also appear in training",
    )


def _index_values(frame, name: str) -> list:
    col = frame.columns[name]
    if isinstance(col, np.ndarray):
        return [None if np.isnan(v) else float(v) for v in col]
    return list(col)


def check_samples_mix(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    test = require_test(ctx)
    train_df = row_frame(ctx.train, include_label=True)
    test_df = row_frame(test, include_label=True)
    if len(test_df) == 0:
        raise InsufficientData("test split is empty")
    columns = list(train_df.columns)
    merged = test_df.reset_index().merge(train_df.drop_duplicates(), on=columns, how="inner")
    mixed = int(merged["index"].nunique())
    fraction = mixed / len(test_df)
    return CheckOutcome(
        metrics={"mixed_fraction": fraction, "mixed_rows": float(mixed)},
        summary=f"{mixed} test row(s) appear verbatim in the train split",
    )


def _origin_drift(train_values: list, test_values: list, kind: ColumnKind) -> tuple[str, float]:
    """Drift of one vector between splits: KS for numeric, Cramer's V via the
    value-by-origin contingency otherwise."""
    if kind is ColumnKind.NUMERIC:
        return "ks", stats.ks_statistic(train_values, test_values)
    combined = list(train_values) + list(test_values)
    origin = ["train"] * len(train_values) + ["test"] * len(test_values)
    return "cramers_v", stats.cramers_v(combined, origin)


def check_label_drift(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    test = require_test(ctx)
    require_label(ctx)
    kind = ColumnKind.NUMERIC if ctx.schema.task is TaskKind.REGRESSION else ColumnKind.CATEGORICAL
    train_labels = ctx.train.label_values()
    test_labels = test.label_values()
    if not train_labels or not test_labels:
        raise InsufficientData("a split has no labelled rows")
    if kind is ColumnKind.CATEGORICAL:
        train_labels = [format_label(v) for v in train_labels]
        test_labels = [format_label(v) for v in test_labels]
    name, value = _origin_drift(train_labels, test_labels, kind)
    return CheckOutcome(
        metrics={name: value},
        summary=f"label distribution distance between splits is {value:.4g} ({name})",
        primary_metric=name,
    )


def check_feature_drift(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    test = require_test(ctx)
    scores = {}
    for spec in ctx.schema.feature_columns():
        if spec.kind not in (ColumnKind.NUMERIC, ColumnKind.CATEGORICAL):
            continue
        try:
            if spec.kind is ColumnKind.NUMERIC:
                _, value = _origin_drift(
                    list(ctx.train.numeric_values(spec.name)), list(test.numeric_values(spec.name)), spec.kind
                )
            else:
                _, value = _origin_drift(
                    [v for v in ctx.train.strings(spec.name) if v is not None],
                    [v for v in test.strings(spec.name) if v is not None],
                    spec.kind,
                )
        except InsufficientData:
            continue
        scores[spec.name] = value
    if not scores:
        raise InsufficientData("no feature is measurable for drift")
    top = dict(sorted(scores.items(), key=lambda item: (-item[1], item[0]))[:FEATURE_DRIFT_TOP_N])
    worst = max(scores.values())
    return CheckOutcome(
        metrics={"max_feature_drift": worst},
        details=top,
        summary=f"strongest single-feature drift is {worst:.4g}; top {len(top)} reported",
    )


def check_multivariate_drift(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    test = require_test(ctx)
    score, contributors = domain_classifier_drift(
        ctx.train, test, seed=cfg.random_seed, max_depth=cfg.drift_tree_depth
    )
    details = {name: gain for name, gain in contributors[:FEATURE_DRIFT_TOP_N]}
    return CheckOutcome(
        metrics={"drift_score": score},
        details=details,
        summary=f"domain classifier separates the splits with drift score {score:.4g}",
    )


SPECS = (
    CheckSpec("datasets_size_comparison", CheckCategory.TRAIN_TEST_VALIDATION, "size_ratio", ">=", False, check_datasets_size),
    CheckSpec("new_label", CheckCategory.TRAIN_TEST_VALIDATION, "new_label_ratio", "==", False, check_new_label),
    CheckSpec("new_category", CheckCategory.TRAIN_TEST_VALIDATION, "max_new_category_fraction", "<=", False, check_new_category),
    CheckSpec("index_leakage", CheckCategory.TRAIN_TEST_VALIDATION, "index_overlap_ratio", "==", False, check_index_leakage),
    CheckSpec("train_test_samples_mix", CheckCategory.TRAIN_TEST_VALIDATION, "mixed_fraction", "<=", False, check_samples_mix),
    CheckSpec("label_drift", CheckCategory.TRAIN_TEST_VALIDATION, "cramers_v", "<=", False, check_label_drift),
    CheckSpec("feature_drift", CheckCategory.TRAIN_TEST_VALIDATION, "max_feature_drift", "<=", False, check_feature_drift),
    CheckSpec("multivariate_drift", CheckCategory.TRAIN_TEST_VALIDATION, "drift_score", "<=", False, check_multivariate_drift),
)
