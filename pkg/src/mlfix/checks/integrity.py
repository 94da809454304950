"""Data-integrity checks: structural quality of the training table."""

from __future__ import annotations

from collections import Counter

import numpy as np

from ..frame import TableFrame, format_label
from ..model import CheckCategory, ColumnKind, TaskKind
from . import stats
from .core import (
    OUTLIER_SCORE_CUT,
    CheckConfig,
    CheckContext,
    CheckOutcome,
    CheckSpec,
    require_classification,
    require_label,
    row_frame,
)
from .profile import imbalance_ratio
from .stats import InsufficientData

_STRINGY = (ColumnKind.CATEGORICAL, ColumnKind.TEXT, ColumnKind.IDENTIFIER)


def _value_counts(frame: TableFrame, name: str) -> Counter:
    return Counter(v for v in frame.strings(name) if v is not None)


def check_percent_of_nulls(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    details = {}
    for spec in ctx.schema.columns:
        mask = ctx.train.null_mask(spec.name)
        fraction = float(mask.mean()) if ctx.train.row_count else 0.0
        if fraction > 0:
            details[spec.name] = fraction
    worst = max(details.values(), default=0.0)
    return CheckOutcome(
        metrics={"max_null_fraction": worst},
        details=details,
        summary=f"{len(details)} of {len(ctx.schema.columns)} columns contain nulls; worst fraction {worst:.4g}",
    )


def check_mixed_nulls(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    per_column = {
        spec.name: float(len(ctx.train.column_meta[spec.name].null_token_counts)) for spec in ctx.schema.columns
    }
    details = {name: kinds for name, kinds in per_column.items() if kinds > threshold}
    return CheckOutcome(
        metrics={"max_null_variants": max(per_column.values(), default=0.0)},
        details=details,
        summary=f"{len(details)} column(s) mix more than one null-like token",
    )


def check_mixed_data_types(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    details = {}
    worst_violation = 0.0
    for spec in ctx.schema.columns:
        meta = ctx.train.column_meta[spec.name]
        total = meta.numeric_cells + meta.string_cells
        if total == 0 or meta.numeric_cells == 0 or meta.string_cells == 0:
            continue
        fraction = min(meta.numeric_cells, meta.string_cells) / total
        details[spec.name] = fraction
        if 0.0 < fraction < threshold:
            worst_violation = max(worst_violation, fraction)
    return CheckOutcome(
        metrics={"minority_type_fraction": worst_violation},
        details=details,
        summary=(
            "a rare minority data type was found in at least one column"
            if worst_violation > 0
            else "no column holds a rare minority data type"
        ),
        violated=worst_violation > 0.0,
    )


def check_string_mismatch(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    details = {}
    total_groups = 0
    for spec in ctx.schema.columns:
        if spec.kind not in (ColumnKind.CATEGORICAL, ColumnKind.TEXT):
            continue
        variants: dict[str, set[str]] = {}
        for value in _value_counts(ctx.train, spec.name):
            variants.setdefault(value.strip().casefold(), set()).add(value)
        groups = sum(1 for forms in variants.values() if len(forms) >= 2)
        if groups:
            details[spec.name] = float(groups)
            total_groups += groups
    return CheckOutcome(
        metrics={"variant_groups": float(total_groups)},
        details=details,
        summary=f"{total_groups} base form(s) appear under multiple case/whitespace variants",
    )


def check_special_characters(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    details = {}
    for spec in ctx.schema.columns:
        if spec.kind not in _STRINGY:
            continue
        counts = _value_counts(ctx.train, spec.name)
        total = sum(counts.values())
        if total == 0:
            continue
        special = sum(n for value, n in counts.items() if value and not any(ch.isalnum() for ch in value))
        if special:
            details[spec.name] = special / total
    worst = max(details.values(), default=0.0)
    return CheckOutcome(
        metrics={"max_special_char_fraction": worst},
        details=details,
        summary=f"{len(details)} column(s) contain purely non-alphanumeric cells",
    )


def check_is_single_value(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    details = {}
    for spec in ctx.schema.feature_columns():
        if spec.kind is ColumnKind.NUMERIC:
            distinct = np.unique(ctx.train.numeric_values(spec.name)).size
        else:
            distinct = len(_value_counts(ctx.train, spec.name))
        if distinct == 1:
            details[spec.name] = 1.0
    return CheckOutcome(
        metrics={"single_value_features": float(len(details))},
        details=details,
        summary=f"{len(details)} feature(s) hold a single constant value",
    )


def check_class_imbalance(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    require_classification(ctx)
    labels = [format_label(v) for v in ctx.train.label_values()]
    if not labels:
        raise InsufficientData("no labelled rows")
    distribution = dict(sorted(Counter(labels).items()))
    ratio = imbalance_ratio(distribution)
    return CheckOutcome(
        metrics={"imbalance_ratio": float(ratio)},
        details={k: float(v) for k, v in distribution.items()},
        summary=f"rarest class holds {ratio:.4g} of the most frequent class's samples",
    )


def check_data_duplicates(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    df = row_frame(ctx.train, include_label=True)
    if len(df) == 0:
        return CheckOutcome(metrics={"duplicate_fraction": 0.0, "duplicate_rows": 0.0}, summary="empty table")
    duplicates = int(df.duplicated().sum())
    fraction = duplicates / len(df)
    return CheckOutcome(
        metrics={"duplicate_fraction": fraction, "duplicate_rows": float(duplicates)},
        summary=f"{duplicates} duplicated row(s) out of {len(df)}",
    )


def check_conflicting_labels(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    label = require_label(ctx)
    features = [spec.name for spec in ctx.schema.feature_columns()]
    if not features:
        raise InsufficientData("no feature columns")
    df = ctx.train.to_pandas()
    feature_df = df[features]
    dup_mask = feature_df.duplicated(keep=False)
    conflicts = 0
    if dup_mask.any():
        grouped = df.loc[dup_mask].groupby(features, dropna=False)[label].nunique(dropna=True)
        conflicts = int((grouped > 1).sum())
    return CheckOutcome(
        metrics={"conflict_count": float(conflicts)},
        summary=f"{conflicts} identical feature row group(s) carry differing labels",
    )


def check_outlier_samples(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    scores = stats.robust_outlier_scores(ctx.train, z_cap=cfg.outlier_z_cap)
    if scores.size == 0:
        return CheckOutcome(metrics={"outlier_fraction": 0.0, "max_outlier_score": 0.0}, summary="empty table")
    outliers = int((scores > OUTLIER_SCORE_CUT).sum())
    fraction = outliers / scores.size
    return CheckOutcome(
        metrics={
            "outlier_fraction": fraction,
            "outlier_rows": float(outliers),
            "max_outlier_score": float(scores.max()),
        },
        summary=f"{outliers} row(s) exceed robust z-score {OUTLIER_SCORE_CUT}",
    )


def _column_vector(frame: TableFrame, name: str):
    """Numeric columns as-is; string-typed columns as cached float codes so
    the association measures run vectorized (they are relabeling-invariant)."""
    if frame.schema.column(name).kind is ColumnKind.NUMERIC:
        return frame.numeric(name)
    return frame.categorical_codes(name)


def correlation_with_label(ctx: CheckContext, frame: TableFrame, feature: str) -> float | None:
    """Kind-aware association of one feature with the label, or None when the
    pair is degenerate."""
    schema = ctx.schema
    label_col = _column_vector(frame, schema.label_column)
    feat_kind = schema.column(feature).kind
    feat_col = _column_vector(frame, feature)
    classification = schema.task is TaskKind.CLASSIFICATION
    try:
        if feat_kind is ColumnKind.NUMERIC and classification:
            return stats.correlation_ratio(feat_col, label_col)
        if feat_kind is ColumnKind.NUMERIC:
            return abs(stats.pearson(feat_col, label_col))
        if classification:
            return stats.cramers_v(feat_col, label_col)
        return stats.correlation_ratio(label_col, feat_col)
    except InsufficientData:
        return None


def check_feature_label_correlation(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    require_label(ctx)
    details = {}
    for spec in ctx.schema.feature_columns():
        if spec.kind not in (ColumnKind.NUMERIC, ColumnKind.CATEGORICAL):
            continue
        value = correlation_with_label(ctx, ctx.train, spec.name)
        if value is not None:
            details[spec.name] = value
    if not details:
        raise InsufficientData("no feature/label pair is measurable")
    worst = max(details.values())
    return CheckOutcome(
        metrics={"max_feature_label_correlation": worst},
        details=details,
        summary=f"strongest single-feature association with the label is {worst:.4g}",
    )


def _pair_measure(ctx: CheckContext, a, b) -> float | None:
    frame = ctx.train
    try:
        if a.kind is ColumnKind.NUMERIC and b.kind is ColumnKind.NUMERIC:
            return abs(stats.pearson(frame.numeric(a.name), frame.numeric(b.name)))
        if a.kind is ColumnKind.CATEGORICAL and b.kind is ColumnKind.CATEGORICAL:
            return stats.cramers_v(frame.categorical_codes(a.name), frame.categorical_codes(b.name))
        numeric, cat = (a, b) if a.kind is ColumnKind.NUMERIC else (b, a)
        return stats.correlation_ratio(frame.numeric(numeric.name), frame.categorical_codes(cat.name))
    except InsufficientData:
        return None


def check_feature_feature_correlation(ctx: CheckContext, cfg: CheckConfig, threshold: float) -> CheckOutcome:
    specs = [s for s in ctx.schema.feature_columns() if s.kind in (ColumnKind.NUMERIC, ColumnKind.CATEGORICAL)]
    if len(specs) < 2:
        raise InsufficientData("fewer than 2 measurable features")
    details = {}
    measured = 0
    for i in range(len(specs)):
        for j in range(i + 1, len(specs)):
            value = _pair_measure(ctx, specs[i], specs[j])
            if value is None:
                continue
            measured += 1
            if value > threshold:
                details[f"{specs[i].name}|{specs[j].name}"] = value
    if measured == 0:
        raise InsufficientData("no feature pair is measurable")
    return CheckOutcome(
        metrics={"high_correlation_pairs": float(len(details))},
        details=details,
        summary=f"{len(details)} feature pair(s) correlate above {threshold:g}",
        violated=bool(details),
    )


SPECS = (
    CheckSpec("percent_of_nulls", CheckCategory.DATA_INTEGRITY, "max_null_fraction", "<=", False, check_percent_of_nulls),
    CheckSpec("mixed_nulls", CheckCategory.DATA_INTEGRITY, "max_null_variants", "<=", False, check_mixed_nulls),
    CheckSpec("mixed_data_types", CheckCategory.DATA_INTEGRITY, "minority_type_fraction", "not in (0, threshold)", False, check_mixed_data_types),
    CheckSpec("string_mismatch", CheckCategory.DATA_INTEGRITY, "variant_groups", "==", False, check_string_mismatch),
    CheckSpec("special_characters", CheckCategory.DATA_INTEGRITY, "max_special_char_fraction", "<=", False, check_special_characters),
    CheckSpec("is_single_value", CheckCategory.DATA_INTEGRITY, "single_value_features", "==", False, check_is_single_value),
    CheckSpec("class_imbalance", CheckCategory.DATA_INTEGRITY, "imbalance_ratio", ">=", False, check_class_imbalance),
    CheckSpec("data_duplicates", CheckCategory.DATA_INTEGRITY, "duplicate_fraction", "<=", False, check_data_duplicates),
    CheckSpec("conflicting_labels", CheckCategory.DATA_INTEGRITY, "conflict_count", "==", False, check_conflicting_labels),
    CheckSpec("outlier_sample_detection", CheckCategory.DATA_INTEGRITY, "outlier_fraction", "<=", False, check_outlier_samples),
    CheckSpec("feature_label_correlation", CheckCategory.DATA_INTEGRITY, "max_feature_label_correlation", "<=", False, check_feature_label_correlation),
    CheckSpec("feature_feature_correlation", CheckCategory.DATA_INTEGRITY, "high_correlation_pairs", "==", True, check_feature_feature_correlation),
)
