"""Deterministic statistics backing the diagnostic checks.

Everything here is a pure function of its inputs. Degenerate inputs raise
InsufficientData, which the check runner converts into a skipped result;
chi_square alone raises DegenerateMargin because an all-zero row or column is
a caller error rather than a reason to skip.
"""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

MAD_SCALE = 1.4826


class InsufficientData(Exception):
    """The statistic is undefined for this input; callers should skip."""


class DegenerateMargin(ValueError):
    """A contingency table has an all-zero row or column."""


def _present_mask(values: Any) -> np.ndarray:
    """Boolean mask of non-null positions; NaN and None count as null."""
    if isinstance(values, np.ndarray) and values.dtype.kind == "f":
        return ~np.isnan(values)
    return np.fromiter(
        (v is not None and not (isinstance(v, float) and np.isnan(v)) for v in values),
        dtype=bool,
        count=len(values),
    )


def _take(values: Any, mask: np.ndarray) -> Any:
    if isinstance(values, np.ndarray):
        return values[mask]
    return [v for v, keep in zip(values, mask) if keep]


def paired_non_null(a: Any, b: Any) -> tuple[Any, Any]:
    """Drop positions where either side is null (None or NaN)."""
    if len(a) != len(b):
        raise ValueError("vectors must have equal length")
    mask = _present_mask(a) & _present_mask(b)
    return _take(a, mask), _take(b, mask)


def _category_codes(values: Sequence) -> tuple[int, np.ndarray]:
    """(category count, integer code vector) in sorted-category order."""
    if isinstance(values, np.ndarray):
        cats, codes = np.unique(values, return_inverse=True)
        return cats.size, codes
    cats = sorted(set(values))
    index = {c: i for i, c in enumerate(cats)}
    return len(cats), np.fromiter((index[v] for v in values), dtype=np.intp, count=len(values))


def contingency_table(a: Sequence, b: Sequence) -> np.ndarray:
    """Count matrix of two equal-length category vectors (no nulls)."""
    n_a, codes_a = _category_codes(a)
    n_b, codes_b = _category_codes(b)
    flat = np.bincount(codes_a * n_b + codes_b, minlength=n_a * n_b)
    return flat.reshape(n_a, n_b).astype(np.float64)


def chi_square(contingency: Any) -> float:
    """Pearson chi-squared statistic of an r-by-c count matrix."""
    table = np.asarray(contingency, dtype=np.float64)
    if table.ndim != 2 or table.size == 0:
        raise DegenerateMargin("contingency must be a non-empty 2-D count matrix")
    if (table < 0).any():
        raise ValueError("contingency counts must be non-negative")
    total = table.sum()
    if total <= 0:
        raise DegenerateMargin("contingency total must be positive")
    row_sums = table.sum(axis=1)
    col_sums = table.sum(axis=0)
    if (row_sums == 0).any() or (col_sums == 0).any():
        raise DegenerateMargin("contingency has an all-zero row or column")
    expected = np.outer(row_sums, col_sums) / total
    return float(((table - expected) ** 2 / expected).sum())


def cramers_v(col_a: Any, col_b: Any) -> float:
    """Uncorrected Cramer's V between two categorical vectors, in [0, 1]."""
    a, b = paired_non_null(col_a, col_b)
    if len(a) == 0:
        raise InsufficientData("no complete pairs")
    table = contingency_table(a, b)
    r, c = table.shape
    if r < 2 or c < 2:
        raise InsufficientData("fewer than 2 categories after null removal")
    stat = chi_square(table)
    v = np.sqrt(stat / (table.sum() * (min(r, c) - 1)))
    return float(min(max(v, 0.0), 1.0))


def ks_statistic(sample_a: Any, sample_b: Any) -> float:
    """Exact two-sample Kolmogorov-Smirnov distance via merged sort."""
    a = np.sort(_non_null_numeric(sample_a))
    b = np.sort(_non_null_numeric(sample_b))
    if a.size == 0 or b.size == 0:
        raise InsufficientData("empty sample after null removal")
    points = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, points, side="right") / a.size
    cdf_b = np.searchsorted(b, points, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def correlation_ratio(numeric: Any, groups: Any) -> float:
    """Correlation ratio (eta) of a numeric vector against group labels."""
    values, labels = paired_non_null(numeric, groups)
    if len(values) == 0:
        raise InsufficientData("no complete pairs")
    y = np.asarray(values, dtype=np.float64)
    n_groups, codes = _category_codes(labels)
    if n_groups < 2:
        raise InsufficientData("fewer than 2 non-empty groups")
    counts = np.bincount(codes, minlength=n_groups).astype(np.float64)
    sums = np.bincount(codes, weights=y, minlength=n_groups)
    grand_mean = y.mean()
    total = float(((y - grand_mean) ** 2).sum())
    if total == 0.0:
        return 0.0
    group_means = sums / counts
    between = float((counts * (group_means - grand_mean) ** 2).sum())
    return float(min(max(np.sqrt(between / total), 0.0), 1.0))


def pearson(a: Any, b: Any) -> float:
    """Sample Pearson correlation, in [-1, 1]."""
    xs, ys = paired_non_null(a, b)
    if len(xs) < 2:
        raise InsufficientData("fewer than 2 complete pairs")
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    dx = x - x.mean()
    dy = y - y.mean()
    denom = np.sqrt((dx**2).sum() * (dy**2).sum())
    if denom == 0.0:
        raise InsufficientData("zero variance")
    return float(min(max((dx * dy).sum() / denom, -1.0), 1.0))


def robust_outlier_scores(frame: Any, z_cap: float = 10.0) -> np.ndarray:
    """Per-row outlier score: max over numeric columns of the robust z-score.

    z = |x - median| / (1.4826 * MAD). When MAD is zero the score is 0 for
    cells equal to the median and ``z_cap`` otherwise; null cells score 0.
    """
    from ..model import ColumnKind  # local import to keep stats standalone

    numeric_cols = [s.name for s in frame.schema.columns if s.kind is ColumnKind.NUMERIC]
    if not numeric_cols:
        raise InsufficientData("no numeric columns")
    scores = np.zeros(frame.row_count, dtype=np.float64)
    for name in numeric_cols:
        col = frame.numeric(name)
        mask = ~np.isnan(col)
        if not mask.any():
            continue
        values = col[mask]
        med = float(np.median(values))
        mad = float(np.median(np.abs(values - med)))
        z = np.zeros(frame.row_count, dtype=np.float64)
        if mad == 0.0:
            z[mask] = np.where(col[mask] == med, 0.0, z_cap)
        else:
            z[mask] = np.abs(col[mask] - med) / (MAD_SCALE * mad)
        np.maximum(scores, z, out=scores)
    return scores


def _midranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.float64)
    sx = x[order]
    boundaries = np.flatnonzero(np.r_[True, sx[1:] != sx[:-1], True])
    for k in range(boundaries.size - 1):
        lo, hi = boundaries[k], boundaries[k + 1]
        ranks[order[lo:hi]] = 0.5 * (lo + hi - 1) + 1.0
    return ranks


def auc_roc(scores: Any, binary_labels: Any) -> float:
    """Mann-Whitney AUC with midrank tie handling."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(binary_labels, dtype=np.float64)
    if s.size != y.size:
        raise ValueError("scores and labels must have equal length")
    n_pos = float((y == 1).sum())
    n_neg = float((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise InsufficientData("labels contain a single class")
    ranks = _midranks(s)
    rank_pos = float(ranks[y == 1].sum())
    auc = (rank_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    return float(min(max(auc, 0.0), 1.0))


def expected_calibration_error(
    probabilities: Any,
    true_labels: Sequence,
    bins: int,
    class_order: Sequence | None = None,
) -> float:
    """Equal-width-binned gap between max-class confidence and accuracy."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    matrix = np.asarray(probabilities, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise InsufficientData("no predictions")
    if len(true_labels) != matrix.shape[0]:
        raise ValueError("true_labels length must match probability rows")
    predicted_idx = matrix.argmax(axis=1)
    confidences = matrix[np.arange(matrix.shape[0]), predicted_idx]
    if class_order is not None:
        index = {c: i for i, c in enumerate(class_order)}
        truth_idx = np.fromiter((index.get(v, -1) for v in true_labels), dtype=np.intp, count=len(true_labels))
    else:
        truth_idx = np.asarray(true_labels, dtype=np.intp)
    correct = (predicted_idx == truth_idx).astype(np.float64)
    bin_idx = np.minimum((confidences * bins).astype(np.intp), bins - 1)
    total = matrix.shape[0]
    ece = 0.0
    for b in range(bins):
        mask = bin_idx == b
        n_b = int(mask.sum())
        if n_b == 0:
            continue
        acc = float(correct[mask].mean())
        conf = float(confidences[mask].mean())
        ece += (n_b / total) * abs(acc - conf)
    return float(ece)


def confusion_matrix(
    true_labels: Sequence, predicted_labels: Sequence
) -> tuple[list, np.ndarray, np.ndarray, np.ndarray]:
    """k-by-k count matrix over the unioned label universe.

    Returns (labels, matrix[true, pred], precision, recall); precision and
    recall fall back to 0 where the denominator is 0.
    """
    if len(true_labels) != len(predicted_labels):
        raise ValueError("label vectors must have equal length")
    labels = sorted(set(true_labels) | set(predicted_labels))
    index = {c: i for i, c in enumerate(labels)}
    k = len(labels)
    matrix = np.zeros((k, k), dtype=np.int64)
    for t, p in zip(true_labels, predicted_labels):
        matrix[index[t], index[p]] += 1
    diag = np.diag(matrix).astype(np.float64)
    col_sums = matrix.sum(axis=0).astype(np.float64)
    row_sums = matrix.sum(axis=1).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(col_sums > 0, diag / np.maximum(col_sums, 1), 0.0)
        recall = np.where(row_sums > 0, diag / np.maximum(row_sums, 1), 0.0)
    return labels, matrix, precision, recall


def _non_null_numeric(values: Any) -> np.ndarray:
    if isinstance(values, np.ndarray):
        arr = values.astype(np.float64, copy=False)
    else:
        arr = np.asarray([np.nan if v is None else float(v) for v in values], dtype=np.float64)
    return arr[~np.isnan(arr)]
