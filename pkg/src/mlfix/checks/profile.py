"""Dataset statistics extraction: sample counts, per-column summaries and the
class distribution.

Raw values are surfaced only where they are aggregate-like: top categories of
declared categorical columns and class labels. Text, identifier and datetime
columns report null fraction and distinct count only, so free-form cell
content never leaves the client.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from ..frame import TableFrame, format_label
from ..model import (
    ColumnKind,
    ColumnStatistics,
    DatasetStatistics,
    NumericSummary,
    TaskKind,
    TopValue,
)

TOP_K = 10


def compute_dataset_statistics(table: TableFrame) -> DatasetStatistics:
    per_column = []
    for spec in table.schema.columns:
        col = table.columns[spec.name]
        if spec.kind is ColumnKind.NUMERIC:
            values = table.numeric_values(spec.name)
            null_fraction = 1.0 - values.size / table.row_count if table.row_count else 0.0
            summary = _numeric_summary(values)
            per_column.append(
                ColumnStatistics(
                    name=spec.name,
                    kind=spec.kind,
                    null_fraction=float(null_fraction),
                    distinct_count=int(np.unique(values).size),
                    numeric_summary=summary,
                )
            )
        else:
            non_null = [v for v in col if v is not None]
            null_fraction = 1.0 - len(non_null) / table.row_count if table.row_count else 0.0
            counts = Counter(non_null)
            top_values = None
            if spec.kind is ColumnKind.CATEGORICAL:
                ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:TOP_K]
                top_values = tuple(TopValue(value=v, count=c) for v, c in ranked)
            per_column.append(
                ColumnStatistics(
                    name=spec.name,
                    kind=spec.kind,
                    null_fraction=float(null_fraction),
                    distinct_count=len(counts),
                    top_values=top_values,
                )
            )

    class_distribution = None
    if table.schema.task is TaskKind.CLASSIFICATION and table.schema.label_column is not None:
        label_col = table.columns[table.schema.label_column]
        if isinstance(label_col, np.ndarray):
            labels = [format_label(v) for v in label_col[~np.isnan(label_col)]]
        else:
            labels = [v for v in label_col if v is not None]
        class_distribution = dict(sorted(Counter(labels).items()))

    return DatasetStatistics(
        sample_count=table.row_count,
        per_column=tuple(per_column),
        class_distribution=class_distribution,
    )


def _numeric_summary(values: np.ndarray) -> NumericSummary | None:
    if values.size == 0:
        return None
    q1, q2, q3 = (float(q) for q in np.quantile(values, [0.25, 0.5, 0.75]))
    return NumericSummary(
        min=float(values.min()),
        max=float(values.max()),
        mean=float(values.mean()),
        std=float(values.std()),
        q1=q1,
        q2=q2,
        q3=q3,
    )


def imbalance_ratio(class_distribution: dict[str, int]) -> float | None:
    """Rarest over most frequent class count; None when undefined."""
    counts = [c for c in class_distribution.values() if c > 0]
    if not counts:
        return None
    return min(counts) / max(counts)
