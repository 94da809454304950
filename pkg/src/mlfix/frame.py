"""In-memory columnar table consumed by the check engine.

A TableFrame holds one typed vector per schema column: numeric columns are
float64 arrays with NaN as the null marker, everything else is a list of
interned strings (or None). Frames never cross the wire; only aggregates do.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from .model import ColumnKind, DatasetRef, DatasetSchema

# Cell tokens treated as null on ingestion, matched after strip + casefold.
NULL_TOKENS = frozenset({"", "null", "nan", "none", "n/a"})


def is_null_token(cell: str) -> bool:
    return cell.strip().casefold() in NULL_TOKENS


def format_label(value: Any) -> str:
    """Canonical string form of a class label; integral floats print as ints
    so CSV-parsed labels and JSON prediction labels compare equal."""
    if isinstance(value, float):
        return repr(int(value)) if value.is_integer() else repr(value)
    return str(value)


@dataclass
class ColumnMeta:
    """Parse-time census kept for checks that inspect raw cells.

    ``null_token_counts`` maps the casefolded null token to how often it
    appeared; ``numeric_cells``/``string_cells`` count non-null cells that do
    or do not parse as a number; ``parse_warnings`` counts numeric-column
    cells that could not be parsed and were nulled.
    """

    null_token_counts: dict[str, int] = field(default_factory=dict)
    numeric_cells: int = 0
    string_cells: int = 0
    parse_warnings: int = 0


class TableFrame:
    def __init__(
        self,
        schema: DatasetSchema,
        columns: Mapping[str, Any],
        column_meta: Mapping[str, ColumnMeta] | None = None,
    ):
        self.schema = schema
        self.columns: dict[str, Any] = {}
        self.column_meta: dict[str, ColumnMeta] = {}
        self._pandas: pd.DataFrame | None = None
        self._codes: dict[str, np.ndarray] = {}

        declared = [spec.name for spec in schema.columns]
        missing = [name for name in declared if name not in columns]
        if missing:
            raise ValueError(f"missing column(s): {', '.join(missing)}")
        extra = [name for name in columns if name not in declared]
        if extra:
            raise ValueError(f"undeclared column(s): {', '.join(extra)}")

        lengths = {len(columns[name]) for name in declared} or {0}
        if len(lengths) > 1:
            raise ValueError(f"column vectors have differing lengths: {sorted(lengths)}")
        self.row_count = lengths.pop()

        for spec in schema.columns:
            values = columns[spec.name]
            if spec.kind is ColumnKind.NUMERIC:
                arr = np.asarray(values, dtype=np.float64)
                if np.isinf(arr).any():
                    raise ValueError(f"column {spec.name!r}: numeric cells must be finite or null")
                self.columns[spec.name] = arr
            else:
                cells = [None if v is None else sys.intern(str(v)) for v in values]
                self.columns[spec.name] = cells
            meta = (column_meta or {}).get(spec.name)
            self.column_meta[spec.name] = meta if meta is not None else _census(spec.kind, self.columns[spec.name])

    @classmethod
    def from_columns(cls, schema: DatasetSchema, columns: Mapping[str, Sequence[Any]]) -> "TableFrame":
        """Build a frame from plain Python sequences; None marks null."""
        converted: dict[str, Any] = {}
        for spec in schema.columns:
            values = list(columns.get(spec.name, ()))
            if spec.kind is ColumnKind.NUMERIC:
                converted[spec.name] = [np.nan if v is None else float(v) for v in values]
            else:
                converted[spec.name] = values
        return cls(schema, converted)

    def numeric(self, name: str) -> np.ndarray:
        """Float64 vector of a numeric column (NaN marks null)."""
        return self.columns[name]

    def numeric_values(self, name: str) -> np.ndarray:
        """Non-null values of a numeric column."""
        arr = self.columns[name]
        return arr[~np.isnan(arr)]

    def strings(self, name: str) -> list:
        return self.columns[name]

    def categorical_codes(self, name: str) -> np.ndarray:
        """Float code per cell of a string-typed column (NaN marks null); codes
        follow the sorted category order. Cached: association measures are
        invariant under this relabeling, and codes make them vectorizable."""
        cached = self._codes.get(name)
        if cached is None:
            values = self.columns[name]
            cats = sorted({v for v in values if v is not None})
            index = {c: float(i) for i, c in enumerate(cats)}
            cached = np.fromiter(
                (index[v] if v is not None else np.nan for v in values),
                dtype=np.float64,
                count=len(values),
            )
            self._codes[name] = cached
        return cached

    def null_mask(self, name: str) -> np.ndarray:
        col = self.columns[name]
        if isinstance(col, np.ndarray):
            return np.isnan(col)
        return np.fromiter((v is None for v in col), dtype=bool, count=len(col))

    def to_pandas(self) -> pd.DataFrame:
        """DataFrame view used by row-wise checks; built once and cached."""
        if self._pandas is None:
            data = {}
            for spec in self.schema.columns:
                col = self.columns[spec.name]
                if isinstance(col, np.ndarray):
                    data[spec.name] = col
                else:
                    data[spec.name] = pd.array(col, dtype=object)
            self._pandas = pd.DataFrame(data, columns=[s.name for s in self.schema.columns])
        return self._pandas

    def label_values(self) -> list:
        """Non-null label cells (strings for classification, floats otherwise)."""
        name = self.schema.label_column
        if name is None:
            return []
        col = self.columns[name]
        if isinstance(col, np.ndarray):
            return [float(v) for v in col[~np.isnan(col)]]
        return [v for v in col if v is not None]


def _census(kind: ColumnKind, values: Any) -> ColumnMeta:
    meta = ColumnMeta()
    if kind is ColumnKind.NUMERIC:
        meta.numeric_cells = int((~np.isnan(values)).sum())
        return meta
    for v in values:
        if v is None:
            continue
        if _parses_as_number(v):
            meta.numeric_cells += 1
        else:
            meta.string_cells += 1
    return meta


def _parses_as_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


class PredictionSet:
    """Model predictions for one dataset split.

    ``predicted_labels`` holds class names for classification tasks and float
    predictions for regression. ``probabilities`` is an optional row-per-sample
    matrix whose columns follow ``class_order``.
    """

    def __init__(
        self,
        dataset_ref: DatasetRef,
        predicted_labels: Iterable[Any],
        probabilities: Any | None = None,
        class_order: Sequence[str] | None = None,
    ):
        self.dataset_ref = dataset_ref
        self.predicted_labels = list(predicted_labels)
        self.class_order = tuple(class_order) if class_order is not None else None
        self.probabilities: np.ndarray | None = None
        if probabilities is not None:
            matrix = np.asarray(probabilities, dtype=np.float64)
            if matrix.ndim != 2:
                raise ValueError("probabilities must be a rows-by-classes matrix")
            if matrix.shape[0] != len(self.predicted_labels):
                raise ValueError("probabilities row count must match predicted_labels length")
            if self.class_order is None:
                raise ValueError("class_order required when probabilities are given")
            if len(self.class_order) != matrix.shape[1]:
                raise ValueError("class_order length must match probability columns")
            if np.isnan(matrix).any() or (matrix < 0).any() or (matrix > 1).any():
                raise ValueError("probabilities must lie within [0, 1]")
            rowsums = matrix.sum(axis=1)
            if matrix.shape[1] and np.abs(rowsums - 1.0).max(initial=0.0) > 1e-6:
                raise ValueError("probability rows must sum to 1 within 1e-6")
            self.probabilities = matrix

    def validate_against(self, frame: TableFrame) -> None:
        if len(self.predicted_labels) != frame.row_count:
            raise ValueError(
                f"{self.dataset_ref.value} predictions hold {len(self.predicted_labels)} rows, "
                f"dataset has {frame.row_count}"
            )
