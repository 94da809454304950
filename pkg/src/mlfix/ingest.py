"""Client-side ingestion: CSV and sidecar readers plus bundle assembly.

Error messages report paths, column names and line numbers, never cell
content, so nothing raw can leak through logs or stderr.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from . import __version__
from .checks import CheckConfig, CheckContext, compute_dataset_statistics, run_suite
from .frame import NULL_TOKENS, ColumnMeta, PredictionSet, TableFrame, format_label
from .model import (
    ArtifactBundle,
    CheckCategory,
    CheckpointMetadata,
    ColumnKind,
    DatasetRef,
    DatasetSchema,
    TaskKind,
    WireError,
    _load_document,
    encode_bundle,
    utc_now,
)

CREATED_AT_ENV = "MLFIX_CREATED_AT"


class IngestError(Exception):
    """Unreadable or inconsistent input files (CLI exit code 2)."""


@dataclass
class IngestConfig:
    train_path: str
    test_path: str
    schema_path: str
    output_path: str
    predictions_train_path: str | None = None
    predictions_test_path: str | None = None
    checkpoint_path: str | None = None
    check_config_path: str | None = None


def read_csv(path: str | Path, schema: DatasetSchema) -> TableFrame:
    """Parse a UTF-8 CSV with a header row into a typed TableFrame.

    Header order may differ from the schema; null tokens map to null in every
    column; unparsable numeric cells become null and are counted as parse
    warnings.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"input file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise IngestError(f"{path}: file is empty, expected a header row") from None
            declared = {spec.name for spec in schema.columns}
            missing = declared - set(header)
            if missing:
                raise IngestError(f"{path}: missing column(s): {', '.join(sorted(missing))}")
            extra = set(header) - declared
            if extra:
                raise IngestError(f"{path}: column(s) not declared in schema: {', '.join(sorted(extra))}")
            width = len(header)
            rows = []
            for line_no, row in enumerate(reader, start=2):
                if len(row) != width:
                    raise IngestError(f"{path}: line {line_no}: expected {width} fields, found {len(row)}")
                rows.append(row)
    except UnicodeDecodeError as err:
        raise IngestError(f"{path}: not valid UTF-8: {err.reason} at byte {err.start}") from None
    except csv.Error as err:
        raise IngestError(f"{path}: CSV parse error: {err}") from None

    raw_columns = dict(zip(header, zip(*rows))) if rows else {name: () for name in header}
    columns: dict[str, Any] = {}
    meta: dict[str, ColumnMeta] = {}
    for spec in schema.columns:
        cells = pd.Series(raw_columns[spec.name], dtype=object)
        columns[spec.name], meta[spec.name] = _parse_column(cells, spec.kind)
    return TableFrame(schema, columns, column_meta=meta)


def _parse_column(cells: pd.Series, kind: ColumnKind) -> tuple[Any, ColumnMeta]:
    column_meta = ColumnMeta()
    if len(cells) == 0:
        return (np.empty(0, dtype=np.float64) if kind is ColumnKind.NUMERIC else []), column_meta

    if kind is ColumnKind.NUMERIC:
        # parse first; only the cells that fail need token inspection
        parsed = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=np.float64)
        ok = np.isfinite(parsed)
        if not ok.all():
            for cell in cells.to_numpy(dtype=object)[~ok]:
                folded = cell.strip().casefold()
                if folded in NULL_TOKENS:
                    column_meta.null_token_counts[folded] = column_meta.null_token_counts.get(folded, 0) + 1
                else:
                    column_meta.parse_warnings += 1
        column_meta.numeric_cells = int(ok.sum())
        return np.where(ok, parsed, np.nan), column_meta

    # fold only the distinct values, then null out matching cells in one pass
    counts = cells.value_counts()
    raw_null: list[str] = []
    for raw, count in zip(counts.index.to_numpy(dtype=object), counts.to_numpy()):
        folded = raw.strip().casefold()
        if folded in NULL_TOKENS:
            raw_null.append(raw)
            column_meta.null_token_counts[folded] = column_meta.null_token_counts.get(folded, 0) + int(count)
    null_mask = cells.isin(raw_null).to_numpy() if raw_null else np.zeros(len(cells), dtype=bool)

    null_set = set(raw_null)
    non_null_uniques = [u for u in counts.index if u not in null_set]
    if non_null_uniques:
        numeric_like = pd.to_numeric(pd.Series(non_null_uniques, dtype=object), errors="coerce").notna().to_numpy()
        unique_counts = counts.loc[non_null_uniques].to_numpy()
        column_meta.numeric_cells = int(unique_counts[numeric_like].sum())
        column_meta.string_cells = int(unique_counts[~numeric_like].sum())
    raw = cells.to_numpy(dtype=object)
    out = [None if is_null else cell for cell, is_null in zip(raw, null_mask)]
    return out, column_meta


def read_schema(path: str | Path) -> DatasetSchema:
    try:
        raw = Path(path).read_bytes()
    except OSError as err:
        raise IngestError(f"cannot read schema file {path}: {err.strerror}") from None
    try:
        return DatasetSchema.from_dict(_load_document(raw, "schema"))
    except WireError as err:
        raise IngestError(f"{path}: {err}") from None


def read_predictions(path: str | Path, ref: DatasetRef, schema: DatasetSchema) -> PredictionSet:
    try:
        raw = Path(path).read_bytes()
    except OSError as err:
        raise IngestError(f"cannot read predictions file {path}: {err.strerror}") from None
    data = _load_json(raw, path)
    declared_ref = data.get("dataset_ref")
    if declared_ref is not None and declared_ref != ref.value:
        raise IngestError(f"{path}: dataset_ref is {declared_ref!r}, expected {ref.value!r}")
    labels = data.get("predicted_labels")
    if not isinstance(labels, list):
        raise IngestError(f"{path}: predicted_labels must be an array")
    if schema.task is TaskKind.CLASSIFICATION:
        predicted = [format_label(v) for v in labels]
    else:
        try:
            predicted = [float(v) for v in labels]
        except (TypeError, ValueError):
            raise IngestError(f"{path}: regression predictions must be numeric") from None
    class_order = data.get("class_order")
    try:
        return PredictionSet(
            dataset_ref=ref,
            predicted_labels=predicted,
            probabilities=data.get("probabilities"),
            class_order=[format_label(c) for c in class_order] if class_order is not None else None,
        )
    except ValueError as err:
        raise IngestError(f"{path}: {err}") from None


def read_checkpoint(path: str | Path) -> CheckpointMetadata:
    try:
        raw = Path(path).read_bytes()
    except OSError as err:
        raise IngestError(f"cannot read checkpoint file {path}: {err.strerror}") from None
    try:
        return CheckpointMetadata.from_dict(_load_document(raw, "checkpoint"), "checkpoint")
    except WireError as err:
        raise IngestError(f"{path}: {err}") from None


def read_check_config(path: str | Path) -> CheckConfig:
    try:
        raw = Path(path).read_bytes()
    except OSError as err:
        raise IngestError(f"cannot read config file {path}: {err.strerror}") from None
    data = _load_json(raw, path)
    try:
        return CheckConfig.from_dict(data)
    except (TypeError, ValueError) as err:
        raise IngestError(f"{path}: {err}") from None


def _load_json(raw: bytes, path: str | Path) -> dict:
    try:
        data = _load_document(raw, str(path))
    except WireError as err:
        raise IngestError(str(err)) from None
    if not isinstance(data, dict):
        raise IngestError(f"{path}: expected a JSON object")
    return data


def _created_at() -> datetime:
    pinned = os.environ.get(CREATED_AT_ENV)
    if not pinned:
        return utc_now()
    try:
        parsed = datetime.fromisoformat(pinned.replace("Z", "+00:00"))
    except ValueError:
        raise IngestError(f"{CREATED_AT_ENV} is not an ISO-8601 timestamp: {pinned!r}") from None
    return parsed.astimezone(timezone.utc) if parsed.tzinfo else parsed.replace(tzinfo=timezone.utc)


def build_bundle(config: IngestConfig) -> ArtifactBundle:
    """Run statistics plus all three suites and assemble the bundle."""
    schema = read_schema(config.schema_path)
    train = read_csv(config.train_path, schema)
    test = read_csv(config.test_path, schema)
    train_preds = (
        read_predictions(config.predictions_train_path, DatasetRef.TRAIN, schema)
        if config.predictions_train_path
        else None
    )
    test_preds = (
        read_predictions(config.predictions_test_path, DatasetRef.TEST, schema)
        if config.predictions_test_path
        else None
    )
    checkpoint = read_checkpoint(config.checkpoint_path) if config.checkpoint_path else None
    check_config = read_check_config(config.check_config_path) if config.check_config_path else CheckConfig()
    try:
        ctx = CheckContext(
            train=train,
            test=test,
            train_predictions=train_preds,
            test_predictions=test_preds,
            config=check_config,
        )
    except ValueError as err:
        raise IngestError(str(err)) from None

    return ArtifactBundle(
        created_at=_created_at(),
        train_stats=compute_dataset_statistics(train),
        test_stats=compute_dataset_statistics(test),
        integrity_results=tuple(run_suite(CheckCategory.DATA_INTEGRITY, ctx)),
        validation_results=tuple(run_suite(CheckCategory.TRAIN_TEST_VALIDATION, ctx)),
        evaluation_results=tuple(run_suite(CheckCategory.MODEL_EVALUATION, ctx)),
        checkpoint=checkpoint,
        client_info={"tool": "mlfix", "version": __version__},
    )


def ingest(config: IngestConfig) -> ArtifactBundle:
    """Build the bundle and write its canonical encoding to the output path.

    Nothing is written when any input fails to read or validate.
    """
    bundle = build_bundle(config)
    payload = encode_bundle(bundle)
    out = Path(config.output_path)
    if out.parent and not out.parent.exists():
        raise IngestError(f"output directory does not exist: {out.parent}")
    out.write_bytes(payload)
    return bundle
