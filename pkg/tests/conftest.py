from __future__ import annotations

from datetime import datetime, timezone

import pytest

from mlfix.agents.providers import ProviderUnavailable
from mlfix.checks import CheckConfig, CheckContext, compute_dataset_statistics, run_suite
from mlfix.frame import PredictionSet, TableFrame
from mlfix.model import (
    ArtifactBundle,
    CheckCategory,
    ColumnKind,
    ColumnSpec,
    DatasetSchema,
    TaskKind,
)

FIXED_CREATED_AT = datetime(2026, 8, 9, 12, 0, 0, tzinfo=timezone.utc)


def make_schema(
    numeric=("f1", "f2"),
    categorical=("color",),
    text=(),
    label="label",
    index=None,
    task=TaskKind.CLASSIFICATION,
) -> DatasetSchema:
    columns = []
    if index is not None:
        columns.append(ColumnSpec(index, ColumnKind.IDENTIFIER))
    columns += [ColumnSpec(name, ColumnKind.NUMERIC) for name in numeric]
    columns += [ColumnSpec(name, ColumnKind.CATEGORICAL) for name in categorical]
    columns += [ColumnSpec(name, ColumnKind.TEXT) for name in text]
    if label is not None:
        columns.append(ColumnSpec(label, ColumnKind.CATEGORICAL))
    return DatasetSchema(columns=tuple(columns), task=task, label_column=label, index_column=index)


def make_frame(schema: DatasetSchema, **columns) -> TableFrame:
    return TableFrame.from_columns(schema, columns)


def make_context(train: TableFrame, test: TableFrame | None = None, **kwargs) -> CheckContext:
    return CheckContext(train=train, test=test, **kwargs)


def bundle_from_frames(
    train: TableFrame,
    test: TableFrame,
    train_predictions: PredictionSet | None = None,
    test_predictions: PredictionSet | None = None,
    checkpoint=None,
    config: CheckConfig | None = None,
) -> ArtifactBundle:
    ctx = CheckContext(
        train=train,
        test=test,
        train_predictions=train_predictions,
        test_predictions=test_predictions,
        config=config or CheckConfig(),
    )
    return ArtifactBundle(
        created_at=FIXED_CREATED_AT,
        train_stats=compute_dataset_statistics(train),
        test_stats=compute_dataset_statistics(test),
        integrity_results=tuple(run_suite(CheckCategory.DATA_INTEGRITY, ctx)),
        validation_results=tuple(run_suite(CheckCategory.TRAIN_TEST_VALIDATION, ctx)),
        evaluation_results=tuple(run_suite(CheckCategory.MODEL_EVALUATION, ctx)),
        checkpoint=checkpoint,
        client_info={"tool": "mlfix", "version": "test"},
    )


class FailingProvider:
    """Provider that is always down; exercises degraded paths."""

    provider_id = "down"

    def complete(self, request):
        raise ProviderUnavailable("provider is down")

    def reachable(self):
        return False


@pytest.fixture
def clean_split():
    """A small clean classification split shared by many tests."""
    schema = make_schema()
    train = make_frame(
        schema,
        f1=[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
        f2=[10.0, 11.0, 9.0, 12.0, 10.5, 11.5, 9.5, 12.5],
        color=["red", "green", "red", "blue", "green", "red", "blue", "green"],
        label=["yes", "no", "yes", "no", "yes", "no", "yes", "no"],
    )
    test = make_frame(
        schema,
        f1=[1.5, 3.5, 5.5, 7.5],
        f2=[9.0, 10.5, 11.0, 12.5],
        color=["red", "green", "blue", "red"],
        label=["yes", "no", "yes", "no"],
    )
    return schema, train, test
