import numpy as np
import pytest

from conftest import make_context, make_frame, make_schema
from mlfix.checks import CheckConfig, run_check, run_suite
from mlfix.model import CheckCategory, CheckStatus, ColumnKind, ColumnSpec, DatasetSchema, TaskKind


def test_validation_suite_skips_without_test(clean_split):
    _, train, _ = clean_split
    results = run_suite(CheckCategory.TRAIN_TEST_VALIDATION, make_context(train))
    assert len(results) == 8
    assert all(r.status is CheckStatus.SKIPPED for r in results)


def test_datasets_size_comparison():
    schema = make_schema(numeric=("x",), categorical=(), label=None)
    train = make_frame(schema, x=list(map(float, range(100))))
    test = make_frame(schema, x=[1.0, 2.0])
    result = run_check("datasets_size_comparison", make_context(train, test))
    assert result.status is CheckStatus.FAIL
    assert result.metrics["size_ratio"] == 0.02


def test_new_label_ratio_from_table_ii():
    schema = make_schema(numeric=(), categorical=(), label="label")
    train = make_frame(schema, label=["a"] * 8)
    test = make_frame(schema, label=["a", "b", "c", "d"])
    result = run_check("new_label", make_context(train, test))
    assert result.status is CheckStatus.FAIL
    assert result.metrics["new_label_ratio"] == 0.75
    assert result.metrics["new_label_count"] == 3.0
    assert result.details == {"b": 1.0, "c": 1.0, "d": 1.0}


def test_new_label_passes_when_covered():
    schema = make_schema(numeric=(), categorical=(), label="label")
    train = make_frame(schema, label=["a", "b"])
    test = make_frame(schema, label=["b", "a"])
    assert run_check("new_label", make_context(train, test)).status is CheckStatus.PASS


def test_new_category_row_fraction():
    schema = make_schema(numeric=(), categorical=("c",), label=None)
    train = make_frame(schema, c=["u", "v", "u", "v"])
    test = make_frame(schema, c=["u", "w", "w", "v"])
    result = run_check("new_category", make_context(train, test))
    assert result.status is CheckStatus.FAIL
    assert result.metrics["max_new_category_fraction"] == 0.5
    assert result.details["c"] == 0.5


def test_index_leakage_overlap():
    schema = make_schema(numeric=("x",), categorical=(), label=None, index="id")
    train = make_frame(schema, id=["r1", "r2", "r3"], x=[1.0, 2.0, 3.0])
    test = make_frame(schema, id=["r3", "r4"], x=[4.0, 5.0])
    result = run_check("index_leakage", make_context(train, test))
    assert result.status is CheckStatus.FAIL
    assert result.metrics["index_overlap_ratio"] == 0.5
    assert result.metrics["index_overlap_count"] == 1.0


def test_index_leakage_skips_without_index():
    schema = make_schema(numeric=("x",), categorical=(), label=None)
    train = make_frame(schema, x=[1.0])
    test = make_frame(schema, x=[2.0])
    assert run_check("index_leakage", make_context(train, test)).status is CheckStatus.SKIPPED


def test_train_test_samples_mix():
    schema = make_schema(numeric=("x",), categorical=(), label="label")
    train = make_frame(schema, x=[1.0, 2.0, 3.0, 4.0], label=["a", "b", "a", "b"])
    test = make_frame(schema, x=[1.0, 9.0], label=["a", "b"])  # first row verbatim in train
    result = run_check("train_test_samples_mix", make_context(train, test))
    assert result.status is CheckStatus.FAIL
    assert result.metrics["mixed_fraction"] == 0.5
    assert result.metrics["mixed_rows"] == 1.0


def test_label_drift_categorical_severe_magnitude():
    schema = make_schema(numeric=(), categorical=(), label="label")
    train = make_frame(schema, label=["a"] * 48)
    test = make_frame(schema, label=["a"] * 4 + ["b"] * 16 + ["c"] * 16 + ["d"] * 16)
    result = run_check("label_drift", make_context(train, test))
    assert result.status is CheckStatus.FAIL
    assert 0.90 <= result.metrics["cramers_v"] <= 0.94
    assert "0.15" in result.condition


def test_label_drift_identical_splits_passes(clean_split):
    _, train, _ = clean_split
    result = run_check("label_drift", make_context(train, train))
    assert result.status is CheckStatus.PASS
    assert result.metrics["cramers_v"] == 0.0


def test_label_drift_numeric_uses_ks():
    schema = DatasetSchema(
        columns=(ColumnSpec("x", ColumnKind.NUMERIC), ColumnSpec("y", ColumnKind.NUMERIC)),
        task=TaskKind.REGRESSION,
        label_column="y",
    )
    train = make_frame(schema, x=[1.0, 2.0, 3.0], y=[1.0, 2.0, 3.0])
    test = make_frame(schema, x=[1.0, 2.0, 3.0], y=[10.0, 11.0, 12.0])
    result = run_check("label_drift", make_context(train, test))
    assert result.status is CheckStatus.FAIL
    assert result.metrics["ks"] == 1.0
    assert result.condition == "ks <= 0.15"


def test_feature_drift_reports_top_features():
    rng = np.random.default_rng(5)
    schema = make_schema(numeric=("a", "b"), categorical=("c",), label=None)
    n = 400
    train = make_frame(
        schema,
        a=list(rng.normal(0, 1, n)),
        b=list(rng.normal(0, 1, n)),
        c=list(rng.choice(["u", "v"], n)),
    )
    test = make_frame(
        schema,
        a=list(rng.normal(3, 1, n)),  # strongly shifted
        b=list(rng.normal(0, 1, n)),
        c=list(rng.choice(["u", "v"], n)),
    )
    result = run_check("feature_drift", make_context(train, test))
    assert result.status is CheckStatus.FAIL
    assert result.metrics["max_feature_drift"] > 0.8
    assert max(result.details, key=result.details.get) == "a"
    assert len(result.details) <= 5


def test_multivariate_drift_determinism(clean_split):
    rng = np.random.default_rng(11)
    schema = make_schema(numeric=("a", "b"), categorical=(), label=None)
    n = 60
    train = make_frame(schema, a=list(rng.normal(0, 1, n)), b=list(rng.normal(0, 1, n)))
    test = make_frame(schema, a=list(rng.normal(4, 1, n)), b=list(rng.normal(0, 1, n)))
    ctx = make_context(train, test, config=CheckConfig(random_seed=99))
    first = run_check("multivariate_drift", ctx)
    second = run_check("multivariate_drift", ctx)
    assert first == second
    assert first.status is CheckStatus.FAIL
    assert first.metrics["drift_score"] > 0.8
    assert "a" in first.details


def test_multivariate_drift_skips_below_twenty_rows():
    schema = make_schema(numeric=("a",), categorical=(), label=None)
    train = make_frame(schema, a=[float(i) for i in range(5)])
    test = make_frame(schema, a=[float(i) for i in range(5)])
    result = run_check("multivariate_drift", make_context(train, test))
    assert result.status is CheckStatus.SKIPPED
    assert "20" in result.summary
