import json

import pytest

from conftest import FailingProvider
from mlfix.agents import StubProvider, analyze_checkpoint, analyze_checks, analyze_dataset, prompt_hash
from mlfix.agents.analyzers import severity_for_result
from mlfix.agents.prompts import (
    checkpoint_analyzer_request,
    checks_analyzer_request,
    dataset_analyzer_request,
)
from mlfix.model import (
    CheckCategory,
    CheckResult,
    CheckStatus,
    CheckpointMetadata,
    ColumnKind,
    ColumnStatistics,
    DatasetStatistics,
    Severity,
)


def make_result(check_id, category, status, metrics, condition, details=None):
    return CheckResult(
        check_id=check_id,
        category=category,
        status=status,
        metrics=metrics,
        condition=condition,
        summary=f"{check_id} summary",
        details=details or {},
    )


def stats(sample_count=100, class_distribution=None, columns=()):
    return DatasetStatistics(
        sample_count=sample_count,
        per_column=tuple(columns),
        class_distribution=class_distribution,
    )


LABEL_DRIFT_FAIL = make_result(
    "label_drift",
    CheckCategory.TRAIN_TEST_VALIDATION,
    CheckStatus.FAIL,
    {"cramers_v": 0.92},
    "cramers_v <= 0.15",
)


class TestSeverityMapping:
    def test_validation_fail_beyond_3x_is_critical(self):
        assert severity_for_result(LABEL_DRIFT_FAIL) is Severity.CRITICAL

    def test_validation_fail_within_3x_is_high(self):
        result = make_result(
            "label_drift", CheckCategory.TRAIN_TEST_VALIDATION, CheckStatus.FAIL,
            {"cramers_v": 0.2}, "cramers_v <= 0.15",
        )
        assert severity_for_result(result) is Severity.HIGH

    def test_exact_zero_condition_violation_is_critical(self):
        result = make_result(
            "new_label", CheckCategory.TRAIN_TEST_VALIDATION, CheckStatus.FAIL,
            {"new_label_ratio": 0.75, "new_label_count": 3.0}, "new_label_ratio == 0",
        )
        assert severity_for_result(result) is Severity.CRITICAL

    def test_ratio_condition_uses_inverse_rule(self):
        barely = make_result(
            "datasets_size_comparison", CheckCategory.TRAIN_TEST_VALIDATION, CheckStatus.FAIL,
            {"size_ratio": 0.09}, "size_ratio >= 0.1",
        )
        assert severity_for_result(barely) is Severity.HIGH
        severe = make_result(
            "datasets_size_comparison", CheckCategory.TRAIN_TEST_VALIDATION, CheckStatus.FAIL,
            {"size_ratio": 0.01}, "size_ratio >= 0.1",
        )
        assert severity_for_result(severe) is Severity.CRITICAL

    def test_integrity_leakage_class_is_high_others_medium(self):
        leak = make_result(
            "conflicting_labels", CheckCategory.DATA_INTEGRITY, CheckStatus.FAIL,
            {"conflict_count": 2.0}, "conflict_count == 0",
        )
        assert severity_for_result(leak) is Severity.HIGH
        plain = make_result(
            "data_duplicates", CheckCategory.DATA_INTEGRITY, CheckStatus.FAIL,
            {"duplicate_fraction": 0.5}, "duplicate_fraction <= 0.05",
        )
        assert severity_for_result(plain) is Severity.MEDIUM

    def test_evaluation_fail_is_medium_and_warn_is_low(self):
        evaluation = make_result(
            "calibration_score", CheckCategory.MODEL_EVALUATION, CheckStatus.FAIL,
            {"ece": 0.4}, "ece <= 0.1",
        )
        assert severity_for_result(evaluation) is Severity.MEDIUM
        warn = make_result(
            "feature_feature_correlation", CheckCategory.DATA_INTEGRITY, CheckStatus.WARN,
            {"high_correlation_pairs": 1.0}, "high_correlation_pairs == 0",
        )
        assert severity_for_result(warn) is Severity.LOW


class TestChecksAnalyzer:
    def test_all_pass_yields_nothing(self):
        results = [
            make_result("percent_of_nulls", CheckCategory.DATA_INTEGRITY, CheckStatus.PASS,
                        {"max_null_fraction": 0.0}, "max_null_fraction <= 0.05")
        ]
        findings, degraded = analyze_checks(results, None)
        assert findings == []

    def test_label_drift_fail_becomes_critical_finding(self):
        findings, _ = analyze_checks([LABEL_DRIFT_FAIL], None)
        assert len(findings) == 1
        finding = findings[0]
        assert finding.finding_id == "checks.label_drift"
        assert finding.severity is Severity.CRITICAL
        assert finding.confidence == 0.95
        assert any(ev.metric == "cramers_v" and ev.value == 0.92 for ev in finding.evidence)
        assert "0.15" in finding.description

    def test_three_fails_three_findings_with_distinct_evidence(self):
        results = [
            LABEL_DRIFT_FAIL,
            make_result("new_label", CheckCategory.TRAIN_TEST_VALIDATION, CheckStatus.FAIL,
                        {"new_label_ratio": 0.75}, "new_label_ratio == 0"),
            make_result("data_duplicates", CheckCategory.DATA_INTEGRITY, CheckStatus.FAIL,
                        {"duplicate_fraction": 0.2}, "duplicate_fraction <= 0.05"),
        ]
        findings, _ = analyze_checks(results, None)
        cited = {ev.check_id for f in findings for ev in f.evidence}
        assert len(findings) == 3
        assert cited == {"label_drift", "new_label", "data_duplicates"}

    def test_errored_check_surfaces_as_info(self):
        results = [
            make_result("roc_report", CheckCategory.MODEL_EVALUATION, CheckStatus.ERROR,
                        {}, "min_class_auc >= 0.7")
        ]
        findings, _ = analyze_checks(results, None)
        assert findings[0].severity is Severity.INFO
        assert "could not run" in findings[0].description

    def test_provider_can_add_but_not_remove(self):
        request = checks_analyzer_request([LABEL_DRIFT_FAIL.to_dict()])
        scripted = {
            prompt_hash(request): json.dumps(
                {"findings": [{"severity": "low", "confidence": 0.7,
                               "description": "pattern across checks",
                               "evidence": [{"check_id": "label_drift", "metric": "cramers_v", "value": 0.92}]}]}
            )
        }
        findings, degraded = analyze_checks([LABEL_DRIFT_FAIL], StubProvider(scripted))
        assert not degraded
        ids = [f.finding_id for f in findings]
        assert "checks.label_drift" in ids
        assert "checks.provider.1" in ids

    def test_provider_failure_degrades_to_rules(self):
        findings, degraded = analyze_checks([LABEL_DRIFT_FAIL], FailingProvider())
        assert degraded
        assert [f.finding_id for f in findings] == ["checks.label_drift"]


class TestDatasetAnalyzer:
    def test_balanced_stats_produce_no_rule_findings(self):
        train = stats(class_distribution={"a": 50, "b": 50})
        test = stats(class_distribution={"a": 25, "b": 25})
        findings, _ = analyze_dataset(train, test, None)
        assert findings == []

    def test_imbalance_rule(self):
        train = stats(class_distribution={"a": 98, "b": 2})
        test = stats(class_distribution={"a": 49, "b": 1})
        findings, _ = analyze_dataset(train, test, None, known_check_ids={"class_imbalance"})
        assert len(findings) == 1
        finding = findings[0]
        assert finding.finding_id == "dataset.class_imbalance"
        assert finding.severity is Severity.HIGH
        assert finding.evidence[0].check_id == "class_imbalance"

    def test_null_fraction_rule_carries_column_reference(self):
        column = ColumnStatistics(name="age", kind=ColumnKind.NUMERIC, null_fraction=0.4, distinct_count=3)
        findings, _ = analyze_dataset(
            stats(columns=[column]), stats(), None, known_check_ids={"percent_of_nulls"}
        )
        assert findings[0].finding_id == "dataset.nulls.age"
        assert findings[0].severity is Severity.MEDIUM
        assert findings[0].evidence[0].column == "age"

    def test_class_divergence_rule(self):
        train = stats(class_distribution={"a": 90, "b": 10})
        test = stats(class_distribution={"a": 10, "b": 90})
        findings, _ = analyze_dataset(train, test, None, known_check_ids={"label_drift"})
        assert findings[0].finding_id == "dataset.class_divergence"
        assert findings[0].evidence[0].value == pytest.approx(0.8)

    def test_scripted_provider_adds_finding(self):
        train, test = stats(), stats()
        request = dataset_analyzer_request(train.to_dict(), test.to_dict())
        scripted = {prompt_hash(request): json.dumps(
            {"findings": [{"severity": "medium", "description": "odd distribution"}]}
        )}
        findings, degraded = analyze_dataset(train, test, StubProvider(scripted))
        assert not degraded
        assert [f.finding_id for f in findings] == ["dataset.provider.1"]
        assert findings[0].confidence == 0.6  # default when the provider omits it


class TestCheckpointAnalyzer:
    def test_absent_checkpoint_single_info(self):
        findings, degraded = analyze_checkpoint(None, stats(), None)
        assert len(findings) == 1
        assert findings[0].severity is Severity.INFO
        assert findings[0].finding_id == "checkpoint.absent"
        assert not degraded

    def test_consistent_checkpoint_stays_quiet(self):
        meta = CheckpointMetadata(architecture="mlp", parameter_count=1000, num_classes=2, docstring="doc")
        findings, _ = analyze_checkpoint(meta, stats(class_distribution={"a": 5, "b": 5}), None)
        assert all(f.severity is Severity.INFO for f in findings)
        assert findings == []

    def test_class_count_mismatch_is_critical(self):
        meta = CheckpointMetadata(architecture="mlp", parameter_count=1000, num_classes=10, docstring="d")
        findings, _ = analyze_checkpoint(meta, stats(class_distribution={"a": 4, "b": 4, "c": 4}), None)
        assert findings[0].finding_id == "checkpoint.config_mismatch"
        assert findings[0].severity is Severity.CRITICAL

    def test_zero_parameters_and_missing_docstring(self):
        meta = CheckpointMetadata(architecture="mlp", parameter_count=0)
        findings, _ = analyze_checkpoint(meta, stats(), None)
        by_id = {f.finding_id: f for f in findings}
        assert by_id["checkpoint.empty_parameters"].severity is Severity.CRITICAL
        assert by_id["checkpoint.no_docstring"].severity is Severity.INFO

    def test_provider_call_uses_template(self):
        meta = CheckpointMetadata(architecture="mlp", parameter_count=10, num_classes=2, docstring="d")
        train = stats(class_distribution={"a": 5, "b": 5})
        request = checkpoint_analyzer_request(meta.to_dict(), train.to_dict())
        scripted = {prompt_hash(request): json.dumps({"findings": []})}
        findings, degraded = analyze_checkpoint(meta, train, StubProvider(scripted))
        assert not degraded
        assert findings == []
