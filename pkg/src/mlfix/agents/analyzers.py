"""Parallel analyzers: deterministic rule passes first, then one provider
call each that may add findings but never remove rule findings."""

from __future__ import annotations

import re
from typing import Callable, Iterable

from ..model import (
    ArtifactBundle,
    CheckCategory,
    CheckResult,
    CheckStatus,
    CheckpointMetadata,
    DatasetStatistics,
    Evidence,
    Finding,
    Severity,
    SourceAgent,
)
from . import prompts
from .providers import Provider, ProviderError

RULE_CONFIDENCE = 0.95
PROVIDER_CONFIDENCE = 0.6
MAX_PROVIDER_FINDINGS = 5

IMBALANCE_RATIO_RULE = 0.1
NULL_FRACTION_RULE = 0.3
CLASS_DIVERGENCE_RULE = 0.25

# Integrity failures in these checks indicate leakage-like contamination and
# rank above ordinary quality defects.
_LEAKAGE_CLASS_INTEGRITY = {"conflicting_labels", "feature_label_correlation"}

_CONDITION_RE = re.compile(r"^(\w+) (<=|>=|==) ([0-9eE.+-]+)$")

AnalyzerOutput = tuple[list[Finding], bool]


def parse_condition(condition: str) -> tuple[str, str, float] | None:
    match = _CONDITION_RE.match(condition)
    if not match:
        return None
    metric, comparator, raw = match.groups()
    try:
        return metric, comparator, float(raw)
    except ValueError:
        return None


def _severe_violation(result: CheckResult) -> bool:
    """A validation failure counts as severe when the primary metric lands
    beyond three times its threshold (or violates an exact-zero condition)."""
    parsed = parse_condition(result.condition)
    if parsed is None:
        return False
    metric, comparator, threshold = parsed
    value = result.metrics.get(metric)
    if value is None:
        return False
    if comparator in ("<=", "=="):
        return value > 3.0 * threshold
    return value < threshold / 3.0


def severity_for_result(result: CheckResult) -> Severity:
    if result.status is CheckStatus.WARN:
        return Severity.LOW
    if result.category is CheckCategory.TRAIN_TEST_VALIDATION:
        return Severity.CRITICAL if _severe_violation(result) else Severity.HIGH
    if result.category is CheckCategory.DATA_INTEGRITY:
        return Severity.HIGH if result.check_id in _LEAKAGE_CLASS_INTEGRITY else Severity.MEDIUM
    return Severity.MEDIUM


def _primary_evidence(result: CheckResult) -> list[Evidence]:
    evidence = []
    parsed = parse_condition(result.condition)
    primary = parsed[0] if parsed else None
    if primary and primary in result.metrics:
        evidence.append(Evidence(check_id=result.check_id, metric=primary, value=result.metrics[primary]))
    else:
        for name, value in sorted(result.metrics.items()):
            evidence.append(Evidence(check_id=result.check_id, metric=name, value=value))
            break
    # qualify up to three per-column detail entries so clustering can relate
    # findings through shared columns
    for key, value in list(result.details.items())[:3]:
        if "=" in key or "|" in key:
            continue
        metric_name = primary or "value"
        evidence.append(Evidence(check_id=result.check_id, metric=f"{metric_name}[{key}]", value=value))
    return evidence


def analyze_checks(results: Iterable[CheckResult], provider: Provider | None) -> AnalyzerOutput:
    """Turn failing checks into findings; warns map to low severity, errored
    checks surface as info so they are visible without raising alarms."""
    findings: list[Finding] = []
    known_ids = set()
    for result in results:
        known_ids.add(result.check_id)
        if result.status in (CheckStatus.PASS, CheckStatus.SKIPPED):
            continue
        if result.status is CheckStatus.ERROR:
            findings.append(
                Finding(
                    finding_id=f"checks.{result.check_id}.error",
                    source_agent=SourceAgent.CHECKS,
                    severity=Severity.INFO,
                    confidence=RULE_CONFIDENCE,
                    evidence=(),
                    description=f"Check '{result.check_id}' could not run: {result.summary}",
                )
            )
            continue
        severity = severity_for_result(result)
        findings.append(
            Finding(
                finding_id=f"checks.{result.check_id}",
                source_agent=SourceAgent.CHECKS,
                severity=severity,
                confidence=RULE_CONFIDENCE,
                evidence=tuple(_primary_evidence(result)),
                description=(
                    f"Check '{result.check_id}' {result.status.value}ed: {result.summary} "
                    f"(condition: {result.condition})"
                ),
            )
        )
    degraded = False
    if provider is not None:
        request = prompts.checks_analyzer_request([r.to_dict() for r in results])
        extra, degraded = _provider_findings(provider, request, SourceAgent.CHECKS, known_ids, "checks.provider")
        findings.extend(extra)
    return findings, degraded


def analyze_dataset(
    train_stats: DatasetStatistics,
    test_stats: DatasetStatistics,
    provider: Provider | None,
    known_check_ids: frozenset[str] | set[str] = frozenset(),
) -> AnalyzerOutput:
    """Surface data-quality issues visible in the statistics alone."""
    findings: list[Finding] = []

    def evidence(check_id: str, metric: str, value: float) -> tuple[Evidence, ...]:
        if check_id in known_check_ids:
            return (Evidence(check_id=check_id, metric=metric, value=value),)
        return ()

    if train_stats.class_distribution:
        counts = [c for c in train_stats.class_distribution.values() if c > 0]
        if counts:
            ratio = min(counts) / max(counts)
            if ratio < IMBALANCE_RATIO_RULE:
                findings.append(
                    Finding(
                        finding_id="dataset.class_imbalance",
                        source_agent=SourceAgent.DATASET,
                        severity=Severity.HIGH,
                        confidence=RULE_CONFIDENCE,
                        evidence=evidence("class_imbalance", "imbalance_ratio", ratio),
                        description=(
                            f"Training classes are heavily imbalanced: the rarest class holds "
                            f"{ratio:.4g} of the most frequent class's samples."
                        ),
                    )
                )
    for column in train_stats.per_column:
        if column.null_fraction > NULL_FRACTION_RULE:
            findings.append(
                Finding(
                    finding_id=f"dataset.nulls.{column.name}",
                    source_agent=SourceAgent.DATASET,
                    severity=Severity.MEDIUM,
                    confidence=RULE_CONFIDENCE,
                    evidence=evidence("percent_of_nulls", f"max_null_fraction[{column.name}]", column.null_fraction),
                    description=(
                        f"Column '{column.name}' is {column.null_fraction:.0%} null in training, "
                        "reducing its usable signal."
                    ),
                )
            )
    divergence = _class_distribution_divergence(train_stats, test_stats)
    if divergence is not None and divergence > CLASS_DIVERGENCE_RULE:
        findings.append(
            Finding(
                finding_id="dataset.class_divergence",
                source_agent=SourceAgent.DATASET,
                severity=Severity.HIGH,
                confidence=RULE_CONFIDENCE,
                evidence=evidence("label_drift", "class_distribution_tv", divergence),
                description=(
                    f"Train and test class distributions diverge (total variation {divergence:.4g})."
                ),
            )
        )

    degraded = False
    if provider is not None:
        request = prompts.dataset_analyzer_request(train_stats.to_dict(), test_stats.to_dict())
        extra, degraded = _provider_findings(
            provider, request, SourceAgent.DATASET, known_check_ids, "dataset.provider"
        )
        findings.extend(extra)
    return findings, degraded


def _class_distribution_divergence(
    train_stats: DatasetStatistics, test_stats: DatasetStatistics
) -> float | None:
    p, q = train_stats.class_distribution, test_stats.class_distribution
    if not p or not q:
        return None
    total_p, total_q = sum(p.values()), sum(q.values())
    if total_p == 0 or total_q == 0:
        return None
    labels = set(p) | set(q)
    return 0.5 * sum(abs(p.get(l, 0) / total_p - q.get(l, 0) / total_q) for l in labels)


def analyze_checkpoint(
    meta: CheckpointMetadata | None,
    train_stats: DatasetStatistics,
    provider: Provider | None,
    known_check_ids: frozenset[str] | set[str] = frozenset(),
) -> AnalyzerOutput:
    """Checkpoint integrity and configuration-consistency rules."""
    if meta is None:
        return [
            Finding(
                finding_id="checkpoint.absent",
                source_agent=SourceAgent.CHECKPOINT,
                severity=Severity.INFO,
                confidence=RULE_CONFIDENCE,
                evidence=(),
                description="No checkpoint metadata was provided; model-side validation was skipped.",
            )
        ], False

    findings: list[Finding] = []
    if meta.parameter_count == 0:
        findings.append(
            Finding(
                finding_id="checkpoint.empty_parameters",
                source_agent=SourceAgent.CHECKPOINT,
                severity=Severity.CRITICAL,
                confidence=RULE_CONFIDENCE,
                evidence=(),
                description=f"Checkpoint '{meta.architecture}' declares zero parameters; the export is broken.",
            )
        )
    observed = len(train_stats.class_distribution) if train_stats.class_distribution else None
    if meta.num_classes is not None and observed is not None and meta.num_classes != observed:
        findings.append(
            Finding(
                finding_id="checkpoint.config_mismatch",
                source_agent=SourceAgent.CHECKPOINT,
                severity=Severity.CRITICAL,
                confidence=RULE_CONFIDENCE,
                evidence=(),
                description=(
                    f"Checkpoint is configured for {meta.num_classes} classes but training data "
                    f"shows {observed} labels."
                ),
            )
        )
    if not meta.docstring:
        findings.append(
            Finding(
                finding_id="checkpoint.no_docstring",
                source_agent=SourceAgent.CHECKPOINT,
                severity=Severity.INFO,
                confidence=RULE_CONFIDENCE,
                evidence=(),
                description="Checkpoint carries no model docstring; provenance is harder to audit.",
            )
        )

    degraded = False
    if provider is not None:
        request = prompts.checkpoint_analyzer_request(meta.to_dict(), train_stats.to_dict())
        extra, degraded = _provider_findings(
            provider, request, SourceAgent.CHECKPOINT, known_check_ids, "checkpoint.provider"
        )
        findings.extend(extra)
    return findings, degraded


def _provider_findings(
    provider: Provider,
    request,
    source: SourceAgent,
    known_check_ids: Iterable[str],
    id_prefix: str,
) -> tuple[list[Finding], bool]:
    """One schema-constrained provider call; failures degrade to rule-only."""
    known = set(known_check_ids)
    try:
        response = provider.complete(request)
    except ProviderError:
        return [], True
    parsed = prompts.extract_json_object(response.content)
    if not parsed or not isinstance(parsed.get("findings"), list):
        return [], True
    findings = []
    for i, item in enumerate(parsed["findings"][:MAX_PROVIDER_FINDINGS]):
        if not isinstance(item, dict):
            continue
        try:
            severity = Severity(str(item.get("severity", "info")))
        except ValueError:
            severity = Severity.INFO
        confidence = item.get("confidence", PROVIDER_CONFIDENCE)
        if not isinstance(confidence, (int, float)) or not 0.0 <= float(confidence) <= 1.0:
            confidence = PROVIDER_CONFIDENCE
        evidence = []
        for ev in item.get("evidence", []) or []:
            if not isinstance(ev, dict):
                continue
            check_id = str(ev.get("check_id", ""))
            value = ev.get("value")
            if check_id in known and isinstance(value, (int, float)):
                evidence.append(Evidence(check_id=check_id, metric=str(ev.get("metric", "value")), value=float(value)))
        findings.append(
            Finding(
                finding_id=f"{id_prefix}.{i + 1}",
                source_agent=source,
                severity=severity,
                confidence=float(confidence),
                evidence=tuple(evidence),
                description=str(item.get("description", "")) or "Provider-added finding.",
            )
        )
    return findings, False


class AgentRegistry:
    """Ordered analyzer registry; the built-in trio is always present.

    Third-party agents implement ``fn(bundle, provider) -> (findings,
    degraded)`` and register under a new id.
    """

    BUILTIN_IDS = ("dataset", "checks", "checkpoint")

    def __init__(self):
        self._agents: dict[str, Callable[[ArtifactBundle, Provider | None], AnalyzerOutput]] = {}
        self._agents["dataset"] = lambda bundle, provider: analyze_dataset(
            bundle.train_stats, bundle.test_stats, provider, _bundle_check_ids(bundle)
        )
        self._agents["checks"] = lambda bundle, provider: analyze_checks(bundle.all_results(), provider)
        self._agents["checkpoint"] = lambda bundle, provider: analyze_checkpoint(
            bundle.checkpoint, bundle.train_stats, provider, _bundle_check_ids(bundle)
        )

    def register(self, agent_id: str, fn: Callable[[ArtifactBundle, Provider | None], AnalyzerOutput]) -> None:
        if agent_id in self._agents:
            raise ValueError(f"agent id {agent_id!r} already registered")
        self._agents[agent_id] = fn

    def items(self):
        return list(self._agents.items())


def _bundle_check_ids(bundle: ArtifactBundle) -> set[str]:
    return {result.check_id for result in bundle.all_results()}
