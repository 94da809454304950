"""Sequential cross-artifact reasoning: correlate findings into clusters,
ground hypotheses in the knowledge base, stabilize the synthesis through
self-consistency voting, and rank everything into the final diagnosis."""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..kb import KBIndex
from ..model import (
    DATA_INTEGRITY_CHECK_IDS,
    MODEL_EVALUATION_CHECK_IDS,
    SEVERITY_WEIGHT,
    TRAIN_TEST_VALIDATION_CHECK_IDS,
    Action,
    ArtifactBundle,
    Consensus,
    Diagnosis,
    Finding,
    Hypothesis,
    RankedFinding,
    Severity,
)
from . import prompts
from .analyzers import AgentRegistry
from .providers import Provider, ProviderError

_VALIDATION_IDS = set(TRAIN_TEST_VALIDATION_CHECK_IDS)
_INTEGRITY_IDS = set(DATA_INTEGRITY_CHECK_IDS)
_EVALUATION_IDS = set(MODEL_EVALUATION_CHECK_IDS)

FALLBACK_PLAUSIBILITY = 0.7
UNCITED_PLAUSIBILITY_CAP = 0.5


@dataclass
class PipelineConfig:
    consensus_k: int = 5
    synthesis_temperature: float = 0.7
    kb_top_k: int = 3

    def __post_init__(self) -> None:
        if self.consensus_k < 1 or self.consensus_k % 2 == 0:
            raise ValueError("consensus_k must be an odd integer >= 1")


@dataclass
class FindingCluster:
    cluster_id: str
    members: list[Finding]
    correlation_rule_id: str
    narrative: str

    def check_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for finding in self.members:
            for ev in finding.evidence:
                seen.setdefault(ev.check_id, None)
        return list(seen)

    def max_severity_weight(self) -> int:
        return max((SEVERITY_WEIGHT[f.severity] for f in self.members), default=0)


@dataclass
class ConsensusSample:
    raw: str
    parsed: dict | None = None
    failure: str | None = None


@dataclass
class ConsensusResult:
    fragment: dict | None
    agreement: float
    samples: list[ConsensusSample] = field(default_factory=list)

    @property
    def parsed_count(self) -> int:
        return sum(1 for s in self.samples if s.parsed is not None)


# ---------------------------------------------------------------------------
# canonical correlation rules
# ---------------------------------------------------------------------------


def _references(finding: Finding, check_id: str) -> bool:
    if finding.finding_id == f"checks.{check_id}":
        return True
    return any(ev.check_id == check_id for ev in finding.evidence)


def _matching(pool: list[Finding], check_id: str, min_severity: Severity) -> list[Finding]:
    floor = SEVERITY_WEIGHT[min_severity]
    return [f for f in pool if _references(f, check_id) and SEVERITY_WEIGHT[f.severity] >= floor]


_RULE_NARRATIVES = {
    "invalid-split": (
        "Label distribution drift combined with test labels unseen in training indicates an "
        "invalid train/test split; the test set does not represent the training distribution."
    ),
    "imbalance-driven-underperformance": (
        "Severe class imbalance in training aligns with underperforming minority segments at evaluation."
    ),
    "leakage-inflated-evaluation": (
        "Samples shared between splits coincide with a train/test performance gap, so evaluation "
        "metrics are inflated by leakage."
    ),
    "configuration-error": (
        "The checkpoint configuration disagrees with the dataset while evaluation checks fail, "
        "pointing to a training-setup error."
    ),
}


def aggregate_findings(findings: list[Finding]) -> list[FindingCluster]:
    """Deterministic clustering: canonical rules in fixed order, then shared
    evidence columns, singletons last."""
    pool = list(findings)
    clusters: list[FindingCluster] = []

    def take(members: list[Finding], rule_id: str) -> None:
        unique: dict[str, Finding] = {}
        for f in members:
            unique.setdefault(f.finding_id, f)
        chosen = [f for f in pool if f.finding_id in unique]
        for f in chosen:
            pool.remove(f)
        clusters.append(
            FindingCluster(
                cluster_id=rule_id,
                members=chosen,
                correlation_rule_id=rule_id,
                narrative=_RULE_NARRATIVES[rule_id],
            )
        )

    # R1: invalid split
    drift = _matching(pool, "label_drift", Severity.HIGH)
    unseen = _matching(pool, "new_label", Severity.HIGH)
    if drift and unseen:
        take(drift + unseen, "invalid-split")

    # R2: imbalance-driven underperformance
    imbalance = _matching(pool, "class_imbalance", Severity.MEDIUM)
    weak = _matching(pool, "weak_segments_performance", Severity.MEDIUM)
    if imbalance and weak:
        take(imbalance + weak, "imbalance-driven-underperformance")

    # R3: leakage-inflated evaluation
    leakage = _matching(pool, "train_test_samples_mix", Severity.HIGH) + _matching(
        pool, "index_leakage", Severity.HIGH
    )
    gap = _matching(pool, "train_test_performance", Severity.MEDIUM)
    if leakage and gap:
        take(leakage + gap, "leakage-inflated-evaluation")

    # R4: configuration error
    mismatch = [f for f in pool if f.finding_id == "checkpoint.config_mismatch"]
    eval_fails = [
        f
        for f in pool
        if SEVERITY_WEIGHT[f.severity] >= SEVERITY_WEIGHT[Severity.MEDIUM]
        and any(ev.check_id in _EVALUATION_IDS for ev in f.evidence)
    ]
    if mismatch and eval_fails:
        take(mismatch + eval_fails, "configuration-error")

    # shared-column clusters over the remainder
    by_column: dict[str, list[Finding]] = {}
    columnless: list[Finding] = []
    for finding in pool:
        column = next((ev.column for ev in finding.evidence if ev.column), None)
        if column is None:
            columnless.append(finding)
        else:
            by_column.setdefault(column, []).append(finding)
    for column in sorted(by_column):
        members = by_column[column]
        if len(members) == 1:
            columnless.extend(members)
            continue
        clusters.append(
            FindingCluster(
                cluster_id=f"column:{column}",
                members=members,
                correlation_rule_id="shared-column",
                narrative=f"Multiple findings concentrate on column '{column}'.",
            )
        )
    for finding in sorted(columnless, key=lambda f: f.finding_id):
        clusters.append(
            FindingCluster(
                cluster_id=f"single:{finding.finding_id}",
                members=[finding],
                correlation_rule_id="singleton",
                narrative=finding.description,
            )
        )
    return clusters


# ---------------------------------------------------------------------------
# hypotheses
# ---------------------------------------------------------------------------


_FALLBACK_STATEMENTS = {
    "invalid-split": (
        "The train/test split was built without stratification, so the test set's labels and "
        "distributions diverge from training and evaluation results are not trustworthy."
    ),
    "imbalance-driven-underperformance": (
        "Minority classes are underrepresented in training, which depresses performance on the "
        "segments where they dominate."
    ),
    "leakage-inflated-evaluation": (
        "Shared samples between the splits leak evaluation data into training and inflate test metrics."
    ),
    "configuration-error": (
        "The model was configured against a different dataset version than the one it is evaluated on."
    ),
}


def cluster_query(cluster: FindingCluster) -> str:
    return " ".join([cluster.narrative] + sorted(cluster.check_ids()))


def generate_hypotheses(
    clusters: list[FindingCluster],
    kb_index: KBIndex,
    provider: Provider | None,
    top_k: int = 3,
) -> tuple[list[Hypothesis], bool]:
    hypotheses: list[Hypothesis] = []
    degraded = False
    for cluster in clusters:
        hits = kb_index.search(cluster_query(cluster), top_k)
        hit_ids = [h.doc_id for h in hits]
        statement = None
        plausibility = None
        citations: list[str] = []
        if provider is not None:
            request = prompts.hypothesis_request(
                cluster.narrative,
                [{"finding_id": f.finding_id, "description": f.description} for f in cluster.members],
                [{"doc_id": h.doc_id, "snippet": h.snippet} for h in hits],
            )
            try:
                parsed = prompts.extract_json_object(provider.complete(request).content)
            except ProviderError:
                parsed = None
                degraded = True
            if parsed and isinstance(parsed.get("statement"), str) and parsed["statement"]:
                statement = parsed["statement"]
                raw_p = parsed.get("plausibility", FALLBACK_PLAUSIBILITY)
                plausibility = float(raw_p) if isinstance(raw_p, (int, float)) else FALLBACK_PLAUSIBILITY
                citations = [c for c in parsed.get("citations", []) if isinstance(c, str) and c in hit_ids]
        else:
            degraded = True
        if statement is None:
            statement = _FALLBACK_STATEMENTS.get(cluster.correlation_rule_id) or (
                f"Root-cause candidate: {cluster.narrative}"
            )
            plausibility = FALLBACK_PLAUSIBILITY
            citations = hit_ids[:1]
        if not citations:
            plausibility = min(plausibility, UNCITED_PLAUSIBILITY_CAP)
        hypotheses.append(
            Hypothesis(
                statement=statement,
                supporting_findings=tuple(f.finding_id for f in cluster.members),
                kb_citations=tuple(citations),
                plausibility=max(0.0, min(1.0, plausibility)),
            )
        )
    return hypotheses, degraded


# ---------------------------------------------------------------------------
# self-consistency consensus
# ---------------------------------------------------------------------------


def _normalize_action(text: str) -> str:
    return " ".join(text.split()).casefold()


def _parse_synthesis(raw: str) -> dict | None:
    parsed = prompts.extract_json_object(raw)
    if not parsed:
        return None
    category = parsed.get("root_cause_category")
    if not isinstance(category, str) or not category:
        return None
    confidence = parsed.get("confidence", 0.5)
    if not isinstance(confidence, (int, float)) or not 0.0 <= float(confidence) <= 1.0:
        confidence = 0.5
    actions = [a for a in parsed.get("actions", []) if isinstance(a, str) and a.strip()]
    return {"root_cause_category": category, "confidence": float(confidence), "actions": actions}


def self_consistent_complete(
    provider: Provider | None,
    request,
    k: int,
    schema: str = "synthesis_v1",
    repair_retries: int = 2,
) -> ConsensusResult:
    """Issue k sampled completions and majority-vote the parsed fragments."""
    if k < 1 or k % 2 == 0:
        raise ValueError("k must be an odd integer >= 1")
    if provider is None:
        return ConsensusResult(fragment=None, agreement=0.0, samples=[])

    def one_sample(i: int) -> ConsensusSample:
        sample_request = prompts.with_sample_marker(request, i + 1, k)
        attempt_request = sample_request
        last_failure = "unparseable completion"
        for attempt in range(repair_retries + 1):
            try:
                raw = provider.complete(attempt_request).content
            except ProviderError as exc:
                return ConsensusSample(raw="", failure=str(exc))
            parsed = _parse_synthesis(raw)
            if parsed is not None:
                return ConsensusSample(raw=raw, parsed=parsed)
            last_failure = "unparseable completion"
            attempt_request = prompts.with_repair_instruction(sample_request, schema, attempt + 1)
        return ConsensusSample(raw=raw, failure=last_failure)

    with ThreadPoolExecutor(max_workers=min(k, 8)) as pool:
        samples = list(pool.map(one_sample, range(k)))

    parsed = [s.parsed for s in samples if s.parsed is not None]
    if not parsed:
        return ConsensusResult(fragment=None, agreement=0.0, samples=samples)

    categories = Counter(p["root_cause_category"] for p in parsed)
    top_count = max(categories.values())
    consensus_category = min(c for c, n in categories.items() if n == top_count)
    agreement = top_count / len(parsed)
    modal = [p for p in parsed if p["root_cause_category"] == consensus_category]
    confidence = agreement * (sum(p["confidence"] for p in modal) / len(modal))

    action_counts: Counter[str] = Counter()
    representative: dict[str, str] = {}
    for p in parsed:
        seen_here = set()
        for text in p["actions"]:
            key = _normalize_action(text)
            if key in seen_here:
                continue
            seen_here.add(key)
            action_counts[key] += 1
            representative.setdefault(key, text.strip())
    keep = math.ceil(k / 2)
    actions = [
        representative[key]
        for key, count in sorted(action_counts.items(), key=lambda item: (-item[1], item[0]))
        if count >= keep
    ]
    fragment = {
        "root_cause_category": consensus_category,
        "confidence": confidence,
        "actions": actions,
    }
    return ConsensusResult(fragment=fragment, agreement=agreement, samples=samples)


# ---------------------------------------------------------------------------
# ranking
# ---------------------------------------------------------------------------


def _category_rank(finding: Finding) -> int:
    ranks = []
    for ev in finding.evidence:
        if ev.check_id in _VALIDATION_IDS:
            ranks.append(0)
        elif ev.check_id in _INTEGRITY_IDS:
            ranks.append(1)
        elif ev.check_id in _EVALUATION_IDS:
            ranks.append(2)
    return min(ranks, default=3)


def rank_score(finding: Finding) -> float:
    return SEVERITY_WEIGHT[finding.severity] * finding.confidence


_REMEDIATIONS = {
    "invalid-split": (
        "Halt model development and recreate the train-test split using stratified sampling, then "
        "verify every label appears in both splits before re-running evaluation."
    ),
    "imbalance-driven-underperformance": (
        "Rebalance training with class weights or resampling and re-evaluate the weakest segments per class."
    ),
    "leakage-inflated-evaluation": (
        "Deduplicate the source data, rebuild the split from disjoint records, and re-measure the "
        "train/test gap on the clean split."
    ),
    "configuration-error": (
        "Align the checkpoint configuration (class count and heads) with the dataset contract and retrain."
    ),
}

_CHECK_REMEDIATIONS = {
    "percent_of_nulls": "Impute or drop the affected columns and fix the upstream collection gap.",
    "mixed_nulls": "Normalize null encoding to a single token at ingestion.",
    "mixed_data_types": "Enforce one data type per column and quarantine non-conforming cells.",
    "string_mismatch": "Normalize casing and whitespace so each category has one canonical form.",
    "special_characters": "Sanitize cells that contain only punctuation or symbols.",
    "is_single_value": "Drop constant features; they carry no signal.",
    "class_imbalance": "Rebalance classes with weighting or resampling before training further.",
    "data_duplicates": "Deduplicate the dataset at the source-record level and re-split.",
    "conflicting_labels": "Adjudicate identical rows with differing labels before training further.",
    "outlier_sample_detection": "Triage extreme rows: fix entry faults, keep genuine rare events deliberately.",
    "feature_label_correlation": "Trace the near-perfect predictor back to its source; suspect target leakage.",
    "feature_feature_correlation": "Drop or merge redundant feature pairs.",
    "datasets_size_comparison": "Enlarge the test split so evaluation estimates are stable.",
    "new_label": "Recreate the train-test split with stratified sampling so all labels are trained on.",
    "new_category": "Harmonize category vocabularies between splits or add handling for unseen categories.",
    "index_leakage": "Rebuild the split so no index value appears on both sides.",
    "train_test_samples_mix": "Remove test rows that also appear in training and re-split.",
    "label_drift": "Recreate the train-test split with stratified sampling over the label.",
    "feature_drift": "Investigate the drifting features' pipelines and harmonize preprocessing.",
    "multivariate_drift": "Investigate why a classifier can separate the splits; align collection conditions.",
    "train_test_performance": "Reduce overfitting: stronger regularization, more data, or earlier stopping.",
    "roc_report": "Improve separability for the weak classes: features, data, or per-class thresholds.",
    "calibration_score": "Recalibrate the model's probabilities (temperature or isotonic scaling).",
    "simple_model_comparison": "Model barely beats a trivial baseline; revisit features and training setup.",
    "weak_segments_performance": "Collect data or reweight training for the underperforming segments.",
    "prediction_drift": "Audit the inference pipeline; prediction distributions differ between splits.",
}


def _cluster_action(cluster: FindingCluster) -> str:
    template = _REMEDIATIONS.get(cluster.correlation_rule_id)
    if template:
        return template
    if cluster.correlation_rule_id == "shared-column":
        column = cluster.cluster_id.split(":", 1)[1]
        return f"Investigate and clean column '{column}'; several checks flag it."
    for check_id in cluster.check_ids():
        if check_id in _CHECK_REMEDIATIONS:
            return _CHECK_REMEDIATIONS[check_id]
    return "Review the finding's evidence and remediate the underlying data or training issue."


def rank_diagnosis(
    clusters: list[FindingCluster],
    hypotheses: list[Hypothesis],
    consensus: ConsensusResult,
    degraded: bool = False,
) -> Diagnosis:
    """Deterministic ranking and action assembly.

    rank_score = severity weight x confidence; ties break on check category
    (validation, integrity, evaluation) and then the finding id.
    """
    all_findings = [f for cluster in clusters for f in cluster.members]
    ranked = sorted(all_findings, key=lambda f: (-rank_score(f), _category_rank(f), f.finding_id))
    ranked_findings = tuple(RankedFinding(finding=f, rank_score=rank_score(f)) for f in ranked)
    position = {f.finding_id: i for i, f in enumerate(ranked)}

    hypothesis_by_cluster = dict(zip((c.cluster_id for c in clusters), hypotheses))
    actionable = [c for c in clusters if c.max_severity_weight() >= SEVERITY_WEIGHT[Severity.MEDIUM]]
    actionable.sort(key=lambda c: min(position[f.finding_id] for f in c.members))

    actions = []
    seen_actions = set()
    for cluster in actionable:
        text = _cluster_action(cluster)
        key = _normalize_action(text)
        if key in seen_actions:
            continue
        seen_actions.add(key)
        hypothesis = hypothesis_by_cluster.get(cluster.cluster_id)
        actions.append(
            Action(
                action=text,
                rationale=hypothesis.statement if hypothesis else cluster.narrative,
                linked_findings=tuple(f.finding_id for f in cluster.members),
            )
        )
    if consensus.fragment:
        for text in consensus.fragment["actions"]:
            key = _normalize_action(text)
            if key not in seen_actions:
                seen_actions.add(key)
                actions.append(
                    Action(
                        action=text,
                        rationale=(
                            f"Kept by {consensus.parsed_count}-sample self-consistency voting "
                            f"(agreement {consensus.agreement:.2f})."
                        ),
                        linked_findings=(),
                    )
                )
    if not actions:
        actions.append(
            Action(
                action="No significant issues detected; continue monitoring the workflow.",
                rationale="Every check passed or was skipped and no analyzer raised a finding above info.",
                linked_findings=(),
            )
        )

    lines = [
        f"{i + 1}. [{rf.finding.severity.value}] {rf.finding.description}"
        for i, rf in enumerate(ranked_findings[:5])
    ]
    if consensus.fragment:
        lines.append(
            f"Consensus root cause: {consensus.fragment['root_cause_category']} "
            f"(agreement {consensus.agreement:.2f}, confidence {consensus.fragment['confidence']:.2f})."
        )
    if degraded:
        lines.append("Provider unavailable; diagnosis produced by deterministic rules only.")
    if not ranked_findings:
        lines.insert(0, "No findings above info severity.")
    summary = "\n".join(lines)

    return Diagnosis(
        ranked_findings=ranked_findings,
        hypotheses=tuple(hypotheses),
        actions=tuple(actions),
        summary=summary,
        consensus=Consensus(samples=consensus.parsed_count, agreement=consensus.agreement),
        degraded=degraded,
    )


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def run_pipeline(
    bundle: ArtifactBundle,
    provider: Provider | None,
    kb_index: KBIndex,
    config: PipelineConfig | None = None,
    registry: AgentRegistry | None = None,
) -> Diagnosis:
    """Full phase-2 analysis: parallel analyzers, aggregation, grounding,
    self-consistent synthesis, ranking. Never raises for a valid bundle;
    provider trouble degrades to the deterministic rule path."""
    config = config or PipelineConfig()
    registry = registry or AgentRegistry()
    agents = registry.items()

    degraded = provider is None
    findings: list[Finding] = []
    with ThreadPoolExecutor(max_workers=max(len(agents), 1)) as pool:
        futures = [(agent_id, pool.submit(fn, bundle, provider)) for agent_id, fn in agents]
        for _, future in futures:
            agent_findings, agent_degraded = future.result()
            findings.extend(agent_findings)
            degraded = degraded or agent_degraded

    clusters = aggregate_findings(findings)
    hypotheses, hyp_degraded = generate_hypotheses(clusters, kb_index, provider, top_k=config.kb_top_k)
    degraded = degraded or hyp_degraded

    synthesis = prompts.synthesis_request(
        [
            {
                "cluster_id": c.cluster_id,
                "narrative": c.narrative,
                "findings": [f.finding_id for f in c.members],
                "max_severity": max((f.severity.value for f in c.members), default="info"),
            }
            for c in clusters
        ],
        [{"statement": h.statement, "plausibility": h.plausibility} for h in hypotheses],
        temperature=config.synthesis_temperature,
    )
    consensus = self_consistent_complete(provider, synthesis, k=config.consensus_k)
    if consensus.fragment is None:
        degraded = True

    return rank_diagnosis(clusters, hypotheses, consensus, degraded=degraded)
