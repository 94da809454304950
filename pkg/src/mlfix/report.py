"""Render a diagnosis as a two-column Finding/Action report.

Each row pairs a bolded finding title and an italic evidence line with the
bolded remediation and its rationale; findings without a paired action are
listed afterwards. Only diagnosis content is printed, never dataset cells.
"""

from __future__ import annotations

from .model import Diagnosis, Finding, RankedFinding


def _evidence_line(finding: Finding) -> str:
    if not finding.evidence:
        return "Evidence: rule-derived (no check metrics cited)."
    parts = [f"{ev.check_id}: {ev.metric}={ev.value!r}" for ev in finding.evidence]
    return "Evidence: " + "; ".join(parts)


def _finding_title(finding: Finding) -> str:
    title = finding.description.split(". ")[0].rstrip(".")
    return f"[{finding.severity.value}] {title}"


def render_report(diagnosis: Diagnosis, fmt: str = "markdown") -> str:
    if fmt not in ("markdown", "plain"):
        raise ValueError(f"unsupported format {fmt!r}")
    return _render_markdown(diagnosis) if fmt == "markdown" else _render_plain(diagnosis)


def _render_markdown(diagnosis: Diagnosis) -> str:
    by_id = {rf.finding.finding_id: rf for rf in diagnosis.ranked_findings}
    lines = ["# Workflow diagnosis", ""]
    if diagnosis.degraded:
        lines += ["> Degraded mode: provider unavailable, rule-based diagnosis only.", ""]
    if not diagnosis.ranked_findings:
        lines += ["No significant issues detected.", ""]
    lines += ["| Finding | Action |", "| --- | --- |"]
    linked_ids: set[str] = set()
    for action in diagnosis.actions:
        findings = [by_id[fid] for fid in action.linked_findings if fid in by_id]
        findings.sort(key=lambda rf: -rf.rank_score)
        linked_ids.update(rf.finding.finding_id for rf in findings)
        if findings:
            top = findings[0].finding
            finding_cell = f"**{_finding_title(top)}** <br> *{_evidence_line(top)}*"
            if len(findings) > 1:
                extra = ", ".join(rf.finding.finding_id for rf in findings[1:])
                finding_cell += f" <br> also: {extra}"
        else:
            finding_cell = "*(no linked finding)*"
        action_cell = f"**{action.action}** <br> {action.rationale}"
        lines.append(f"| {finding_cell} | {action_cell} |")
    remaining = [rf for rf in diagnosis.ranked_findings if rf.finding.finding_id not in linked_ids]
    if remaining:
        lines += ["", "## Other findings", ""]
        for rf in remaining:
            lines.append(f"- **{_finding_title(rf.finding)}** (score {rf.rank_score:g}) — {_evidence_line(rf.finding)}")
    lines += ["", "## Summary", "", diagnosis.summary]
    lines.append("")
    lines.append(
        f"Consensus: {diagnosis.consensus.samples} sample(s), agreement {diagnosis.consensus.agreement:g}."
    )
    return "\n".join(lines) + "\n"


def _render_plain(diagnosis: Diagnosis) -> str:
    lines = ["WORKFLOW DIAGNOSIS", "=" * 60]
    if diagnosis.degraded:
        lines.append("(degraded mode: provider unavailable, rule-based diagnosis only)")
    if not diagnosis.ranked_findings:
        lines.append("No significant issues detected.")
    by_id = {rf.finding.finding_id: rf for rf in diagnosis.ranked_findings}
    for i, action in enumerate(diagnosis.actions, start=1):
        lines.append("")
        findings = sorted(
            (by_id[fid] for fid in action.linked_findings if fid in by_id),
            key=lambda rf: -rf.rank_score,
        )
        if findings:
            top = findings[0].finding
            lines.append(f"FINDING {i}: {_finding_title(top)}")
            lines.append(f"  {_evidence_line(top)}")
        else:
            lines.append(f"FINDING {i}: (none)")
        lines.append(f"  ACTION: {action.action}")
        lines.append(f"  rationale: {action.rationale}")
    lines += ["", "-" * 60, diagnosis.summary, ""]
    lines.append(
        f"consensus: {diagnosis.consensus.samples} sample(s), agreement {diagnosis.consensus.agreement:g}"
    )
    return "\n".join(lines) + "\n"


def render_ranked_list(findings: list[RankedFinding]) -> str:
    """Compact one-line-per-finding view used in logs and tests."""
    return "\n".join(
        f"{i + 1:>2}. {rf.rank_score:5.2f} [{rf.finding.severity.value}] {rf.finding.finding_id}"
        for i, rf in enumerate(findings)
    )
