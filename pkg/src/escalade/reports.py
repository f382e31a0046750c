"""Plain-text and Markdown rendering for CLI output.

Everything here is presentation only: renderers take the typed results the
rest of the package produces and return strings, so the CLI stays a thin
argument-parsing shell.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .clusters import CompositeCluster
from .corpus import CorpusResult, VariationOutcome
from .gates import ClassificationTrace, GateResult
from .model import GATE_IDS, format_timestamp
from .monitor import ToleranceEvent
from .profiles import GapReport

_RESULT_MARKS = {
    GateResult.PASS: "pass",
    GateResult.FAIL: "fail",
    GateResult.TRIGGER: "TRIGGER",
    GateResult.INDETERMINATE: "indeterminate",
    GateResult.SKIPPED: "skipped",
}


def render_trace(trace: ClassificationTrace) -> str:
    lines = [f"subject: {trace.subject}", f"classification: {trace.classification}"]
    lines.append(f"rationale: {trace.rationale}")
    lines.append("")
    width = max(len(gate) for gate in GATE_IDS)
    for outcome in trace.outcomes:
        mark = _RESULT_MARKS.get(outcome.result, outcome.result)
        line = f"  {outcome.gate:<{width}}  {mark:<13}"
        if outcome.diagnostics:
            line += "  [" + ", ".join(outcome.diagnostics) + "]"
        if outcome.evidence:
            line += "  (" + ", ".join(outcome.evidence) + ")"
        lines.append(line.rstrip())
    return "\n".join(lines)


def render_clusters(clusters: Sequence[CompositeCluster]) -> str:
    if not clusters:
        return "no clusters formed"
    lines = []
    for cluster in clusters:
        start, end = cluster.span
        lines.append(
            f"{cluster.id}  kind={cluster.signature.kind.value}"
            f"  key={cluster.signature.key!r}  members={len(cluster.members)}"
        )
        lines.append(f"  span: {format_timestamp(start)} .. {format_timestamp(end)}")
        lines.append("  members: " + ", ".join(cluster.members))
        metrics = []
        if cluster.event_count is not None:
            metrics.append(f"events={cluster.event_count}")
        if cluster.affected_population is not None:
            metrics.append(f"population={cluster.affected_population}")
        if cluster.standing_condition:
            metrics.append("standing_condition")
        if metrics:
            lines.append("  " + "  ".join(metrics))
        harm = ", ".join(f"{h.category}={h.severity}" for h in cluster.harm)
        lines.append(f"  aggregate harm: {harm}")
    return "\n".join(lines)


def render_events(events: Sequence[ToleranceEvent]) -> str:
    if not events:
        return "no tolerance events"
    lines = []
    for event in events:
        lines.append(
            f"{format_timestamp(event.at)}  {event.category:<22} {event.kind:<18}"
            f" observed={event.observed:.6g}"
            f"  baseline={event.baseline_mean:.6g} sd={event.baseline_sd:.6g}"
        )
    return "\n".join(lines)


def render_corpus_results(results: Sequence[CorpusResult]) -> str:
    lines = []
    width = max(len(result.entry.id) for result in results)
    for result in results:
        status = "ok" if result.ok else "FAIL"
        lines.append(
            f"{result.entry.id:<{width}}  {result.trace.classification:<9}"
            f"  expected={result.entry.expected.classification:<9}  {status}"
        )
        for problem in result.problems:
            lines.append(f"    - {problem}")
    passed = sum(1 for r in results if r.ok)
    lines.append(f"{passed}/{len(results)} entries match expectations")
    return "\n".join(lines)


def render_variations(field_path: str, outcomes: Sequence[VariationOutcome]) -> str:
    lines = [f"sweep over {field_path}:"]
    for outcome in outcomes:
        lines.append(f"  {outcome.value!r} -> {outcome.classification}")
    return "\n".join(lines)


def render_gap_matrix(reports: Sequence[GapReport]) -> str:
    """Markdown matrix: one row per subject, one column per profile."""
    if not reports:
        return "no subjects"
    profiles = list(reports[0].verdicts.keys())
    header = "| subject | kind | " + " | ".join(profiles) + " | divergences |"
    rule = "|" + "---|" * (len(profiles) + 3)
    lines = [header, rule]
    for report in reports:
        cells = [report.verdicts.get(profile, "") for profile in profiles]
        divergences = "; ".join(f"{d.profiles[1]}:{d.code}" for d in report.divergences) or "-"
        lines.append(
            f"| {report.subject} | {report.subject_kind} | "
            + " | ".join(cells)
            + f" | {divergences} |"
        )
    return "\n".join(lines)


def render_validation(findings_by_record: Mapping[str, Sequence]) -> str:
    lines = []
    total = 0
    for record_id, findings in findings_by_record.items():
        for finding in findings:
            total += 1
            lines.append(f"{record_id}: {finding.code} at {finding.path}: {finding.message}")
    lines.append(f"{total} finding(s)")
    return "\n".join(lines)
