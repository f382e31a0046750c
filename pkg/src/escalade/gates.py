"""The eight-criterion gate pipeline: C1 through C8, in fixed order.

Each gate is an explicit predicate producing a :class:`GateOutcome`;
:func:`classify` runs them in sequence and assembles a
:class:`ClassificationTrace` ending in exactly one of escalate, alert, or
discard:

* escalate — C3 triggered, or a severity at/above the floor (C5b) together
  with cross-border propagation (C6);
* alert — no escalation, but the near-miss gate (C8) triggered or C6 passed
  while C5b failed;
* discard — everything else, including records filtered at C1/C2.

Indeterminacy is never coerced: an indeterminate C1 discards with its own
diagnostic, and an indeterminate later gate counts as not-satisfied while the
trace carries ``blocked_by_data_gap``. There is deliberately no cross-category
severity aggregation; multiple categories at Level 3 surface as the
``severity_gap_multi_level3`` diagnostic instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union

from .clusters import ClusterContext, CompositeCluster, EMPTY_CONTEXT, aggregate_assessment
from .config import EngineConfig
from .model import (
    GATE_IDS,
    SCHEMA_VERSION,
    CausationConfidence,
    CausationRole,
    ConfigurationError,
    GateReadiness,
    ImmediateFlag,
    IncidentRecord,
    Restorability,
    Ternary,
    completeness_check,
)
from .registry import HarmCategoryRegistry, default_harm_categories

Subject = Union[IncidentRecord, CompositeCluster]


class GateResult:
    PASS = "pass"
    FAIL = "fail"
    TRIGGER = "trigger"
    INDETERMINATE = "indeterminate"
    SKIPPED = "skipped"

    ALL = (PASS, FAIL, TRIGGER, INDETERMINATE, SKIPPED)


class Classification:
    ESCALATE = "escalate"
    ALERT = "alert"
    DISCARD = "discard"

    ALL = (ESCALATE, ALERT, DISCARD)


# Stable diagnostic codes. `cites:<dimension-slug>` marks an absorbed
# candidate dimension whose logic fired inside the gate.
DIAG_C1_INDETERMINATE = "c1_indeterminate"
DIAG_BLOCKED_BY_DATA_GAP = "blocked_by_data_gap"
DIAG_SEVERITY_GAP = "severity_gap_multi_level3"
DIAG_PERPETUAL_TRIGGER = "perpetual_trigger_standing_condition"
DIAG_REVERSIBILITY_UNKNOWN = "c7_reversibility_unknown"

DIAGNOSTIC_CODES = (
    DIAG_C1_INDETERMINATE,
    DIAG_BLOCKED_BY_DATA_GAP,
    DIAG_SEVERITY_GAP,
    DIAG_PERPETUAL_TRIGGER,
    DIAG_REVERSIBILITY_UNKNOWN,
)


def _cites(slug: str) -> str:
    return f"cites:{slug}"


C3_TRIGGER_FLAGS = frozenset(
    {
        ImmediateFlag.CBRN_ASSISTANCE,
        ImmediateFlag.WEIGHT_EXFILTRATION,
        ImmediateFlag.LOSS_OF_DEVELOPER_CONTROL,
    }
)

_TRIGGER_GATES = frozenset({"C3", "C8"})


@dataclass(frozen=True, slots=True)
class GateOutcome:
    gate: str
    result: str
    diagnostics: tuple[str, ...] = ()
    evidence: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.gate not in GATE_IDS:
            raise ValueError(f"unknown gate {self.gate!r}")
        if self.result not in GateResult.ALL:
            raise ValueError(f"unknown gate result {self.result!r}")
        if self.result == GateResult.TRIGGER and self.gate not in _TRIGGER_GATES:
            raise ValueError(f"result=trigger is only legal for C3 and C8, not {self.gate}")
        object.__setattr__(self, "diagnostics", tuple(self.diagnostics))
        object.__setattr__(self, "evidence", tuple(self.evidence))

    def to_dict(self) -> dict[str, Any]:
        return {
            "gate": self.gate,
            "result": self.result,
            "diagnostics": list(self.diagnostics),
            "evidence": list(self.evidence),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GateOutcome":
        return cls(
            gate=data["gate"],
            result=data["result"],
            diagnostics=tuple(data.get("diagnostics", ())),
            evidence=tuple(data.get("evidence", ())),
        )


@dataclass(frozen=True, slots=True)
class ClassificationTrace:
    subject: str
    outcomes: tuple[GateOutcome, ...]
    classification: str
    rationale: str

    def __post_init__(self) -> None:
        if self.classification not in Classification.ALL:
            raise ValueError(f"unknown classification {self.classification!r}")
        object.__setattr__(self, "outcomes", tuple(self.outcomes))

    def outcome(self, gate: str) -> GateOutcome | None:
        for entry in self.outcomes:
            if entry.gate == gate:
                return entry
        return None

    def result(self, gate: str) -> str | None:
        entry = self.outcome(gate)
        return None if entry is None else entry.result

    def diagnostics(self) -> tuple[str, ...]:
        return tuple(code for entry in self.outcomes for code in entry.diagnostics)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "subject": self.subject,
            "classification": self.classification,
            "rationale": self.rationale,
            "outcomes": [entry.to_dict() for entry in self.outcomes],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ClassificationTrace":
        return cls(
            subject=data["subject"],
            outcomes=tuple(GateOutcome.from_dict(raw) for raw in data.get("outcomes", ())),
            classification=data["classification"],
            rationale=data.get("rationale", ""),
        )


def _blocked(gate: str, evidence: tuple[str, ...]) -> GateOutcome:
    return GateOutcome(
        gate=gate,
        result=GateResult.INDETERMINATE,
        diagnostics=(DIAG_BLOCKED_BY_DATA_GAP,),
        evidence=evidence,
    )


# ---------------------------------------------------------------------------
# Individual gates
# ---------------------------------------------------------------------------


def eval_c1_causation(record: IncidentRecord, config: EngineConfig) -> GateOutcome:
    """C1: was the AI system a causal factor, at sufficient confidence?

    ``detection_channel_only`` and ``none`` fail outright; a causal role below
    the confidence floor (or unknown) is indeterminate, which the pipeline
    routes to discard with ``c1_indeterminate``.
    """
    evidence = ("causation.role", "causation.confidence")
    role = record.causation.role
    if role in (CausationRole.NONE, CausationRole.DETECTION_CHANNEL_ONLY):
        return GateOutcome("C1", GateResult.FAIL, evidence=evidence)
    citation = (_cites("attribution_confidence_level"),)
    if role is CausationRole.CAUSAL_FACTOR and record.causation.confidence.at_least(
        config.causation_confidence_floor
    ):
        return GateOutcome("C1", GateResult.PASS, diagnostics=citation, evidence=evidence)
    return GateOutcome(
        "C1",
        GateResult.INDETERMINATE,
        diagnostics=(DIAG_C1_INDETERMINATE,) + citation,
        evidence=evidence,
    )


def eval_c2_scope(record: IncidentRecord, config: EngineConfig) -> GateOutcome:
    """C2: explicit domain exclusions; fail routes to discard."""
    evidence = ("scope_domain",)
    if record.scope_domain in config.scope_exclusions:
        return GateOutcome("C2", GateResult.FAIL, evidence=evidence)
    return GateOutcome("C2", GateResult.PASS, evidence=evidence)


def eval_c3_immediate(record: IncidentRecord) -> GateOutcome:
    """C3: unconditional escalation conditions; confirmed harm never required."""
    evidence = ("immediate_flags",)
    if record.immediate_flags & C3_TRIGGER_FLAGS:
        return GateOutcome("C3", GateResult.TRIGGER, evidence=evidence)
    return GateOutcome("C3", GateResult.FAIL, evidence=evidence)


def eval_c4_pattern(
    record: IncidentRecord, context: ClusterContext
) -> tuple[GateOutcome, CompositeCluster | None]:
    """C4: does the record join a composite cluster known to the context?"""
    evidence = ["root_cause.kind", "root_cause.key", "occurred_at"]
    cluster = context.cluster_for(record.id)
    if cluster is None:
        return GateOutcome("C4", GateResult.FAIL, evidence=tuple(evidence)), None
    evidence.append(f"cluster:{cluster.id}")
    outcome = GateOutcome(
        "C4",
        GateResult.PASS,
        diagnostics=(_cites("root_cause_type"),),
        evidence=tuple(evidence),
    )
    return outcome, cluster


def _effective_severities(
    subject: Subject, config: EngineConfig, categories: HarmCategoryRegistry
) -> dict[str, int]:
    """Per-category effective severity for C5b, uplifts applied and capped."""
    if isinstance(subject, CompositeCluster):
        entries = aggregate_assessment(subject, config)
        uplift = 0  # vulnerability flags live on records, not composites
    else:
        entries = list(subject.harm)
        modifier = config.vulnerability_modifier
        uplift = (
            modifier.uplift if modifier.enabled and subject.vulnerability_flags else 0
        )
    severities: dict[str, int] = {}
    for entry in entries:
        if entry.category not in categories:
            raise ConfigurationError(
                f"harm category {entry.category!r} is not in the registry"
            )
        effective = min(5, entry.severity + uplift)
        severities[entry.category] = max(severities.get(entry.category, 0), effective)
    return severities


def eval_c5_harm(
    subject: Subject,
    config: EngineConfig,
    categories: HarmCategoryRegistry | None = None,
) -> tuple[GateOutcome, GateOutcome]:
    """C5a/C5b: harm category presence, then severity against the floor.

    Effective severity is the assessed level plus the vulnerability uplift
    (records only, when enabled) plus the aggregation uplift (composites),
    capped at 5. No cross-category aggregation happens here: two or more
    categories sitting at exactly Level 3 with C5b failing emit the
    ``severity_gap_multi_level3`` diagnostic instead.

    Raises:
        ConfigurationError: when a harm entry uses an unregistered category.
    """
    if categories is None:
        categories = default_harm_categories()
    is_cluster = isinstance(subject, CompositeCluster)
    evidence_a = ("aggregate.harm",) if is_cluster else ("harm",)
    severities = _effective_severities(subject, config, categories)

    c5a = GateOutcome(
        "C5a",
        GateResult.PASS if severities else GateResult.FAIL,
        evidence=evidence_a,
    )

    floor = config.severity_escalation_floor
    passed = any(level >= floor for level in severities.values())
    diagnostics: list[str] = []
    if is_cluster:
        diagnostics.append(_cites("composite_severity"))
    if not passed and sum(1 for level in severities.values() if level == 3) >= 2:
        diagnostics.append(DIAG_SEVERITY_GAP)
    evidence_b = tuple(
        f"{'aggregate.harm' if is_cluster else 'harm'}[{cat}]={level}"
        for cat, level in sorted(severities.items())
    )
    c5b = GateOutcome(
        "C5b",
        GateResult.PASS if passed else GateResult.FAIL,
        diagnostics=tuple(diagnostics),
        evidence=evidence_b,
    )
    return c5a, c5b


def eval_c6_propagation(subject: Subject, config: EngineConfig) -> GateOutcome:
    """C6: does containment require international coordination?

    Passes when at least two jurisdictions are affected and national
    containment is not affirmed (an unknown answer is not an affirmation).
    The absorbed sub-steps (pathway, velocity, spread, containment) are
    recorded as evidence; composites carry only spread and standing-condition
    state.
    """
    if isinstance(subject, CompositeCluster):
        jurisdictions = subject.jurisdictions
        containment = Ternary.UNKNOWN
        standing = subject.standing_condition
        evidence = [
            f"aggregate.jurisdictions[{len(jurisdictions)}]",
            "aggregate.standing_condition",
        ]
    else:
        jurisdictions = subject.jurisdictions
        containment = subject.propagation.containment_feasible_nationally
        standing = subject.propagation.standing_condition
        evidence = [
            f"jurisdictions[{len(jurisdictions)}]",
            "propagation.pathway",
            "propagation.velocity",
            "propagation.containment_feasible_nationally",
            "propagation.standing_condition",
        ]

    diagnostics = [
        _cites("jurisdictional_spread"),
        _cites("containment_feasibility"),
    ]
    if not isinstance(subject, CompositeCluster):
        diagnostics = [
            _cites("propagation_pathway_type"),
            _cites("propagation_velocity"),
        ] + diagnostics

    passed = len(jurisdictions) >= 2 and containment is not Ternary.YES
    if passed and standing:
        diagnostics.append(DIAG_PERPETUAL_TRIGGER)
    return GateOutcome(
        "C6",
        GateResult.PASS if passed else GateResult.FAIL,
        diagnostics=tuple(diagnostics),
        evidence=tuple(evidence),
    )


def eval_c7_irreversibility(subject: Subject) -> GateOutcome:
    """C7: permanent damage with multi-jurisdiction reach.

    Checks the four layers in fixed order and records the first
    non-restorable one. All-unknown layers are indeterminate (never coerced
    to restorable).
    """
    diagnostics = [_cites("four_layer_reversibility")]
    if isinstance(subject, CompositeCluster):
        # Composites carry no reversibility assessment of their own.
        return GateOutcome(
            "C7",
            GateResult.INDETERMINATE,
            diagnostics=tuple(diagnostics + [DIAG_REVERSIBILITY_UNKNOWN]),
            evidence=("reversibility",),
        )

    layers = subject.reversibility.layers()
    evidence = [f"reversibility.{name}" for name, _ in layers]
    first_broken = next(
        (name for name, value in layers if value is Restorability.NOT_RESTORABLE), None
    )
    if first_broken is not None:
        evidence.insert(0, f"first_not_restorable={first_broken}")
        passed = len(subject.jurisdictions) >= 2
        evidence.append(f"jurisdictions[{len(subject.jurisdictions)}]")
        return GateOutcome(
            "C7",
            GateResult.PASS if passed else GateResult.FAIL,
            diagnostics=tuple(diagnostics),
            evidence=tuple(evidence),
        )
    if all(value is Restorability.UNKNOWN for _, value in layers):
        diagnostics.append(DIAG_REVERSIBILITY_UNKNOWN)
        return GateOutcome(
            "C7", GateResult.INDETERMINATE, diagnostics=tuple(diagnostics), evidence=tuple(evidence)
        )
    return GateOutcome("C7", GateResult.FAIL, diagnostics=tuple(diagnostics), evidence=tuple(evidence))


def eval_c8_near_miss(subject: Subject) -> GateOutcome:
    """C8: a closely averted incident revealing a severe failure mode.

    Triggers when the record is marked a near miss, some potential-harm
    category reaches severity 4+, and realized harm stayed at or below 3.
    Composite clusters carry no near-miss state and never trigger.
    """
    if isinstance(subject, CompositeCluster):
        return GateOutcome("C8", GateResult.FAIL, evidence=("near_miss",))
    evidence = ("near_miss", "potential_harm", "harm")
    triggered = (
        subject.near_miss
        and subject.max_potential_severity() >= 4
        and subject.max_realized_severity() <= 3
    )
    return GateOutcome(
        "C8", GateResult.TRIGGER if triggered else GateResult.FAIL, evidence=evidence
    )


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


def _rationale(
    classification: str,
    outcomes: list[GateOutcome],
    severities: dict[str, int],
    floor: int,
) -> str:
    by_gate = {entry.gate: entry for entry in outcomes}
    c3 = by_gate.get("C3")
    if classification == Classification.ESCALATE:
        if c3 is not None and c3.result == GateResult.TRIGGER:
            return "Immediate escalation condition met; confirmed harm not required."
        top = max(severities.items(), key=lambda item: (item[1], item[0]))
        return (
            f"Severity level {top[1]} in {top[0]} with cross-border propagation; "
            "international coordination required."
        )
    if classification == Classification.ALERT:
        c8 = by_gate.get("C8")
        if c8 is not None and c8.result == GateResult.TRIGGER:
            return "Near miss revealing a severe failure mode; systemic risk signal."
        return "Cross-border relevance without severity escalation; information sharing warranted."
    c1 = by_gate.get("C1")
    if c1 is not None and c1.result == GateResult.INDETERMINATE:
        return "Causal involvement could not be established; discarded as indeterminate."
    if c1 is not None and c1.result == GateResult.FAIL:
        return "AI system was not a causal factor."
    c2 = by_gate.get("C2")
    if c2 is not None and c2.result == GateResult.FAIL:
        return "Domain is excluded from scope."
    return "No escalation or alert gate was satisfied."


def classify(
    subject: Subject,
    config: EngineConfig | None = None,
    context: ClusterContext | None = None,
    categories: HarmCategoryRegistry | None = None,
) -> ClassificationTrace:
    """Run the full gate sequence and produce a classification trace.

    A pure function of its inputs: identical (subject, config, context) yield
    identical traces. Incident records run C1→C8 with C4 consulting the
    cluster context; when C4 matches, severity, propagation, and the harm
    gate evaluate against the composite. Cluster subjects enter at C5a
    (their members already passed C1–C3), prefixed with an informational C4
    outcome recording the composition.
    """
    if config is None:
        config = EngineConfig()
    if context is None:
        context = EMPTY_CONTEXT
    if categories is None:
        categories = default_harm_categories()

    outcomes: list[GateOutcome] = []
    severities: dict[str, int] = {}

    if isinstance(subject, CompositeCluster):
        subject_id = subject.id
        outcomes.append(
            GateOutcome(
                "C4",
                GateResult.PASS,
                diagnostics=(_cites("root_cause_type"),),
                evidence=tuple(
                    ["signature.kind", "signature.key"] + [f"member:{m}" for m in subject.members]
                ),
            )
        )
        effective: Subject = subject
        c5a, c5b = eval_c5_harm(effective, config, categories)
        outcomes.extend((c5a, c5b))
        severities = _effective_severities(effective, config, categories)
        c6 = eval_c6_propagation(effective, config)
        outcomes.append(c6)
        outcomes.append(eval_c7_irreversibility(effective))
        escalated = c5b.result == GateResult.PASS and c6.result == GateResult.PASS
        if escalated:
            outcomes.append(GateOutcome("C8", GateResult.SKIPPED))
        else:
            outcomes.append(eval_c8_near_miss(effective))
        return _finish(subject_id, outcomes, severities, config)

    record = subject
    readiness = completeness_check(record)

    c1 = (
        _blocked("C1", ("causation.role", "causation.confidence"))
        if readiness["C1"] is GateReadiness.INDETERMINATE
        else eval_c1_causation(record, config)
    )
    if c1.result == GateResult.INDETERMINATE and DIAG_C1_INDETERMINATE not in c1.diagnostics:
        c1 = GateOutcome(
            "C1", c1.result, diagnostics=(DIAG_C1_INDETERMINATE,) + c1.diagnostics, evidence=c1.evidence
        )
    outcomes.append(c1)
    if c1.result != GateResult.PASS:
        return _finish(record.id, outcomes, severities, config)

    c2 = eval_c2_scope(record, config)
    outcomes.append(c2)
    if c2.result != GateResult.PASS:
        return _finish(record.id, outcomes, severities, config)

    c3 = (
        _blocked("C3", ("immediate_flags",))
        if readiness["C3"] is GateReadiness.INDETERMINATE
        else eval_c3_immediate(record)
    )
    outcomes.append(c3)
    if c3.result == GateResult.TRIGGER:
        return _finish(record.id, outcomes, severities, config)

    if readiness["C4"] is GateReadiness.INDETERMINATE:
        c4, cluster = _blocked("C4", ("root_cause.kind", "root_cause.key")), None
    else:
        c4, cluster = eval_c4_pattern(record, context)
    outcomes.append(c4)
    effective = cluster if cluster is not None else record

    if readiness["C5a"] is GateReadiness.INDETERMINATE:
        c5a = _blocked("C5a", ("harm",))
        c5b = _blocked("C5b", ("harm",))
    else:
        c5a, c5b = eval_c5_harm(effective, config, categories)
        severities = _effective_severities(effective, config, categories)
    outcomes.extend((c5a, c5b))

    c6 = (
        _blocked("C6", ("jurisdictions", "propagation"))
        if readiness["C6"] is GateReadiness.INDETERMINATE
        else eval_c6_propagation(effective, config)
    )
    outcomes.append(c6)

    outcomes.append(eval_c7_irreversibility(record))

    escalated = c5b.result == GateResult.PASS and c6.result == GateResult.PASS
    if escalated:
        outcomes.append(GateOutcome("C8", GateResult.SKIPPED))
    else:
        outcomes.append(eval_c8_near_miss(record))

    return _finish(record.id, outcomes, severities, config)


def _finish(
    subject_id: str,
    outcomes: list[GateOutcome],
    severities: dict[str, int],
    config: EngineConfig,
) -> ClassificationTrace:
    by_gate = {entry.gate: entry for entry in outcomes}

    def result_of(gate: str) -> str | None:
        entry = by_gate.get(gate)
        return None if entry is None else entry.result

    c3_trigger = result_of("C3") == GateResult.TRIGGER
    c5b_pass = result_of("C5b") == GateResult.PASS
    c5b_fail = result_of("C5b") == GateResult.FAIL
    c6_pass = result_of("C6") == GateResult.PASS
    c8_trigger = result_of("C8") == GateResult.TRIGGER

    # Alert needs a definite C5b fail: an indeterminate severity (blocked
    # harm data) plus cross-border reach is a data gap, not an alert.
    if c3_trigger or (c5b_pass and c6_pass):
        classification = Classification.ESCALATE
    elif c8_trigger or (c6_pass and c5b_fail):
        classification = Classification.ALERT
    else:
        classification = Classification.DISCARD

    rationale = _rationale(classification, outcomes, severities, config.severity_escalation_floor)
    return ClassificationTrace(
        subject=subject_id,
        outcomes=tuple(outcomes),
        classification=classification,
        rationale=rationale,
    )
