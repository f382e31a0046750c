"""Comparator regulatory regimes encoded as rulesets, plus gap analysis.

Each profile is a versioned JSON data file naming its triggers; the predicate
implementations live here, keyed by trigger name. Fidelity is to the regimes'
reporting thresholds as characterized for incident comparison, not to full
statutes: thresholds are compared in the nominal units carried on the record
(USD and EUR fields are separate, no FX conversion), and qualitative "serious
harm" tests are proxied by assessed severity with a ``proxy_threshold`` note.

Trigger evaluation is three-valued: a missing quantitative field yields
``unknown`` rather than a silent zero, and a profile whose only undecided
triggers are unknown returns an ``indeterminate`` verdict with data-gap codes.

Gap analysis compares every profile against the gate pipeline
(``gated_pipeline``, whose verdict is reportable exactly when the
classification is escalate or alert) and labels definite misses:

* ``pre_harm_gap`` — the pipeline escalated/alerted on a pre-harm gate (C3 or
  C8) but the profile requires outcomes it does not have;
* ``aggregation_gap`` — a composite cluster is reportable while every member
  is individually not reportable under a profile with no aggregation
  provision;
* ``threshold_gap`` — a discrete subject falls below the profile's reporting
  thresholds despite pipeline reportability;
* ``standing_condition_gap`` — the subject is a standing condition and the
  discrete-event profile's verdict diverges.

At most one code is emitted per profile pair, in the precedence order
standing_condition_gap, pre_harm_gap, aggregation_gap, threshold_gap. Reverse
divergences (profile reportable, pipeline not) carry no code; they are visible
in the verdict matrix itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Callable, Mapping, Sequence, Union

from .clusters import ClusterContext, CompositeCluster
from .config import EngineConfig
from .gates import Classification, ClassificationTrace, GateResult, classify
from .model import (
    SCHEMA_VERSION,
    CausationConfidence,
    CausationRole,
    ConfigurationError,
    FieldGroup,
    HarmBasis,
    ImmediateFlag,
    IncidentRecord,
    ParseError,
    ScopeDomain,
    _as_bool,
    _as_enum,
    _as_list,
    _as_obj,
    _as_str,
)

Subject = Union[IncidentRecord, CompositeCluster]

TriState = Union[bool, None]


class Verdict:
    REPORTABLE = "reportable"
    NOT_REPORTABLE = "not_reportable"
    INDETERMINATE = "indeterminate"

    ALL = (REPORTABLE, NOT_REPORTABLE, INDETERMINATE)


class GapCode:
    PRE_HARM = "pre_harm_gap"
    AGGREGATION = "aggregation_gap"
    THRESHOLD = "threshold_gap"
    STANDING_CONDITION = "standing_condition_gap"

    ALL = (STANDING_CONDITION, PRE_HARM, AGGREGATION, THRESHOLD)  # precedence order


PROFILE_IDS = ("gated_pipeline", "sb53", "eu_aia", "dora")

# ISO 3166-1 alpha-2 codes of the 27 EU member states.
EU_MEMBER_STATES = frozenset(
    {
        "AT", "BE", "BG", "HR", "CY", "CZ", "DK", "EE", "FI", "FR",
        "DE", "GR", "HU", "IE", "IT", "LV", "LT", "LU", "MT", "NL",
        "PL", "PT", "RO", "SK", "SI", "ES", "SE",
    }
)

_CONFIRMED_BASES = (HarmBasis.REALIZED, HarmBasis.AGGREGATE)


# ---------------------------------------------------------------------------
# Subject view: records and clusters normalized for trigger predicates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubjectView:
    """What trigger predicates see, whether the subject is one record or many.

    For clusters, counts sum over members where present, durations and user
    fractions take the member maximum, and flags/jurisdictions union.
    """

    subject_id: str
    is_cluster: bool
    harm: tuple
    immediate_flags: frozenset
    jurisdictions: frozenset
    standing_condition: bool
    harm_data_available: bool
    causation_state: TriState
    scope_domains: frozenset
    max_confidence: CausationConfidence
    deaths: int | None
    serious_injuries: int | None
    property_damage_usd: float | None
    affected_clients: int | None
    affected_users_fraction: float | None
    service_downtime_hours: float | None
    financial_impact_eur: float | None

    def confirmed_severity(self, categories: Sequence[str]) -> int:
        """Max severity among realized/aggregate harm entries in ``categories``."""
        return max(
            (
                entry.severity
                for entry in self.harm
                if entry.basis in _CONFIRMED_BASES and entry.category in categories
            ),
            default=0,
        )

    def has_confirmed_harm(self) -> bool:
        return any(entry.basis in _CONFIRMED_BASES for entry in self.harm)

    def eu_member_state_count(self) -> int:
        return len(self.jurisdictions & EU_MEMBER_STATES)

    def fully_in_excluded_domain(self, excluded: Sequence[ScopeDomain]) -> bool:
        return bool(self.scope_domains) and self.scope_domains <= set(excluded)


_CONF_ORDER = {
    CausationConfidence.UNKNOWN: 0,
    CausationConfidence.POSSIBLE: 1,
    CausationConfidence.PROBABLE: 2,
    CausationConfidence.CONFIRMED: 3,
}


def _causation_state(role: CausationRole) -> TriState:
    """Whether the AI system was causally involved, three-valued."""
    if role is CausationRole.CAUSAL_FACTOR:
        return True
    if role is CausationRole.UNKNOWN:
        return None
    return False


def _sum_opt(values: Sequence[int | None]) -> int | None:
    present = [v for v in values if v is not None]
    return sum(present) if present else None


def _fsum_opt(values: Sequence[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return sum(present) if present else None


def _max_opt(values: Sequence[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return max(present) if present else None


def record_view(record: IncidentRecord) -> SubjectView:
    return SubjectView(
        subject_id=record.id,
        is_cluster=False,
        harm=record.harm,
        immediate_flags=record.immediate_flags,
        jurisdictions=record.jurisdictions,
        standing_condition=record.propagation.standing_condition,
        harm_data_available=record.available(FieldGroup.HARM_OUTCOMES),
        causation_state=_causation_state(record.causation.role),
        scope_domains=frozenset({record.scope_domain}),
        max_confidence=record.causation.confidence,
        deaths=record.impact.deaths,
        serious_injuries=record.impact.serious_injuries,
        property_damage_usd=record.impact.property_damage_usd,
        affected_clients=record.impact.affected_clients,
        affected_users_fraction=record.impact.affected_users_fraction,
        service_downtime_hours=record.impact.service_downtime_hours,
        financial_impact_eur=record.impact.financial_impact_eur,
    )


def cluster_view(cluster: CompositeCluster, members: Sequence[IncidentRecord]) -> SubjectView:
    ids = {record.id for record in members}
    if ids != set(cluster.members):
        raise ConfigurationError(
            f"cluster {cluster.id}: member records do not match member ids"
        )
    flags: set = set()
    for record in members:
        flags.update(record.immediate_flags)
    confidence = max((r.causation.confidence for r in members), key=lambda c: _CONF_ORDER[c])
    member_causation = [_causation_state(r.causation.role) for r in members]
    causation: TriState
    if any(state is False for state in member_causation):
        causation = False
    elif any(state is None for state in member_causation):
        causation = None
    else:
        causation = True
    return SubjectView(
        subject_id=cluster.id,
        is_cluster=True,
        harm=cluster.harm,
        immediate_flags=frozenset(flags),
        jurisdictions=cluster.jurisdictions,
        standing_condition=cluster.standing_condition,
        harm_data_available=all(r.available(FieldGroup.HARM_OUTCOMES) for r in members),
        causation_state=causation,
        scope_domains=frozenset(r.scope_domain for r in members),
        max_confidence=confidence,
        deaths=_sum_opt([r.impact.deaths for r in members]),
        serious_injuries=_sum_opt([r.impact.serious_injuries for r in members]),
        property_damage_usd=_fsum_opt([r.impact.property_damage_usd for r in members]),
        affected_clients=_sum_opt([r.impact.affected_clients for r in members]),
        affected_users_fraction=_max_opt([r.impact.affected_users_fraction for r in members]),
        service_downtime_hours=_max_opt([r.impact.service_downtime_hours for r in members]),
        financial_impact_eur=_fsum_opt([r.impact.financial_impact_eur for r in members]),
    )


# ---------------------------------------------------------------------------
# Trigger predicates (three-valued)
# ---------------------------------------------------------------------------

TriggerResult = tuple[TriState, tuple[str, ...]]  # (state, data-gap field names)
TriggerFn = Callable[[SubjectView, Mapping[str, Any]], TriggerResult]


def _gt(value: float | None, threshold: float, gap_field: str) -> TriggerResult:
    if value is None:
        return None, (gap_field,)
    return value > threshold, ()


def _trigger_mass_casualty(view: SubjectView, params: Mapping[str, Any]) -> TriggerResult:
    over = params.get("casualties_over", 50)
    deaths, injuries = view.deaths, view.serious_injuries
    if deaths is not None and deaths > over:
        return True, ()
    if injuries is not None and injuries > over:
        return True, ()
    gaps = tuple(
        name for name, value in (("deaths", deaths), ("serious_injuries", injuries)) if value is None
    )
    if gaps:
        return None, gaps
    return (deaths + injuries) > over, ()


def _trigger_property_damage(view: SubjectView, params: Mapping[str, Any]) -> TriggerResult:
    return _gt(view.property_damage_usd, params.get("usd_over", 1e9), "property_damage_usd")


def _trigger_deceptive_subversion(view: SubjectView, params: Mapping[str, Any]) -> TriggerResult:
    return ImmediateFlag.DECEPTIVE_SUBVERSION_OF_CONTROLS in view.immediate_flags, ()


def _trigger_weight_exfiltration_with_harm(
    view: SubjectView, params: Mapping[str, Any]
) -> TriggerResult:
    if ImmediateFlag.WEIGHT_EXFILTRATION not in view.immediate_flags:
        return False, ()
    # The exfiltration only qualifies once it resulted in death, bodily
    # injury, or property damage.
    states: list[TriState] = []
    gaps: list[str] = []
    for name, value in (
        ("deaths", view.deaths),
        ("serious_injuries", view.serious_injuries),
        ("property_damage_usd", view.property_damage_usd),
    ):
        if value is None:
            states.append(None)
            gaps.append(name)
        else:
            states.append(value > 0)
    if any(state is True for state in states):
        return True, ()
    if any(state is None for state in states):
        return None, tuple(gaps)
    return False, ()


def _severity_trigger(
    view: SubjectView, categories: Sequence[str], floor: int
) -> TriggerResult:
    if not view.harm_data_available:
        return None, ("harm",)
    return view.confirmed_severity(categories) >= floor, ()


def _trigger_health_serious_harm(view: SubjectView, params: Mapping[str, Any]) -> TriggerResult:
    if view.deaths is not None and view.deaths > 0:
        return True, ()
    state, gaps = _severity_trigger(
        view, params.get("health_categories", ("physical", "psychological")),
        params.get("severity_at_least", 4),
    )
    if state is False and view.deaths is None:
        # No qualifying assessed harm, but deaths were never counted.
        return None, ("deaths",)
    return state, gaps


def _trigger_critical_infrastructure(view: SubjectView, params: Mapping[str, Any]) -> TriggerResult:
    return _severity_trigger(
        view, (params.get("category", "infrastructure"),), params.get("severity_at_least", 4)
    )


def _trigger_fundamental_rights(view: SubjectView, params: Mapping[str, Any]) -> TriggerResult:
    category = params.get("category", "fundamental_rights")
    if not view.harm_data_available:
        return None, ("harm",)
    entries = [entry for entry in view.harm if entry.category == category]
    if not entries:
        return False, ()
    # Infringement is not practically testable; only a confirmed-causation,
    # severe entry is asserted outright, everything else stays indeterminate.
    severe = any(
        entry.severity >= params.get("severity_at_least", 4)
        for entry in entries
        if entry.basis in _CONFIRMED_BASES
    )
    if severe and view.max_confidence is CausationConfidence.CONFIRMED:
        return True, ()
    return None, ("fundamental_rights_assessment",)


def _trigger_property_or_environment(view: SubjectView, params: Mapping[str, Any]) -> TriggerResult:
    return _severity_trigger(
        view, params.get("categories", ("environmental", "financial")),
        params.get("severity_at_least", 4),
    )


def _trigger_clients_or_users(view: SubjectView, params: Mapping[str, Any]) -> TriggerResult:
    clients_state, clients_gaps = _gt(
        view.affected_clients, params.get("clients_over", 100_000), "affected_clients"
    )
    users_state, users_gaps = _gt(
        view.affected_users_fraction,
        params.get("users_fraction_over", 0.10),
        "affected_users_fraction",
    )
    if clients_state is True or users_state is True:
        return True, ()
    if clients_state is None or users_state is None:
        return None, clients_gaps + users_gaps
    return False, ()


def _trigger_duration(view: SubjectView, params: Mapping[str, Any]) -> TriggerResult:
    return _gt(view.service_downtime_hours, params.get("hours_over", 24.0), "service_downtime_hours")


def _trigger_member_states(view: SubjectView, params: Mapping[str, Any]) -> TriggerResult:
    return view.eu_member_state_count() >= params.get("at_least", 2), ()


def _trigger_financial_impact(view: SubjectView, params: Mapping[str, Any]) -> TriggerResult:
    return _gt(view.financial_impact_eur, params.get("eur_over", 100_000.0), "financial_impact_eur")


TRIGGER_IMPLS: dict[str, TriggerFn] = {
    "mass_casualty": _trigger_mass_casualty,
    "property_damage": _trigger_property_damage,
    "deceptive_subversion_no_harm": _trigger_deceptive_subversion,
    "weight_exfiltration_with_harm": _trigger_weight_exfiltration_with_harm,
    "health_serious_harm": _trigger_health_serious_harm,
    "critical_infrastructure_disruption": _trigger_critical_infrastructure,
    "fundamental_rights_infringement": _trigger_fundamental_rights,
    "property_or_environment_harm": _trigger_property_or_environment,
    "clients_or_users_impacted": _trigger_clients_or_users,
    "service_duration": _trigger_duration,
    "member_states_affected": _trigger_member_states,
    "financial_impact": _trigger_financial_impact,
}


# ---------------------------------------------------------------------------
# Rulesets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ProfileTrigger:
    name: str
    requires_confirmed_harm: bool
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in TRIGGER_IMPLS:
            raise ConfigurationError(f"unknown trigger {self.name!r}")
        object.__setattr__(self, "params", dict(self.params))


@dataclass(frozen=True, slots=True)
class ProfileRuleSet:
    id: str
    title: str
    aggregation_supported: bool
    triggers: tuple[ProfileTrigger, ...]
    requires_ai_causation: bool = False
    excluded_domains: tuple[ScopeDomain, ...] = ()
    notes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.id not in PROFILE_IDS:
            raise ConfigurationError(f"unknown profile id {self.id!r}")
        object.__setattr__(self, "triggers", tuple(self.triggers))
        object.__setattr__(self, "excluded_domains", tuple(self.excluded_domains))
        object.__setattr__(self, "notes", dict(self.notes))

    @property
    def delegates_to_pipeline(self) -> bool:
        return self.id == "gated_pipeline"

    @property
    def has_thresholds(self) -> bool:
        return bool(self.triggers)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "title": self.title,
            "aggregation_supported": self.aggregation_supported,
            "requires_ai_causation": self.requires_ai_causation,
            "excluded_domains": [domain.value for domain in self.excluded_domains],
            "triggers": [
                {
                    "name": t.name,
                    "requires_confirmed_harm": t.requires_confirmed_harm,
                    "params": dict(t.params),
                }
                for t in self.triggers
            ],
            "notes": dict(self.notes),
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "profile") -> "ProfileRuleSet":
        obj = _as_obj(data, path)
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise ParseError(f"{path}.schema_version: unsupported version")
        triggers = []
        for i, raw in enumerate(_as_list(obj.get("triggers", []), f"{path}.triggers")):
            trig = _as_obj(raw, f"{path}.triggers[{i}]")
            triggers.append(
                ProfileTrigger(
                    name=_as_str(trig.get("name"), f"{path}.triggers[{i}].name"),
                    requires_confirmed_harm=_as_bool(
                        trig.get("requires_confirmed_harm"),
                        f"{path}.triggers[{i}].requires_confirmed_harm",
                    ),
                    params=_as_obj(trig.get("params", {}), f"{path}.triggers[{i}].params"),
                )
            )
        notes = {
            str(k): str(v) for k, v in _as_obj(obj.get("notes", {}), f"{path}.notes").items()
        }
        return cls(
            id=_as_str(obj.get("id"), f"{path}.id"),
            title=_as_str(obj.get("title"), f"{path}.title"),
            aggregation_supported=_as_bool(
                obj.get("aggregation_supported"), f"{path}.aggregation_supported"
            ),
            requires_ai_causation=_as_bool(
                obj.get("requires_ai_causation", False), f"{path}.requires_ai_causation"
            ),
            excluded_domains=tuple(
                _as_enum(domain, ScopeDomain, f"{path}.excluded_domains[{i}]")
                for i, domain in enumerate(
                    _as_list(obj.get("excluded_domains", []), f"{path}.excluded_domains")
                )
            ),
            triggers=tuple(triggers),
            notes=notes,
        )


def load_profile(profile_id: str) -> ProfileRuleSet:
    """Load one bundled profile ruleset by id."""
    if profile_id not in PROFILE_IDS:
        raise ConfigurationError(f"unknown profile id {profile_id!r}")
    path = resources.files("escalade").joinpath("data", "profiles", f"{profile_id}.json")
    with path.open("r", encoding="utf-8") as fh:
        return ProfileRuleSet.from_dict(json.load(fh), profile_id)


def load_profiles() -> tuple[ProfileRuleSet, ...]:
    """All four bundled profiles, the pipeline's own profile first."""
    return tuple(load_profile(profile_id) for profile_id in PROFILE_IDS)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ProfileEvaluation:
    profile_id: str
    subject_id: str
    verdict: str
    fired: tuple[str, ...] = ()
    data_gaps: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "profile": self.profile_id,
            "subject": self.subject_id,
            "verdict": self.verdict,
            "fired": list(self.fired),
            "data_gaps": list(self.data_gaps),
        }


def _evaluate_triggers(view: SubjectView, profile: ProfileRuleSet) -> ProfileEvaluation:
    """Three-valued verdict: causation precondition AND the OR of all triggers."""
    if profile.excluded_domains and view.fully_in_excluded_domain(profile.excluded_domains):
        return ProfileEvaluation(
            profile_id=profile.id, subject_id=view.subject_id, verdict=Verdict.NOT_REPORTABLE
        )

    causation: TriState = True
    if profile.requires_ai_causation:
        causation = view.causation_state
    if causation is False:
        return ProfileEvaluation(
            profile_id=profile.id, subject_id=view.subject_id, verdict=Verdict.NOT_REPORTABLE
        )

    fired: list[str] = []
    gaps: list[str] = []
    any_unknown = False
    for trigger in profile.triggers:
        state, trigger_gaps = TRIGGER_IMPLS[trigger.name](view, trigger.params)
        if state is True:
            fired.append(trigger.name)
        elif state is None:
            any_unknown = True
            gaps.extend(f"{trigger.name}:{name}" for name in trigger_gaps)

    if not fired and not any_unknown:
        verdict = Verdict.NOT_REPORTABLE
    elif causation is None:
        # Some trigger would or could fire, but the causal link is unresolved.
        verdict = Verdict.INDETERMINATE
        gaps.insert(0, "causation.role")
    elif fired:
        verdict = Verdict.REPORTABLE
    else:
        verdict = Verdict.INDETERMINATE
    return ProfileEvaluation(
        profile_id=profile.id,
        subject_id=view.subject_id,
        verdict=verdict,
        fired=tuple(fired),
        data_gaps=tuple(dict.fromkeys(gaps)),
    )


def _combine_member_verdicts(evaluations: Sequence[ProfileEvaluation], profile_id: str, subject_id: str) -> ProfileEvaluation:
    if any(e.verdict == Verdict.REPORTABLE for e in evaluations):
        verdict = Verdict.REPORTABLE
    elif any(e.verdict == Verdict.INDETERMINATE for e in evaluations):
        verdict = Verdict.INDETERMINATE
    else:
        verdict = Verdict.NOT_REPORTABLE
    fired = tuple(dict.fromkeys(name for e in evaluations for name in e.fired))
    gaps = tuple(dict.fromkeys(gap for e in evaluations for gap in e.data_gaps))
    return ProfileEvaluation(
        profile_id=profile_id, subject_id=subject_id, verdict=verdict, fired=fired, data_gaps=gaps
    )


def eval_profile(
    subject: Subject,
    profile: ProfileRuleSet,
    config: EngineConfig | None = None,
    context: ClusterContext | None = None,
    members: Sequence[IncidentRecord] | None = None,
) -> ProfileEvaluation:
    """Evaluate one profile against one subject.

    ``gated_pipeline`` delegates to the gate pipeline. A cluster under a
    profile with no aggregation provision is assessed member by member
    (``members`` required); any-reportable wins, otherwise any-indeterminate.
    A cluster under an aggregating profile is assessed on pooled metrics.
    """
    if config is None:
        config = EngineConfig()

    if profile.delegates_to_pipeline:
        trace = classify(subject, config, context)
        verdict = (
            Verdict.REPORTABLE
            if trace.classification in (Classification.ESCALATE, Classification.ALERT)
            else Verdict.NOT_REPORTABLE
        )
        subject_id = subject.id
        return ProfileEvaluation(
            profile_id=profile.id,
            subject_id=subject_id,
            verdict=verdict,
            fired=(trace.classification,),
        )

    if isinstance(subject, CompositeCluster):
        if members is None:
            raise ConfigurationError(
                f"profile {profile.id}: cluster evaluation requires member records"
            )
        if profile.aggregation_supported:
            return _evaluate_triggers(cluster_view(subject, members), profile)
        member_evals = [_evaluate_triggers(record_view(r), profile) for r in members]
        return _combine_member_verdicts(member_evals, profile.id, subject.id)

    return _evaluate_triggers(record_view(subject), profile)


# ---------------------------------------------------------------------------
# Gap reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Divergence:
    profiles: tuple[str, str]  # (gated_pipeline, comparator)
    code: str

    def to_dict(self) -> dict[str, Any]:
        return {"profiles": list(self.profiles), "code": self.code}


@dataclass(frozen=True, slots=True)
class GapReport:
    subject: str
    subject_kind: str  # record | cluster
    verdicts: Mapping[str, str]
    divergences: tuple[Divergence, ...]
    data_gaps: Mapping[str, tuple[str, ...]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "subject": self.subject,
            "subject_kind": self.subject_kind,
            "verdicts": dict(self.verdicts),
            "divergences": [d.to_dict() for d in self.divergences],
            "data_gaps": {k: list(v) for k, v in self.data_gaps.items()},
        }


def _pre_harm_reportable(trace: ClassificationTrace) -> bool:
    """Did reportability come from a pre-harm gate (C3 or C8 trigger)?"""
    return trace.result("C3") == GateResult.TRIGGER or trace.result("C8") == GateResult.TRIGGER


def _divergence_code(
    subject: Subject,
    trace: ClassificationTrace,
    profile: ProfileRuleSet,
    evaluation: ProfileEvaluation,
    member_evaluations: Sequence[ProfileEvaluation] | None,
    view: SubjectView,
) -> str | None:
    pipeline_reportable = trace.classification in (Classification.ESCALATE, Classification.ALERT)
    verdicts_differ = (
        evaluation.verdict != Verdict.REPORTABLE
        if pipeline_reportable
        else evaluation.verdict == Verdict.REPORTABLE
    )
    if not verdicts_differ:
        return None

    if view.standing_condition and pipeline_reportable:
        return GapCode.STANDING_CONDITION
    if not pipeline_reportable:
        return None  # reverse divergence: matrix shows it, no code defined

    if evaluation.verdict != Verdict.NOT_REPORTABLE:
        return None  # indeterminate is a data gap, not a definite miss

    if _pre_harm_reportable(trace):
        return GapCode.PRE_HARM
    if (
        isinstance(subject, CompositeCluster)
        and not profile.aggregation_supported
        and member_evaluations is not None
        and all(e.verdict == Verdict.NOT_REPORTABLE for e in member_evaluations)
    ):
        return GapCode.AGGREGATION
    if profile.has_thresholds:
        return GapCode.THRESHOLD
    return None


def gap_report(
    records: Sequence[IncidentRecord],
    clusters: Sequence[CompositeCluster],
    profiles: Sequence[ProfileRuleSet] | None = None,
    config: EngineConfig | None = None,
) -> list[GapReport]:
    """Audit every subject against every profile.

    Subjects are the clusters plus all records outside any cluster; clustered
    records are assessed through their composite, mirroring how the pipeline
    treats them.
    """
    if profiles is None:
        profiles = load_profiles()
    if config is None:
        config = EngineConfig()

    by_id = {record.id: record for record in records}
    clustered: set[str] = set()
    for cluster in clusters:
        clustered.update(cluster.members)
    context = ClusterContext(clusters)

    subjects: list[tuple[Subject, Sequence[IncidentRecord] | None]] = []
    for cluster in clusters:
        members = [by_id[m] for m in cluster.members if m in by_id]
        subjects.append((cluster, members))
    for record in records:
        if record.id not in clustered:
            subjects.append((record, None))

    reports: list[GapReport] = []
    for subject, members in subjects:
        is_cluster = isinstance(subject, CompositeCluster)
        view = cluster_view(subject, members) if is_cluster else record_view(subject)
        trace = classify(subject, config, context)

        verdicts: dict[str, str] = {}
        gaps: dict[str, tuple[str, ...]] = {}
        divergences: list[Divergence] = []
        for profile in profiles:
            evaluation = eval_profile(subject, profile, config, context, members)
            verdicts[profile.id] = evaluation.verdict
            if evaluation.data_gaps:
                gaps[profile.id] = evaluation.data_gaps
            if profile.delegates_to_pipeline:
                continue
            member_evals = None
            if is_cluster and not profile.aggregation_supported and members:
                member_evals = [_evaluate_triggers(record_view(r), profile) for r in members]
            code = _divergence_code(subject, trace, profile, evaluation, member_evals, view)
            if code is not None:
                divergences.append(Divergence(profiles=("gated_pipeline", profile.id), code=code))

        reports.append(
            GapReport(
                subject=subject.id,
                subject_kind="cluster" if is_cluster else "record",
                verdicts=verdicts,
                divergences=tuple(divergences),
                data_gaps=gaps,
            )
        )
    return reports
