"""Incident data model: record types, validation, completeness, canonical JSON.

Everything downstream (gates, clustering, monitoring, comparators) consumes the
types defined here. Records are immutable; normalization happens at
construction and every rule-level check lives in :func:`validate_record`, so a
syntactically well-formed but rule-violating record can still be built,
inspected, and reported on.

Serialization is canonical: field order is fixed, sets are emitted sorted,
timestamps are RFC 3339 UTC with a ``Z`` suffix, and ``to_json`` output is
byte-stable under a parse/serialize round trip.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

SCHEMA_VERSION = 1

GATE_IDS = ("C1", "C2", "C3", "C4", "C5a", "C5b", "C6", "C7", "C8")


class ModelError(ValueError):
    """Base class for model-layer errors."""


class ParseError(ModelError):
    """A document could not be decoded into a record."""


class ConfigurationError(ModelError):
    """A caller-supplied configuration value is invalid."""


# ---------------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------------


class CausationRole(str, Enum):
    CAUSAL_FACTOR = "causal_factor"
    DETECTION_CHANNEL_ONLY = "detection_channel_only"
    NONE = "none"
    UNKNOWN = "unknown"


class CausationConfidence(str, Enum):
    CONFIRMED = "confirmed"
    PROBABLE = "probable"
    POSSIBLE = "possible"
    UNKNOWN = "unknown"

    def at_least(self, floor: "CausationConfidence") -> bool:
        """True when this confidence is at or above ``floor``.

        ``unknown`` is never at or above any floor, including ``unknown``
        itself: an unknown confidence can't clear a bar.
        """
        order = {
            CausationConfidence.CONFIRMED: 3,
            CausationConfidence.PROBABLE: 2,
            CausationConfidence.POSSIBLE: 1,
            CausationConfidence.UNKNOWN: 0,
        }
        if self is CausationConfidence.UNKNOWN:
            return False
        return order[self] >= order[floor]


class ScopeDomain(str, Enum):
    CIVILIAN = "civilian"
    MILITARY = "military"
    NATIONAL_SECURITY = "national_security"
    OTHER = "other"


class ImmediateFlag(str, Enum):
    CBRN_ASSISTANCE = "cbrn_assistance"
    WEIGHT_EXFILTRATION = "weight_exfiltration"
    LOSS_OF_DEVELOPER_CONTROL = "loss_of_developer_control"
    DECEPTIVE_SUBVERSION_OF_CONTROLS = "deceptive_subversion_of_controls"


class VulnerabilityFlag(str, Enum):
    MINORS = "minors"
    MENTAL_HEALTH_RISK = "mental_health_risk"
    OTHER_VULNERABLE = "other_vulnerable"


class HarmBasis(str, Enum):
    REALIZED = "realized"
    AGGREGATE = "aggregate"
    POTENTIAL = "potential"


class RootCauseKind(str, Enum):
    TECHNICAL = "technical"
    CAPABILITY = "capability"
    CONTEXTUAL = "contextual"


class PropagationPathway(str, Enum):
    CONTENT_DISTRIBUTION = "content_distribution"
    MODEL_WEIGHTS = "model_weights"
    API_ACCESS = "api_access"
    SUPPLY_CHAIN = "supply_chain"
    HUMAN_MEDIATED = "human_mediated"
    OTHER = "other"


class PropagationVelocity(str, Enum):
    HOURS = "hours"
    DAYS = "days"
    WEEKS = "weeks"
    MONTHS = "months"


class Ternary(str, Enum):
    """Three-valued answer. ``unknown`` is never silently coerced to ``no``."""

    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


class Restorability(str, Enum):
    RESTORABLE = "restorable"
    NOT_RESTORABLE = "not_restorable"
    UNKNOWN = "unknown"


class FieldGroup(str, Enum):
    CAUSATION_EVIDENCE = "causation_evidence"
    HARM_OUTCOMES = "harm_outcomes"
    TELEMETRY = "telemetry"
    CROSS_PROVIDER = "cross_provider"
    JURISDICTION_DATA = "jurisdiction_data"


class Availability(str, Enum):
    AVAILABLE = "available"
    UNAVAILABLE = "unavailable"


class GateReadiness(str, Enum):
    READY = "ready"
    INDETERMINATE = "indeterminate"


# ---------------------------------------------------------------------------
# Parse helpers
# ---------------------------------------------------------------------------

_WS = re.compile(r"\s+")


def normalize_key(raw: str) -> str:
    """Casefold and whitespace-normalize a root-cause signature key."""
    return _WS.sub(" ", raw.strip()).casefold()


def _err(path: str, message: str) -> ParseError:
    return ParseError(f"{path}: {message}")


def _as_obj(value: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise _err(path, f"expected object, got {type(value).__name__}")
    return value


def _as_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise _err(path, f"expected string, got {type(value).__name__}")
    return value


def _as_bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise _err(path, f"expected boolean, got {type(value).__name__}")
    return value


def _as_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _err(path, f"expected integer, got {type(value).__name__}")
    return value


def _as_float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _err(path, f"expected number, got {type(value).__name__}")
    return float(value)


def _as_list(value: Any, path: str) -> Sequence[Any]:
    if not isinstance(value, Sequence) or isinstance(value, (str, bytes)):
        raise _err(path, f"expected array, got {type(value).__name__}")
    return value


def _as_enum(value: Any, enum_cls: type, path: str) -> Any:
    raw = _as_str(value, path)
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)  # type: ignore[attr-defined]
        raise _err(path, f"expected one of [{allowed}], got {raw!r}") from None


_FRACTION = re.compile(r"^(.*T\d{2}:\d{2}:\d{2})\.(\d{1,6})(?=[-+Zz]|$)")


def parse_timestamp(value: Any, path: str = "timestamp") -> datetime:
    """Parse an RFC 3339 timestamp; the result is normalized to UTC."""
    raw = _as_str(value, path)
    text = raw[:-1] + "+00:00" if raw.endswith("Z") else raw
    # RFC 3339 allows any number of fractional digits; fromisoformat on 3.10
    # accepts only 3 or 6, so pad to microseconds before handing it over.
    text = _FRACTION.sub(lambda m: m.group(1) + "." + m.group(2).ljust(6, "0"), text, count=1)
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError:
        raise _err(path, f"invalid RFC 3339 timestamp {raw!r}") from None
    if parsed.tzinfo is None:
        raise _err(path, f"timestamp {raw!r} must carry a UTC offset")
    return parsed.astimezone(timezone.utc)


def format_timestamp(value: datetime) -> str:
    """Render a datetime as canonical RFC 3339 UTC with ``Z`` suffix."""
    utc = value.astimezone(timezone.utc)
    if utc.microsecond:
        return utc.strftime("%Y-%m-%dT%H:%M:%S.%f").rstrip("0") + "Z"
    return utc.strftime("%Y-%m-%dT%H:%M:%SZ")


def canonical_json(document: Any) -> str:
    """Serialize a document in the canonical on-disk form (trailing newline)."""
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# Record components
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class CausationAssessment:
    """Did the AI system sit in the causal chain, and how confidently?

    When ``role`` is ``none`` the confidence is normalized to ``unknown`` at
    construction: a confidence rating of a non-role is meaningless.
    """

    role: CausationRole
    confidence: CausationConfidence

    def __post_init__(self) -> None:
        if self.role is CausationRole.NONE and self.confidence is not CausationConfidence.UNKNOWN:
            object.__setattr__(self, "confidence", CausationConfidence.UNKNOWN)

    def to_dict(self) -> dict[str, Any]:
        return {"role": self.role.value, "confidence": self.confidence.value}

    @classmethod
    def from_dict(cls, data: Any, path: str = "causation") -> "CausationAssessment":
        obj = _as_obj(data, path)
        return cls(
            role=_as_enum(obj.get("role"), CausationRole, f"{path}.role"),
            confidence=_as_enum(obj.get("confidence"), CausationConfidence, f"{path}.confidence"),
        )


@dataclass(frozen=True, slots=True)
class HarmAssessment:
    """One harm category with an assessed severity level (1..5) and its basis."""

    category: str
    severity: int
    basis: HarmBasis = HarmBasis.REALIZED

    def to_dict(self) -> dict[str, Any]:
        return {"category": self.category, "severity": self.severity, "basis": self.basis.value}

    @classmethod
    def from_dict(cls, data: Any, path: str = "harm") -> "HarmAssessment":
        obj = _as_obj(data, path)
        return cls(
            category=_as_str(obj.get("category"), f"{path}.category"),
            severity=_as_int(obj.get("severity"), f"{path}.severity"),
            basis=_as_enum(obj.get("basis", HarmBasis.REALIZED.value), HarmBasis, f"{path}.basis"),
        )


@dataclass(frozen=True, slots=True)
class RootCauseSignature:
    """Normalized root-cause identity used for pattern matching.

    ``key`` is casefolded and whitespace-normalized at construction so that
    signature equality is insensitive to formatting differences between
    reporters.
    """

    kind: RootCauseKind
    key: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "key", normalize_key(self.key))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "key": self.key}

    @classmethod
    def from_dict(cls, data: Any, path: str = "root_cause") -> "RootCauseSignature":
        obj = _as_obj(data, path)
        return cls(
            kind=_as_enum(obj.get("kind"), RootCauseKind, f"{path}.kind"),
            key=_as_str(obj.get("key"), f"{path}.key"),
        )


@dataclass(frozen=True, slots=True)
class PropagationAssessment:
    """How harm travels: pathway, speed, national containability, persistence."""

    pathway: PropagationPathway
    velocity: PropagationVelocity
    containment_feasible_nationally: Ternary
    standing_condition: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "pathway": self.pathway.value,
            "velocity": self.velocity.value,
            "containment_feasible_nationally": self.containment_feasible_nationally.value,
            "standing_condition": self.standing_condition,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "propagation") -> "PropagationAssessment":
        obj = _as_obj(data, path)
        return cls(
            pathway=_as_enum(obj.get("pathway"), PropagationPathway, f"{path}.pathway"),
            velocity=_as_enum(obj.get("velocity"), PropagationVelocity, f"{path}.velocity"),
            containment_feasible_nationally=_as_enum(
                obj.get("containment_feasible_nationally"),
                Ternary,
                f"{path}.containment_feasible_nationally",
            ),
            standing_condition=_as_bool(
                obj.get("standing_condition", False), f"{path}.standing_condition"
            ),
        )


REVERSIBILITY_LAYERS = ("containment", "control_restoration", "technical_state", "societal_state")


@dataclass(frozen=True, slots=True)
class ReversibilityProfile:
    """Four ordered restorability layers, from operational to societal."""

    containment: Restorability = Restorability.UNKNOWN
    control_restoration: Restorability = Restorability.UNKNOWN
    technical_state: Restorability = Restorability.UNKNOWN
    societal_state: Restorability = Restorability.UNKNOWN

    def layers(self) -> tuple[tuple[str, Restorability], ...]:
        """Layers in their fixed order."""
        return tuple((name, getattr(self, name)) for name in REVERSIBILITY_LAYERS)

    def to_dict(self) -> dict[str, Any]:
        return {name: value.value for name, value in self.layers()}

    @classmethod
    def from_dict(cls, data: Any, path: str = "reversibility") -> "ReversibilityProfile":
        obj = _as_obj(data, path)
        values = {
            name: _as_enum(obj.get(name, Restorability.UNKNOWN.value), Restorability, f"{path}.{name}")
            for name in REVERSIBILITY_LAYERS
        }
        return cls(**values)


@dataclass(frozen=True, slots=True)
class ImpactMetrics:
    """Optional quantitative impact figures consumed by comparator rulesets.

    All fields default to absent. Absent values are three-valued ``unknown``
    to any threshold predicate, never zero.
    """

    deaths: int | None = None
    serious_injuries: int | None = None
    property_damage_usd: float | None = None
    affected_clients: int | None = None
    affected_users_fraction: float | None = None
    service_downtime_hours: float | None = None
    financial_impact_eur: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "deaths": self.deaths,
            "serious_injuries": self.serious_injuries,
            "property_damage_usd": self.property_damage_usd,
            "affected_clients": self.affected_clients,
            "affected_users_fraction": self.affected_users_fraction,
            "service_downtime_hours": self.service_downtime_hours,
            "financial_impact_eur": self.financial_impact_eur,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "impact") -> "ImpactMetrics":
        obj = _as_obj(data, path)
        def opt_int(name: str) -> int | None:
            value = obj.get(name)
            return None if value is None else _as_int(value, f"{path}.{name}")

        def opt_float(name: str) -> float | None:
            value = obj.get(name)
            return None if value is None else _as_float(value, f"{path}.{name}")

        return cls(
            deaths=opt_int("deaths"),
            serious_injuries=opt_int("serious_injuries"),
            property_damage_usd=opt_float("property_damage_usd"),
            affected_clients=opt_int("affected_clients"),
            affected_users_fraction=opt_float("affected_users_fraction"),
            service_downtime_hours=opt_float("service_downtime_hours"),
            financial_impact_eur=opt_float("financial_impact_eur"),
        )

    def is_empty(self) -> bool:
        return all(getattr(self, f.name) is None for f in fields(self))


_DEFAULT_AVAILABILITY = {group: Availability.AVAILABLE for group in FieldGroup}


# ---------------------------------------------------------------------------
# IncidentRecord
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class IncidentRecord:
    """A single reported incident, normalized for pipeline evaluation.

    Collections are stored as tuples/frozensets so records hash and compare by
    value. Rule-level invariants (severity range, timestamp order, and so on)
    are *not* enforced here; see :func:`validate_record`.
    """

    id: str
    title: str
    occurred_at: datetime
    reported_at: datetime
    causation: CausationAssessment
    scope_domain: ScopeDomain
    root_cause: RootCauseSignature
    propagation: PropagationAssessment
    reversibility: ReversibilityProfile = field(default_factory=ReversibilityProfile)
    immediate_flags: frozenset[ImmediateFlag] = frozenset()
    harm: tuple[HarmAssessment, ...] = ()
    potential_harm: tuple[HarmAssessment, ...] | None = None
    jurisdictions: frozenset[str] = frozenset()
    near_miss: bool = False
    vulnerability_flags: frozenset[VulnerabilityFlag] = frozenset()
    affected_population: int | None = None
    event_count: int | None = None
    event_rate: float | None = None
    impact: ImpactMetrics = field(default_factory=ImpactMetrics)
    data_availability: Mapping[FieldGroup, Availability] = field(
        default_factory=lambda: dict(_DEFAULT_AVAILABILITY)
    )
    external_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "immediate_flags", frozenset(self.immediate_flags))
        object.__setattr__(self, "harm", tuple(self.harm))
        if self.potential_harm is not None:
            object.__setattr__(self, "potential_harm", tuple(self.potential_harm))
        object.__setattr__(self, "jurisdictions", frozenset(self.jurisdictions))
        object.__setattr__(self, "vulnerability_flags", frozenset(self.vulnerability_flags))
        object.__setattr__(self, "external_ids", tuple(self.external_ids))
        merged = dict(_DEFAULT_AVAILABILITY)
        merged.update(self.data_availability)
        object.__setattr__(self, "data_availability", merged)

    def __hash__(self) -> int:
        return hash((type(self), self.id, self.occurred_at, self.reported_at))

    def available(self, group: FieldGroup) -> bool:
        return self.data_availability.get(group, Availability.AVAILABLE) is Availability.AVAILABLE

    def max_realized_severity(self) -> int:
        """Highest severity across the harm list; 0 when no harm is recorded."""
        return max((entry.severity for entry in self.harm), default=0)

    def max_potential_severity(self) -> int:
        if not self.potential_harm:
            return 0
        return max(entry.severity for entry in self.potential_harm)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "title": self.title,
            "occurred_at": format_timestamp(self.occurred_at),
            "reported_at": format_timestamp(self.reported_at),
            "causation": self.causation.to_dict(),
            "scope_domain": self.scope_domain.value,
            "immediate_flags": sorted(flag.value for flag in self.immediate_flags),
            "harm": [entry.to_dict() for entry in self.harm],
            "potential_harm": (
                None
                if self.potential_harm is None
                else [entry.to_dict() for entry in self.potential_harm]
            ),
            "root_cause": self.root_cause.to_dict(),
            "jurisdictions": sorted(self.jurisdictions),
            "propagation": self.propagation.to_dict(),
            "reversibility": self.reversibility.to_dict(),
            "near_miss": self.near_miss,
            "vulnerability_flags": sorted(flag.value for flag in self.vulnerability_flags),
            "affected_population": self.affected_population,
            "event_count": self.event_count,
            "event_rate": self.event_rate,
            "impact": None if self.impact.is_empty() else self.impact.to_dict(),
            "data_availability": {
                group.value: self.data_availability[group].value for group in FieldGroup
            },
            "external_ids": list(self.external_ids),
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: Any, path: str = "record") -> "IncidentRecord":
        obj = _as_obj(data, path)
        version = obj.get("schema_version")
        if version != SCHEMA_VERSION:
            raise _err(f"{path}.schema_version", f"unsupported schema_version {version!r}")

        harm = tuple(
            HarmAssessment.from_dict(entry, f"{path}.harm[{i}]")
            for i, entry in enumerate(_as_list(obj.get("harm", []), f"{path}.harm"))
        )
        raw_potential = obj.get("potential_harm")
        potential = None
        if raw_potential is not None:
            potential = tuple(
                HarmAssessment.from_dict(entry, f"{path}.potential_harm[{i}]")
                for i, entry in enumerate(_as_list(raw_potential, f"{path}.potential_harm"))
            )

        availability: dict[FieldGroup, Availability] = dict(_DEFAULT_AVAILABILITY)
        raw_avail = obj.get("data_availability", {})
        for key, value in _as_obj(raw_avail, f"{path}.data_availability").items():
            group = _as_enum(key, FieldGroup, f"{path}.data_availability")
            availability[group] = _as_enum(value, Availability, f"{path}.data_availability.{key}")

        opt_int = lambda name: (
            None if obj.get(name) is None else _as_int(obj.get(name), f"{path}.{name}")
        )
        raw_impact = obj.get("impact")

        return cls(
            id=_as_str(obj.get("id"), f"{path}.id"),
            title=_as_str(obj.get("title"), f"{path}.title"),
            occurred_at=parse_timestamp(obj.get("occurred_at"), f"{path}.occurred_at"),
            reported_at=parse_timestamp(obj.get("reported_at"), f"{path}.reported_at"),
            causation=CausationAssessment.from_dict(obj.get("causation"), f"{path}.causation"),
            scope_domain=_as_enum(obj.get("scope_domain"), ScopeDomain, f"{path}.scope_domain"),
            immediate_flags=frozenset(
                _as_enum(flag, ImmediateFlag, f"{path}.immediate_flags[{i}]")
                for i, flag in enumerate(
                    _as_list(obj.get("immediate_flags", []), f"{path}.immediate_flags")
                )
            ),
            harm=harm,
            potential_harm=potential,
            root_cause=RootCauseSignature.from_dict(obj.get("root_cause"), f"{path}.root_cause"),
            jurisdictions=frozenset(
                _as_str(code, f"{path}.jurisdictions[{i}]")
                for i, code in enumerate(
                    _as_list(obj.get("jurisdictions", []), f"{path}.jurisdictions")
                )
            ),
            propagation=PropagationAssessment.from_dict(
                obj.get("propagation"), f"{path}.propagation"
            ),
            reversibility=ReversibilityProfile.from_dict(
                obj.get("reversibility", {}), f"{path}.reversibility"
            ),
            near_miss=_as_bool(obj.get("near_miss", False), f"{path}.near_miss"),
            vulnerability_flags=frozenset(
                _as_enum(flag, VulnerabilityFlag, f"{path}.vulnerability_flags[{i}]")
                for i, flag in enumerate(
                    _as_list(obj.get("vulnerability_flags", []), f"{path}.vulnerability_flags")
                )
            ),
            affected_population=opt_int("affected_population"),
            event_count=opt_int("event_count"),
            event_rate=(
                None
                if obj.get("event_rate") is None
                else _as_float(obj.get("event_rate"), f"{path}.event_rate")
            ),
            impact=(
                ImpactMetrics()
                if raw_impact is None
                else ImpactMetrics.from_dict(raw_impact, f"{path}.impact")
            ),
            data_availability=availability,
            external_ids=tuple(
                _as_str(ext, f"{path}.external_ids[{i}]")
                for i, ext in enumerate(_as_list(obj.get("external_ids", []), f"{path}.external_ids"))
            ),
        )

    @classmethod
    def from_json(cls, text: str, path: str = "record") -> "IncidentRecord":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise _err(path, f"invalid JSON: {exc}") from None
        return cls.from_dict(data, path)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ValidationFinding:
    """One violated record invariant, keyed by a stable code and field path."""

    code: str
    path: str
    message: str

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "path": self.path, "message": self.message}


def _check_harm_entries(
    entries: Sequence[HarmAssessment], base: str, findings: list[ValidationFinding]
) -> None:
    seen: set[str] = set()
    for i, entry in enumerate(entries):
        if not 1 <= entry.severity <= 5:
            findings.append(
                ValidationFinding(
                    code="severity_out_of_range",
                    path=f"{base}[{i}].severity",
                    message=f"severity {entry.severity} outside 1..5",
                )
            )
        if entry.category in seen:
            findings.append(
                ValidationFinding(
                    code="duplicate_harm_category",
                    path=f"{base}[{i}].category",
                    message=f"category {entry.category!r} appears more than once",
                )
            )
        seen.add(entry.category)


def validate_record(record: IncidentRecord) -> list[ValidationFinding]:
    """Check rule-level invariants; returns findings in field order.

    Pure and deterministic: equal records produce equal finding lists. An
    empty list means the record is valid.
    """
    findings: list[ValidationFinding] = []

    if record.occurred_at > record.reported_at:
        findings.append(
            ValidationFinding(
                code="timestamp_order",
                path="occurred_at",
                message="occurred_at is after reported_at",
            )
        )

    _check_harm_entries(record.harm, "harm", findings)
    if record.potential_harm is not None:
        _check_harm_entries(record.potential_harm, "potential_harm", findings)

    if not record.root_cause.key:
        findings.append(
            ValidationFinding(
                code="empty_root_cause_key",
                path="root_cause.key",
                message="signature key is empty after normalization",
            )
        )

    if record.harm and not record.jurisdictions:
        findings.append(
            ValidationFinding(
                code="jurisdictions_missing_for_harm",
                path="jurisdictions",
                message="records with harm entries must name at least one jurisdiction",
            )
        )

    for name in ("affected_population", "event_count"):
        value = getattr(record, name)
        if value is not None and value < 0:
            findings.append(
                ValidationFinding(code="negative_count", path=name, message=f"{name} is negative")
            )

    if record.event_rate is not None:
        if record.event_rate < 0:
            findings.append(
                ValidationFinding(
                    code="negative_count", path="event_rate", message="event_rate is negative"
                )
            )
        if record.event_count is None:
            findings.append(
                ValidationFinding(
                    code="event_rate_without_count",
                    path="event_rate",
                    message="event_rate requires event_count",
                )
            )

    return findings


# ---------------------------------------------------------------------------
# Completeness
# ---------------------------------------------------------------------------

# Which data field-groups each gate needs before it can evaluate. Gates with
# no entry are always ready; C7 handles missing data through its own
# all-unknown-layers rule rather than a field group.
DEFAULT_GATE_REQUIREMENTS: dict[str, tuple[FieldGroup, ...]] = {
    "C1": (FieldGroup.CAUSATION_EVIDENCE,),
    "C2": (),
    "C3": (FieldGroup.TELEMETRY,),
    "C4": (FieldGroup.CROSS_PROVIDER,),
    "C5a": (FieldGroup.HARM_OUTCOMES,),
    "C5b": (FieldGroup.HARM_OUTCOMES,),
    "C6": (FieldGroup.JURISDICTION_DATA,),
    "C7": (),
    "C8": (),
}


def completeness_check(
    record: IncidentRecord,
    required: Mapping[str, Iterable[FieldGroup]] | None = None,
) -> dict[str, GateReadiness]:
    """Map each gate to ``ready`` or ``indeterminate`` given data availability.

    Args:
        record: the record whose ``data_availability`` is consulted.
        required: gate-id -> field groups that must be available. Defaults to
            :data:`DEFAULT_GATE_REQUIREMENTS`.

    Raises:
        ConfigurationError: if ``required`` names an unknown gate id.
    """
    if required is None:
        required = DEFAULT_GATE_REQUIREMENTS
    for gate in required:
        if gate not in GATE_IDS:
            raise ConfigurationError(f"unknown gate id {gate!r} in requirements map")

    result: dict[str, GateReadiness] = {}
    for gate in GATE_IDS:
        groups = required.get(gate, ())
        ready = all(record.available(group) for group in groups)
        result[gate] = GateReadiness.READY if ready else GateReadiness.INDETERMINATE
    return result
