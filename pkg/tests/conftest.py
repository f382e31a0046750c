"""Shared record builders for the test suite.

``make_record`` produces a minimal valid civilian incident that passes C1 and
C2; tests override the fields they exercise. ``random_gate_record`` drives the
randomized properties with a plain seeded ``random.Random`` so failures are
reproducible from the seed alone.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import pytest

from escalade.model import (
    Availability,
    CausationAssessment,
    CausationConfidence,
    CausationRole,
    FieldGroup,
    HarmAssessment,
    HarmBasis,
    ImmediateFlag,
    ImpactMetrics,
    IncidentRecord,
    PropagationAssessment,
    PropagationPathway,
    PropagationVelocity,
    Restorability,
    ReversibilityProfile,
    RootCauseKind,
    RootCauseSignature,
    ScopeDomain,
    Ternary,
    VulnerabilityFlag,
)

T0 = datetime(2025, 5, 1, tzinfo=timezone.utc)

HARM_CATEGORIES = (
    "physical",
    "psychological",
    "privacy",
    "dignity",
    "financial",
    "infrastructure",
    "information_integrity",
    "democratic_process",
    "environmental",
    "fundamental_rights",
)

JURISDICTION_POOL = ("US", "GB", "DE", "FR", "JP", "BR", "IN", "CA", "AU", "PL")


def make_record(**overrides) -> IncidentRecord:
    base = dict(
        id="rec-test",
        title="test incident",
        occurred_at=T0,
        reported_at=T0 + timedelta(days=1),
        causation=CausationAssessment(CausationRole.CAUSAL_FACTOR, CausationConfidence.PROBABLE),
        scope_domain=ScopeDomain.CIVILIAN,
        root_cause=RootCauseSignature(kind=RootCauseKind.TECHNICAL, key="test signature"),
        propagation=PropagationAssessment(
            pathway=PropagationPathway.CONTENT_DISTRIBUTION,
            velocity=PropagationVelocity.DAYS,
            containment_feasible_nationally=Ternary.UNKNOWN,
        ),
        jurisdictions=frozenset({"US"}),
    )
    base.update(overrides)
    return IncidentRecord(**base)


@pytest.fixture
def record_factory():
    return make_record


def _maybe(rng: random.Random, value, p: float = 0.5):
    return value if rng.random() < p else None


def random_gate_record(rng: random.Random, record_id: str) -> IncidentRecord:
    """A randomized record guaranteed to reach C3 and trigger it.

    Causation, scope, and the telemetry/causation field groups are held in
    the reachable region; every other field is drawn freely, including harm
    lists, jurisdictions, near-miss state, impact figures, and the remaining
    availability switches.
    """
    trigger_flags = [
        ImmediateFlag.CBRN_ASSISTANCE,
        ImmediateFlag.WEIGHT_EXFILTRATION,
        ImmediateFlag.LOSS_OF_DEVELOPER_CONTROL,
    ]
    flags = {rng.choice(trigger_flags)}
    for flag in ImmediateFlag:
        if rng.random() < 0.3:
            flags.add(flag)

    harm = tuple(
        HarmAssessment(
            category=category,
            severity=rng.randint(1, 5),
            basis=rng.choice(list(HarmBasis)),
        )
        for category in rng.sample(HARM_CATEGORIES, k=rng.randint(0, 4))
    )
    potential = None
    if rng.random() < 0.5:
        potential = tuple(
            HarmAssessment(category=category, severity=rng.randint(1, 5), basis=HarmBasis.POTENTIAL)
            for category in rng.sample(HARM_CATEGORIES, k=rng.randint(0, 3))
        )

    occurred = T0 + timedelta(days=rng.uniform(0, 300))
    availability = {
        FieldGroup.CAUSATION_EVIDENCE: Availability.AVAILABLE,
        FieldGroup.TELEMETRY: Availability.AVAILABLE,
        FieldGroup.HARM_OUTCOMES: rng.choice(list(Availability)),
        FieldGroup.CROSS_PROVIDER: rng.choice(list(Availability)),
        FieldGroup.JURISDICTION_DATA: rng.choice(list(Availability)),
    }

    return IncidentRecord(
        id=record_id,
        title=f"randomized incident {record_id}",
        occurred_at=occurred,
        reported_at=occurred + timedelta(days=rng.uniform(0, 30)),
        causation=CausationAssessment(
            CausationRole.CAUSAL_FACTOR,
            rng.choice([CausationConfidence.CONFIRMED, CausationConfidence.PROBABLE]),
        ),
        scope_domain=rng.choice([ScopeDomain.CIVILIAN, ScopeDomain.OTHER]),
        root_cause=RootCauseSignature(
            kind=rng.choice(list(RootCauseKind)),
            key=rng.choice(["alpha failure", "beta misuse", "gamma campaign"]),
        ),
        propagation=PropagationAssessment(
            pathway=rng.choice(list(PropagationPathway)),
            velocity=rng.choice(list(PropagationVelocity)),
            containment_feasible_nationally=rng.choice(list(Ternary)),
            standing_condition=rng.random() < 0.2,
        ),
        reversibility=ReversibilityProfile(
            containment=rng.choice(list(Restorability)),
            control_restoration=rng.choice(list(Restorability)),
            technical_state=rng.choice(list(Restorability)),
            societal_state=rng.choice(list(Restorability)),
        ),
        immediate_flags=frozenset(flags),
        harm=harm,
        potential_harm=potential,
        jurisdictions=frozenset(rng.sample(JURISDICTION_POOL, k=rng.randint(0, 4))),
        near_miss=rng.random() < 0.3,
        vulnerability_flags=frozenset(
            flag for flag in VulnerabilityFlag if rng.random() < 0.15
        ),
        affected_population=_maybe(rng, rng.randint(0, 2_000_000)),
        event_count=_maybe(rng, rng.randint(0, 5_000_000)),
        impact=ImpactMetrics(
            deaths=_maybe(rng, rng.randint(0, 100), 0.3),
            serious_injuries=_maybe(rng, rng.randint(0, 500), 0.3),
            property_damage_usd=_maybe(rng, rng.uniform(0, 2e9), 0.3),
            affected_clients=_maybe(rng, rng.randint(0, 500_000), 0.3),
            affected_users_fraction=_maybe(rng, rng.uniform(0, 0.5), 0.3),
            service_downtime_hours=_maybe(rng, rng.uniform(0, 72), 0.3),
            financial_impact_eur=_maybe(rng, rng.uniform(0, 5e5), 0.3),
        ),
        data_availability=availability,
    )
