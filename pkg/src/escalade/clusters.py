"""Composite-cluster detection: root-cause signature matching over time windows.

Two records match when they share a root-cause signature (kind and normalized
key) and occurred within the kind-specific window. Clusters are the connected
components of that relation, with one restriction: the whole component's span
must fit the window, so pairwise-linked chains cannot grow without bound.
Components whose span overflows are split greedily left-to-right (a new
cluster starts whenever a member falls outside the window of the current
cluster's earliest member) — a deterministic rule the test oracle reimplements
independently.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Iterable, Mapping, Sequence

from .config import EngineConfig
from .model import (
    SCHEMA_VERSION,
    HarmAssessment,
    HarmBasis,
    IncidentRecord,
    RootCauseSignature,
    format_timestamp,
)


@dataclass(frozen=True, slots=True)
class CompositeCluster:
    """Incidents sharing one root-cause signature, assessed collectively.

    ``aggregate`` harm severities are plain per-category maxima over members
    (basis=aggregate); band uplift is applied later by
    :func:`aggregate_assessment`, not stored here.
    """

    id: str
    members: tuple[str, ...]
    signature: RootCauseSignature
    span: tuple[datetime, datetime]
    event_count: int | None
    affected_population: int | None
    jurisdictions: frozenset[str]
    harm: tuple[HarmAssessment, ...]
    standing_condition: bool

    def __post_init__(self) -> None:
        if len(self.members) < 2:
            raise ValueError("composite cluster requires at least 2 members")
        if len(set(self.members)) != len(self.members):
            raise ValueError("cluster member ids must be unique")

    @property
    def size(self) -> int:
        return len(self.members)

    def max_member_severity(self) -> int:
        return max((entry.severity for entry in self.harm), default=0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "members": list(self.members),
            "signature": self.signature.to_dict(),
            "span": [format_timestamp(self.span[0]), format_timestamp(self.span[1])],
            "aggregate": {
                "event_count": self.event_count,
                "affected_population": self.affected_population,
                "jurisdictions": sorted(self.jurisdictions),
                "harm": [entry.to_dict() for entry in self.harm],
                "standing_condition": self.standing_condition,
            },
        }


def signature_match(a: IncidentRecord, b: IncidentRecord, config: EngineConfig) -> bool:
    """True when two records share a signature within the kind's window."""
    if a.root_cause != b.root_cause:
        return False
    window = config.cluster_window(a.root_cause.kind)
    return abs(a.occurred_at - b.occurred_at) <= window


def _cluster_id(signature: RootCauseSignature, member_ids: Sequence[str]) -> str:
    digest = hashlib.sha256(
        "|".join([signature.kind.value, signature.key, *member_ids]).encode("utf-8")
    ).hexdigest()
    return f"cluster-{digest[:12]}"


def _sum_optional(values: Iterable[int | None]) -> int | None:
    present = [v for v in values if v is not None]
    return sum(present) if present else None


def _assemble(members: Sequence[IncidentRecord]) -> CompositeCluster:
    signature = members[0].root_cause
    member_ids = tuple(record.id for record in members)
    by_category: dict[str, int] = {}
    for record in members:
        for entry in record.harm:
            current = by_category.get(entry.category, 0)
            by_category[entry.category] = max(current, entry.severity)
    harm = tuple(
        HarmAssessment(category=cat, severity=sev, basis=HarmBasis.AGGREGATE)
        for cat, sev in sorted(by_category.items())
    )
    jurisdictions: set[str] = set()
    for record in members:
        jurisdictions.update(record.jurisdictions)
    return CompositeCluster(
        id=_cluster_id(signature, member_ids),
        members=member_ids,
        signature=signature,
        span=(members[0].occurred_at, members[-1].occurred_at),
        event_count=_sum_optional(record.event_count for record in members),
        affected_population=_sum_optional(record.affected_population for record in members),
        jurisdictions=frozenset(jurisdictions),
        harm=harm,
        standing_condition=any(record.propagation.standing_condition for record in members),
    )


def build_clusters(
    records: Sequence[IncidentRecord], config: EngineConfig | None = None
) -> list[CompositeCluster]:
    """Group records into composite clusters.

    Output is deterministic and independent of input order: members are
    sorted by (occurred_at, id) and clusters by earliest member. Singleton
    components produce no cluster.
    """
    if config is None:
        config = EngineConfig()

    by_signature: dict[RootCauseSignature, list[IncidentRecord]] = {}
    for record in records:
        by_signature.setdefault(record.root_cause, []).append(record)

    clusters: list[CompositeCluster] = []
    for signature, group in by_signature.items():
        window = config.cluster_window(signature.kind)
        group.sort(key=lambda r: (r.occurred_at, r.id))

        # Connected components over sorted timestamps reduce to runs split at
        # consecutive gaps wider than the window; the span rule then re-splits
        # any run that stretches past one window from its earliest member.
        run: list[IncidentRecord] = []
        runs: list[list[IncidentRecord]] = []
        for record in group:
            if run and record.occurred_at - run[-1].occurred_at > window:
                runs.append(run)
                run = []
            run.append(record)
        if run:
            runs.append(run)

        for component in runs:
            current: list[IncidentRecord] = []
            for record in component:
                if current and record.occurred_at - current[0].occurred_at > window:
                    if len(current) >= 2:
                        clusters.append(_assemble(current))
                    current = []
                current.append(record)
            if len(current) >= 2:
                clusters.append(_assemble(current))

    clusters.sort(key=lambda c: (c.span[0], c.id))
    return clusters


def aggregate_assessment(
    cluster: CompositeCluster, config: EngineConfig | None = None
) -> list[HarmAssessment]:
    """Effective aggregate severities: per-category max plus band uplift.

    The uplift band is chosen by the larger of aggregate event_count and
    affected_population; results are capped at 5 and carry basis=aggregate.
    """
    if config is None:
        config = EngineConfig()
    metric = max(cluster.event_count or 0, cluster.affected_population or 0)
    uplift = config.aggregation_uplift(metric)
    return [
        HarmAssessment(
            category=entry.category,
            severity=min(5, entry.severity + uplift),
            basis=HarmBasis.AGGREGATE,
        )
        for entry in cluster.harm
    ]


class ClusterContext:
    """Index from incident id to its cluster, consulted by the C4 gate."""

    def __init__(self, clusters: Iterable[CompositeCluster] = ()):
        self._clusters = tuple(clusters)
        index: dict[str, CompositeCluster] = {}
        for cluster in self._clusters:
            for member in cluster.members:
                index[member] = cluster
        self._by_member: Mapping[str, CompositeCluster] = index

    @classmethod
    def build(
        cls, records: Sequence[IncidentRecord], config: EngineConfig | None = None
    ) -> "ClusterContext":
        return cls(build_clusters(records, config))

    @property
    def clusters(self) -> tuple[CompositeCluster, ...]:
        return self._clusters

    def cluster_for(self, incident_id: str) -> CompositeCluster | None:
        return self._by_member.get(incident_id)

    def __len__(self) -> int:
        return len(self._clusters)


EMPTY_CONTEXT = ClusterContext()
