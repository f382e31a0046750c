"""Composite clustering against a brute-force pairwise union-find oracle."""

from __future__ import annotations

import random
from datetime import timedelta

import pytest

from escalade.clusters import (
    ClusterContext,
    CompositeCluster,
    aggregate_assessment,
    build_clusters,
    signature_match,
)
from escalade.config import EngineConfig
from escalade.model import (
    HarmAssessment,
    HarmBasis,
    IncidentRecord,
    RootCauseKind,
    RootCauseSignature,
)

from conftest import T0, make_record

CONFIG = EngineConfig()


# ---------------------------------------------------------------------------
# Oracle: union-find over the pairwise match relation, then the same
# earliest-member span restriction, implemented independently of the engine.
# ---------------------------------------------------------------------------


def oracle_partition(records, config) -> list[tuple[str, ...]]:
    parent = {r.id: r.id for r in records}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent[find(x)] = find(y)

    for a in records:
        for b in records:
            if a.id < b.id and signature_match(a, b, config):
                union(a.id, b.id)

    components: dict[str, list[IncidentRecord]] = {}
    for record in records:
        components.setdefault(find(record.id), []).append(record)

    member_groups: list[tuple[str, ...]] = []
    for group in components.values():
        group.sort(key=lambda r: (r.occurred_at, r.id))
        window = config.cluster_window(group[0].root_cause.kind)
        bucket: list[IncidentRecord] = []
        for record in group:
            if bucket and record.occurred_at - bucket[0].occurred_at > window:
                if len(bucket) >= 2:
                    member_groups.append(tuple(r.id for r in bucket))
                bucket = []
            bucket.append(record)
        if len(bucket) >= 2:
            member_groups.append(tuple(r.id for r in bucket))
    return sorted(member_groups)


def random_instance(rng: random.Random, size: int) -> list[IncidentRecord]:
    kinds = list(RootCauseKind)
    keys = ["alpha", "beta", "gamma", "delta"]
    records = []
    for i in range(size):
        occurred = T0 + timedelta(days=rng.uniform(0, 420))
        records.append(
            make_record(
                id=f"r{i:02d}",
                occurred_at=occurred,
                reported_at=occurred + timedelta(days=1),
                root_cause=RootCauseSignature(kind=rng.choice(kinds), key=rng.choice(keys)),
                harm=(HarmAssessment("privacy", rng.randint(1, 5)),)
                if rng.random() < 0.7
                else (),
                event_count=rng.choice([None, rng.randint(0, 800_000)]),
                affected_population=rng.choice([None, rng.randint(0, 800_000)]),
                jurisdictions=frozenset(rng.sample(["US", "GB", "DE", "FR"], k=rng.randint(1, 3))),
            )
        )
    rng.shuffle(records)
    return records


def test_oracle_equivalence_500_instances():
    rng = random.Random(20250815)
    for _ in range(500):
        records = random_instance(rng, rng.randint(0, 20))
        got = sorted(c.members for c in build_clusters(records, CONFIG))
        assert got == oracle_partition(records, CONFIG)


def test_input_order_independence():
    rng = random.Random(7)
    records = random_instance(rng, 16)
    expected = [c.to_dict() for c in build_clusters(records, CONFIG)]
    for _ in range(5):
        rng.shuffle(records)
        assert [c.to_dict() for c in build_clusters(records, CONFIG)] == expected


def test_aggregates_match_direct_recomputation():
    rng = random.Random(99)
    for _ in range(50):
        records = random_instance(rng, 14)
        by_id = {r.id: r for r in records}
        for cluster in build_clusters(records, CONFIG):
            members = [by_id[m] for m in cluster.members]
            counts = [r.event_count for r in members if r.event_count is not None]
            assert cluster.event_count == (sum(counts) if counts else None)
            pops = [r.affected_population for r in members if r.affected_population is not None]
            assert cluster.affected_population == (sum(pops) if pops else None)
            union = set()
            for r in members:
                union |= r.jurisdictions
            assert cluster.jurisdictions == union
            worst: dict[str, int] = {}
            for r in members:
                for h in r.harm:
                    worst[h.category] = max(worst.get(h.category, 0), h.severity)
            assert {h.category: h.severity for h in cluster.harm} == worst
            assert all(h.basis is HarmBasis.AGGREGATE for h in cluster.harm)
            assert cluster.standing_condition == any(
                r.propagation.standing_condition for r in members
            )
            assert cluster.span == (members[0].occurred_at, members[-1].occurred_at)


class TestWindows:
    def _pair(self, kind, days_apart, key="same issue"):
        a = make_record(
            id="a", root_cause=RootCauseSignature(kind, key), occurred_at=T0,
            reported_at=T0 + timedelta(days=1),
        )
        b = make_record(
            id="b",
            root_cause=RootCauseSignature(kind, key),
            occurred_at=T0 + timedelta(days=days_apart),
            reported_at=T0 + timedelta(days=days_apart + 1),
        )
        return [a, b]

    @pytest.mark.parametrize(
        "kind,window",
        [
            (RootCauseKind.TECHNICAL, 30),
            (RootCauseKind.CAPABILITY, 90),
            (RootCauseKind.CONTEXTUAL, 180),
        ],
    )
    def test_default_window_boundary(self, kind, window):
        inside = build_clusters(self._pair(kind, window), CONFIG)
        outside = build_clusters(self._pair(kind, window + 1), CONFIG)
        assert len(inside) == 1
        assert outside == []

    def test_different_keys_never_cluster(self):
        a, b = self._pair(RootCauseKind.TECHNICAL, 1)
        b = make_record(
            id="b",
            root_cause=RootCauseSignature(RootCauseKind.TECHNICAL, "different issue"),
            occurred_at=b.occurred_at,
            reported_at=b.reported_at,
        )
        assert build_clusters([a, b], CONFIG) == []

    def test_key_normalization_bridges_formatting(self):
        a, b = self._pair(RootCauseKind.TECHNICAL, 1)
        b = make_record(
            id="b",
            root_cause=RootCauseSignature(RootCauseKind.TECHNICAL, "  SAME   Issue "),
            occurred_at=b.occurred_at,
            reported_at=b.reported_at,
        )
        assert len(build_clusters([a, b], CONFIG)) == 1

    def test_span_rule_splits_chain(self):
        # adjacent gaps of 20 days chain transitively; the 30-day span rule
        # cuts the run after two members
        records = []
        for i in range(4):
            occurred = T0 + timedelta(days=20 * i)
            records.append(
                make_record(
                    id=f"c{i}",
                    root_cause=RootCauseSignature(RootCauseKind.TECHNICAL, "chain"),
                    occurred_at=occurred,
                    reported_at=occurred + timedelta(days=1),
                )
            )
        clusters = build_clusters(records, CONFIG)
        assert [c.members for c in clusters] == [("c0", "c1"), ("c2", "c3")]
        for cluster in clusters:
            assert cluster.span[1] - cluster.span[0] <= CONFIG.cluster_window(
                RootCauseKind.TECHNICAL
            )

    def test_empty_input(self):
        assert build_clusters([], CONFIG) == []

    def test_singletons_produce_nothing(self):
        assert build_clusters([make_record()], CONFIG) == []


class TestAggregateAssessment:
    def _cluster(self, severity, metric):
        a = make_record(
            id="a", harm=(HarmAssessment("privacy", severity),), event_count=metric
        )
        b = make_record(
            id="b",
            harm=(HarmAssessment("privacy", severity),),
            occurred_at=T0 + timedelta(days=2),
            reported_at=T0 + timedelta(days=3),
            event_count=0,
        )
        (cluster,) = build_clusters([a, b], CONFIG)
        return cluster

    @pytest.mark.parametrize(
        "metric,expected_uplift",
        [(0, 0), (99_999, 0), (100_000, 1), (999_999, 1), (1_000_000, 2)],
    )
    def test_uplift_bands(self, metric, expected_uplift):
        cluster = self._cluster(2, metric)
        (entry,) = aggregate_assessment(cluster, CONFIG)
        assert entry.severity == 2 + expected_uplift

    def test_uplift_capped_at_five(self):
        cluster = self._cluster(4, 2_000_000)
        (entry,) = aggregate_assessment(cluster, CONFIG)
        assert entry.severity == 5

    def test_population_counts_when_larger(self):
        a = make_record(
            id="a", harm=(HarmAssessment("privacy", 2),), affected_population=1_000_000
        )
        b = make_record(
            id="b",
            harm=(HarmAssessment("privacy", 2),),
            occurred_at=T0 + timedelta(days=2),
            reported_at=T0 + timedelta(days=3),
        )
        (cluster,) = build_clusters([a, b], CONFIG)
        (entry,) = aggregate_assessment(cluster, CONFIG)
        assert entry.severity == 4


class TestClusterContext:
    def test_lookup(self):
        records = [
            make_record(id="a"),
            make_record(
                id="b", occurred_at=T0 + timedelta(days=2), reported_at=T0 + timedelta(days=3)
            ),
        ]
        context = ClusterContext.build(records, CONFIG)
        assert len(context) == 1
        assert context.cluster_for("a") is not None
        assert context.cluster_for("a") is context.cluster_for("b")
        assert context.cluster_for("zzz") is None

    def test_cluster_ids_content_derived(self):
        records = [
            make_record(id="a"),
            make_record(
                id="b", occurred_at=T0 + timedelta(days=2), reported_at=T0 + timedelta(days=3)
            ),
        ]
        first = build_clusters(records, CONFIG)
        second = build_clusters(list(reversed(records)), CONFIG)
        assert [c.id for c in first] == [c.id for c in second]
        assert first[0].id.startswith("cluster-")


def test_cluster_requires_two_members():
    with pytest.raises(ValueError):
        CompositeCluster(
            id="cluster-x",
            members=("only",),
            signature=RootCauseSignature(RootCauseKind.TECHNICAL, "k"),
            span=(T0, T0),
            event_count=None,
            affected_population=None,
            jurisdictions=frozenset(),
            harm=(),
            standing_condition=False,
        )
