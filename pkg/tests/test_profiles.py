"""Regulatory comparator profiles and the divergence report."""

from __future__ import annotations

from datetime import timedelta

import pytest

from escalade.clusters import build_clusters
from escalade.config import EngineConfig
from escalade.model import (
    CausationAssessment,
    CausationConfidence,
    CausationRole,
    ConfigurationError,
    HarmAssessment,
    HarmBasis,
    ImmediateFlag,
    ImpactMetrics,
    IncidentRecord,
    PropagationAssessment,
    PropagationPathway,
    PropagationVelocity,
    RootCauseKind,
    RootCauseSignature,
    ScopeDomain,
    Ternary,
)
from escalade.profiles import (
    EU_MEMBER_STATES,
    PROFILE_IDS,
    GapCode,
    ProfileRuleSet,
    Verdict,
    eval_profile,
    gap_report,
    load_profile,
    load_profiles,
    record_view,
    cluster_view,
)

from conftest import T0, make_record

CONFIG = EngineConfig()

SB53 = load_profile("sb53")
EU_AIA = load_profile("eu_aia")
DORA = load_profile("dora")
PIPELINE = load_profile("gated_pipeline")

ZERO_IMPACT = dict(
    deaths=0,
    serious_injuries=0,
    property_damage_usd=0.0,
    affected_clients=0,
    affected_users_fraction=0.0,
    service_downtime_hours=0.0,
    financial_impact_eur=0.0,
)


def dora_record(**impact_overrides):
    """Determinate-false on every DORA dimension except the overrides."""
    impact = dict(ZERO_IMPACT)
    impact.update(impact_overrides)
    jurisdictions = impact.pop("jurisdictions", frozenset({"US"}))
    return make_record(
        impact=ImpactMetrics(**impact),
        jurisdictions=jurisdictions,
        causation=CausationAssessment(CausationRole.CAUSAL_FACTOR, CausationConfidence.CONFIRMED),
    )


class TestProfileLoading:
    def test_all_profiles_load(self):
        profiles = load_profiles()
        assert tuple(p.id for p in profiles) == PROFILE_IDS

    def test_round_trip(self):
        for profile in load_profiles():
            assert ProfileRuleSet.from_dict(profile.to_dict()).to_dict() == profile.to_dict()

    def test_unknown_profile(self):
        with pytest.raises(ConfigurationError):
            load_profile("nis2")

    def test_gated_pipeline_delegates(self):
        assert PIPELINE.delegates_to_pipeline
        assert not SB53.delegates_to_pipeline


class TestDoraBoundaries:
    """Each fixture isolates a single threshold dimension."""

    @pytest.mark.parametrize(
        "case,impact,expected",
        [
            ("clients at 100000", dict(affected_clients=100_000), Verdict.NOT_REPORTABLE),
            ("clients above", dict(affected_clients=100_001), Verdict.REPORTABLE),
            ("duration at 24h", dict(service_downtime_hours=24.0), Verdict.NOT_REPORTABLE),
            ("duration above", dict(service_downtime_hours=24.5), Verdict.REPORTABLE),
            ("eur at 100000", dict(financial_impact_eur=100_000.0), Verdict.NOT_REPORTABLE),
            ("eur above", dict(financial_impact_eur=100_001.0), Verdict.REPORTABLE),
            (
                "one member state",
                dict(jurisdictions=frozenset({"DE"})),
                Verdict.NOT_REPORTABLE,
            ),
            (
                "two member states",
                dict(jurisdictions=frozenset({"DE", "FR"})),
                Verdict.REPORTABLE,
            ),
        ],
    )
    def test_boundary(self, case, impact, expected):
        evaluation = eval_profile(dora_record(**impact), DORA, CONFIG)
        assert evaluation.verdict == expected, case

    def test_users_fraction_strict(self):
        at = eval_profile(dora_record(affected_users_fraction=0.1), DORA, CONFIG)
        above = eval_profile(dora_record(affected_users_fraction=0.11), DORA, CONFIG)
        assert at.verdict == Verdict.NOT_REPORTABLE
        assert above.verdict == Verdict.REPORTABLE

    def test_non_eu_jurisdictions_do_not_count(self):
        evaluation = eval_profile(
            dora_record(jurisdictions=frozenset({"US", "GB", "JP"})), DORA, CONFIG
        )
        assert evaluation.verdict == Verdict.NOT_REPORTABLE

    def test_missing_metric_is_indeterminate_not_false(self):
        record = make_record(
            jurisdictions=frozenset({"US"}),
            impact=ImpactMetrics(),  # nothing measured
        )
        evaluation = eval_profile(record, DORA, CONFIG)
        assert evaluation.verdict == Verdict.INDETERMINATE
        assert evaluation.data_gaps

    def test_eu_member_state_list(self):
        assert len(EU_MEMBER_STATES) == 27
        assert "GB" not in EU_MEMBER_STATES
        assert {"DE", "FR", "PL"} < EU_MEMBER_STATES


class TestSb53:
    def test_casualty_threshold_strict(self):
        at = make_record(impact=ImpactMetrics(deaths=50, serious_injuries=0, property_damage_usd=0.0))
        above = make_record(impact=ImpactMetrics(deaths=51, serious_injuries=0, property_damage_usd=0.0))
        assert eval_profile(at, SB53, CONFIG).verdict == Verdict.NOT_REPORTABLE
        assert eval_profile(above, SB53, CONFIG).verdict == Verdict.REPORTABLE

    def test_casualties_combine_deaths_and_injuries(self):
        record = make_record(impact=ImpactMetrics(deaths=30, serious_injuries=21))
        assert eval_profile(record, SB53, CONFIG).verdict == Verdict.REPORTABLE

    def test_property_damage_threshold_strict(self):
        at = make_record(impact=ImpactMetrics(deaths=0, serious_injuries=0, property_damage_usd=1e9))
        above = make_record(
            impact=ImpactMetrics(deaths=0, serious_injuries=0, property_damage_usd=1e9 + 1)
        )
        assert eval_profile(at, SB53, CONFIG).verdict == Verdict.NOT_REPORTABLE
        assert eval_profile(above, SB53, CONFIG).verdict == Verdict.REPORTABLE

    def test_unmeasured_damage_leaves_verdict_open(self):
        record = make_record(impact=ImpactMetrics(deaths=50, serious_injuries=0))
        evaluation = eval_profile(record, SB53, CONFIG)
        assert evaluation.verdict == Verdict.INDETERMINATE
        assert any("property_damage_usd" in gap for gap in evaluation.data_gaps)

    def test_deceptive_subversion_is_a_no_harm_trigger(self):
        record = make_record(
            immediate_flags=frozenset({ImmediateFlag.DECEPTIVE_SUBVERSION_OF_CONTROLS}),
            impact=ImpactMetrics(**ZERO_IMPACT),
        )
        assert eval_profile(record, SB53, CONFIG).verdict == Verdict.REPORTABLE

    def test_weight_exfiltration_needs_confirmed_harm(self):
        base = dict(
            immediate_flags=frozenset({ImmediateFlag.WEIGHT_EXFILTRATION}),
        )
        without = make_record(impact=ImpactMetrics(**ZERO_IMPACT), **base)
        with_harm = make_record(impact=ImpactMetrics(deaths=1, serious_injuries=0), **base)
        assert eval_profile(without, SB53, CONFIG).verdict == Verdict.NOT_REPORTABLE
        assert eval_profile(with_harm, SB53, CONFIG).verdict == Verdict.REPORTABLE

    def test_requires_ai_causation(self):
        record = make_record(
            causation=CausationAssessment(CausationRole.NONE, CausationConfidence.UNKNOWN),
            impact=ImpactMetrics(deaths=100, serious_injuries=0),
        )
        assert eval_profile(record, SB53, CONFIG).verdict == Verdict.NOT_REPORTABLE

    def test_unknown_causation_indeterminate(self):
        record = make_record(
            causation=CausationAssessment(CausationRole.UNKNOWN, CausationConfidence.UNKNOWN),
            impact=ImpactMetrics(deaths=100, serious_injuries=0),
        )
        evaluation = eval_profile(record, SB53, CONFIG)
        assert evaluation.verdict == Verdict.INDETERMINATE
        assert "causation.role" in evaluation.data_gaps


class TestEuAia:
    def test_confirmed_serious_harm_reportable(self):
        record = make_record(
            harm=(HarmAssessment("physical", 4),),
            impact=ImpactMetrics(deaths=1, serious_injuries=0),
        )
        assert eval_profile(record, EU_AIA, CONFIG).verdict == Verdict.REPORTABLE

    def test_excluded_domain_not_reportable(self):
        record = make_record(
            scope_domain=ScopeDomain.MILITARY,
            harm=(HarmAssessment("physical", 5),),
            impact=ImpactMetrics(deaths=10, serious_injuries=0),
        )
        assert eval_profile(record, EU_AIA, CONFIG).verdict == Verdict.NOT_REPORTABLE

    def test_infrastructure_severity_proxy(self):
        record = make_record(
            harm=(HarmAssessment("infrastructure", 4),),
            impact=ImpactMetrics(**ZERO_IMPACT),
        )
        assert eval_profile(record, EU_AIA, CONFIG).verdict == Verdict.REPORTABLE

    def test_below_proxy_threshold(self):
        record = make_record(
            harm=(HarmAssessment("infrastructure", 3),),
            impact=ImpactMetrics(**ZERO_IMPACT),
        )
        assert eval_profile(record, EU_AIA, CONFIG).verdict == Verdict.NOT_REPORTABLE


class TestPipelineDelegation:
    def test_escalate_and_alert_are_reportable(self):
        escalates = make_record(immediate_flags=frozenset({ImmediateFlag.CBRN_ASSISTANCE}))
        assert eval_profile(escalates, PIPELINE, CONFIG).verdict == Verdict.REPORTABLE

    def test_discard_not_reportable(self):
        assert eval_profile(make_record(), PIPELINE, CONFIG).verdict == Verdict.NOT_REPORTABLE


def _scenario(name):
    from importlib import resources

    path = resources.files("escalade").joinpath("data", "scenarios", f"{name}.json")
    return IncidentRecord.from_json(path.read_text(encoding="utf-8"), name)


def _gap_codes(report, profile_id):
    return [d.code for d in report.divergences if d.profiles[1] == profile_id]


class TestGapReport:
    def test_breach_scenario_threshold_gaps(self):
        record = _scenario("breach_10k_users")
        (report,) = gap_report([record], [], load_profiles(), CONFIG)
        assert report.verdicts["gated_pipeline"] == Verdict.REPORTABLE
        assert report.verdicts["sb53"] == Verdict.NOT_REPORTABLE
        assert _gap_codes(report, "sb53") == [GapCode.THRESHOLD]
        assert _gap_codes(report, "eu_aia") == [GapCode.THRESHOLD]
        assert _gap_codes(report, "dora") == [GapCode.THRESHOLD]

    def test_weight_exfiltration_pre_harm_gaps(self):
        record = _scenario("weight_exfiltration_no_harm")
        (report,) = gap_report([record], [], load_profiles(), CONFIG)
        assert report.verdicts["gated_pipeline"] == Verdict.REPORTABLE
        assert _gap_codes(report, "sb53") == [GapCode.PRE_HARM]
        assert _gap_codes(report, "eu_aia") == [GapCode.PRE_HARM]

    def test_deceptive_subversion_reverse_divergence_has_no_code(self):
        record = _scenario("deceptive_subversion_no_harm")
        (report,) = gap_report([record], [], load_profiles(), CONFIG)
        assert report.verdicts["gated_pipeline"] == Verdict.NOT_REPORTABLE
        assert report.verdicts["sb53"] == Verdict.REPORTABLE
        assert report.divergences == ()

    def test_dora_outage_alignment(self):
        record = _scenario("dora_style_outage")
        (report,) = gap_report([record], [], load_profiles(), CONFIG)
        assert report.verdicts["gated_pipeline"] == Verdict.REPORTABLE
        assert report.verdicts["dora"] == Verdict.REPORTABLE
        assert _gap_codes(report, "dora") == []
        assert _gap_codes(report, "sb53") == [GapCode.THRESHOLD]

    def test_aggregation_gap_on_cluster(self):
        members = []
        for i, day in enumerate((0, 5, 10)):
            occurred = T0 + timedelta(days=day)
            members.append(
                make_record(
                    id=f"df-{i}",
                    occurred_at=occurred,
                    reported_at=occurred + timedelta(days=1),
                    root_cause=RootCauseSignature(RootCauseKind.TECHNICAL, "deepfake wave"),
                    harm=(HarmAssessment("dignity", 3), HarmAssessment("privacy", 3)),
                    jurisdictions=frozenset({"US", "GB"}) if i == 0 else frozenset({"DE", "FR"}),
                    event_count=450_000,
                    impact=ImpactMetrics(**ZERO_IMPACT),
                )
            )
        clusters = build_clusters(members, CONFIG)
        assert len(clusters) == 1
        reports = gap_report(members, clusters, load_profiles(), CONFIG)
        (cluster_report,) = [r for r in reports if r.subject_kind == "cluster"]
        assert cluster_report.verdicts["gated_pipeline"] == Verdict.REPORTABLE
        assert cluster_report.verdicts["sb53"] == Verdict.NOT_REPORTABLE
        assert _gap_codes(cluster_report, "sb53") == [GapCode.AGGREGATION]
        # members individually not reportable under sb53
        for member in members:
            assert eval_profile(member, SB53, CONFIG).verdict == Verdict.NOT_REPORTABLE

    def test_standing_condition_gap_takes_precedence(self):
        members = []
        for i, day in enumerate((0, 30)):
            occurred = T0 + timedelta(days=day)
            members.append(
                make_record(
                    id=f"sc-{i}",
                    occurred_at=occurred,
                    reported_at=occurred + timedelta(days=1),
                    root_cause=RootCauseSignature(RootCauseKind.CAPABILITY, "companion dependency"),
                    harm=(HarmAssessment("psychological", 3),),
                    jurisdictions=frozenset({"US", "GB"}),
                    affected_population=600_000,
                    propagation=PropagationAssessment(
                        pathway=PropagationPathway.CONTENT_DISTRIBUTION,
                        velocity=PropagationVelocity.MONTHS,
                        containment_feasible_nationally=Ternary.UNKNOWN,
                        standing_condition=True,
                    ),
                )
            )
        clusters = build_clusters(members, CONFIG)
        reports = gap_report(members, clusters, load_profiles(), CONFIG)
        (cluster_report,) = [r for r in reports if r.subject_kind == "cluster"]
        assert cluster_report.verdicts["gated_pipeline"] == Verdict.REPORTABLE
        for profile_id in ("sb53", "eu_aia", "dora"):
            assert _gap_codes(cluster_report, profile_id) == [GapCode.STANDING_CONDITION]

    def test_at_most_one_code_per_profile_pair(self):
        record = _scenario("weight_exfiltration_no_harm")
        (report,) = gap_report([record], [], load_profiles(), CONFIG)
        pairs = [d.profiles for d in report.divergences]
        assert len(pairs) == len(set(pairs))

    def test_all_reportable_no_divergence(self):
        record = make_record(
            immediate_flags=frozenset({ImmediateFlag.LOSS_OF_DEVELOPER_CONTROL}),
            harm=(HarmAssessment("infrastructure", 4),),
            jurisdictions=frozenset({"DE", "FR", "US"}),
            impact=ImpactMetrics(
                deaths=60,
                serious_injuries=0,
                property_damage_usd=0.0,
                affected_clients=200_000,
                affected_users_fraction=0.0,
                service_downtime_hours=0.0,
                financial_impact_eur=0.0,
            ),
        )
        (report,) = gap_report([record], [], load_profiles(), CONFIG)
        assert set(report.verdicts.values()) == {Verdict.REPORTABLE}
        assert report.divergences == ()


class TestClusterViews:
    def _members(self):
        a = make_record(
            id="m-0",
            harm=(HarmAssessment("privacy", 3),),
            impact=ImpactMetrics(
                affected_clients=60_000, service_downtime_hours=10.0, financial_impact_eur=70_000.0
            ),
            jurisdictions=frozenset({"DE"}),
        )
        b = make_record(
            id="m-1",
            occurred_at=T0 + timedelta(days=2),
            reported_at=T0 + timedelta(days=3),
            harm=(HarmAssessment("privacy", 3),),
            impact=ImpactMetrics(
                affected_clients=50_000, service_downtime_hours=20.0, financial_impact_eur=40_000.0
            ),
            jurisdictions=frozenset({"FR"}),
        )
        return [a, b]

    def test_pooled_metrics(self):
        members = self._members()
        (cluster,) = build_clusters(members, CONFIG)
        view = cluster_view(cluster, members)
        assert view.affected_clients == 110_000  # summed
        assert view.service_downtime_hours == 20.0  # max
        assert view.financial_impact_eur == 110_000.0  # summed
        assert view.eu_member_state_count() == 2

    def test_dora_aggregation_pools_members(self):
        members = self._members()
        (cluster,) = build_clusters(members, CONFIG)
        evaluation = eval_profile(cluster, DORA, CONFIG, members=members)
        assert evaluation.verdict == Verdict.REPORTABLE  # 110k clients > 1e5

    def test_member_mismatch_rejected(self):
        members = self._members()
        (cluster,) = build_clusters(members, CONFIG)
        with pytest.raises(ConfigurationError):
            cluster_view(cluster, members[:1])

    def test_record_view_passthrough(self):
        record = make_record(impact=ImpactMetrics(deaths=3, serious_injuries=1))
        view = record_view(record)
        assert view.deaths == 3
        assert not view.is_cluster
