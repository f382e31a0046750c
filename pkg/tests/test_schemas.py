"""Every serialized artifact validates against its bundled JSON schema."""

from __future__ import annotations

import json
from datetime import timedelta
from importlib import resources

import jsonschema
import pytest

from escalade.clusters import build_clusters
from escalade.config import EngineConfig
from escalade.corpus import load_corpus
from escalade.gates import classify
from escalade.model import HarmAssessment, RootCauseKind, RootCauseSignature
from escalade.monitor import load_bundled_series, monitor_series
from escalade.profiles import gap_report, load_profiles
from escalade.registry import dimension_registry

from conftest import T0, make_record

CONFIG = EngineConfig()
SCHEMA_NAMES = (
    "incident_record",
    "classification_trace",
    "composite_cluster",
    "tolerance_event",
    "gap_report",
    "dimension_registry",
)


def load_schema(name: str) -> dict:
    text = resources.files("escalade").joinpath("schemas", f"{name}.json").read_text("utf-8")
    return json.loads(text)


def validator_for(name: str) -> jsonschema.protocols.Validator:
    schema = load_schema(name)
    cls = jsonschema.validators.validator_for(schema)
    cls.check_schema(schema)
    return cls(schema)


@pytest.fixture(scope="module")
def corpus():
    return load_corpus("v1")


@pytest.mark.parametrize("name", SCHEMA_NAMES)
def test_schema_is_itself_valid(name):
    validator_for(name)


class TestIncidentRecord:
    def test_corpus_records_validate(self, corpus):
        validator = validator_for("incident_record")
        for record in corpus.all_records():
            validator.validate(record.to_dict())

    def test_minimal_record_validates(self):
        validator_for("incident_record").validate(make_record().to_dict())

    def test_missing_required_field_rejected(self):
        doc = make_record().to_dict()
        del doc["causation"]
        with pytest.raises(jsonschema.ValidationError):
            validator_for("incident_record").validate(doc)

    def test_bad_enum_rejected(self):
        doc = make_record().to_dict()
        doc["scope_domain"] = "galactic"
        with pytest.raises(jsonschema.ValidationError):
            validator_for("incident_record").validate(doc)

    def test_severity_range_enforced(self):
        doc = make_record(harm=(HarmAssessment("privacy", 3),)).to_dict()
        doc["harm"][0]["severity"] = 6
        with pytest.raises(jsonschema.ValidationError):
            validator_for("incident_record").validate(doc)


class TestClassificationTrace:
    def test_corpus_traces_validate(self, corpus):
        validator = validator_for("classification_trace")
        for record in corpus.all_records():
            validator.validate(classify(record, CONFIG).to_dict())

    def test_cluster_trace_validates(self, corpus):
        validator = validator_for("classification_trace")
        for cluster in build_clusters(corpus.all_records(), CONFIG):
            validator.validate(classify(cluster, CONFIG).to_dict())

    def test_unknown_classification_rejected(self, corpus):
        doc = classify(corpus.all_records()[0], CONFIG).to_dict()
        doc["classification"] = "panic"
        with pytest.raises(jsonschema.ValidationError):
            validator_for("classification_trace").validate(doc)


class TestCompositeCluster:
    def test_corpus_clusters_validate(self, corpus):
        validator = validator_for("composite_cluster")
        clusters = build_clusters(corpus.all_records(), CONFIG)
        assert clusters
        for cluster in clusters:
            validator.validate(cluster.to_dict())

    def test_synthetic_cluster_validates(self):
        members = [
            make_record(
                id=f"syn-{i}",
                occurred_at=T0 + timedelta(days=3 * i),
                reported_at=T0 + timedelta(days=3 * i + 1),
                root_cause=RootCauseSignature(RootCauseKind.CAPABILITY, "same failure"),
                event_count=10_000,
            )
            for i in range(3)
        ]
        (cluster,) = build_clusters(members, CONFIG)
        validator_for("composite_cluster").validate(cluster.to_dict())

    def test_two_member_floor_enforced(self, corpus):
        doc = build_clusters(corpus.all_records(), CONFIG)[0].to_dict()
        doc["members"] = doc["members"][:1]
        with pytest.raises(jsonschema.ValidationError):
            validator_for("composite_cluster").validate(doc)


class TestToleranceEvent:
    def test_bundled_series_events_validate(self):
        validator = validator_for("tolerance_event")
        points = load_bundled_series("step") + load_bundled_series("ramp")
        events = monitor_series(points)
        assert events
        for event in events:
            validator.validate(event.to_dict())

    def test_bad_kind_rejected(self):
        events = monitor_series(load_bundled_series("step"))
        doc = events[0].to_dict()
        doc["kind"] = "wobble"
        with pytest.raises(jsonschema.ValidationError):
            validator_for("tolerance_event").validate(doc)


class TestGapReport:
    def test_corpus_reports_validate(self, corpus):
        validator = validator_for("gap_report")
        records = corpus.all_records()
        clusters = build_clusters(records, CONFIG)
        reports = gap_report(records, clusters, load_profiles(), CONFIG)
        assert reports
        for report in reports:
            validator.validate(report.to_dict())

    def test_unknown_gap_code_rejected(self, corpus):
        records = corpus.all_records()
        reports = gap_report(records, [], load_profiles(), CONFIG)
        flagged = next(r for r in reports if r.divergences)
        doc = flagged.to_dict()
        doc["divergences"][0]["code"] = "mystery_gap"
        with pytest.raises(jsonschema.ValidationError):
            validator_for("gap_report").validate(doc)


class TestDimensionRegistry:
    def test_default_registry_validates(self):
        validator_for("dimension_registry").validate(dimension_registry().to_dict())

    def test_bad_disposition_rejected(self):
        doc = dimension_registry().to_dict()
        doc["dimensions"][0]["disposition"] = "ignored"
        with pytest.raises(jsonschema.ValidationError):
            validator_for("dimension_registry").validate(doc)
