"""Versioned review corpus: frozen incident fixtures with expected outcomes.

A corpus version is a directory of record files plus ``corpus.json``, which
lists review entries (an entry may span several record files when the incident
ships as a composite) and pins a sha256 per file. Published versions never
change in place; edits land as a new version directory, logged in the
changelog next to the data.

``run_corpus`` replays every entry against the pipeline and checks the frozen
expectations. ``run_variations`` sweeps one field of one record through a list
of values, rebuilding the cluster pool each time, so sensitivity questions
("at how many jurisdictions does this flip?") are answerable directly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Iterator, Mapping, Sequence

from .clusters import ClusterContext, build_clusters
from .config import EngineConfig
from .gates import ClassificationTrace, GateResult, classify
from .model import (
    SCHEMA_VERSION,
    ConfigurationError,
    IncidentRecord,
    ModelError,
    ParseError,
    RootCauseKind,
    _as_enum,
    _as_int,
    _as_list,
    _as_obj,
    _as_str,
)

CORPUS_VERSIONS = ("v1",)


class CorpusIntegrityError(ModelError):
    """A corpus file does not match the hash pinned in its manifest."""


@dataclass(frozen=True, slots=True)
class ClusterExpectation:
    kind: RootCauseKind
    size: int


@dataclass(frozen=True, slots=True)
class ExpectedOutcome:
    classification: str
    decisive: str
    diagnostics: tuple[str, ...] = ()
    cluster: ClusterExpectation | None = None


@dataclass(frozen=True, slots=True)
class CorpusEntry:
    id: str
    label: str
    records: tuple[str, ...]
    primary: str
    expected: ExpectedOutcome

    def __post_init__(self) -> None:
        if self.primary not in self.records:
            raise ParseError(f"corpus entry {self.id}: primary not among records")


@dataclass(frozen=True)
class Corpus:
    version: str
    entries: tuple[CorpusEntry, ...]
    records: Mapping[str, IncidentRecord]

    def all_records(self) -> list[IncidentRecord]:
        return list(self.records.values())

    def __iter__(self) -> Iterator[CorpusEntry]:
        return iter(self.entries)


def _parse_entry(data: Any, path: str) -> CorpusEntry:
    obj = _as_obj(data, path)
    raw_expected = _as_obj(obj.get("expected"), f"{path}.expected")
    raw_cluster = raw_expected.get("cluster")
    cluster = None
    if raw_cluster is not None:
        cobj = _as_obj(raw_cluster, f"{path}.expected.cluster")
        cluster = ClusterExpectation(
            kind=_as_enum(cobj.get("kind"), RootCauseKind, f"{path}.expected.cluster.kind"),
            size=_as_int(cobj.get("size"), f"{path}.expected.cluster.size"),
        )
    expected = ExpectedOutcome(
        classification=_as_str(raw_expected.get("classification"), f"{path}.expected.classification"),
        decisive=_as_str(raw_expected.get("decisive"), f"{path}.expected.decisive"),
        diagnostics=tuple(
            _as_str(code, f"{path}.expected.diagnostics[{i}]")
            for i, code in enumerate(
                _as_list(raw_expected.get("diagnostics", []), f"{path}.expected.diagnostics")
            )
        ),
        cluster=cluster,
    )
    return CorpusEntry(
        id=_as_str(obj.get("id"), f"{path}.id"),
        label=_as_str(obj.get("label"), f"{path}.label"),
        records=tuple(
            _as_str(rid, f"{path}.records[{i}]")
            for i, rid in enumerate(_as_list(obj.get("records"), f"{path}.records"))
        ),
        primary=_as_str(obj.get("primary"), f"{path}.primary"),
        expected=expected,
    )


def load_corpus(version: str = "v1") -> Corpus:
    """Load a corpus version from package data, verifying file hashes."""
    if version not in CORPUS_VERSIONS:
        raise ConfigurationError(f"unknown corpus version {version!r}")
    root = resources.files("escalade").joinpath("corpus_data", version)
    manifest_bytes = root.joinpath("corpus.json").read_bytes()
    manifest = _as_obj(json.loads(manifest_bytes), "corpus")
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise ParseError("corpus.schema_version: unsupported version")
    if manifest.get("corpus_version") != version:
        raise ParseError("corpus.corpus_version: does not match directory")

    files = _as_obj(manifest.get("files"), "corpus.files")
    records: dict[str, IncidentRecord] = {}
    for filename, pinned in files.items():
        raw = root.joinpath(filename).read_bytes()
        digest = "sha256:" + hashlib.sha256(raw).hexdigest()
        if digest != pinned:
            raise CorpusIntegrityError(
                f"{version}/{filename}: content hash {digest} does not match manifest {pinned}"
            )
        record = IncidentRecord.from_json(raw.decode("utf-8"), f"corpus.{filename}")
        records[record.id] = record

    entries = tuple(
        _parse_entry(raw, f"corpus.entries[{i}]")
        for i, raw in enumerate(_as_list(manifest.get("entries"), "corpus.entries"))
    )
    for entry in entries:
        for rid in entry.records:
            if rid not in records:
                raise ParseError(f"corpus entry {entry.id}: unknown record {rid!r}")
    return Corpus(version=version, entries=entries, records=records)


# ---------------------------------------------------------------------------
# Replaying expectations
# ---------------------------------------------------------------------------


def _decisive_holds(decisive: str, trace: ClassificationTrace) -> bool:
    if decisive == "C1":
        return trace.result("C1") in (GateResult.FAIL, GateResult.INDETERMINATE)
    if decisive == "C2":
        return trace.result("C2") == GateResult.FAIL
    if decisive == "C3":
        return trace.result("C3") == GateResult.TRIGGER
    if decisive == "C5b+C6":
        return trace.result("C5b") == GateResult.PASS and trace.result("C6") == GateResult.PASS
    if decisive == "C8":
        return trace.result("C8") == GateResult.TRIGGER
    raise ConfigurationError(f"unknown decisive path {decisive!r}")


@dataclass(frozen=True, slots=True)
class CorpusResult:
    entry: CorpusEntry
    trace: ClassificationTrace
    problems: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.problems


def run_corpus(corpus: Corpus, config: EngineConfig | None = None) -> list[CorpusResult]:
    """Classify every entry's primary record against the frozen expectations.

    Clusters are built over the whole corpus pool, so composite entries pick
    up their siblings exactly as they would in production ingest.
    """
    if config is None:
        config = EngineConfig()
    pool = corpus.all_records()
    context = ClusterContext(build_clusters(pool, config))

    results: list[CorpusResult] = []
    for entry in corpus.entries:
        trace = classify(corpus.records[entry.primary], config, context)
        problems: list[str] = []
        expected = entry.expected
        if trace.classification != expected.classification:
            problems.append(
                f"classification {trace.classification!r} != expected {expected.classification!r}"
            )
        if not _decisive_holds(expected.decisive, trace):
            problems.append(f"decisive path {expected.decisive} not satisfied")
        seen = {code for outcome in trace.outcomes for code in outcome.diagnostics}
        for code in expected.diagnostics:
            if code not in seen:
                problems.append(f"expected diagnostic {code!r} missing")
        cluster = context.cluster_for(entry.primary)
        if expected.cluster is None:
            if cluster is not None:
                problems.append(f"unexpected cluster {cluster.id}")
        else:
            if cluster is None:
                problems.append("expected a cluster, none formed")
            elif cluster.signature.kind is not expected.cluster.kind:
                problems.append(f"cluster kind {cluster.signature.kind.value} unexpected")
            elif len(cluster.members) != expected.cluster.size:
                problems.append(f"cluster size {len(cluster.members)} != {expected.cluster.size}")
        results.append(CorpusResult(entry=entry, trace=trace, problems=tuple(problems)))
    return results


# ---------------------------------------------------------------------------
# Variation sweeps
# ---------------------------------------------------------------------------


def with_field(record: IncidentRecord, path: str, value: Any) -> IncidentRecord:
    """Return a copy of ``record`` with one serialized field replaced.

    ``path`` is dot-separated over the canonical JSON form ("near_miss",
    "causation.confidence", "propagation.standing_condition", ...), and
    ``value`` must be JSON-compatible; the result is re-parsed, so a value the
    schema rejects raises ParseError. Replacing below a null parent (for
    example "impact.deaths" when impact is null) is not supported: replace the
    whole parent object instead.
    """
    doc = record.to_dict()
    parts = path.split(".")
    target: Any = doc
    for part in parts[:-1]:
        if not isinstance(target, dict) or part not in target:
            raise ConfigurationError(f"no field {path!r} on record {record.id}")
        target = target[part]
    leaf = parts[-1]
    if not isinstance(target, dict) or leaf not in target:
        raise ConfigurationError(f"no field {path!r} on record {record.id}")
    target[leaf] = value
    return IncidentRecord.from_dict(doc, f"record[{record.id}]")


@dataclass(frozen=True)
class VariationSpec:
    """One-dimensional sweep over a record field.

    ``base_overrides`` are applied before sweeping, so a sweep can isolate one
    mechanism (for example clearing immediate flags before varying
    jurisdictions, otherwise an immediate trigger masks every downstream
    change).
    """

    record_id: str
    field_path: str
    values: tuple[Any, ...]
    base_overrides: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.values:
            raise ConfigurationError("variation needs at least one value")
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "base_overrides", dict(self.base_overrides))


@dataclass(frozen=True, slots=True)
class VariationOutcome:
    value: Any
    trace: ClassificationTrace

    @property
    def classification(self) -> str:
        return self.trace.classification


def run_variations(
    corpus: Corpus, spec: VariationSpec, config: EngineConfig | None = None
) -> list[VariationOutcome]:
    """Classify the swept record once per value, rebuilding clusters each time."""
    if config is None:
        config = EngineConfig()
    if spec.record_id not in corpus.records:
        raise ConfigurationError(f"unknown record {spec.record_id!r} in corpus {corpus.version}")

    base = corpus.records[spec.record_id]
    for path, value in spec.base_overrides.items():
        base = with_field(base, path, value)

    outcomes: list[VariationOutcome] = []
    for value in spec.values:
        varied = with_field(base, spec.field_path, value)
        pool = [varied if record.id == spec.record_id else record for record in corpus.all_records()]
        context = ClusterContext(build_clusters(pool, config))
        outcomes.append(VariationOutcome(value=value, trace=classify(varied, config, context)))
    return outcomes
