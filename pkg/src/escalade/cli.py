"""Command line interface.

Exit codes: 0 on success, 1 when a check command found problems (validation
findings, corpus expectation failures), 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .clusters import ClusterContext, build_clusters
from .config import EngineConfig, load_config
from .corpus import VariationSpec, load_corpus, run_corpus, run_variations
from .gates import classify
from .model import (
    IncidentRecord,
    ModelError,
    canonical_json,
    validate_record,
)
from .monitor import ToleranceConfig, monitor_series, parse_series, promote_event
from .profiles import gap_report, load_profiles
from .reports import (
    render_clusters,
    render_corpus_results,
    render_events,
    render_gap_matrix,
    render_trace,
    render_validation,
    render_variations,
)

USAGE_ERROR = 2
CHECK_FAILED = 1


def _record_paths(paths: Sequence[str]) -> list[Path]:
    expanded: list[Path] = []
    for raw_path in paths:
        path = Path(raw_path)
        if path.is_dir():
            expanded.extend(sorted(path.glob("*.json")))
        else:
            expanded.append(path)
    return expanded


def _read_records(paths: Sequence[str]) -> list[IncidentRecord]:
    records = []
    for path in _record_paths(paths):
        records.append(IncidentRecord.from_json(path.read_text(encoding="utf-8"), path.name))
    return records


def _emit(document: Any, as_json: bool, text: str) -> None:
    if as_json:
        sys.stdout.write(canonical_json(document))
    else:
        print(text)


def cmd_validate(args: argparse.Namespace, config: EngineConfig) -> int:
    records = _read_records(args.files)
    findings = {record.id: validate_record(record) for record in records}
    findings = {rid: f for rid, f in findings.items() if f}
    document = {
        rid: [finding.to_dict() for finding in found] for rid, found in findings.items()
    }
    _emit(document, args.json, render_validation(findings))
    return CHECK_FAILED if findings else 0


def _report_findings(records: Sequence[IncidentRecord]) -> bool:
    """Print rule violations to stderr; returns True when any were found."""
    found = False
    for record in records:
        for finding in validate_record(record):
            print(f"{record.id}: {finding.path}: {finding.message}", file=sys.stderr)
            found = True
    return found


def cmd_classify(args: argparse.Namespace, config: EngineConfig) -> int:
    records = _read_records(args.files)
    flagged = _report_findings(records)
    context = ClusterContext(build_clusters(records, config))
    traces = [classify(record, config, context) for record in records]
    if args.json:
        for trace in traces:
            sys.stdout.write(canonical_json(trace.to_dict()))
    else:
        blocks = [render_trace(trace) for trace in traces]
        print("\n\n".join(blocks))
    return CHECK_FAILED if flagged else 0


def cmd_batch(args: argparse.Namespace, config: EngineConfig) -> int:
    records = _read_records(args.paths)
    flagged = _report_findings(records)
    context = ClusterContext(build_clusters(records, config))
    traces = [classify(record, config, context) for record in records]
    if args.json:
        for trace in traces:
            sys.stdout.write(json.dumps(trace.to_dict(), ensure_ascii=False) + "\n")
    else:
        width = max((len(t.subject) for t in traces), default=0)
        for trace in traces:
            final = trace.outcomes[-1]
            print(f"{trace.subject:<{width}}  {trace.classification:<8}  {final.gate} {final.result}")
    return CHECK_FAILED if flagged else 0


def cmd_cluster(args: argparse.Namespace, config: EngineConfig) -> int:
    records = _read_records(args.files)
    clusters = build_clusters(records, config)
    document = [cluster.to_dict() for cluster in clusters]
    _emit(document, args.json, render_clusters(clusters))
    return 0


def cmd_monitor(args: argparse.Namespace, config: EngineConfig) -> int:
    points = parse_series(Path(args.series).read_text(encoding="utf-8"))
    tolerance = ToleranceConfig()
    if args.threshold is not None:
        category = points[0].category if points else ""
        tolerance = ToleranceConfig(absolute_thresholds={category: args.threshold})
    events = monitor_series(points, tolerance)
    if args.promote:
        if not args.key or not args.jurisdictions:
            print("--promote needs --key and --jurisdictions", file=sys.stderr)
            return USAGE_ERROR
        for i, event in enumerate(events):
            record = promote_event(
                event,
                record_id=f"{args.record_prefix}-{i + 1:03d}",
                severity=args.severity,
                jurisdictions=args.jurisdictions.split(","),
                key=args.key,
            )
            sys.stdout.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
        return 0
    if args.pretty:
        print(render_events(events))
    else:
        for event in events:
            sys.stdout.write(json.dumps(event.to_dict(), ensure_ascii=False) + "\n")
    return 0


def cmd_profiles(args: argparse.Namespace, config: EngineConfig) -> int:
    records = _read_records(args.files)
    clusters = build_clusters(records, config)
    reports = gap_report(records, clusters, load_profiles(), config)
    document = [report.to_dict() for report in reports]
    _emit(document, args.json, render_gap_matrix(reports))
    return 0


def cmd_corpus_run(args: argparse.Namespace, config: EngineConfig) -> int:
    corpus = load_corpus(args.corpus_version)
    results = run_corpus(corpus, config)
    document = [
        {
            "entry": result.entry.id,
            "classification": result.trace.classification,
            "expected": result.entry.expected.classification,
            "ok": result.ok,
            "problems": list(result.problems),
        }
        for result in results
    ]
    _emit(document, args.json, render_corpus_results(results))
    return 0 if all(result.ok for result in results) else CHECK_FAILED


def cmd_corpus_vary(args: argparse.Namespace, config: EngineConfig) -> int:
    corpus = load_corpus(args.corpus_version)
    try:
        values = json.loads(args.values)
    except json.JSONDecodeError as exc:
        print(f"--values must be a JSON array: {exc}", file=sys.stderr)
        return USAGE_ERROR
    if not isinstance(values, list):
        print("--values must be a JSON array", file=sys.stderr)
        return USAGE_ERROR
    overrides = {}
    for override in args.override or []:
        key, sep, raw = override.partition("=")
        if not sep:
            print(f"--override expects PATH=JSON, got {override!r}", file=sys.stderr)
            return USAGE_ERROR
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError as exc:
            print(f"--override {key}: invalid JSON: {exc}", file=sys.stderr)
            return USAGE_ERROR
    spec = VariationSpec(
        record_id=args.record,
        field_path=args.field,
        values=tuple(values),
        base_overrides=overrides,
    )
    outcomes = run_variations(corpus, spec, config)
    document = [
        {"value": outcome.value, "classification": outcome.classification}
        for outcome in outcomes
    ]
    _emit(document, args.json, render_variations(args.field, outcomes))
    return 0


def cmd_serve(args: argparse.Namespace, config: EngineConfig) -> int:
    from .server import serve

    serve(host=args.host, port=args.port, journal_path=args.journal, config=config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="escalade",
        description="Gated escalation pipeline for AI incident reports.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="engine configuration JSON file (default: $ESCALADE_CONFIG)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("validate", help="check record files for rule violations")
    p.add_argument("files", nargs="+")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = subparsers.add_parser("classify", help="classify record files (clustered together)")
    p.add_argument("files", nargs="+")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = subparsers.add_parser("batch", help="classify a directory of records, one line each")
    p.add_argument("paths", nargs="+", help="record files or directories of *.json records")
    p.add_argument("--json", action="store_true", help="emit one trace JSON line per record")
    p.set_defaults(func=cmd_batch)

    p = subparsers.add_parser("cluster", help="show composite clusters among record files")
    p.add_argument("files", nargs="+")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_cluster)

    p = subparsers.add_parser("monitor", help="detect tolerance events in a prevalence series")
    p.add_argument("series", help="CSV or JSONL series file")
    p.add_argument("--threshold", type=float, help="absolute prevalence threshold")
    p.add_argument("--promote", action="store_true", help="emit a standing-condition record per event")
    p.add_argument("--severity", type=int, default=3)
    p.add_argument("--jurisdictions", help="comma-separated codes for promoted records")
    p.add_argument("--key", help="root-cause key for promoted records")
    p.add_argument("--record-prefix", default="tolerance")
    p.add_argument("--pretty", action="store_true", help="table output instead of JSON lines")
    p.set_defaults(func=cmd_monitor)

    p = subparsers.add_parser("profiles", help="compare records against regulatory profiles")
    p.add_argument("files", nargs="+")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_profiles)

    corpus = subparsers.add_parser("corpus", help="review corpus commands")
    corpus_sub = corpus.add_subparsers(dest="corpus_command", required=True)

    p = corpus_sub.add_parser("run", help="replay the corpus against frozen expectations")
    p.add_argument("--corpus-version", default="v1")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_corpus_run)

    p = corpus_sub.add_parser("vary", help="sweep one field of one corpus record")
    p.add_argument("record", help="record id within the corpus")
    p.add_argument("field", help="dot-separated field path")
    p.add_argument("--values", required=True, help="JSON array of values to sweep")
    p.add_argument("--override", action="append", metavar="PATH=JSON",
                   help="base override applied before the sweep (repeatable)")
    p.add_argument("--corpus-version", default="v1")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_corpus_vary)

    p = subparsers.add_parser("serve", help="run the walkthrough session API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--journal", help="append-only session journal path")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config_path = args.config or os.environ.get("ESCALADE_CONFIG") or None
    try:
        config = load_config(config_path)
    except (ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return args.func(args, config)
    except (ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
