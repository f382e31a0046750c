"""Tolerance-based monitoring for standing conditions.

Discrete-event pipelines cannot see an ongoing population-level harm, so this
module watches per-category prevalence series against explicit baselines and
emits events on three triggers:

* ``spike`` — prevalence exceeds the trailing rolling mean by ``k`` standard
  deviations (suppressed while the baseline sd is zero);
* ``sustained_increase`` — the mean of the last W2 points is at least ``rho``
  times the mean of the W2 points before them;
* ``threshold_crossing`` — prevalence crosses the category's absolute
  threshold from below.

Nothing fires during the warm-up prefix (the first W points). Detection is a
pure function over a snapshot of the series; baselines are trailing rolling
moments (mean and population sd), chosen for auditability.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from importlib import resources
from typing import Any, Iterable, Mapping, Sequence

from .model import (
    SCHEMA_VERSION,
    Availability,
    CausationAssessment,
    CausationConfidence,
    CausationRole,
    ConfigurationError,
    FieldGroup,
    HarmAssessment,
    HarmBasis,
    IncidentRecord,
    ParseError,
    PropagationAssessment,
    PropagationPathway,
    PropagationVelocity,
    RootCauseKind,
    RootCauseSignature,
    ScopeDomain,
    Ternary,
    _as_float,
    _as_int,
    _as_obj,
    _as_str,
    format_timestamp,
    parse_timestamp,
)


@dataclass(frozen=True, slots=True)
class HarmSeriesPoint:
    """One observation period for one harm category."""

    category: str
    period_start: datetime
    period_length_days: float
    prevalence: float
    sample_size: int

    def __post_init__(self) -> None:
        if self.prevalence < 0:
            raise ValueError(f"prevalence must be non-negative, got {self.prevalence}")
        if self.sample_size <= 0:
            raise ValueError(f"sample_size must be positive, got {self.sample_size}")
        if self.period_length_days <= 0:
            raise ValueError(f"period_length_days must be positive, got {self.period_length_days}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "category": self.category,
            "period_start": format_timestamp(self.period_start),
            "period_length": self.period_length_days,
            "prevalence": self.prevalence,
            "sample_size": self.sample_size,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "point") -> "HarmSeriesPoint":
        obj = _as_obj(data, path)
        return cls(
            category=_as_str(obj.get("category"), f"{path}.category"),
            period_start=parse_timestamp(obj.get("period_start"), f"{path}.period_start"),
            period_length_days=_as_float(obj.get("period_length"), f"{path}.period_length"),
            prevalence=_as_float(obj.get("prevalence"), f"{path}.prevalence"),
            sample_size=_as_int(obj.get("sample_size"), f"{path}.sample_size"),
        )


@dataclass(frozen=True, slots=True)
class ToleranceConfig:
    baseline_window: int = 28
    spike_k: float = 3.0
    sustained_window: int = 8
    sustained_ratio: float = 1.5
    absolute_thresholds: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.baseline_window < 2:
            raise ConfigurationError("baseline_window must be at least 2")
        if self.spike_k <= 0:
            raise ConfigurationError("spike_k must be positive")
        if self.sustained_window < 1:
            raise ConfigurationError("sustained_window must be at least 1")
        if self.sustained_ratio <= 1:
            raise ConfigurationError("sustained_ratio must exceed 1")
        object.__setattr__(self, "absolute_thresholds", dict(self.absolute_thresholds))

    def to_dict(self) -> dict[str, Any]:
        return {
            "baseline_window": self.baseline_window,
            "spike_k": self.spike_k,
            "sustained_window": self.sustained_window,
            "sustained_ratio": self.sustained_ratio,
            "absolute_thresholds": dict(sorted(self.absolute_thresholds.items())),
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "tolerance") -> "ToleranceConfig":
        obj = _as_obj(data, path)
        thresholds_raw = obj.get("absolute_thresholds", {})
        thresholds = {
            _as_str(k, f"{path}.absolute_thresholds"): _as_float(
                v, f"{path}.absolute_thresholds.{k}"
            )
            for k, v in _as_obj(thresholds_raw, f"{path}.absolute_thresholds").items()
        }
        return cls(
            baseline_window=_as_int(obj.get("baseline_window", 28), f"{path}.baseline_window"),
            spike_k=_as_float(obj.get("spike_k", 3.0), f"{path}.spike_k"),
            sustained_window=_as_int(obj.get("sustained_window", 8), f"{path}.sustained_window"),
            sustained_ratio=_as_float(obj.get("sustained_ratio", 1.5), f"{path}.sustained_ratio"),
            absolute_thresholds=thresholds,
        )


class EventKind:
    SPIKE = "spike"
    SUSTAINED_INCREASE = "sustained_increase"
    THRESHOLD_CROSSING = "threshold_crossing"

    ALL = (SPIKE, SUSTAINED_INCREASE, THRESHOLD_CROSSING)


@dataclass(frozen=True, slots=True)
class ToleranceEvent:
    """One monitoring trigger.

    ``baseline_mean``/``baseline_sd`` are the trailing W-window moments for
    spike and threshold events; for sustained_increase they are the moments of
    the *preceding* W2 window, so ``observed >= ratio * baseline_mean`` restates
    the trigger predicate.
    """

    category: str
    kind: str
    at: datetime
    index: int
    observed: float
    baseline_mean: float
    baseline_sd: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "category": self.category,
            "kind": self.kind,
            "at": format_timestamp(self.at),
            "index": self.index,
            "observed": self.observed,
            "baseline_mean": self.baseline_mean,
            "baseline_sd": self.baseline_sd,
        }


class WarmingUp:
    """Sentinel: not enough history to form a baseline (not an error)."""

    def __repr__(self) -> str:  # pragma: no cover
        return "WarmingUp"


WARMING_UP = WarmingUp()


def _moments(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    variance = math.fsum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(variance)


def compute_baseline(
    series: Sequence[HarmSeriesPoint], index: int, config: ToleranceConfig | None = None
) -> tuple[float, float] | WarmingUp:
    """Trailing rolling (mean, population sd) over ``[index - W, index)``.

    Returns :data:`WARMING_UP` while fewer than W prior points exist.
    """
    if config is None:
        config = ToleranceConfig()
    w = config.baseline_window
    if index < w:
        return WARMING_UP
    window = [point.prevalence for point in series[index - w : index]]
    return _moments(window)


def _check_series(series: Sequence[HarmSeriesPoint]) -> None:
    for i in range(1, len(series)):
        if series[i].period_start < series[i - 1].period_start:
            raise ValueError("series must be sorted by period_start")
        if series[i].category != series[0].category:
            raise ValueError("detect_events expects a single-category series")


def detect_events(
    series: Sequence[HarmSeriesPoint], config: ToleranceConfig | None = None
) -> list[ToleranceEvent]:
    """Run all three triggers over one category's series.

    Deterministic; events are ordered by time, and by kind (spike,
    sustained_increase, threshold_crossing) within one period.

    Raises:
        ValueError: on unsorted or mixed-category input.
    """
    if config is None:
        config = ToleranceConfig()
    _check_series(series)

    events: list[ToleranceEvent] = []
    w = config.baseline_window
    w2 = config.sustained_window
    threshold = config.absolute_thresholds.get(series[0].category) if series else None

    for i, point in enumerate(series):
        if i < w:
            continue  # warm-up prefix: nothing fires

        baseline = compute_baseline(series, i, config)
        assert not isinstance(baseline, WarmingUp)
        mean, sd = baseline

        if sd > 0 and point.prevalence > mean + config.spike_k * sd:
            events.append(
                ToleranceEvent(
                    category=point.category,
                    kind=EventKind.SPIKE,
                    at=point.period_start,
                    index=i,
                    observed=point.prevalence,
                    baseline_mean=mean,
                    baseline_sd=sd,
                )
            )

        if i >= 2 * w2 - 1:
            recent = [p.prevalence for p in series[i - w2 + 1 : i + 1]]
            preceding = [p.prevalence for p in series[i - 2 * w2 + 1 : i - w2 + 1]]
            recent_mean = math.fsum(recent) / w2
            preceding_mean, preceding_sd = _moments(preceding)
            if recent_mean >= config.sustained_ratio * preceding_mean:
                events.append(
                    ToleranceEvent(
                        category=point.category,
                        kind=EventKind.SUSTAINED_INCREASE,
                        at=point.period_start,
                        index=i,
                        observed=recent_mean,
                        baseline_mean=preceding_mean,
                        baseline_sd=preceding_sd,
                    )
                )

        if (
            threshold is not None
            and i >= 1
            and series[i - 1].prevalence <= threshold < point.prevalence
        ):
            events.append(
                ToleranceEvent(
                    category=point.category,
                    kind=EventKind.THRESHOLD_CROSSING,
                    at=point.period_start,
                    index=i,
                    observed=point.prevalence,
                    baseline_mean=mean,
                    baseline_sd=sd,
                )
            )

    return events


def monitor_series(
    points: Iterable[HarmSeriesPoint], config: ToleranceConfig | None = None
) -> list[ToleranceEvent]:
    """Group mixed-category points, detect per category, merge by time."""
    by_category: dict[str, list[HarmSeriesPoint]] = {}
    for point in points:
        by_category.setdefault(point.category, []).append(point)
    events: list[ToleranceEvent] = []
    for category in sorted(by_category):
        series = sorted(by_category[category], key=lambda p: p.period_start)
        events.extend(detect_events(series, config))
    events.sort(key=lambda e: (e.at, e.category, EventKind.ALL.index(e.kind)))
    return events


# ---------------------------------------------------------------------------
# Ingest
# ---------------------------------------------------------------------------

_CSV_COLUMNS = ("category", "period_start", "period_length", "prevalence", "sample_size")


def parse_series_csv(text: str) -> list[HarmSeriesPoint]:
    """Parse series points from CSV with the fixed five-column header."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames) != _CSV_COLUMNS:
        raise ParseError(
            f"series CSV must have columns {', '.join(_CSV_COLUMNS)}; got {reader.fieldnames}"
        )
    points = []
    for row_number, row in enumerate(reader, start=2):
        path = f"row {row_number}"
        try:
            points.append(
                HarmSeriesPoint(
                    category=row["category"],
                    period_start=parse_timestamp(row["period_start"], f"{path}.period_start"),
                    period_length_days=float(row["period_length"]),
                    prevalence=float(row["prevalence"]),
                    sample_size=int(row["sample_size"]),
                )
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}: {exc}") from None
    return points


def parse_series_jsonl(text: str) -> list[HarmSeriesPoint]:
    """Parse series points from JSON lines (one object per line)."""
    points = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {line_number}: invalid JSON: {exc}") from None
        points.append(HarmSeriesPoint.from_dict(data, f"line {line_number}"))
    return points


def parse_series(text: str) -> list[HarmSeriesPoint]:
    """Auto-detect CSV vs JSON lines by the first non-blank character."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return parse_series_jsonl(text)
    return parse_series_csv(text)


BUNDLED_SERIES = ("step", "ramp", "constant")


def load_bundled_series(name: str) -> list[HarmSeriesPoint]:
    """Load one of the packaged synthetic demonstration series.

    ``step`` holds a noisy baseline near 0.0007 that doubles to 0.0014 at the
    final period; ``ramp`` grows geometrically to 1.6x per sustained window;
    ``constant`` sits at 0.0007 throughout and triggers nothing.
    """
    if name not in BUNDLED_SERIES:
        known = ", ".join(BUNDLED_SERIES)
        raise ConfigurationError(f"unknown bundled series {name!r}; expected one of {known}")
    path = resources.files("escalade").joinpath("data", "series", f"{name}.csv")
    return parse_series_csv(path.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Promotion into the gate pipeline
# ---------------------------------------------------------------------------


def promote_event(
    event: ToleranceEvent,
    *,
    record_id: str,
    severity: int,
    jurisdictions: Iterable[str],
    key: str,
    sample_size: int | None = None,
) -> IncidentRecord:
    """Build a standing-condition IncidentRecord from a monitoring event.

    The event supplies the category, timing, and observed rate; the caller
    supplies the assessed severity and jurisdictional reach, which monitoring
    does not know. Whether such a record is itself an "incident" or an input
    to one is a governance question left to the deployment.
    """
    affected = None
    if sample_size is not None:
        affected = int(round(event.observed * sample_size))
    return IncidentRecord(
        id=record_id,
        title=f"Tolerance {event.kind} in {event.category} prevalence",
        occurred_at=event.at,
        reported_at=event.at,
        causation=CausationAssessment(CausationRole.CAUSAL_FACTOR, CausationConfidence.PROBABLE),
        scope_domain=ScopeDomain.CIVILIAN,
        root_cause=RootCauseSignature(kind=RootCauseKind.CAPABILITY, key=key),
        propagation=PropagationAssessment(
            pathway=PropagationPathway.CONTENT_DISTRIBUTION,
            velocity=PropagationVelocity.WEEKS,
            containment_feasible_nationally=Ternary.UNKNOWN,
            standing_condition=True,
        ),
        harm=(HarmAssessment(category=event.category, severity=severity, basis=HarmBasis.REALIZED),),
        jurisdictions=frozenset(jurisdictions),
        affected_population=affected,
        data_availability={FieldGroup.CROSS_PROVIDER: Availability.UNAVAILABLE},
    )
