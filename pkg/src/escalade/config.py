"""Engine configuration: thresholds and modifiers the pipeline leaves open.

Defaults are calibrated to reproduce the reference corpus and are documented
as calibration constants, not ground truth: the confidence floor, scope
exclusions, cluster windows, and uplift bands are all deployment decisions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path
from typing import Any, Mapping

from .model import (
    CausationConfidence,
    ConfigurationError,
    RootCauseKind,
    ScopeDomain,
    _as_bool,
    _as_int,
    _as_list,
    _as_obj,
)

DEFAULT_CLUSTER_WINDOW_DAYS: dict[RootCauseKind, float] = {
    RootCauseKind.TECHNICAL: 30.0,
    RootCauseKind.CAPABILITY: 90.0,
    RootCauseKind.CONTEXTUAL: 180.0,
}

DEFAULT_UPLIFT_BANDS: tuple[tuple[int, int], ...] = ((100_000, 1), (1_000_000, 2))


@dataclass(frozen=True, slots=True)
class VulnerabilityModifier:
    """Optional severity uplift for flagged vulnerable populations."""

    enabled: bool = False
    uplift: int = 1

    def to_dict(self) -> dict[str, Any]:
        return {"enabled": self.enabled, "uplift": self.uplift}

    @classmethod
    def from_dict(cls, data: Any, path: str = "vulnerability_modifier") -> "VulnerabilityModifier":
        obj = _as_obj(data, path)
        return cls(
            enabled=_as_bool(obj.get("enabled", False), f"{path}.enabled"),
            uplift=_as_int(obj.get("uplift", 1), f"{path}.uplift"),
        )


@dataclass(frozen=True)
class EngineConfig:
    """All tunable pipeline thresholds, with corpus-reproducing defaults."""

    causation_confidence_floor: CausationConfidence = CausationConfidence.PROBABLE
    scope_exclusions: frozenset[ScopeDomain] = frozenset(
        {ScopeDomain.MILITARY, ScopeDomain.NATIONAL_SECURITY}
    )
    severity_escalation_floor: int = 4
    vulnerability_modifier: VulnerabilityModifier = field(default_factory=VulnerabilityModifier)
    cluster_window_days: Mapping[RootCauseKind, float] = field(
        default_factory=lambda: dict(DEFAULT_CLUSTER_WINDOW_DAYS)
    )
    aggregation_uplift_bands: tuple[tuple[int, int], ...] = DEFAULT_UPLIFT_BANDS

    def __post_init__(self) -> None:
        if self.severity_escalation_floor not in (4, 5):
            raise ConfigurationError(
                f"severity_escalation_floor must be 4 or 5, got {self.severity_escalation_floor}"
            )
        if self.causation_confidence_floor is CausationConfidence.UNKNOWN:
            raise ConfigurationError("causation_confidence_floor cannot be unknown")
        if self.vulnerability_modifier.uplift < 0:
            raise ConfigurationError("vulnerability uplift must be non-negative")
        object.__setattr__(self, "scope_exclusions", frozenset(self.scope_exclusions))
        windows = dict(DEFAULT_CLUSTER_WINDOW_DAYS)
        windows.update(self.cluster_window_days)
        for kind, days in windows.items():
            if days <= 0:
                raise ConfigurationError(f"cluster window for {kind.value} must be positive")
        object.__setattr__(self, "cluster_window_days", windows)
        bands = tuple(sorted((int(t), int(u)) for t, u in self.aggregation_uplift_bands))
        for threshold, uplift in bands:
            if threshold <= 0 or uplift < 0:
                raise ConfigurationError(f"invalid uplift band ({threshold}, {uplift})")
        object.__setattr__(self, "aggregation_uplift_bands", bands)

    def cluster_window(self, kind: RootCauseKind) -> timedelta:
        return timedelta(days=self.cluster_window_days[kind])

    def aggregation_uplift(self, metric: int) -> int:
        """Uplift for an aggregate count: the largest band at or below it."""
        uplift = 0
        for threshold, band_uplift in self.aggregation_uplift_bands:
            if metric >= threshold:
                uplift = band_uplift
        return uplift

    def to_dict(self) -> dict[str, Any]:
        return {
            "causation_confidence_floor": self.causation_confidence_floor.value,
            "scope_exclusions": sorted(domain.value for domain in self.scope_exclusions),
            "severity_escalation_floor": self.severity_escalation_floor,
            "vulnerability_modifier": self.vulnerability_modifier.to_dict(),
            "cluster_window_days": {
                kind.value: self.cluster_window_days[kind] for kind in RootCauseKind
            },
            "aggregation_uplift_bands": [list(band) for band in self.aggregation_uplift_bands],
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "config") -> "EngineConfig":
        obj = _as_obj(data, path)
        defaults = cls()
        floor_raw = obj.get("causation_confidence_floor")
        exclusions_raw = obj.get("scope_exclusions")
        windows_raw = obj.get("cluster_window_days")
        bands_raw = obj.get("aggregation_uplift_bands")

        windows = dict(DEFAULT_CLUSTER_WINDOW_DAYS)
        if windows_raw is not None:
            for key, value in _as_obj(windows_raw, f"{path}.cluster_window_days").items():
                try:
                    kind = RootCauseKind(key)
                except ValueError:
                    raise ConfigurationError(f"{path}.cluster_window_days: unknown kind {key!r}") from None
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise ConfigurationError(f"{path}.cluster_window_days.{key}: expected number")
                windows[kind] = float(value)

        bands = DEFAULT_UPLIFT_BANDS
        if bands_raw is not None:
            parsed = []
            for i, pair in enumerate(_as_list(bands_raw, f"{path}.aggregation_uplift_bands")):
                items = _as_list(pair, f"{path}.aggregation_uplift_bands[{i}]")
                if len(items) != 2:
                    raise ConfigurationError(
                        f"{path}.aggregation_uplift_bands[{i}]: expected [threshold, uplift]"
                    )
                parsed.append(
                    (
                        _as_int(items[0], f"{path}.aggregation_uplift_bands[{i}][0]"),
                        _as_int(items[1], f"{path}.aggregation_uplift_bands[{i}][1]"),
                    )
                )
            bands = tuple(parsed)

        return cls(
            causation_confidence_floor=(
                defaults.causation_confidence_floor
                if floor_raw is None
                else CausationConfidence(floor_raw)
            ),
            scope_exclusions=(
                defaults.scope_exclusions
                if exclusions_raw is None
                else frozenset(
                    ScopeDomain(raw)
                    for raw in _as_list(exclusions_raw, f"{path}.scope_exclusions")
                )
            ),
            severity_escalation_floor=_as_int(
                obj.get("severity_escalation_floor", defaults.severity_escalation_floor),
                f"{path}.severity_escalation_floor",
            ),
            vulnerability_modifier=(
                defaults.vulnerability_modifier
                if obj.get("vulnerability_modifier") is None
                else VulnerabilityModifier.from_dict(
                    obj.get("vulnerability_modifier"), f"{path}.vulnerability_modifier"
                )
            ),
            cluster_window_days=windows,
            aggregation_uplift_bands=bands,
        )


def load_config(path: str | Path | None) -> EngineConfig:
    """Load a config file, or return defaults when ``path`` is None."""
    if path is None:
        return EngineConfig()
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path}: invalid JSON: {exc}") from None
    return EngineConfig.from_dict(data)
