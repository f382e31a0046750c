"""Tolerance monitoring against an independent brute-force detector."""

from __future__ import annotations

import random
import statistics
from datetime import datetime, timedelta, timezone

import pytest

from escalade.model import FieldGroup, ParseError
from escalade.monitor import (
    WARMING_UP,
    EventKind,
    HarmSeriesPoint,
    ToleranceConfig,
    WarmingUp,
    compute_baseline,
    detect_events,
    load_bundled_series,
    monitor_series,
    parse_series,
    parse_series_csv,
    parse_series_jsonl,
    promote_event,
)

START = datetime(2025, 1, 6, tzinfo=timezone.utc)
RELTOL = 1e-12


def series(values, category="psychological", start=START):
    return [
        HarmSeriesPoint(
            category=category,
            period_start=start + timedelta(days=7 * i),
            period_length_days=7.0,
            prevalence=v,
            sample_size=1_000_000,
        )
        for i, v in enumerate(values)
    ]


# ---------------------------------------------------------------------------
# Brute-force oracle: plain-sum moments, predicates restated from scratch.
# ---------------------------------------------------------------------------


def oracle_events(points, config=None):
    if config is None:
        config = ToleranceConfig()
    w, k = config.baseline_window, config.spike_k
    w2, rho = config.sustained_window, config.sustained_ratio
    threshold = config.absolute_thresholds.get(points[0].category) if points else None

    def moments(values):
        # statistics uses exact rational arithmetic internally, so a constant
        # window yields sd exactly 0 -- the discontinuity the spike guard
        # depends on -- while remaining an independent implementation.
        return statistics.mean(values), statistics.pstdev(values)

    out = []
    for i in range(len(points)):
        if i < w:
            continue
        mean, sd = moments([p.prevalence for p in points[i - w : i]])
        if sd > 0 and points[i].prevalence > mean + k * sd:
            out.append((i, EventKind.SPIKE, points[i].prevalence, mean, sd))
        if i >= 2 * w2 - 1:
            recent = [p.prevalence for p in points[i - w2 + 1 : i + 1]]
            preceding = [p.prevalence for p in points[i - 2 * w2 + 1 : i - w2 + 1]]
            r_mean = statistics.mean(recent)
            p_mean, p_sd = moments(preceding)
            if r_mean >= rho * p_mean:
                out.append((i, EventKind.SUSTAINED_INCREASE, r_mean, p_mean, p_sd))
        if threshold is not None and i >= 1:
            if points[i - 1].prevalence <= threshold < points[i].prevalence:
                out.append((i, EventKind.THRESHOLD_CROSSING, points[i].prevalence, mean, sd))
    return out


def close(a, b):
    if a == b:
        return True
    scale = max(abs(a), abs(b))
    return abs(a - b) <= RELTOL * scale


def assert_matches_oracle(points, config=None):
    got = detect_events(points, config)
    expected = oracle_events(points, config)
    assert [(e.index, e.kind) for e in got] == [(i, kind) for i, kind, *_ in expected]
    for event, (_, _, observed, mean, sd) in zip(got, expected):
        assert close(event.observed, observed)
        assert close(event.baseline_mean, mean)
        assert close(event.baseline_sd, sd)


def fixture_battery():
    """Every shape the detector has to handle, all series length <= 200."""
    rng = random.Random(414243)
    battery = [
        [],
        [0.0007] * 10,            # shorter than the warm-up window
        [0.0007] * 28,            # exactly the window: still warming up
        [0.0007] * 29,
        [0.0007] * 200,
        [0.0] * 60,               # all-zero series
        list(load_bundled_series("step")),
        list(load_bundled_series("ramp")),
        list(load_bundled_series("constant")),
    ]
    battery = [s if isinstance(s, list) and s and isinstance(s[0], HarmSeriesPoint) else series(s) for s in battery]

    # steps of varying size and position
    for step_at in (28, 29, 40, 59):
        vals = [0.0007 + (0.00001 if i % 2 else -0.00001) for i in range(60)]
        vals[step_at] = 0.0014
        battery.append(series(vals))
    # noisy baselines, drifts, ramps
    for _ in range(12):
        n = rng.randint(29, 200)
        base = rng.uniform(1e-5, 1e-2)
        noise = base * rng.uniform(0, 0.2)
        vals = [max(0.0, rng.gauss(base, noise)) for _ in range(n)]
        battery.append(series(vals))
    for _ in range(6):
        n = rng.randint(40, 120)
        base = rng.uniform(1e-4, 1e-3)
        growth = rng.uniform(1.0, 1.12)
        vals = [base * growth**i for i in range(n)]
        battery.append(series(vals))
    return battery


def test_detector_equals_oracle_on_fixture_battery():
    for points in fixture_battery():
        assert len(points) <= 200
        assert_matches_oracle(points)


def test_detector_equals_oracle_with_thresholds():
    rng = random.Random(5150)
    config = ToleranceConfig(absolute_thresholds={"psychological": 0.001})
    for _ in range(20):
        n = rng.randint(29, 150)
        vals = [abs(rng.gauss(0.001, 0.0004)) for _ in range(n)]
        assert_matches_oracle(series(vals), config)


def test_detector_equals_oracle_on_alternate_config():
    rng = random.Random(616)
    config = ToleranceConfig(baseline_window=10, spike_k=2.0, sustained_window=4, sustained_ratio=1.2)
    for _ in range(20):
        n = rng.randint(11, 120)
        vals = [abs(rng.gauss(0.01, 0.004)) for _ in range(n)]
        assert_matches_oracle(series(vals), config)


# ---------------------------------------------------------------------------
# Named behaviors on the bundled fixtures
# ---------------------------------------------------------------------------


def test_step_fixture_exactly_one_spike_at_step_index():
    points = load_bundled_series("step")
    events = detect_events(points)
    assert len(events) == 1
    assert events[0].kind == EventKind.SPIKE
    assert events[0].index == len(points) - 1
    assert points[events[0].index].prevalence == 0.0014


def test_ramp_fixture_sustained_increase_fires():
    events = detect_events(load_bundled_series("ramp"))
    assert any(e.kind == EventKind.SUSTAINED_INCREASE for e in events)


def test_constant_fixture_no_events():
    assert detect_events(load_bundled_series("constant")) == []


def test_unknown_bundled_series_rejected():
    from escalade.model import ConfigurationError

    with pytest.raises(ConfigurationError):
        load_bundled_series("nope")


# ---------------------------------------------------------------------------
# Unit behavior
# ---------------------------------------------------------------------------


class TestBaseline:
    def test_warming_up(self):
        points = series([0.0007] * 30)
        assert isinstance(compute_baseline(points, 27), WarmingUp)
        assert compute_baseline(points, 28) == (0.0007, 0.0)

    def test_constant_sd_zero(self):
        mean, sd = compute_baseline(series([0.0007] * 40), 35)
        assert mean == pytest.approx(0.0007)
        assert sd == 0.0

    def test_trailing_window_excludes_current(self):
        vals = [0.001] * 28 + [0.9]
        mean, _ = compute_baseline(series(vals), 28)
        assert mean == pytest.approx(0.001)


class TestDetect:
    def test_nothing_fires_during_warmup(self):
        vals = [0.0007] * 20 + [0.5] * 8  # huge step, still inside warm-up
        assert detect_events(series(vals)) == []

    def test_sd_zero_suppresses_spike(self):
        vals = [0.0007] * 40 + [0.0014]
        events = detect_events(series(vals))
        assert all(e.kind != EventKind.SPIKE for e in events)

    def test_threshold_crossing_from_below_only(self):
        config = ToleranceConfig(absolute_thresholds={"psychological": 0.001})
        vals = [0.0009] * 40 + [0.0012, 0.0012, 0.0009, 0.0012]
        events = [
            e for e in detect_events(series(vals), config)
            if e.kind == EventKind.THRESHOLD_CROSSING
        ]
        assert [e.index for e in events] == [40, 43]

    def test_scale_covariance(self):
        rng = random.Random(31337)
        vals = [abs(rng.gauss(0.001, 0.0003)) for _ in range(120)]
        vals[60] = 0.01
        config = ToleranceConfig(absolute_thresholds={"psychological": 0.002})
        base_events = detect_events(series(vals), config)
        for c in (2.0, 0.5, 8.0):
            scaled_config = ToleranceConfig(
                absolute_thresholds={"psychological": 0.002 * c}
            )
            scaled = detect_events(series([v * c for v in vals]), scaled_config)
            assert [(e.index, e.kind) for e in scaled] == [
                (e.index, e.kind) for e in base_events
            ]

    def test_unsorted_rejected(self):
        points = series([0.001, 0.001])
        with pytest.raises(ValueError):
            detect_events(list(reversed(points)))

    def test_mixed_category_rejected(self):
        a = series([0.001], category="privacy")
        b = series([0.001], category="dignity", start=START + timedelta(days=7))
        with pytest.raises(ValueError):
            detect_events(a + b)

    def test_monitor_series_groups_categories(self):
        a = [0.0007] * 40 + [0.0014]
        jitter = [0.0007 + (0.00001 if i % 2 else -0.00001) for i in range(40)] + [0.0014]
        points = series(jitter, category="privacy") + series(a, category="dignity")
        events = monitor_series(points)
        assert [e.category for e in events] == ["privacy"]

    def test_determinism(self):
        points = load_bundled_series("step")
        assert detect_events(points) == detect_events(points)


class TestIngest:
    def test_csv_round_trip(self):
        text = (
            "category,period_start,period_length,prevalence,sample_size\n"
            "privacy,2025-01-06T00:00:00Z,7,0.0007,1000000\n"
        )
        (point,) = parse_series_csv(text)
        assert point.category == "privacy"
        assert point.prevalence == 0.0007

    def test_csv_header_enforced(self):
        with pytest.raises(ParseError):
            parse_series_csv("a,b\n1,2\n")

    def test_jsonl(self):
        text = (
            '{"category": "privacy", "period_start": "2025-01-06T00:00:00Z",'
            ' "period_length": 7, "prevalence": 0.0007, "sample_size": 1000}\n'
        )
        (point,) = parse_series_jsonl(text)
        assert point.sample_size == 1000

    def test_autodetect(self):
        assert parse_series('{"category": "x", "period_start": "2025-01-06T00:00:00Z", "period_length": 7, "prevalence": 0.1, "sample_size": 5}')[0].category == "x"

    def test_invalid_point_rejected(self):
        with pytest.raises(ValueError):
            HarmSeriesPoint("privacy", START, 7.0, -0.1, 100)
        with pytest.raises(ValueError):
            HarmSeriesPoint("privacy", START, 7.0, 0.1, 0)


class TestPromotion:
    def test_promoted_record_is_standing_condition(self):
        (event,) = detect_events(load_bundled_series("step"))
        record = promote_event(
            event,
            record_id="tolerance-001",
            severity=3,
            jurisdictions=["US", "GB"],
            key="companion app dependency",
            sample_size=1_000_000,
        )
        assert record.propagation.standing_condition is True
        assert record.harm[0].category == event.category
        assert record.harm[0].severity == 3
        assert record.affected_population == round(event.observed * 1_000_000)
        assert not record.available(FieldGroup.CROSS_PROVIDER)
