"""Walk tracker: speed bands, timers, poll cadence, reference-interpreter fuzz."""

import random

import pytest

from petwalk.config import Config
from petwalk.context import (
    ActivityState,
    ContextEventKind,
    LocationFix,
    WalkTracker,
    classify_speed,
)
from petwalk.errors import DomainError
from petwalk.geo import GeoPoint

M_PER_DEG_LAT = 111194.92664455873
CFG = Config()


def fixes_at_speeds(segments, interval=5.0, user="u"):
    """segments: list of (duration_s, speed_mps); yields fixes along a meridian."""
    t = 0.0
    lat = 41.0
    out = [LocationFix(user, GeoPoint(lat, -8.0), t)]
    for duration, speed in segments:
        steps = int(duration // interval)
        for _ in range(steps):
            t += interval
            lat += speed * interval / M_PER_DEG_LAT
            out.append(LocationFix(user, GeoPoint(lat, -8.0), t))
    return out


def run(segments, config=CFG, interval=5.0):
    tracker = WalkTracker(config)
    events = []
    for fix in fixes_at_speeds(segments, interval):
        events.extend(tracker.update(fix))
    return tracker, events


def count(events, kind, reason=None):
    return sum(1 for e in events if e.kind is kind and (reason is None or e.reason == reason))


class TestClassifySpeed:
    def test_bands(self):
        assert classify_speed(0.0) is ActivityState.STATIONARY
        assert classify_speed(0.39) is ActivityState.STATIONARY
        assert classify_speed(0.4) is ActivityState.WALKING
        assert classify_speed(1.2) is ActivityState.WALKING
        assert classify_speed(2.5) is ActivityState.WALKING
        assert classify_speed(2.51) is ActivityState.VEHICLE
        assert classify_speed(15.0) is ActivityState.VEHICLE

    def test_rejects_bad_speed(self):
        with pytest.raises(DomainError):
            classify_speed(-0.1)
        with pytest.raises(DomainError):
            classify_speed(float("nan"))


class TestWalkTimer:
    def test_fires_once_at_300s(self):
        tracker, events = run([(300, 1.2)])
        hits = [e for e in events if e.kind is ContextEventKind.WALK_THRESHOLD_REACHED]
        assert len(hits) == 1
        assert hits[0].t == 300.0

    def test_299s_does_not_fire(self):
        _, events = run([(295, 1.2)])
        assert count(events, ContextEventKind.WALK_THRESHOLD_REACHED) == 0

    def test_rearms_for_long_walks(self):
        _, events = run([(900, 1.2)])
        hits = [e.t for e in events if e.kind is ContextEventKind.WALK_THRESHOLD_REACHED]
        assert hits == [300.0, 600.0, 900.0]

    def test_long_stop_resets(self):
        tracker, events = run([(200, 1.2), (65, 0.0), (295, 1.2)])
        assert count(events, ContextEventKind.WALK_RESET, "stationary") == 1
        # accumulation restarted: 295 s after the stop is not enough
        assert count(events, ContextEventKind.WALK_THRESHOLD_REACHED) == 0

    def test_brief_stop_does_not_reset(self):
        _, events = run([(200, 1.2), (30, 0.0), (100, 1.2)])
        assert count(events, ContextEventKind.WALK_RESET) == 0
        hits = [e.t for e in events if e.kind is ContextEventKind.WALK_THRESHOLD_REACHED]
        # 300 s of walking accumulate by t = 330
        assert hits == [330.0]

    def test_stationary_reset_edge_is_strict(self):
        # exactly 60 s stationary: no reset
        _, events = run([(100, 1.2), (60, 0.0), (10, 1.2)])
        assert count(events, ContextEventKind.WALK_RESET) == 0

    def test_vehicle_resets_immediately(self):
        tracker, events = run([(100, 1.2), (10, 15.0)])
        assert count(events, ContextEventKind.WALK_RESET, "vehicle") == 1
        assert tracker.state is ActivityState.VEHICLE
        assert tracker.walk_accum == 0.0

    def test_pure_vehicle_emits_only_vehicle_reset(self):
        _, events = run([(120, 15.0)])
        non_forecast = [e for e in events if e.kind is not ContextEventKind.FORECAST_POLL_DUE]
        assert all(e.kind is ContextEventKind.WALK_RESET and e.reason == "vehicle" for e in non_forecast)
        assert len(non_forecast) == 1

    def test_nonmonotone_timestamp_rejected(self):
        tracker = WalkTracker(CFG)
        tracker.update(LocationFix("u", GeoPoint(41.0, -8.0), 10.0))
        with pytest.raises(DomainError):
            tracker.update(LocationFix("u", GeoPoint(41.0, -8.0), 10.0))


class TestPolls:
    def test_env_poll_fires_only_while_walking(self):
        _, events = run([(60, 0.0)])
        assert count(events, ContextEventKind.ENV_POLL_DUE) == 0
        _, events = run([(60, 1.2)])
        assert count(events, ContextEventKind.ENV_POLL_DUE) == 1

    def test_env_poll_spacing(self):
        _, events = run([(1810, 1.2)])
        polls = [e.t for e in events if e.kind is ContextEventKind.ENV_POLL_DUE]
        assert polls == [5.0, 605.0, 1205.0, 1805.0]
        assert all(b - a >= 600.0 for a, b in zip(polls, polls[1:]))

    def test_forecast_poll_on_first_fix_and_cadence(self):
        tracker = WalkTracker(CFG)
        events = tracker.update(LocationFix("u", GeoPoint(41.0, -8.0), 0.0))
        assert count(events, ContextEventKind.FORECAST_POLL_DUE) == 1
        # not due again within 24 h
        events = tracker.update(LocationFix("u", GeoPoint(41.0, -8.0), 3600.0))
        assert count(events, ContextEventKind.FORECAST_POLL_DUE) == 0
        assert tracker.poll_forecast_if_due(3600.0) is False
        assert tracker.poll_forecast_if_due(86400.0) is True

    def test_forecast_poll_not_gated_on_walking(self):
        _, events = run([(120, 15.0)])
        assert count(events, ContextEventKind.FORECAST_POLL_DUE) == 1


class ReferenceInterpreter:
    """Straightforward restatement of the update rules, kept separate from
    the implementation on purpose (no smoothing, default config)."""

    def __init__(self):
        self.state = ActivityState.UNKNOWN
        self.walk = 0.0
        self.still = 0.0
        self.last_t = None
        self.last_env = None
        self.last_fc = None

    def step(self, t, speed):
        events = []
        if self.last_t is None:
            self.last_t = t
            if self.last_fc is None or t - self.last_fc >= 86400:
                events.append("forecast")
                self.last_fc = t
            return events
        dt = t - self.last_t
        self.last_t = t
        prev = self.state
        if speed < 0.4:
            self.state = ActivityState.STATIONARY
        elif speed <= 2.5:
            self.state = ActivityState.WALKING
        else:
            self.state = ActivityState.VEHICLE
        if self.state is ActivityState.WALKING:
            self.still = 0.0
            self.walk += dt
            if self.walk >= 300:
                events.append("threshold")
                self.walk = 0.0
        elif self.state is ActivityState.STATIONARY:
            before = self.still
            self.still += dt
            if self.still > 60 >= before and self.walk > 0:
                events.append("reset:stationary")
            if self.still > 60:
                self.walk = 0.0
        else:
            if prev is not ActivityState.VEHICLE:
                events.append("reset:vehicle")
            self.walk = 0.0
            self.still = 0.0
        if self.state is ActivityState.WALKING and (self.last_env is None or t - self.last_env >= 600):
            events.append("env")
            self.last_env = t
        if self.last_fc is None or t - self.last_fc >= 86400:
            events.append("forecast")
            self.last_fc = t
        return events


def _event_names(events):
    names = []
    for e in events:
        if e.kind is ContextEventKind.WALK_THRESHOLD_REACHED:
            names.append("threshold")
        elif e.kind is ContextEventKind.WALK_RESET:
            names.append(f"reset:{e.reason}")
        elif e.kind is ContextEventKind.ENV_POLL_DUE:
            names.append("env")
        else:
            names.append("forecast")
    return names


class TestAgainstReferenceInterpreter:
    def test_random_sequences_agree(self):
        rng = random.Random(20_26)
        for _ in range(150):
            tracker = WalkTracker(CFG)
            reference = ReferenceInterpreter()
            t, lat = 0.0, 41.0
            tracker_events, reference_events = [], []
            speed = 0.0
            for _ in range(rng.randint(2, 120)):
                fix_events = tracker.update(LocationFix("u", GeoPoint(lat, -8.0), t))
                tracker_events.extend(_event_names(fix_events))
                # the interval ending at this fix moved at the previous speed
                reference_events.extend(reference.step(t, speed))
                speed = rng.choice([0.0, 0.2, 0.8, 1.2, 2.0, 3.0, 12.0])
                dt = rng.choice([1.0, 5.0, 10.0, 30.0, 61.0])
                t += dt
                lat += speed * dt / M_PER_DEG_LAT
            assert tracker_events == reference_events

    def test_threshold_spacing_property(self):
        # between consecutive fires there are >= 300 s of accumulated walking
        rng = random.Random(77)
        for _ in range(60):
            tracker = WalkTracker(CFG)
            t, lat = 0.0, 41.0
            prev_t = None
            walking_since_fire = 0.0
            for _ in range(rng.randint(10, 200)):
                speed = rng.choice([0.0, 1.0, 1.5, 4.0])
                dt = rng.choice([2.0, 5.0, 20.0])
                events = tracker.update(LocationFix("u", GeoPoint(lat, -8.0), t))
                if prev_t is not None and tracker.state is ActivityState.WALKING:
                    walking_since_fire += t - prev_t
                if any(e.kind is ContextEventKind.WALK_THRESHOLD_REACHED for e in events):
                    assert walking_since_fire >= 300.0
                    walking_since_fire = 0.0
                prev_t = t
                t += dt
                lat += speed * dt / M_PER_DEG_LAT
            assert tracker.walk_accum < 300.0
