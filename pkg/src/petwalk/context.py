"""Context detection: movement classification, walk timers and poll cadence.

One WalkTracker per user; all time flows from fix timestamps, never from the
wall clock, so replaying the same fixes always produces the same events.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from statistics import fmean
from typing import Optional

from .config import Config
from .errors import DomainError
from .geo import GeoPoint, haversine_km

_DEFAULT_CONFIG = Config()


class ActivityState(Enum):
    STATIONARY = "Stationary"
    WALKING = "Walking"
    VEHICLE = "Vehicle"
    UNKNOWN = "Unknown"  # only before the second fix


@dataclass(frozen=True)
class LocationFix:
    user_id: str
    point: GeoPoint
    t: float

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise DomainError(f"fix timestamp must be finite, got {self.t!r}")


class ContextEventKind(Enum):
    WALK_THRESHOLD_REACHED = "WalkThresholdReached"
    WALK_RESET = "WalkReset"
    ENV_POLL_DUE = "EnvPollDue"
    FORECAST_POLL_DUE = "ForecastPollDue"


@dataclass(frozen=True)
class ContextEvent:
    kind: ContextEventKind
    t: float
    reason: Optional[str] = None  # for WalkReset: "stationary" | "vehicle"


def classify_speed(speed_mps: float, config: Config = _DEFAULT_CONFIG) -> ActivityState:
    """Band a speed into stationary / walking / vehicle."""
    if not math.isfinite(speed_mps) or speed_mps < 0:
        raise DomainError(f"speed must be finite and >= 0, got {speed_mps!r}")
    if speed_mps < float(config.get("context.stationary_max_mps")):
        return ActivityState.STATIONARY
    if speed_mps <= float(config.get("context.walking_max_mps")):
        return ActivityState.WALKING
    return ActivityState.VEHICLE


class WalkTracker:
    """Sequential per-user state machine over location fixes.

    Walking time accumulates toward the proximity trigger and re-arms after
    firing; a stationary spell longer than the reset window (or any vehicle
    detection) zeroes it. Environment polls are due only while walking,
    forecast polls regardless of movement.
    """

    def __init__(self, config: Config = _DEFAULT_CONFIG):
        self.config = config
        self.state = ActivityState.UNKNOWN
        self.walk_accum = 0.0
        self.stationary_accum = 0.0
        self.last_fix: Optional[LocationFix] = None
        self.last_env_poll: Optional[float] = None
        self.last_forecast_poll: Optional[float] = None
        window = int(config.get("context.smoothing_window"))
        if window < 1:
            raise DomainError(f"context.smoothing_window must be >= 1, got {window}")
        self._speeds = deque(maxlen=window)

    def update(self, fix: LocationFix) -> list[ContextEvent]:
        """Advance the machine by one fix and return the events it produced."""
        events: list[ContextEvent] = []
        previous = self.last_fix
        self.last_fix = fix
        if previous is None:
            # First fix only establishes position; forecast polling may still
            # come due since it is not tied to movement.
            events.extend(self._poll_events(fix.t, walking=False))
            return events
        dt = fix.t - previous.t
        if dt <= 0:
            raise DomainError(f"fix timestamps must increase per user: {fix.t} after {previous.t}")

        raw_speed = haversine_km(previous.point, fix.point) * 1000.0 / dt
        self._speeds.append(raw_speed)
        speed = fmean(self._speeds)
        state_before = self.state
        self.state = classify_speed(speed, self.config)

        if self.state is ActivityState.WALKING:
            self.stationary_accum = 0.0
            self.walk_accum += dt
            if self.walk_accum >= float(self.config.get("context.walk_trigger_s")):
                events.append(ContextEvent(ContextEventKind.WALK_THRESHOLD_REACHED, fix.t))
                self.walk_accum = 0.0
        elif self.state is ActivityState.STATIONARY:
            before = self.stationary_accum
            self.stationary_accum += dt
            reset_after = float(self.config.get("context.stationary_reset_s"))
            if self.stationary_accum > reset_after >= before and self.walk_accum > 0:
                events.append(ContextEvent(ContextEventKind.WALK_RESET, fix.t, reason="stationary"))
            if self.stationary_accum > reset_after:
                self.walk_accum = 0.0
        else:  # vehicle
            if state_before is not ActivityState.VEHICLE:
                events.append(ContextEvent(ContextEventKind.WALK_RESET, fix.t, reason="vehicle"))
            self.walk_accum = 0.0
            self.stationary_accum = 0.0

        events.extend(self._poll_events(fix.t, walking=self.state is ActivityState.WALKING))
        return events

    def _poll_events(self, t: float, walking: bool) -> list[ContextEvent]:
        events = []
        if walking:
            cadence = float(self.config.get("context.env_poll_s"))
            if self.last_env_poll is None or t - self.last_env_poll >= cadence:
                events.append(ContextEvent(ContextEventKind.ENV_POLL_DUE, t))
                self.last_env_poll = t
        if self._forecast_due(t):
            events.append(ContextEvent(ContextEventKind.FORECAST_POLL_DUE, t))
            self.last_forecast_poll = t
        return events

    def _forecast_due(self, t: float) -> bool:
        cadence = float(self.config.get("context.forecast_poll_s"))
        return self.last_forecast_poll is None or t - self.last_forecast_poll >= cadence

    def poll_forecast_if_due(self, t: float) -> bool:
        """Clock-tick path: forecast cadence can come due without any fix."""
        if self._forecast_due(t):
            self.last_forecast_poll = t
            return True
        return False

    def to_state(self) -> dict:
        return {
            "state": self.state.value,
            "walk_accum": self.walk_accum,
            "stationary_accum": self.stationary_accum,
            "last_fix": None
            if self.last_fix is None
            else {
                "user": self.last_fix.user_id,
                "lat": self.last_fix.point.lat,
                "lon": self.last_fix.point.lon,
                "t": self.last_fix.t,
            },
            "last_env_poll": self.last_env_poll,
            "last_forecast_poll": self.last_forecast_poll,
            "speeds": list(self._speeds),
        }

    @classmethod
    def from_state(cls, state: dict, config: Config = _DEFAULT_CONFIG) -> "WalkTracker":
        tracker = cls(config)
        tracker.state = ActivityState(state["state"])
        tracker.walk_accum = state["walk_accum"]
        tracker.stationary_accum = state["stationary_accum"]
        if state["last_fix"] is not None:
            raw = state["last_fix"]
            tracker.last_fix = LocationFix(raw["user"], GeoPoint(raw["lat"], raw["lon"]), raw["t"])
        tracker.last_env_poll = state["last_env_poll"]
        tracker.last_forecast_poll = state["last_forecast_poll"]
        tracker._speeds.extend(state["speeds"])
        return tracker
