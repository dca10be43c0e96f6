"""Notification filtering and delivery: the three scenarios and the pet dialog.

A Notifier holds the per-user orchestration state (dialog, cooldowns,
notification log, id counter). Callers serialize calls per user; distinct
users are independent. All time comes in as an argument, never from the
wall clock.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import date as date_type
from datetime import datetime, timezone
from enum import Enum
from typing import Optional, Sequence

from .config import Config, load_packaged_json
from .context import ActivityState
from .envmodel import (
    AQI_DIMENSION,
    NoiseVerdict,
    Severity,
    classify_rainfall,
    assess_air,
    assess_noise,
    forecast_severity,
)
from .errors import DomainError, ExpiredDialogError, NotFoundError, TemplateError
from .feed import SensorKind, SensorSnapshot
from .geo import GeoPoint, haversine_km, nearest
from .profile import POI, UserProfile, recommend_nearby

logger = logging.getLogger(__name__)

_DEFAULT_CONFIG = Config()

# Fixed evaluation order keeps logs deterministic.
CONDITION_KINDS = ("air", "noise", "rain")
_FORECAST_DIMENSIONS = ("precipitation", "wind", "temperature", "weather_type")

_SEVERITY_WORDS = {
    Severity.LOW: "calm",
    Severity.MEDIUM: "unsettled",
    Severity.HIGH: "rough",
    Severity.CRITICAL: "severe",
}

MAPS_URL = "https://www.google.com/maps/dir/?api=1&destination={lat},{lon}"


class Scenario(Enum):
    S1_PROXIMITY = "S1_Proximity"
    S2_ENVIRONMENT = "S2_Environment"
    S3_FORECAST = "S3_Forecast"


class Channel(Enum):
    PUSH = "Push"
    PET_POPUP = "PetPopup"


class ActionKind(Enum):
    OPEN_POPUP = "open_popup"
    RESPOND_YES = "respond_yes"
    RESPOND_NO = "respond_no"
    NAVIGATE = "navigate"


@dataclass(frozen=True)
class Action:
    label: str
    kind: ActionKind
    url: Optional[str] = None

    def to_record(self) -> dict:
        record = {"label": self.label, "kind": self.kind.value}
        if self.url is not None:
            record["url"] = self.url
        return record


@dataclass(frozen=True)
class Notification:
    id: int
    user_id: str
    scenario: Scenario
    channel: Channel
    title: str
    body: str
    justification: str
    pet: str
    actions: tuple[Action, ...]
    created_at: float
    related: Optional[dict] = None

    def __post_init__(self):
        if self.channel is Channel.PET_POPUP and not self.justification:
            raise DomainError("pet popups must carry a justification")
        if self.channel is Channel.PUSH and not any(
            a.kind is ActionKind.OPEN_POPUP for a in self.actions
        ):
            raise DomainError("push notifications must carry an open_popup action")

    def to_record(self) -> dict:
        """Canonical log shape: fixed key order, fixed numeric precision."""
        return {
            "id": self.id,
            "t": float(self.created_at),
            "user": self.user_id,
            "scenario": self.scenario.value,
            "channel": self.channel.value,
            "pet": self.pet,
            "title": self.title,
            "body": self.body,
            "justification": self.justification,
            "actions": [a.to_record() for a in self.actions],
            "related": self.related,
        }

    @classmethod
    def from_record(cls, record: dict) -> "Notification":
        return cls(
            id=record["id"],
            user_id=record["user"],
            scenario=Scenario(record["scenario"]),
            channel=Channel(record["channel"]),
            title=record["title"],
            body=record["body"],
            justification=record["justification"],
            pet=record["pet"],
            actions=tuple(
                Action(a["label"], ActionKind(a["kind"]), a.get("url")) for a in record["actions"]
            ),
            created_at=record["t"],
            related=record["related"],
        )


@dataclass(frozen=True)
class Excursion:
    excursion_id: str
    user_id: str
    destination: GeoPoint
    district: str
    date: date_type


class DialogPhase(Enum):
    AWAITING_TAP = "awaiting_tap"
    AWAITING_RESPONSE = "awaiting_response"


@dataclass
class Condition:
    """One violated environmental dimension, with the numbers that violated it."""

    kind: str  # air | noise | rain
    label: str  # PM2.5 / AQI / noise / rain
    value: float
    threshold: float
    unit: Optional[str] = None
    category: Optional[str] = None  # rainfall band label
    sensor_id: Optional[str] = None
    distance_m: Optional[float] = None

    def to_record(self) -> dict:
        record = {"kind": self.kind, "label": self.label, "value": self.value, "threshold": self.threshold}
        if self.unit is not None:
            record["unit"] = self.unit
        if self.category is not None:
            record["category"] = self.category
        if self.sensor_id is not None:
            record["sensor"] = self.sensor_id
        if self.distance_m is not None:
            record["distance_m"] = self.distance_m
        return record

    @classmethod
    def from_record(cls, record: dict) -> "Condition":
        return cls(
            kind=record["kind"],
            label=record["label"],
            value=record["value"],
            threshold=record["threshold"],
            unit=record.get("unit"),
            category=record.get("category"),
            sensor_id=record.get("sensor"),
            distance_m=record.get("distance_m"),
        )


@dataclass
class DialogState:
    push_id: int
    conditions: list[Condition]
    issued_at: float
    phase: DialogPhase = DialogPhase.AWAITING_TAP
    popup: Optional[Notification] = None
    shelter_pending: bool = False  # user accepted but no shelter was available yet

    def matches(self, notification_id: int) -> bool:
        if notification_id == self.push_id:
            return True
        return self.popup is not None and notification_id == self.popup.id


class _StrictContext(dict):
    def __missing__(self, key):
        raise TemplateError(f"unbound placeholder {key!r}")


class Templates:
    """Template table keyed by id, with strict placeholder binding."""

    def __init__(self, table: dict[str, str]):
        self._table = dict(table)

    @classmethod
    def load(cls, config: Config = _DEFAULT_CONFIG) -> "Templates":
        path = config.get("templates.path")
        if path is None:
            locale = config.get("templates.locale", "en")
            return cls(load_packaged_json(f"templates/{locale}.json"))
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh))

    def render(self, template_id: str, context: dict) -> str:
        if template_id not in self._table:
            raise TemplateError(f"unknown template {template_id!r}")
        return self._table[template_id].format_map(_StrictContext(context))


def render_pet_message(template_id: str, context: dict, templates: Optional[Templates] = None) -> str:
    """Deterministic substitution into the configured template table."""
    return (templates or Templates.load()).render(template_id, context)


def suppression_gate(state: ActivityState) -> bool:
    """True iff proximity/environment notifications must be suppressed."""
    return state is ActivityState.VEHICLE


def fmt_num(value: float) -> str:
    """Fixed, trailing-zero-free number formatting for message text."""
    text = f"{float(value):.4f}".rstrip("0").rstrip(".")
    return text if text else "0"


@dataclass
class _UserNotifyState:
    next_id: int = 1
    log: list[Notification] = field(default_factory=list)
    dialog: Optional[DialogState] = None
    cooldowns: dict[str, float] = field(default_factory=dict)
    suggested: dict[str, int] = field(default_factory=dict)  # poi_id -> sim day
    s3_last: dict[str, float] = field(default_factory=dict)
    # push id -> prepared popup (S1/S3 taps are idempotent and dialog-free)
    paired_popups: dict[int, Notification] = field(default_factory=dict)
    # S1 push id -> context for building the popup lazily on first tap
    s1_pending: dict[int, dict] = field(default_factory=dict)


class Notifier:
    """Scenario orchestration over per-user state."""

    def __init__(self, config: Config = _DEFAULT_CONFIG, templates: Optional[Templates] = None):
        self.config = config
        self.templates = templates or Templates.load(config)
        self._users: dict[str, _UserNotifyState] = {}

    # -- plumbing ---------------------------------------------------------

    def _state(self, user_id: str) -> _UserNotifyState:
        return self._users.setdefault(user_id, _UserNotifyState())

    def notifications(self, user_id: str, since_id: int = 0) -> list[Notification]:
        return [n for n in self._state(user_id).log if n.id > since_id]

    def _emit(
        self,
        state: _UserNotifyState,
        profile: UserProfile,
        scenario: Scenario,
        channel: Channel,
        title: str,
        body: str,
        justification: str,
        actions: Sequence[Action],
        now: float,
        related: Optional[dict] = None,
    ) -> Notification:
        notification = Notification(
            id=state.next_id,
            user_id=profile.user_id,
            scenario=scenario,
            channel=channel,
            title=title,
            body=body,
            justification=justification,
            pet=profile.pet,
            actions=tuple(actions),
            created_at=now,
            related=related,
        )
        state.next_id += 1
        state.log.append(notification)
        return notification

    def _render(self, template_id: str, context: dict) -> str:
        return self.templates.render(template_id, context)

    # -- scenario 1: proximity --------------------------------------------

    def on_walk_threshold(
        self,
        profile: UserProfile,
        point: GeoPoint,
        catalog: Sequence[POI],
        activity_state: ActivityState,
        now: float,
    ) -> Optional[Notification]:
        """Walking threshold reached: push the top nearby match, if any."""
        if suppression_gate(activity_state):
            return None
        state = self._state(profile.user_id)
        day = int(now // 86400)
        already = {poi_id for poi_id, d in state.suggested.items() if d == day}
        ranked = recommend_nearby(
            profile,
            point,
            catalog,
            radius_m=float(self.config.get("notify.radius_poi_m")),
            indoor_only=False,
            exclude=already,
            config=self.config,
        )
        if not ranked:
            return None
        poi, score = ranked[0]
        distance_m = round(haversine_km(point, poi.location) * 1000.0, 1)
        matched = self._matched_phrase(profile, poi)
        push = self._emit(
            state,
            profile,
            Scenario.S1_PROXIMITY,
            Channel.PUSH,
            title=self._render("s1_push_title", {"pet": profile.pet}),
            body=self._render("s1_push_body", {"distance_m": fmt_num(distance_m)}),
            justification="",
            actions=[Action("See what it is", ActionKind.OPEN_POPUP)],
            now=now,
            related={"poi": {"id": poi.poi_id, "name": poi.name, "distance_m": distance_m, "score": round(score, 4)}},
        )
        state.s1_pending[push.id] = {
            "poi_id": poi.poi_id,
            "poi_name": poi.name,
            "distance_m": distance_m,
            "score": round(score, 4),
            "matched": matched,
        }
        state.suggested[poi.poi_id] = day
        return push

    def _matched_phrase(self, profile: UserProfile, poi: POI) -> str:
        preferred = sorted(poi.categories & profile.preferred_categories)
        if preferred:
            return f"your interest in {preferred[0]}"
        trait_map = self.config.get("profile.trait_map")
        mapped = sorted(c for c in poi.categories if c in trait_map)
        if mapped:
            return f"your {trait_map[mapped[0]]['trait']} side"
        return "how close it is"

    # -- scenario 2: real-time environment --------------------------------

    def on_env_poll(
        self,
        profile: UserProfile,
        point: GeoPoint,
        snapshot: SensorSnapshot,
        catalog: Sequence[POI],
        activity_state: ActivityState,
        now: float,
    ) -> Optional[Notification]:
        """Environment poll while walking: evaluate nearest sensors, maybe push."""
        if suppression_gate(activity_state):
            return None
        state = self._state(profile.user_id)
        self._expire_dialog(state, now)
        conditions = self._evaluate_conditions(point, snapshot)

        if state.dialog is not None:
            return self._reevaluate_dialog(profile, state, point, catalog, conditions, now)
        if not conditions:
            return None

        window = float(self.config.get("notify.s2_cooldown_s"))
        eligible = [
            c
            for c in conditions
            if now - state.cooldowns.get(c.kind, float("-inf")) >= window
        ]
        if not eligible:
            return None
        for condition in eligible:
            state.cooldowns[condition.kind] = now

        short = ", ".join(sorted({c.label for c in eligible}, key=_label_order))
        push = self._emit(
            state,
            profile,
            Scenario.S2_ENVIRONMENT,
            Channel.PUSH,
            title=self._render("s2_push_title", {"pet": profile.pet}),
            body=self._render("s2_push_body", {"conditions_short": short}),
            justification="",
            actions=[Action("Hear me out", ActionKind.OPEN_POPUP)],
            now=now,
            related={"conditions": [c.to_record() for c in eligible]},
        )
        state.dialog = DialogState(push_id=push.id, conditions=list(eligible), issued_at=now)
        return push

    def _evaluate_conditions(self, point: GeoPoint, snapshot: SensorSnapshot) -> list[Condition]:
        conditions: list[Condition] = []
        air = self._nearest_reading(point, snapshot, SensorKind.AIR)
        if air is not None:
            reading, distance_m = air
            assessment = assess_air(reading.payload, self.config)
            for dimension in assessment.offending:
                if dimension == AQI_DIMENSION:
                    conditions.append(
                        Condition(
                            kind="air",
                            label="AQI",
                            value=reading.payload.aqi,
                            threshold=float(self.config.get("thresholds.aqi_healthy_max")),
                            sensor_id=reading.sensor_id,
                            distance_m=distance_m,
                        )
                    )
                else:
                    conditions.append(
                        Condition(
                            kind="air",
                            label=dimension.label,
                            value=reading.payload.value_for(dimension),
                            threshold=dimension.threshold(self.config),
                            unit=dimension.unit,
                            sensor_id=reading.sensor_id,
                            distance_m=distance_m,
                        )
                    )
        noise = self._nearest_reading(point, snapshot, SensorKind.NOISE)
        if noise is not None:
            reading, distance_m = noise
            if assess_noise(reading.payload, self.config) is NoiseVerdict.PREJUDICIAL:
                conditions.append(
                    Condition(
                        kind="noise",
                        label="noise",
                        value=reading.payload,
                        threshold=float(self.config.get("thresholds.noise_dba")),
                        unit="dB(A)",
                        sensor_id=reading.sensor_id,
                        distance_m=distance_m,
                    )
                )
        rain = self._nearest_reading(point, snapshot, SensorKind.PRECIPITATION)
        if rain is not None:
            reading, distance_m = rain
            category = classify_rainfall(reading.payload, self.config)
            if not category.safe:
                conditions.append(
                    Condition(
                        kind="rain",
                        label="rain",
                        value=reading.payload,
                        threshold=float(self.config.get("thresholds.rain_light_max")),
                        unit="mm/h",
                        category=category.label,
                        sensor_id=reading.sensor_id,
                        distance_m=distance_m,
                    )
                )
        return conditions

    def _nearest_reading(self, point: GeoPoint, snapshot: SensorSnapshot, kind: SensorKind):
        readings = {r.sensor_id: r for r in snapshot.of_kind(kind)}
        found = nearest(point, ((sid, r.location) for sid, r in readings.items()))
        if found is None:
            return None
        sensor_id, distance_km = found
        return readings[sensor_id], round(distance_km * 1000.0, 1)

    def _conditions_text(self, conditions: Sequence[Condition]) -> str:
        fragments = []
        for condition in conditions:
            if condition.kind == "air" and condition.label == "AQI":
                fragments.append(
                    self._render("s2_aqi", {"value": fmt_num(condition.value), "threshold": fmt_num(condition.threshold)})
                )
            elif condition.kind == "air":
                fragments.append(
                    self._render(
                        "s2_air",
                        {
                            "pollutant": condition.label,
                            "value": fmt_num(condition.value),
                            "unit": condition.unit,
                            "threshold": fmt_num(condition.threshold),
                        },
                    )
                )
            elif condition.kind == "noise":
                fragments.append(
                    self._render("s2_noise", {"value": fmt_num(condition.value), "threshold": fmt_num(condition.threshold)})
                )
            else:
                fragments.append(
                    self._render(
                        "s2_rain",
                        {
                            "value": fmt_num(condition.value),
                            "category": condition.category,
                            "threshold": fmt_num(condition.threshold),
                        },
                    )
                )
        return "; ".join(fragments)

    def _expire_dialog(self, state: _UserNotifyState, now: float) -> None:
        dialog = state.dialog
        if dialog is not None and now - dialog.issued_at > float(self.config.get("notify.dialog_ttl_s")):
            state.dialog = None

    def _reevaluate_dialog(
        self,
        profile: UserProfile,
        state: _UserNotifyState,
        point: GeoPoint,
        catalog: Sequence[POI],
        conditions: list[Condition],
        now: float,
    ) -> Optional[Notification]:
        dialog = state.dialog
        window = float(self.config.get("notify.s2_cooldown_s"))
        known = {c.kind for c in dialog.conditions}
        for condition in conditions:
            if condition.kind in known:
                continue
            if now - state.cooldowns.get(condition.kind, float("-inf")) < window:
                continue
            # fold the new condition into the open dialog instead of stacking
            dialog.conditions.append(condition)
            state.cooldowns[condition.kind] = now
            known.add(condition.kind)
        if not dialog.shelter_pending:
            return None
        if not conditions:
            # conditions cleared while we were looking for shelter
            state.dialog = None
            return None
        return self._offer_shelter(profile, state, point, catalog, now, rearmed=True)

    def on_notification_tap(self, profile: UserProfile, notification_id: int, now: float) -> Notification:
        """Expand a push into its pet popup; idempotent per notification."""
        state = self._state(profile.user_id)
        dialog = state.dialog
        if dialog is not None and dialog.matches(notification_id):
            if now - dialog.issued_at > float(self.config.get("notify.dialog_ttl_s")):
                state.dialog = None
                raise ExpiredDialogError(f"dialog for notification {notification_id} expired")
            if dialog.popup is None:
                justification = self._render("s2_prompt", {"conditions": self._conditions_text(dialog.conditions)})
                dialog.popup = self._emit(
                    state,
                    profile,
                    Scenario.S2_ENVIRONMENT,
                    Channel.PET_POPUP,
                    title="",
                    body="",
                    justification=justification,
                    actions=[
                        Action("Yes, please", ActionKind.RESPOND_YES),
                        Action("No, thanks", ActionKind.RESPOND_NO),
                    ],
                    now=now,
                    related={"conditions": [c.to_record() for c in dialog.conditions]},
                )
                dialog.phase = DialogPhase.AWAITING_RESPONSE
                dialog.issued_at = now
            return dialog.popup
        if notification_id in state.paired_popups:
            return state.paired_popups[notification_id]
        if notification_id in state.s1_pending:
            pending = state.s1_pending.pop(notification_id)
            popup = self._emit(
                state,
                profile,
                Scenario.S1_PROXIMITY,
                Channel.PET_POPUP,
                title="",
                body="",
                justification=self._render(
                    "s1_popup",
                    {
                        "poi_name": pending["poi_name"],
                        "distance_m": fmt_num(pending["distance_m"]),
                        "matched": pending["matched"],
                    },
                ),
                actions=[],
                now=now,
                related={
                    "poi": {
                        "id": pending["poi_id"],
                        "name": pending["poi_name"],
                        "distance_m": pending["distance_m"],
                        "score": pending["score"],
                    }
                },
            )
            state.paired_popups[notification_id] = popup
            return popup
        raise NotFoundError(f"no tappable notification {notification_id}")

    def on_prompt_response(
        self,
        profile: UserProfile,
        notification_id: int,
        accepted: bool,
        point: GeoPoint,
        catalog: Sequence[POI],
        now: float,
    ) -> Optional[Notification]:
        """Resolve the yes/no prompt: find shelter, or stand down."""
        state = self._state(profile.user_id)
        dialog = state.dialog
        if dialog is None or dialog.phase is not DialogPhase.AWAITING_RESPONSE or not dialog.matches(notification_id):
            raise NotFoundError(f"no dialog awaiting a response for notification {notification_id}")
        if now - dialog.issued_at > float(self.config.get("notify.dialog_ttl_s")):
            state.dialog = None
            raise ExpiredDialogError(f"dialog for notification {notification_id} expired")
        if not accepted:
            state.dialog = None
            return None
        return self._offer_shelter(profile, state, point, catalog, now, rearmed=False)

    def _offer_shelter(
        self,
        profile: UserProfile,
        state: _UserNotifyState,
        point: GeoPoint,
        catalog: Sequence[POI],
        now: float,
        rearmed: bool,
    ) -> Notification:
        dialog = state.dialog
        kinds = {c.kind for c in dialog.conditions}
        if "rain" in kinds:
            radius_m = float(self.config.get("notify.radius_shelter_rain_m"))
        else:
            radius_m = float(self.config.get("notify.radius_shelter_airnoise_m"))
        ranked = recommend_nearby(
            profile,
            point,
            catalog,
            radius_m=radius_m,
            indoor_only=True,
            config=self.config,
        )
        conditions_text = self._conditions_text(dialog.conditions)
        if ranked:
            poi, score = ranked[0]
            distance_m = round(haversine_km(point, poi.location) * 1000.0, 1)
            url = MAPS_URL.format(lat=poi.location.lat, lon=poi.location.lon)
            popup = self._emit(
                state,
                profile,
                Scenario.S2_ENVIRONMENT,
                Channel.PET_POPUP,
                title="",
                body="",
                justification=self._render(
                    "s2_shelter",
                    {"poi_name": poi.name, "distance_m": fmt_num(distance_m), "conditions": conditions_text},
                ),
                actions=[Action("Take me there", ActionKind.NAVIGATE, url=url)],
                now=now,
                related={
                    "conditions": [c.to_record() for c in dialog.conditions],
                    "poi": {"id": poi.poi_id, "name": poi.name, "distance_m": distance_m, "score": round(score, 4), "indoor": True},
                },
            )
            state.dialog = None
            return popup
        if rearmed:
            # stay armed silently; we already told the user to walk on
            return None
        popup = self._emit(
            state,
            profile,
            Scenario.S2_ENVIRONMENT,
            Channel.PET_POPUP,
            title="",
            body="",
            justification=self._render("s2_walk_more", {"conditions": conditions_text}),
            actions=[],
            now=now,
            related={"conditions": [c.to_record() for c in dialog.conditions]},
        )
        dialog.shelter_pending = True
        dialog.issued_at = now
        return popup

    # -- scenario 3: excursion forecasts -----------------------------------

    def on_forecast_poll(
        self,
        profile: UserProfile,
        excursions: Sequence[Excursion],
        forecasts: dict,
        now: float,
    ) -> list[Notification]:
        """Forecast poll: alert on excursions within the window whose forecast
        severity reaches the configured minimum."""
        state = self._state(profile.user_id)
        window_days = int(self.config.get("notify.forecast_window_days"))
        min_severity = Severity[self.config.get("notify.s3_min_severity")]
        cadence = float(self.config.get("context.forecast_poll_s"))
        today = datetime.fromtimestamp(now, tz=timezone.utc).date()
        out: list[Notification] = []
        for excursion in sorted(excursions, key=lambda e: e.excursion_id):
            ahead = (excursion.date - today).days
            if not 0 <= ahead <= window_days:
                continue
            day = forecasts.get((excursion.district, excursion.date))
            if day is None:
                logger.info("no forecast for %s on %s; skipping", excursion.district, excursion.date)
                continue
            assessed = forecast_severity(day, self.config)
            if assessed.severity < min_severity:
                continue
            last = state.s3_last.get(excursion.excursion_id)
            if last is not None and now - last < cadence:
                continue
            dominant = next(
                d for d in _FORECAST_DIMENSIONS if assessed.contributors[d] == assessed.severity
            )
            detail = self._forecast_detail(dominant, day, assessed)
            severity_word = _SEVERITY_WORDS[assessed.severity]
            related = {
                "excursion": excursion.excursion_id,
                "district": excursion.district,
                "date": excursion.date.isoformat(),
                "severity": assessed.severity.name,
                "dominant": dominant,
            }
            push = self._emit(
                state,
                profile,
                Scenario.S3_FORECAST,
                Channel.PUSH,
                title=self._render("s3_push_title", {"pet": profile.pet}),
                body=self._render(
                    "s3_push_body",
                    {"district": excursion.district, "date": excursion.date.isoformat()},
                ),
                justification="",
                actions=[Action("What's wrong?", ActionKind.OPEN_POPUP)],
                now=now,
                related=related,
            )
            popup = self._emit(
                state,
                profile,
                Scenario.S3_FORECAST,
                Channel.PET_POPUP,
                title="",
                body="",
                justification=self._render(
                    "s3_popup",
                    {
                        "district": excursion.district,
                        "date": excursion.date.isoformat(),
                        "severity": severity_word,
                        "detail": detail,
                    },
                ),
                actions=[],
                now=now,
                related=related,
            )
            state.paired_popups[push.id] = popup
            state.s3_last[excursion.excursion_id] = now
            out.extend([push, popup])
        return out

    def _forecast_detail(self, dominant: str, day, assessed) -> str:
        severity = assessed.contributors[dominant]
        if dominant == "precipitation":
            edges = self.config.get("thresholds.severity_precip_edges")
            return self._render(
                "s3_detail_precipitation",
                {"value": fmt_num(day.precipitation), "threshold": fmt_num(_edge_for(severity, edges))},
            )
        if dominant == "wind":
            edges = self.config.get("thresholds.severity_wind_edges")
            return self._render(
                "s3_detail_wind",
                {"value": fmt_num(day.wind_speed), "threshold": fmt_num(_edge_for(severity, edges))},
            )
        if dominant == "temperature":
            return self._render(
                "s3_detail_temperature",
                {
                    "temp_min": fmt_num(day.temp_min),
                    "temp_max": fmt_num(day.temp_max),
                    "low": fmt_num(float(self.config.get("thresholds.temp_low_min"))),
                    "high": fmt_num(float(self.config.get("thresholds.temp_low_max"))),
                },
            )
        return self._render(
            "s3_detail_weather_type",
            {"weather_type": day.weather_type, "severity": _SEVERITY_WORDS[severity]},
        )

    # -- persistence --------------------------------------------------------

    def to_state(self) -> dict:
        users = {}
        for user_id, state in self._users.items():
            dialog = None
            if state.dialog is not None:
                dialog = {
                    "push_id": state.dialog.push_id,
                    "conditions": [c.to_record() for c in state.dialog.conditions],
                    "issued_at": state.dialog.issued_at,
                    "phase": state.dialog.phase.value,
                    "popup": None if state.dialog.popup is None else state.dialog.popup.to_record(),
                    "shelter_pending": state.dialog.shelter_pending,
                }
            users[user_id] = {
                "next_id": state.next_id,
                "log": [n.to_record() for n in state.log],
                "dialog": dialog,
                "cooldowns": state.cooldowns,
                "suggested": state.suggested,
                "s3_last": state.s3_last,
                "paired_popups": {str(k): v.to_record() for k, v in state.paired_popups.items()},
                "s1_pending": {str(k): v for k, v in state.s1_pending.items()},
            }
        return {"users": users}

    def restore_state(self, payload: dict) -> None:
        self._users.clear()
        for user_id, raw in payload["users"].items():
            state = _UserNotifyState(next_id=raw["next_id"])
            state.log = [Notification.from_record(r) for r in raw["log"]]
            if raw["dialog"] is not None:
                d = raw["dialog"]
                state.dialog = DialogState(
                    push_id=d["push_id"],
                    conditions=[Condition.from_record(c) for c in d["conditions"]],
                    issued_at=d["issued_at"],
                    phase=DialogPhase(d["phase"]),
                    popup=None if d["popup"] is None else Notification.from_record(d["popup"]),
                    shelter_pending=d["shelter_pending"],
                )
            state.cooldowns = dict(raw["cooldowns"])
            state.suggested = {k: int(v) for k, v in raw["suggested"].items()}
            state.s3_last = dict(raw["s3_last"])
            state.paired_popups = {int(k): Notification.from_record(v) for k, v in raw["paired_popups"].items()}
            state.s1_pending = {int(k): v for k, v in raw["s1_pending"].items()}
            self._users[user_id] = state


def _label_order(label: str) -> tuple[int, str]:
    groups = {"PM2.5": 0, "PM10": 0, "NO2": 0, "O3": 0, "CO": 0, "AQI": 0, "noise": 1, "rain": 2}
    return (groups.get(label, 3), label)


def _edge_for(severity: Severity, edges: list[float]) -> float:
    # edges are the MEDIUM / HIGH / CRITICAL lower bounds
    return float(edges[{Severity.MEDIUM: 0, Severity.HIGH: 1, Severity.CRITICAL: 2}[severity]])
