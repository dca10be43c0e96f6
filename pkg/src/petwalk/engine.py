"""The deterministic core: one engine instance drives trackers, sensor state
and the notifier from timestamped events, for both trace replay and the
HTTP service. Time only ever moves forward, and only through events.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date as date_type
from datetime import datetime, timezone
from typing import Iterable, Optional

from .config import Config
from .context import ActivityState, ContextEventKind, LocationFix, WalkTracker
from .errors import (
    DomainError,
    ExpiredDialogError,
    NotFoundError,
    ParseError,
    SuppressedError,
)
from .feed import (
    SensorSnapshot,
    TraceEvent,
    apply,
    parse_forecast,
    parse_sensor_entity,
    serialize_sensor_entity,
)
from .geo import GeoPoint
from .notify import Excursion, Notification, Notifier, Templates
from .profile import POI, UserProfile, profile_from_dict

logger = logging.getLogger(__name__)


@dataclass
class _UserRuntime:
    profile: UserProfile
    tracker: WalkTracker
    excursions: list[Excursion] = field(default_factory=list)
    excursion_seq: int = 0


class Engine:
    """Event-driven orchestration over immutable catalog and config."""

    def __init__(
        self,
        config: Optional[Config] = None,
        catalog: Optional[list[POI]] = None,
        templates: Optional[Templates] = None,
    ):
        self.config = config or Config()
        self.catalog = list(catalog or [])
        self.notifier = Notifier(self.config, templates)
        self.snapshot = SensorSnapshot()
        self.forecasts: dict[tuple[str, date_type], object] = {}
        self.users: dict[str, _UserRuntime] = {}
        self.now = 0.0

    # -- state access -------------------------------------------------------

    def has_user(self, user_id: str) -> bool:
        return user_id in self.users

    def get_profile(self, user_id: str) -> UserProfile:
        return self._user(user_id).profile

    def _user(self, user_id: str) -> _UserRuntime:
        runtime = self.users.get(user_id)
        if runtime is None:
            raise NotFoundError(f"unknown user {user_id!r}")
        return runtime

    def notifications(self, user_id: str, since_id: int = 0) -> list[Notification]:
        self._user(user_id)
        return self.notifier.notifications(user_id, since_id)

    def _advance_clock(self, t: float) -> None:
        if t < self.now:
            raise DomainError(f"time cannot move backwards: {t} < {self.now}")
        self.now = t

    def today(self) -> date_type:
        return datetime.fromtimestamp(self.now, tz=timezone.utc).date()

    # -- mutations ------------------------------------------------------------

    def register_user(self, profile: UserProfile) -> None:
        if profile.user_id in self.users:
            raise DomainError(f"user {profile.user_id!r} already registered")
        self.users[profile.user_id] = _UserRuntime(profile=profile, tracker=WalkTracker(self.config))

    def location(self, user_id: str, lat: float, lon: float, t: float) -> list[Notification]:
        """Ingest one fix; runs the tracker and whatever it makes due."""
        runtime = self._user(user_id)
        self._advance_clock(t)
        fix = LocationFix(user_id, GeoPoint(lat, lon), t)
        new: list[Notification] = []
        for event in runtime.tracker.update(fix):
            if event.kind is ContextEventKind.WALK_THRESHOLD_REACHED:
                result = self.notifier.on_walk_threshold(
                    runtime.profile, fix.point, self.catalog, runtime.tracker.state, t
                )
                if result is not None:
                    new.append(result)
            elif event.kind is ContextEventKind.ENV_POLL_DUE:
                result = self.notifier.on_env_poll(
                    runtime.profile, fix.point, self.snapshot, self.catalog, runtime.tracker.state, t
                )
                if result is not None:
                    new.append(result)
            elif event.kind is ContextEventKind.FORECAST_POLL_DUE:
                new.extend(
                    self.notifier.on_forecast_poll(runtime.profile, runtime.excursions, self.forecasts, t)
                )
        return new

    def ingest_sensor(self, entity: dict, t: Optional[float] = None) -> None:
        if t is not None:
            self._advance_clock(t)
        reading = parse_sensor_entity(entity)
        self.snapshot = apply(self.snapshot, reading)

    def ingest_forecast(self, document, t: Optional[float] = None) -> int:
        if t is not None:
            self._advance_clock(t)
        entries = parse_forecast(document, self.config)
        for district, day in entries:
            self.forecasts[(district, day.date)] = day
        return len(entries)

    def add_excursion(
        self,
        user_id: str,
        destination: GeoPoint,
        district: str,
        date: date_type,
        t: Optional[float] = None,
        excursion_id: Optional[str] = None,
    ) -> Excursion:
        runtime = self._user(user_id)
        if t is not None:
            self._advance_clock(t)
        if date < self.today():
            raise DomainError(f"excursion date {date} is before {self.today()}")
        if excursion_id is None:
            runtime.excursion_seq += 1
            excursion_id = f"{user_id}-e{runtime.excursion_seq}"
        excursion = Excursion(excursion_id, user_id, destination, district, date)
        runtime.excursions.append(excursion)
        return excursion

    def tap(self, user_id: str, notification_id: int, t: Optional[float] = None) -> Notification:
        runtime = self._user(user_id)
        if t is not None:
            self._advance_clock(t)
        self._gate_dialog_step(runtime)
        return self.notifier.on_notification_tap(runtime.profile, notification_id, self.now)

    def respond(
        self, user_id: str, notification_id: int, accepted: bool, t: Optional[float] = None
    ) -> Optional[Notification]:
        runtime = self._user(user_id)
        if t is not None:
            self._advance_clock(t)
        self._gate_dialog_step(runtime)
        point = self._last_point(runtime)
        return self.notifier.on_prompt_response(
            runtime.profile, notification_id, accepted, point, self.catalog, self.now
        )

    def _gate_dialog_step(self, runtime: _UserRuntime) -> None:
        # dialog popups are notifications too; nothing may appear at vehicle speed
        if runtime.tracker.state is ActivityState.VEHICLE:
            raise SuppressedError(
                f"user {runtime.profile.user_id!r} is moving at vehicle speed; dialog suppressed"
            )

    def tick(self, to_t: float) -> list[Notification]:
        """Advance the virtual clock without a fix; forecast polls may fire."""
        self._advance_clock(to_t)
        new: list[Notification] = []
        for user_id in sorted(self.users):
            runtime = self.users[user_id]
            if runtime.tracker.poll_forecast_if_due(to_t):
                new.extend(
                    self.notifier.on_forecast_poll(runtime.profile, runtime.excursions, self.forecasts, to_t)
                )
        return new

    def _last_point(self, runtime: _UserRuntime) -> GeoPoint:
        if runtime.tracker.last_fix is None:
            raise DomainError(f"user {runtime.profile.user_id!r} has no location yet")
        return runtime.tracker.last_fix.point

    # -- trace replay ---------------------------------------------------------

    def process(self, event: TraceEvent) -> list[Notification]:
        """Dispatch one trace event; returns notifications it produced."""
        body = event.body
        if event.kind == "location":
            return self.location(str(body["user"]), float(body["lat"]), float(body["lon"]), event.t)
        if event.kind == "sensor":
            self.ingest_sensor(body["entity"], event.t)
            return []
        if event.kind == "forecast":
            self.ingest_forecast(body["document"], event.t)
            return []
        if event.kind == "excursion":
            destination = body["destination"]
            self.add_excursion(
                user_id=str(body["user"]),
                destination=GeoPoint(float(destination["lat"]), float(destination["lon"])),
                district=str(destination["district"]),
                date=date_type.fromisoformat(str(body["date"])),
                t=event.t,
                excursion_id=body.get("id"),
            )
            return []
        if event.kind == "response":
            return self._process_response(body, event.t)
        raise ParseError(f"unknown trace event kind {event.kind!r}")

    def _process_response(self, body: dict, t: float) -> list[Notification]:
        user_id = str(body["user"])
        runtime = self._user(user_id)
        action = body.get("action")
        notification_id = self._resolve_notification(user_id, body.get("notification", "latest"), action)
        try:
            if action == "tap":
                before = len(self.notifier.notifications(user_id))
                popup = self.tap(user_id, notification_id, t)
                return [popup] if len(self.notifier.notifications(user_id)) > before else []
            if action in ("yes", "no"):
                result = self.respond(user_id, notification_id, action == "yes", t)
                return [result] if result is not None else []
        except SuppressedError:
            # deterministic no-op: the dialog stays pending while driving
            return []
        raise ParseError(f"response action must be tap/yes/no, got {action!r}")

    def _resolve_notification(self, user_id: str, reference, action: str) -> int:
        if reference != "latest":
            return int(reference)
        log = self.notifier.notifications(user_id)
        if action == "tap":
            pushes = [n for n in log if n.channel.value == "Push"]
            if not pushes:
                raise NotFoundError(f"user {user_id!r} has no push notification to tap")
            return pushes[-1].id
        popups = [n for n in log if n.channel.value == "PetPopup"]
        if not popups:
            raise NotFoundError(f"user {user_id!r} has no popup to respond to")
        return popups[-1].id

    def replay(self, events: Iterable[TraceEvent], profiles: Iterable[UserProfile]) -> list[Notification]:
        """Run a whole trace; returns every notification in creation order."""
        for profile in profiles:
            self.register_user(profile)
        out: list[Notification] = []
        for index, event in enumerate(events, start=1):
            try:
                out.extend(self.process(event))
            except (DomainError, ExpiredDialogError, NotFoundError, ParseError, KeyError) as exc:
                raise ParseError(f"trace event {index} (t={event.t}, kind={event.kind}): {exc}") from exc
        return out

    # -- persistence ------------------------------------------------------------

    def to_state(self) -> dict:
        return {
            "now": self.now,
            "users": {
                user_id: {
                    "profile": _profile_record(rt.profile),
                    "tracker": rt.tracker.to_state(),
                    "excursions": [
                        {
                            "id": e.excursion_id,
                            "lat": e.destination.lat,
                            "lon": e.destination.lon,
                            "district": e.district,
                            "date": e.date.isoformat(),
                        }
                        for e in rt.excursions
                    ],
                    "excursion_seq": rt.excursion_seq,
                }
                for user_id, rt in self.users.items()
            },
            "sensors": {
                "snapshot_at": self.snapshot.snapshot_at,
                "readings": [serialize_sensor_entity(r) for r in self.snapshot.readings.values()],
            },
            "forecasts": [
                {
                    "district": district,
                    "forecastDate": day.date.isoformat(),
                    "precipIntensity": day.precipitation,
                    "windSpeed": day.wind_speed,
                    "tMin": day.temp_min,
                    "tMax": day.temp_max,
                    "weatherType": day.weather_type,
                }
                for (district, _), day in self.forecasts.items()
            ],
            "notifier": self.notifier.to_state(),
        }

    def restore_state(self, state: dict) -> None:
        self.now = state["now"]
        self.users.clear()
        for user_id, raw in state["users"].items():
            profile = profile_from_dict(raw["profile"])
            runtime = _UserRuntime(
                profile=profile,
                tracker=WalkTracker.from_state(raw["tracker"], self.config),
                excursion_seq=raw["excursion_seq"],
            )
            runtime.excursions = [
                Excursion(
                    e["id"],
                    user_id,
                    GeoPoint(e["lat"], e["lon"]),
                    e["district"],
                    date_type.fromisoformat(e["date"]),
                )
                for e in raw["excursions"]
            ]
            self.users[user_id] = runtime
        snapshot = SensorSnapshot()
        for entity in state["sensors"]["readings"]:
            snapshot = apply(snapshot, parse_sensor_entity(entity))
        self.snapshot = SensorSnapshot(readings=snapshot.readings, snapshot_at=state["sensors"]["snapshot_at"])
        self.forecasts.clear()
        for record in state["forecasts"]:
            block = {"district": record["district"], "days": [record]}
            for district, day in parse_forecast(block, self.config):
                self.forecasts[(district, day.date)] = day
        self.notifier.restore_state(state["notifier"])


def _profile_record(profile: UserProfile) -> dict:
    return {
        "user_id": profile.user_id,
        "pet": profile.pet,
        "bigfive": {
            "openness": profile.bigfive.openness,
            "conscientiousness": profile.bigfive.conscientiousness,
            "extraversion": profile.bigfive.extraversion,
            "agreeableness": profile.bigfive.agreeableness,
            "neuroticism": profile.bigfive.neuroticism,
        },
        "preferred_categories": sorted(profile.preferred_categories),
        "constraints": sorted(profile.constraints),
    }
