"""HTTP facade over the engine.

One process, one engine. Mutations are serialized behind a store lock (the
catalog is desk-scale; correctness and replay determinism outrank request
parallelism), long-polls wait on per-user conditions without holding it.
State is event-sourced to a data directory: an append-only event log plus a
periodic snapshot, so a restart restores mid-scenario state exactly.
"""

from __future__ import annotations

import json
import os
import threading
import time
from datetime import date as date_type
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .config import Config
from .engine import Engine, _profile_record
from .errors import (
    DomainError,
    ExpiredDialogError,
    NotFoundError,
    ParseError,
    SuppressedError,
)
from .geo import GeoPoint, haversine_km
from .notify import Notification
from .profile import POI, load_catalog, profile_from_dict

VIRTUAL = "virtual"
WALL = "wall"


class BigFiveBody(BaseModel):
    openness: float
    conscientiousness: float
    extraversion: float
    agreeableness: float
    neuroticism: float


class ProfileBody(BaseModel):
    user_id: str
    pet: str
    bigfive: BigFiveBody
    preferred_categories: list[str] = Field(default_factory=list)
    constraints: list[str] = Field(default_factory=list)


class LocationBody(BaseModel):
    lat: float
    lon: float
    t: Optional[float] = None  # required in virtual mode, ignored in wall mode


class DestinationBody(BaseModel):
    lat: float
    lon: float
    district: str


class ExcursionBody(BaseModel):
    destination: DestinationBody
    date: str


class ResponseBody(BaseModel):
    accepted: bool


class ForecastBody(BaseModel):
    document: object


class TickBody(BaseModel):
    to_t: float


class Store:
    """Engine plus locking, long-poll signalling and persistence."""

    def __init__(self, config: Config, catalog: list[POI], data_dir: Optional[str], mode: str):
        self.config = config
        self.mode = mode
        self.engine = Engine(config=config, catalog=catalog)
        self.lock = threading.RLock()
        self.new_notification = threading.Condition(self.lock)
        self.data_dir = Path(data_dir) if data_dir else None
        self.seq = 0
        self._snapshot_every = int(config.get("service.snapshot_every"))
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self._recover()

    # -- time ---------------------------------------------------------------

    def now(self) -> float:
        return time.time() if self.mode == WALL else self.engine.now

    # -- persistence ----------------------------------------------------------

    def _events_path(self) -> Path:
        return self.data_dir / "events.jsonl"

    def _snapshot_path(self) -> Path:
        return self.data_dir / "snapshot.json"

    def _recover(self) -> None:
        start_seq = 0
        if self._snapshot_path().exists():
            with open(self._snapshot_path(), "r", encoding="utf-8") as fh:
                snapshot = json.load(fh)
            self.engine.restore_state(snapshot["state"])
            start_seq = snapshot["seq"]
            self.seq = start_seq
        if self._events_path().exists():
            with open(self._events_path(), "r", encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    record = json.loads(line)
                    if record["seq"] <= start_seq:
                        continue
                    self._apply_event(record)
                    self.seq = record["seq"]

    def _apply_event(self, record: dict) -> None:
        kind, body = record["kind"], record["body"]
        if kind == "user":
            self.engine.register_user(profile_from_dict(body))
        elif kind == "location":
            self.engine.location(body["user"], body["lat"], body["lon"], body["t"])
        elif kind == "sensor":
            self.engine.ingest_sensor(body["entity"], body.get("t"))
        elif kind == "forecast":
            self.engine.ingest_forecast(body["document"], body.get("t"))
        elif kind == "excursion":
            self.engine.add_excursion(
                user_id=body["user"],
                destination=GeoPoint(body["destination"]["lat"], body["destination"]["lon"]),
                district=body["destination"]["district"],
                date=date_type.fromisoformat(body["date"]),
                t=body.get("t"),
                excursion_id=body.get("id"),
            )
        elif kind == "tap":
            self.engine.tap(body["user"], body["notification"], body.get("t"))
        elif kind == "response":
            self.engine.respond(body["user"], body["notification"], body["accepted"], body.get("t"))
        elif kind == "tick":
            self.engine.tick(body["to_t"])
        else:
            raise ParseError(f"unknown persisted event kind {kind!r}")

    def record(self, kind: str, body: dict) -> None:
        """Append one applied event; call only after the mutation succeeded."""
        if self.data_dir is None:
            return
        self.seq += 1
        line = json.dumps({"seq": self.seq, "kind": kind, "body": body}, ensure_ascii=False)
        with open(self._events_path(), "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
        if self.seq % self._snapshot_every == 0:
            self.write_snapshot()

    def write_snapshot(self) -> None:
        if self.data_dir is None:
            return
        payload = {"seq": self.seq, "state": self.engine.to_state()}
        tmp = self._snapshot_path().with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False)
        os.replace(tmp, self._snapshot_path())


def _error(status: int, reason: str, field: Optional[str] = None) -> JSONResponse:
    body = {"error": {"reason": reason}}
    if field is not None:
        body["error"]["field"] = field
    return JSONResponse(status_code=status, content=body)


def create_app(
    config: Optional[Config] = None,
    data_dir: Optional[str] = None,
    mode: str = VIRTUAL,
    catalog: Optional[list[POI]] = None,
) -> FastAPI:
    config = config or Config()
    if mode not in (VIRTUAL, WALL):
        raise DomainError(f"mode must be {VIRTUAL!r} or {WALL!r}, got {mode!r}")
    if catalog is None:
        catalog_path = config.get("service.catalog_path")
        catalog = load_catalog(catalog_path, config) if catalog_path else []

    store = Store(config, catalog, data_dir, mode)
    app = FastAPI(title="petwalk", version="0.1.0")
    app.state.store = store
    # the companion web app is served from another origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0]
        field = ".".join(str(loc) for loc in first.get("loc", ()) if loc != "body")
        return _error(400, first.get("msg", "invalid body"), field or None)

    @app.exception_handler(DomainError)
    async def domain_handler(request: Request, exc: DomainError):
        return _error(400, str(exc))

    @app.exception_handler(ParseError)
    async def parse_handler(request: Request, exc: ParseError):
        return _error(400, str(exc))

    @app.exception_handler(NotFoundError)
    async def notfound_handler(request: Request, exc: NotFoundError):
        return _error(404, str(exc.args[0]) if exc.args else "not found")

    @app.exception_handler(ExpiredDialogError)
    async def expired_handler(request: Request, exc: ExpiredDialogError):
        return _error(410, str(exc))

    @app.exception_handler(SuppressedError)
    async def suppressed_handler(request: Request, exc: SuppressedError):
        return _error(409, str(exc))

    def _records(notifications: list[Notification]) -> list[dict]:
        return [n.to_record() for n in notifications]

    @app.get("/healthz")
    def healthz():
        return PlainTextResponse("ok")

    @app.post("/users", status_code=201)
    def create_user(body: ProfileBody):
        profile = profile_from_dict(body.model_dump())
        with store.lock:
            store.engine.register_user(profile)
            store.record("user", body.model_dump())
        return {"user_id": profile.user_id}

    @app.get("/users/{user_id}")
    def get_user(user_id: str):
        with store.lock:
            return _profile_record(store.engine.get_profile(user_id))

    @app.post("/users/{user_id}/locations", status_code=202)
    def post_location(user_id: str, body: LocationBody):
        with store.lock:
            if store.mode == WALL:
                t = time.time()
            else:
                if body.t is None:
                    raise DomainError("virtual mode requires a fix timestamp 't'")
                t = body.t
            created = store.engine.location(user_id, body.lat, body.lon, t)
            store.record("location", {"user": user_id, "lat": body.lat, "lon": body.lon, "t": t})
            if created:
                store.new_notification.notify_all()
        return {"accepted": True, "notifications": _records(created)}

    @app.post("/users/{user_id}/excursions", status_code=201)
    def post_excursion(user_id: str, body: ExcursionBody):
        with store.lock:
            excursion = store.engine.add_excursion(
                user_id=user_id,
                destination=GeoPoint(body.destination.lat, body.destination.lon),
                district=body.destination.district,
                date=date_type.fromisoformat(body.date),
                t=None if store.mode == VIRTUAL else time.time(),
            )
            store.record(
                "excursion",
                {
                    "user": user_id,
                    "destination": body.destination.model_dump(),
                    "date": body.date,
                    "id": excursion.excursion_id,
                },
            )
        return {"excursion_id": excursion.excursion_id}

    @app.post("/ingest/sensors", status_code=202)
    def ingest_sensors(entities: list[dict]):
        accepted, errors = 0, []
        with store.lock:
            for index, entity in enumerate(entities):
                try:
                    store.engine.ingest_sensor(entity)
                    store.record("sensor", {"entity": entity})
                    accepted += 1
                except ParseError as exc:
                    errors.append({"index": index, "error": str(exc)})
        return {"accepted": accepted, "errors": errors}

    @app.post("/ingest/forecast", status_code=202)
    def ingest_forecast(body: ForecastBody):
        with store.lock:
            count = store.engine.ingest_forecast(body.document)
            store.record("forecast", {"document": body.document})
        return {"accepted": count}

    @app.get("/users/{user_id}/notifications")
    def get_notifications(user_id: str, since_id: int = 0, wait_s: float = 0.0):
        deadline = time.monotonic() + min(wait_s, float(store.config.get("service.long_poll_max_s")))
        with store.lock:
            found = store.engine.notifications(user_id, since_id)
            while not found and time.monotonic() < deadline:
                store.new_notification.wait(timeout=deadline - time.monotonic())
                found = store.engine.notifications(user_id, since_id)
            return {"notifications": _records(found)}

    @app.post("/users/{user_id}/notifications/{notification_id}/tap")
    def tap(user_id: str, notification_id: int):
        with store.lock:
            popup = store.engine.tap(user_id, notification_id, t=None if store.mode == VIRTUAL else time.time())
            store.record("tap", {"user": user_id, "notification": notification_id})
            store.new_notification.notify_all()
            return popup.to_record()

    @app.post("/users/{user_id}/notifications/{notification_id}/response")
    def respond(user_id: str, notification_id: int, body: ResponseBody):
        with store.lock:
            result = store.engine.respond(
                user_id, notification_id, body.accepted, t=None if store.mode == VIRTUAL else time.time()
            )
            store.record(
                "response",
                {"user": user_id, "notification": notification_id, "accepted": body.accepted},
            )
            if result is not None:
                store.new_notification.notify_all()
            return {"notification": None if result is None else result.to_record()}

    @app.get("/pois")
    def pois(near: Optional[str] = None, radius_m: Optional[float] = None):
        with store.lock:
            catalog = store.engine.catalog
            if near is None:
                return {"pois": [_poi_record(p) for p in catalog]}
            try:
                lat_s, lon_s = near.split(",")
                origin = GeoPoint(float(lat_s), float(lon_s))
            except (ValueError, DomainError):
                raise DomainError("query parameter 'near' must be 'lat,lon'")
            limit_km = (radius_m if radius_m is not None else float("inf")) / 1000.0
            rows = []
            for poi in catalog:
                distance_km = haversine_km(origin, poi.location)
                if distance_km <= limit_km:
                    record = _poi_record(poi)
                    record["distance_m"] = round(distance_km * 1000.0, 1)
                    rows.append(record)
            rows.sort(key=lambda r: (r["distance_m"], r["id"]))
            return {"pois": rows}

    @app.get("/admin/clock")
    def clock():
        with store.lock:
            return {"now": store.now(), "mode": store.mode}

    @app.post("/admin/tick")
    def tick(body: TickBody):
        with store.lock:
            if store.mode != VIRTUAL:
                return _error(409, "tick is only available in virtual mode")
            if body.to_t < store.engine.now:
                return _error(409, f"cannot tick backwards: {body.to_t} < {store.engine.now}")
            created = store.engine.tick(body.to_t)
            store.record("tick", {"to_t": body.to_t})
            if created:
                store.new_notification.notify_all()
        return {"now": body.to_t, "notifications": _records(created)}

    @app.post("/admin/snapshot")
    def snapshot():
        with store.lock:
            store.write_snapshot()
        return {"seq": store.seq}

    return app


def _poi_record(poi: POI) -> dict:
    return {
        "id": poi.poi_id,
        "name": poi.name,
        "lat": poi.location.lat,
        "lon": poi.location.lon,
        "categories": sorted(poi.categories),
        "indoor": poi.indoor,
        "tags": sorted(poi.constraint_tags),
    }
