"""Sensor and forecast ingestion, plus the deterministic simulation sources.

Entity documents follow the NGSI-LD flavor of the smart-city broker: GeoJSON
locations are (lon, lat) while everything else in this codebase speaks
(lat, lon). The conversion happens here and only here.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from datetime import date as date_type
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Iterator, Optional, Union

from .config import Config, load_packaged_json
from .envmodel import AirSample, ForecastDay
from .errors import DomainError, ParseError, TraceOrderError, UnsupportedTypeError
from .geo import GeoPoint

_DEFAULT_CONFIG = Config()

TRACE_KINDS = ("location", "sensor", "forecast", "response", "excursion")


class SensorKind(Enum):
    AIR = "Air"
    NOISE = "Noise"
    PRECIPITATION = "Precipitation"


ENTITY_TYPES = {
    "AirQualityObserved": SensorKind.AIR,
    "NoiseLevelObserved": SensorKind.NOISE,
    "WeatherObserved": SensorKind.PRECIPITATION,
}
_TYPE_FOR_KIND = {kind: name for name, kind in ENTITY_TYPES.items()}

_AIR_FIELDS = ("pm25", "pm10", "no2", "o3", "co", "aqi")


@dataclass(frozen=True)
class SensorReading:
    sensor_id: str
    kind: SensorKind
    location: GeoPoint
    observed_at: float
    payload: Union[AirSample, float]

    def __post_init__(self):
        if not math.isfinite(self.observed_at):
            raise DomainError(f"observed_at must be finite, got {self.observed_at!r}")
        if self.kind is SensorKind.AIR and not isinstance(self.payload, AirSample):
            raise DomainError("air reading payload must be an AirSample")
        if self.kind is not SensorKind.AIR and not isinstance(self.payload, (int, float)):
            raise DomainError(f"{self.kind.value} reading payload must be a number")


@dataclass(frozen=True)
class SensorSnapshot:
    """Latest reading per sensor; replaced atomically, never mutated."""

    readings: dict[str, SensorReading] = field(default_factory=dict)
    snapshot_at: float = 0.0

    def of_kind(self, kind: SensorKind) -> list[SensorReading]:
        return [r for r in self.readings.values() if r.kind is kind]


@dataclass(frozen=True)
class TraceEvent:
    t: float
    kind: str
    body: dict


def _unwrap(value):
    # NGSI-LD properties may be bare values or {"type": "Property", "value": x}
    if isinstance(value, dict) and "value" in value:
        return value["value"]
    return value


def _parse_observed_at(raw) -> float:
    raw = _unwrap(raw)
    if isinstance(raw, (int, float)):
        return float(raw)
    if isinstance(raw, str):
        try:
            stamp = datetime.fromisoformat(raw.replace("Z", "+00:00"))
        except ValueError:
            raise ParseError(f"dateObserved is not ISO 8601 or numeric: {raw!r}") from None
        if stamp.tzinfo is None:
            stamp = stamp.replace(tzinfo=timezone.utc)
        return stamp.timestamp()
    raise ParseError(f"dateObserved has unsupported type {type(raw).__name__}")


def _parse_location(raw) -> GeoPoint:
    raw = _unwrap(raw)
    if not isinstance(raw, dict) or raw.get("type") != "Point":
        raise ParseError("location must be a GeoJSON Point")
    coords = raw.get("coordinates")
    if not isinstance(coords, (list, tuple)) or len(coords) != 2:
        raise ParseError("location.coordinates must be [lon, lat]")
    lon, lat = coords  # GeoJSON order
    return GeoPoint(float(lat), float(lon))


def _measured(document: dict, name: str) -> Optional[float]:
    if name not in document:
        return None
    value = _unwrap(document[name])
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ParseError(f"property {name!r} is not numeric: {value!r}") from None


def parse_sensor_entity(document: dict) -> SensorReading:
    """One broker entity object -> SensorReading."""
    if not isinstance(document, dict):
        raise ParseError("entity must be an object")
    for required in ("id", "type", "location", "dateObserved"):
        if required not in document:
            raise ParseError(f"entity missing required field {required!r}")
    entity_type = document["type"]
    kind = ENTITY_TYPES.get(entity_type)
    if kind is None:
        raise UnsupportedTypeError(f"unsupported entity type {entity_type!r}")
    location = _parse_location(document["location"])
    observed_at = _parse_observed_at(document["dateObserved"])

    payload: Union[AirSample, float]
    if kind is SensorKind.AIR:
        fields = {name: _measured(document, name) for name in _AIR_FIELDS}
        if all(v is None for v in fields.values()):
            raise ParseError("air entity carries no measured pollutant or index")
        payload = AirSample(**fields)
    elif kind is SensorKind.NOISE:
        level = _measured(document, "LAeq")
        if level is None:
            raise ParseError("noise entity missing property 'LAeq'")
        payload = level
    else:
        rate = _measured(document, "precipitation")
        if rate is None:
            raise ParseError("weather entity missing property 'precipitation'")
        payload = rate

    return SensorReading(
        sensor_id=str(document["id"]),
        kind=kind,
        location=location,
        observed_at=observed_at,
        payload=payload,
    )


def serialize_sensor_entity(reading: SensorReading) -> dict:
    """Canonical entity form; parse(serialize(r)) round-trips exactly."""
    document = {
        "id": reading.sensor_id,
        "type": _TYPE_FOR_KIND[reading.kind],
        "dateObserved": reading.observed_at,
        "location": {
            "type": "Point",
            "coordinates": [reading.location.lon, reading.location.lat],
        },
    }
    if reading.kind is SensorKind.AIR:
        for name in _AIR_FIELDS:
            value = getattr(reading.payload, name)
            if value is not None:
                document[name] = value
    elif reading.kind is SensorKind.NOISE:
        document["LAeq"] = reading.payload
    else:
        document["precipitation"] = reading.payload
    return document


def _weather_type_table(config: Config) -> dict[str, str]:
    path = config.get("feed.weather_type_table")
    if path is None:
        return load_packaged_json("data/weather_types.json")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _parse_forecast_day(record: dict, index: int, table: dict[str, str]) -> ForecastDay:
    try:
        day = date_type.fromisoformat(str(record["forecastDate"]))
        precip = record.get("precipIntensity", record.get("precipitation"))
        if precip is None:
            raise ParseError(f"forecast record {index}: missing precipIntensity")
        if "weatherType" in record:
            token = str(record["weatherType"])
        else:
            token = table.get(str(record.get("idWeatherType")), "unknown")
        return ForecastDay(
            date=day,
            precipitation=float(precip),
            wind_speed=float(record["windSpeed"]),
            temp_min=float(record["tMin"]),
            temp_max=float(record["tMax"]),
            weather_type=token,
        )
    except ParseError:
        raise
    except KeyError as exc:
        raise ParseError(f"forecast record {index}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError, DomainError) as exc:
        raise ParseError(f"forecast record {index}: {exc}") from None


def parse_forecast(document, config: Config = _DEFAULT_CONFIG) -> list[tuple[str, ForecastDay]]:
    """IPMA-style per-district daily records -> [(district, ForecastDay)].

    Accepts either one district block {"district": ..., "days": [...]} or a
    list of blocks. Numeric weather-type ids resolve through the shipped
    id -> token table; unknown ids become the token "unknown".
    """
    blocks = document if isinstance(document, list) else [document]
    table = _weather_type_table(config)
    out = []
    for block in blocks:
        if not isinstance(block, dict) or "district" not in block or "days" not in block:
            raise ParseError("forecast block must carry 'district' and 'days'")
        district = str(block["district"])
        for index, record in enumerate(block["days"]):
            out.append((district, _parse_forecast_day(record, index, table)))
    return out


def apply(snapshot: SensorSnapshot, reading: SensorReading) -> SensorSnapshot:
    """Last-writer-wins by observation time; equal timestamps keep the newcomer."""
    existing = snapshot.readings.get(reading.sensor_id)
    if existing is not None and reading.observed_at < existing.observed_at:
        return snapshot
    readings = dict(snapshot.readings)
    readings[reading.sensor_id] = reading
    return SensorSnapshot(
        readings=readings,
        snapshot_at=max(snapshot.snapshot_at, reading.observed_at),
    )


def gen_sensor_grid(
    seed: int,
    bbox: tuple[float, float, float, float],
    n_air: int,
    n_noise: int,
    n_precip: int,
) -> list[dict]:
    """Pseudo-random sensor placement; same seed, same grid.

    bbox is (lat_min, lon_min, lat_max, lon_max).
    """
    lat_min, lon_min, lat_max, lon_max = bbox
    if not (lat_min < lat_max and lon_min < lon_max):
        raise DomainError(f"degenerate bbox {bbox!r}")
    if min(n_air, n_noise, n_precip) < 0:
        raise DomainError("sensor counts must be >= 0")
    rng = random.Random(seed)
    descriptors = []
    for kind, prefix, count in (
        (SensorKind.AIR, "air", n_air),
        (SensorKind.NOISE, "noise", n_noise),
        (SensorKind.PRECIPITATION, "precip", n_precip),
    ):
        for i in range(count):
            descriptors.append(
                {
                    "sensor_id": f"{prefix}-{i:03d}",
                    "kind": kind.value,
                    "lat": round(rng.uniform(lat_min, lat_max), 6),
                    "lon": round(rng.uniform(lon_min, lon_max), 6),
                }
            )
    return descriptors


def parse_trace_line(line: str, line_no: int) -> TraceEvent:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"trace line {line_no}: invalid JSON ({exc.msg})") from None
    if not isinstance(record, dict):
        raise ParseError(f"trace line {line_no}: record must be an object")
    for required in ("t", "kind", "body"):
        if required not in record:
            raise ParseError(f"trace line {line_no}: missing field {required!r}")
    kind = record["kind"]
    if kind not in TRACE_KINDS:
        raise ParseError(f"trace line {line_no}: unknown kind {kind!r}")
    t = record["t"]
    if not isinstance(t, (int, float)) or not math.isfinite(float(t)):
        raise ParseError(f"trace line {line_no}: t must be a finite number")
    body = record["body"]
    if not isinstance(body, dict):
        raise ParseError(f"trace line {line_no}: body must be an object")
    return TraceEvent(t=float(t), kind=kind, body=body)


def parse_trace(lines: Iterable[str]) -> Iterator[TraceEvent]:
    """Line-delimited JSON records in non-decreasing time order."""
    last_t: Optional[float] = None
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        event = parse_trace_line(line, line_no)
        if last_t is not None and event.t < last_t:
            raise TraceOrderError(
                f"trace line {line_no}: timestamp {event.t} regressed below {last_t}"
            )
        last_t = event.t
        yield event
