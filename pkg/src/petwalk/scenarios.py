"""Canned demonstration traces for the three notification scenarios.

The builders emit plain trace records (dicts) that pair with the catalog and
profile shipped under fixtures/. Geometry is anchored at a walkable spot in
Porto and fixes move strictly north so distances stay analytic. The seed
only jitters measured values inside their unsafe bands; the scenario
structure itself is fixed.
"""

from __future__ import annotations

import random

# Meters per degree of latitude on the 6371 km sphere.
M_PER_DEG_LAT = 111194.92664455873

START_LAT = 41.15
START_LON = -8.61
USER = "u1"
DISTRICT = "Porto"


def _fix(t: float, lat: float, lon: float, user: str = USER) -> dict:
    return {"t": t, "kind": "location", "body": {"user": user, "lat": round(lat, 7), "lon": round(lon, 7)}}


def _walk_fixes(t0: float, duration_s: float, speed_mps: float, interval_s: float = 5.0) -> list[dict]:
    records = []
    steps = int(duration_s // interval_s)
    for i in range(steps + 1):
        t = t0 + i * interval_s
        lat = START_LAT + (speed_mps * i * interval_s) / M_PER_DEG_LAT
        records.append(_fix(t, lat, START_LON))
    return records


def _air_entity(pm25: float, t: float, sensor_id: str = "air-porto-01") -> dict:
    return {
        "t": t,
        "kind": "sensor",
        "body": {
            "entity": {
                "id": sensor_id,
                "type": "AirQualityObserved",
                "dateObserved": t,
                "location": {"type": "Point", "coordinates": [START_LON + 0.0006, START_LAT + 0.0005]},
                "pm25": pm25,
            }
        },
    }


def build_s1_trace(seed: int = 0) -> list[dict]:
    """Five minutes of steady walking toward the fixture POIs."""
    del seed  # structure is fixed; nothing worth jittering here
    return _walk_fixes(t0=0.0, duration_s=300.0, speed_mps=1.2)


def _unhealthy_pm25(seed: int) -> float:
    # seed 0 pins the canonical worked example; others jitter above the limit
    if seed == 0:
        return 40.0
    return round(random.Random(seed).uniform(38.0, 48.0), 1)


def build_s2_trace(seed: int = 0) -> list[dict]:
    """Unhealthy PM2.5 near the route, a short walk, then tap and accept."""
    records = [_air_entity(_unhealthy_pm25(seed), t=0.0)]
    records.extend(_walk_fixes(t0=0.0, duration_s=60.0, speed_mps=1.2))
    records.append(
        {"t": 70.0, "kind": "response", "body": {"user": USER, "notification": "latest", "action": "tap"}}
    )
    records.append(
        {"t": 80.0, "kind": "response", "body": {"user": USER, "notification": "latest", "action": "yes"}}
    )
    return records


def build_s3_trace(seed: int = 0) -> list[dict]:
    """Excursion three days out with a heavy-rain forecast at the destination."""
    # HIGH band is 10-25 mm/h; seed 0 pins the canonical 15
    precip = 15.0 if seed == 0 else round(random.Random(seed).uniform(12.0, 22.0), 1)
    forecast = {
        "t": 0.0,
        "kind": "forecast",
        "body": {
            "document": {
                "district": DISTRICT,
                "days": [
                    {
                        "forecastDate": "1970-01-04",
                        "precipIntensity": precip,
                        "windSpeed": 20.0,
                        "tMin": 12.0,
                        "tMax": 18.0,
                        "weatherType": "Heavy rain",
                    }
                ],
            }
        },
    }
    excursion = {
        "t": 0.0,
        "kind": "excursion",
        "body": {
            "user": USER,
            "destination": {"lat": START_LAT, "lon": START_LON, "district": DISTRICT},
            "date": "1970-01-04",
        },
    }
    return [forecast, excursion, _fix(10.0, START_LAT, START_LON)]


def build_vehicle_trace(seed: int = 0) -> list[dict]:
    """High-speed pass through an unhealthy air zone; nothing may fire."""
    records = [_air_entity(_unhealthy_pm25(seed), t=0.0)]
    for i in range(13):  # one minute at 15 m/s
        t = i * 5.0
        lat = START_LAT + (15.0 * t) / M_PER_DEG_LAT
        records.append(_fix(t, lat, START_LON))
    return records


BUILDERS = {
    "s1": build_s1_trace,
    "s2": build_s2_trace,
    "s3": build_s3_trace,
    "vehicle": build_vehicle_trace,
}
