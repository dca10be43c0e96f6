"""Great-circle distance and small-scale spatial queries.

A linear scan is deliberate: catalogs and sensor grids stay in the low
thousands, and determinism (stable tie-breaks) matters more than speed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .errors import DomainError

EARTH_RADIUS_KM = 6371.0


@dataclass(frozen=True, order=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise DomainError(f"coordinates must be finite, got ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise DomainError(f"latitude out of range [-90, 90]: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise DomainError(f"longitude out of range [-180, 180]: {self.lon}")


def haversine_km(a: GeoPoint, b: GeoPoint, radius_km: float = EARTH_RADIUS_KM) -> float:
    """Great-circle distance between two points on a sphere of mean radius."""
    lat1, lon1 = math.radians(a.lat), math.radians(a.lon)
    lat2, lon2 = math.radians(b.lat), math.radians(b.lon)
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * radius_km * math.asin(min(1.0, math.sqrt(h)))


def nearest(
    point: GeoPoint,
    items: Iterable[tuple[str, GeoPoint]],
    predicate: Optional[Callable[[str], bool]] = None,
) -> Optional[tuple[str, float]]:
    """Closest item by great-circle distance; ties go to the smallest id.

    Returns ``None`` when nothing passes the predicate.
    """
    best: Optional[tuple[float, str]] = None
    for item_id, location in items:
        if predicate is not None and not predicate(item_id):
            continue
        candidate = (haversine_km(point, location), item_id)
        if best is None or candidate < best:
            best = candidate
    if best is None:
        return None
    return best[1], best[0]


def within_radius(
    point: GeoPoint,
    items: Iterable[tuple[str, GeoPoint]],
    radius_m: float,
    predicate: Optional[Callable[[str], bool]] = None,
) -> list[tuple[str, float]]:
    """All items within radius_m, as (id, distance_km) ascending by (distance, id)."""
    if not (math.isfinite(radius_m) and radius_m > 0):
        raise DomainError(f"radius_m must be > 0, got {radius_m!r}")
    radius_km = radius_m / 1000.0
    hits = []
    for item_id, location in items:
        if predicate is not None and not predicate(item_id):
            continue
        distance = haversine_km(point, location)
        if distance <= radius_km:
            hits.append((item_id, distance))
    hits.sort(key=lambda pair: (pair[1], pair[0]))
    return hits
