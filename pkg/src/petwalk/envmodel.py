"""Environmental classification: air, noise, rainfall and forecast severity.

Everything in here is a pure function over immutable inputs; thresholds come
from :class:`petwalk.config.Config` and never from inline literals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date as date_type
from enum import Enum, IntEnum
from typing import Optional, Union

from .config import Config
from .errors import DomainError

_DEFAULT_CONFIG = Config()


def _require_finite(name: str, value: float, minimum: float | None = 0.0) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    if minimum is not None and value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value!r}")
    return value


class PollutantKind(Enum):
    """The five monitored air pollutants and their native units."""

    PM25 = ("pm25", "µg/m³", "pm25_ugm3", "PM2.5")
    PM10 = ("pm10", "µg/m³", "pm10_ugm3", "PM10")
    NO2 = ("no2", "ppb", "no2_ppb", "NO2")
    O3 = ("o3", "ppb", "o3_ppb", "O3")
    CO = ("co", "ppm", "co_ppm", "CO")

    def __init__(self, key: str, unit: str, config_key: str, label: str):
        self.key = key
        self.unit = unit
        self.config_key = config_key
        self.label = label

    def threshold(self, config: Config) -> float:
        return float(config.get(f"thresholds.{self.config_key}"))


# Marker for the AQI dimension in assess_air results (enum order, AQI last).
AQI_DIMENSION = "aqi"


class AirVerdict(Enum):
    HEALTHY = "Healthy"
    UNHEALTHY = "Unhealthy"


class NoiseVerdict(Enum):
    SAFE = "Safe"
    PREJUDICIAL = "Prejudicial"


class Severity(IntEnum):
    """Weather severity levels, totally ordered so max() combines dimensions."""

    LOW = 0
    MEDIUM = 1
    HIGH = 2
    CRITICAL = 3


class AqiCategory(Enum):
    """The six color-coded index categories; `hi` is the inclusive upper bound."""

    GOOD = (0, 50, "green", "Good")
    MODERATE = (51, 100, "yellow", "Moderate")
    UNHEALTHY_SENSITIVE = (101, 150, "orange", "Unhealthy for Sensitive Groups")
    UNHEALTHY = (151, 200, "red", "Unhealthy")
    VERY_UNHEALTHY = (201, 300, "purple", "Very Unhealthy")
    HAZARDOUS = (301, None, "maroon", "Hazardous")

    def __init__(self, lo: int, hi: Optional[int], color: str, label: str):
        self.lo = lo
        self.hi = hi
        self.color = color
        self.label = label


class RainCategory(Enum):
    NO_RAIN = ("No rain", True)
    LIGHT = ("Light rain", True)
    MODERATE = ("Moderate rain", False)
    HEAVY = ("Heavy rain", False)
    VIOLENT = ("Violent rain", False)

    def __init__(self, label: str, safe: bool):
        self.label = label
        self.safe = safe


@dataclass(frozen=True)
class AirSample:
    """One air-quality observation; at least one field must be present."""

    pm25: Optional[float] = None
    pm10: Optional[float] = None
    no2: Optional[float] = None
    o3: Optional[float] = None
    co: Optional[float] = None
    aqi: Optional[float] = None

    def __post_init__(self):
        present = False
        for name in ("pm25", "pm10", "no2", "o3", "co", "aqi"):
            value = getattr(self, name)
            if value is None:
                continue
            present = True
            _require_finite(name, value)
        if not present:
            raise DomainError("air sample must carry at least one measurement")

    def value_for(self, kind: PollutantKind) -> Optional[float]:
        return getattr(self, kind.key)


@dataclass(frozen=True)
class ForecastDay:
    """One day's forecast for a destination."""

    date: date_type
    precipitation: float  # mm/h
    wind_speed: float  # km/h
    temp_min: float  # °C
    temp_max: float  # °C
    weather_type: str

    def __post_init__(self):
        _require_finite("precipitation", self.precipitation)
        _require_finite("wind_speed", self.wind_speed)
        _require_finite("temp_min", self.temp_min, minimum=None)
        _require_finite("temp_max", self.temp_max, minimum=None)
        if self.temp_min > self.temp_max:
            raise DomainError(f"temp_min {self.temp_min} exceeds temp_max {self.temp_max}")


@dataclass(frozen=True)
class AirAssessment:
    verdict: AirVerdict
    # Violated dimensions in enum order, the AQI marker last.
    offending: list[Union[PollutantKind, str]] = field(default_factory=list)


@dataclass(frozen=True)
class ForecastSeverity:
    severity: Severity
    contributors: dict[str, Severity]


def classify_pollutant(kind: PollutantKind, value: float, config: Config = _DEFAULT_CONFIG) -> AirVerdict:
    """Unhealthy iff the concentration strictly exceeds the kind's threshold."""
    value = _require_finite(f"{kind.key} concentration", value)
    if value > kind.threshold(config):
        return AirVerdict.UNHEALTHY
    return AirVerdict.HEALTHY


def aqi_category(aqi: float, config: Config = _DEFAULT_CONFIG) -> AqiCategory:
    """Map an index value to its category; non-integer values go to the band
    whose inclusive upper bound they do not exceed."""
    aqi = _require_finite("aqi", aqi)
    for category in AqiCategory:
        if category.hi is not None and aqi <= category.hi:
            return category
    return AqiCategory.HAZARDOUS


def aqi_binary(aqi: float, config: Config = _DEFAULT_CONFIG) -> AirVerdict:
    """The simplified two-way verdict: healthy up to the configured maximum."""
    aqi = _require_finite("aqi", aqi)
    if aqi <= float(config.get("thresholds.aqi_healthy_max")):
        return AirVerdict.HEALTHY
    return AirVerdict.UNHEALTHY


def assess_air(sample: AirSample, config: Config = _DEFAULT_CONFIG) -> AirAssessment:
    """Combine per-pollutant checks and the binary index verdict.

    Unhealthy iff any present pollutant exceeds its threshold or the index
    itself is unhealthy; `offending` lists every violated dimension.
    """
    offending: list[Union[PollutantKind, str]] = []
    for kind in PollutantKind:
        value = sample.value_for(kind)
        if value is not None and classify_pollutant(kind, value, config) is AirVerdict.UNHEALTHY:
            offending.append(kind)
    if sample.aqi is not None and aqi_binary(sample.aqi, config) is AirVerdict.UNHEALTHY:
        offending.append(AQI_DIMENSION)
    verdict = AirVerdict.UNHEALTHY if offending else AirVerdict.HEALTHY
    return AirAssessment(verdict=verdict, offending=offending)


def classify_rainfall(rate: float, config: Config = _DEFAULT_CONFIG) -> RainCategory:
    """Band a rainfall rate in mm/h; exactly 0 is no rain, >= heavy_max is violent."""
    rate = _require_finite("rainfall rate", rate)
    if rate == 0.0:
        return RainCategory.NO_RAIN
    if rate < float(config.get("thresholds.rain_light_max")):
        return RainCategory.LIGHT
    if rate < float(config.get("thresholds.rain_moderate_max")):
        return RainCategory.MODERATE
    if rate < float(config.get("thresholds.rain_heavy_max")):
        return RainCategory.HEAVY
    return RainCategory.VIOLENT


def assess_noise(level: float, config: Config = _DEFAULT_CONFIG) -> NoiseVerdict:
    """Prejudicial iff the level strictly exceeds the urban comfort threshold."""
    level = _require_finite("noise level", level)
    if level > float(config.get("thresholds.noise_dba")):
        return NoiseVerdict.PREJUDICIAL
    return NoiseVerdict.SAFE


def _band_from_edges(value: float, edges: list[float]) -> Severity:
    medium, high, critical = (float(e) for e in edges)
    if value >= critical:
        return Severity.CRITICAL
    if value >= high:
        return Severity.HIGH
    if value >= medium:
        return Severity.MEDIUM
    return Severity.LOW


def _temperature_severity(temp: float, config: Config) -> Severity:
    # Nested comfort bands: the innermost band containing the value wins.
    if float(config.get("thresholds.temp_low_min")) <= temp <= float(config.get("thresholds.temp_low_max")):
        return Severity.LOW
    if float(config.get("thresholds.temp_medium_min")) <= temp <= float(config.get("thresholds.temp_medium_max")):
        return Severity.MEDIUM
    if float(config.get("thresholds.temp_high_min")) <= temp <= float(config.get("thresholds.temp_high_max")):
        return Severity.HIGH
    return Severity.CRITICAL


def weather_type_severity(token: str, config: Config = _DEFAULT_CONFIG) -> Severity:
    """Look up a weather-type token; unknown tokens are LOW (fail-quiet)."""
    table = config.get("thresholds.weather_type_severity")
    name = table.get(token.strip().lower())
    if name is None:
        return Severity.LOW
    return Severity[name]


def forecast_severity(day: ForecastDay, config: Config = _DEFAULT_CONFIG) -> ForecastSeverity:
    """Per-dimension severities and their max.

    Temperature is assessed on both ends of the day's range and takes the
    worse of the two.
    """
    contributors = {
        "precipitation": _band_from_edges(day.precipitation, config.get("thresholds.severity_precip_edges")),
        "wind": _band_from_edges(day.wind_speed, config.get("thresholds.severity_wind_edges")),
        "temperature": max(
            _temperature_severity(day.temp_min, config),
            _temperature_severity(day.temp_max, config),
        ),
        "weather_type": weather_type_severity(day.weather_type, config),
    }
    return ForecastSeverity(severity=max(contributors.values()), contributors=contributors)
