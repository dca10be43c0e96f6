"""Artifact-wide configuration: every tunable threshold, timer and radius.

All classification and orchestration code reads values from here, never
from inline literals, so alternative deployments (e.g. a stricter PM2.5
limit) are a config edit away. The defaults below are the canonical ones.
"""

from __future__ import annotations

import copy
import json
from importlib import resources
from typing import Any, Mapping

import yaml

from .errors import DomainError

# Severity names used in config files; ordering lives in envmodel.Severity.
_SEVERITY_NAMES = ("LOW", "MEDIUM", "HIGH", "CRITICAL")

DEFAULTS: dict[str, Any] = {
    "thresholds": {
        # Unhealthy above these per-pollutant concentrations.
        "pm25_ugm3": 35.0,
        "pm10_ugm3": 150.0,
        "no2_ppb": 100.0,
        "o3_ppb": 120.0,
        "co_ppm": 9.0,
        # Prejudicial noise above this A-weighted equivalent level.
        "noise_dba": 55.0,
        # Binary air verdict: healthy up to and including this index.
        "aqi_healthy_max": 50.0,
        # Rainfall band edges (mm/h): 0 no rain, then light / moderate / heavy,
        # violent at and above heavy_max.
        "rain_light_max": 2.5,
        "rain_moderate_max": 10.0,
        "rain_heavy_max": 50.0,
        # Forecast severity band edges. Precipitation mm/h and wind km/h use
        # [medium, high, critical) lower edges; below medium is LOW.
        "severity_precip_edges": [2.5, 10.0, 25.0],
        "severity_wind_edges": [30.0, 50.0, 80.0],
        # Temperature °C: nested comfort bands, innermost wins.
        "temp_low_min": 5.0,
        "temp_low_max": 30.0,
        "temp_medium_min": 0.0,
        "temp_medium_max": 35.0,
        "temp_high_min": -10.0,
        "temp_high_max": 40.0,
        # Weather-type token -> severity name; lookups are case-insensitive,
        # unknown tokens fall back to LOW.
        "weather_type_severity": {
            "light rain": "LOW",
            "cloudy": "LOW",
            "light snow": "LOW",
            "moderate rain": "MEDIUM",
            "snow": "MEDIUM",
            "light fog": "MEDIUM",
            "heavy rain": "HIGH",
            "heavy snow": "HIGH",
            "dense fog": "HIGH",
            "storms": "CRITICAL",
            "extreme winds": "CRITICAL",
            "extreme temperatures": "CRITICAL",
        },
    },
    "geo": {
        "earth_radius_km": 6371.0,
    },
    "context": {
        "walk_trigger_s": 300.0,
        "stationary_reset_s": 60.0,
        "env_poll_s": 600.0,
        "forecast_poll_s": 86400.0,
        "stationary_max_mps": 0.4,
        "walking_max_mps": 2.5,
        # Number of most recent inter-fix speeds averaged before classifying.
        "smoothing_window": 1,
    },
    "profile": {
        "categories": [
            "cultural",
            "social_event",
            "nature",
            "gastronomy",
            "shopping",
            "sport",
            "relaxation",
        ],
        # category -> {trait, direction}; direction -1 inverts the weight.
        "trait_map": {
            "cultural": {"trait": "openness", "direction": 1},
            "social_event": {"trait": "extraversion", "direction": 1},
            "relaxation": {"trait": "agreeableness", "direction": 1},
            "sport": {"trait": "neuroticism", "direction": -1},
        },
        "default_weight": 0.5,
        "preference_bonus": 0.25,
        # constraint tag -> POI tags it forbids / requires.
        "conflicts": {
            "fear-of-heights": {"forbids": ["high-altitude"]},
            "fear-of-crowds": {"forbids": ["crowded"]},
            "wheelchair-access-needed": {"requires": ["wheelchair-accessible"]},
        },
        # When set, equally-scored candidates are ordered by a seeded shuffle
        # instead of (distance, id) -- the literal "random POI" reading.
        "random_tiebreak_seed": None,
    },
    "notify": {
        "radius_poi_m": 500.0,
        "radius_shelter_rain_m": 500.0,
        "radius_shelter_airnoise_m": 1000.0,
        "s2_cooldown_s": 1800.0,
        "dialog_ttl_s": 900.0,
        "s3_min_severity": "MEDIUM",
        "forecast_window_days": 5,
    },
    "templates": {
        # null -> packaged English templates.
        "path": None,
        "locale": "en",
    },
    "feed": {
        # null -> packaged weather-type id table.
        "weather_type_table": None,
    },
    "service": {
        "snapshot_every": 500,
        "long_poll_max_s": 30.0,
    },
}


def _merge(base: dict, override: Mapping) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


class Config:
    """Nested key-value configuration with dotted-path access."""

    def __init__(self, overrides: Mapping | None = None):
        self._data = _merge(copy.deepcopy(DEFAULTS), overrides or {})
        self._validate()

    def _validate(self) -> None:
        sev = self.get("notify.s3_min_severity")
        if sev not in _SEVERITY_NAMES:
            raise DomainError(f"notify.s3_min_severity must be one of {_SEVERITY_NAMES}, got {sev!r}")
        for name, value in self["thresholds"].items():
            if name in ("weather_type_severity",):
                continue
            values = value if isinstance(value, list) else [value]
            if any(not isinstance(v, (int, float)) for v in values):
                raise DomainError(f"thresholds.{name} must be numeric, got {value!r}")
        for name in self["thresholds"]["weather_type_severity"].values():
            if name not in _SEVERITY_NAMES:
                raise DomainError(f"weather_type_severity values must be severities, got {name!r}")

    def __getitem__(self, section: str) -> dict:
        return self._data[section]

    def get(self, path: str, default: Any = None) -> Any:
        """Look up a dotted path like ``thresholds.pm25_ugm3``."""
        node: Any = self._data
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def as_dict(self) -> dict:
        return copy.deepcopy(self._data)


def load_config(path: str | None = None) -> Config:
    """Load a YAML config file layered over the defaults; no file -> defaults."""
    if path is None:
        return Config()
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise DomainError(f"config file {path} must contain a mapping at top level")
    return Config(data)


def load_packaged_json(name: str) -> dict:
    """Read a JSON data file shipped inside the package (templates, tables)."""
    text = resources.files("petwalk").joinpath(name).read_text(encoding="utf-8")
    return json.loads(text)
