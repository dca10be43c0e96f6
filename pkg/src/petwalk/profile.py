"""User profiles and the rule-based stand-in for the recommendation services.

The scoring scheme here is a deliberately simple surrogate: personality
traits weight attraction categories through a configurable mapping, hard
constraints filter, and proximity breaks ties. It exists to make the
notification flows testable end to end, not to reproduce the real
recommender.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .config import Config
from .errors import DomainError, ParseError
from .geo import GeoPoint, within_radius

_DEFAULT_CONFIG = Config()

PETS = ("panda", "lynx")
TRAITS = ("openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism")


@dataclass(frozen=True)
class BigFive:
    """Big Five scores, each on the questionnaire's 1-5 scale."""

    openness: float
    conscientiousness: float
    extraversion: float
    agreeableness: float
    neuroticism: float

    def __post_init__(self):
        for trait in TRAITS:
            value = getattr(self, trait)
            if not (math.isfinite(value) and 1.0 <= value <= 5.0):
                raise DomainError(f"{trait} must be in [1, 5], got {value!r}")

    def score(self, trait: str) -> float:
        if trait not in TRAITS:
            raise DomainError(f"unknown trait {trait!r}")
        return getattr(self, trait)


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    pet: str
    bigfive: BigFive
    preferred_categories: frozenset[str] = frozenset()
    constraints: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.pet not in PETS:
            raise DomainError(f"pet must be one of {PETS}, got {self.pet!r}")


@dataclass(frozen=True)
class POI:
    poi_id: str
    name: str
    location: GeoPoint
    categories: frozenset[str] = frozenset()
    indoor: bool = False
    constraint_tags: frozenset[str] = frozenset()


def category_weights(bf: BigFive, config: Config = _DEFAULT_CONFIG) -> dict[str, float]:
    """Weight every category in the configured vocabulary from the traits.

    A mapped category gets its governing trait normalized to [0, 1]
    ((score - 1) / 4, inverted for direction -1); unmapped categories sit at
    the neutral default.
    """
    trait_map = config.get("profile.trait_map")
    default = float(config.get("profile.default_weight"))
    weights = {}
    for category in config.get("profile.categories"):
        link = trait_map.get(category)
        if link is None:
            weights[category] = default
            continue
        normalized = (bf.score(link["trait"]) - 1.0) / 4.0
        weights[category] = 1.0 - normalized if link.get("direction", 1) < 0 else normalized
    return weights


def admissible(profile: UserProfile, poi: POI, config: Config = _DEFAULT_CONFIG) -> bool:
    """False iff a profile constraint conflicts with the POI's tags."""
    conflicts = config.get("profile.conflicts")
    for constraint in profile.constraints:
        rule = conflicts.get(constraint)
        if rule is None:
            continue
        if any(tag in poi.constraint_tags for tag in rule.get("forbids", ())):
            return False
        if any(tag not in poi.constraint_tags for tag in rule.get("requires", ())):
            return False
    return True


def recommend_nearby(
    profile: UserProfile,
    point: GeoPoint,
    catalog: Sequence[POI],
    radius_m: float,
    indoor_only: bool = False,
    exclude: Optional[Iterable[str]] = None,
    config: Config = _DEFAULT_CONFIG,
) -> list[tuple[POI, float]]:
    """Admissible POIs in range, ranked by (score desc, distance asc, id asc).

    Score is the best category weight over the POI's categories plus a bonus
    when a category matches the user's stated preferences, capped at 1. When
    every candidate ties at the neutral default the ordering degenerates to
    closest-first, which is how "the closest indoor POI" comes out
    deterministically.
    """
    excluded = set(exclude or ())
    by_id = {poi.poi_id: poi for poi in catalog}
    if len(by_id) != len(catalog):
        raise DomainError("catalog contains duplicate poi ids")
    in_range = within_radius(point, ((p.poi_id, p.location) for p in catalog), radius_m)
    weights = category_weights(profile.bigfive, config)
    default = float(config.get("profile.default_weight"))
    bonus = float(config.get("profile.preference_bonus"))

    scored = []
    for poi_id, distance_km in in_range:
        poi = by_id[poi_id]
        if poi_id in excluded:
            continue
        if indoor_only and not poi.indoor:
            continue
        if not admissible(profile, poi, config):
            continue
        score = max((weights.get(c, default) for c in poi.categories), default=default)
        if poi.categories & profile.preferred_categories:
            score = min(1.0, score + bonus)
        scored.append((poi, score, distance_km))

    seed = config.get("profile.random_tiebreak_seed")
    if seed is not None:
        # Fidelity mode: order score ties randomly (but reproducibly) instead
        # of closest-first.
        jitter = {poi.poi_id: r for (poi, _, _), r in zip(scored, _shuffled_units(len(scored), seed))}
        scored.sort(key=lambda row: (-row[1], jitter[row[0].poi_id]))
    else:
        scored.sort(key=lambda row: (-row[1], row[2], row[0].poi_id))
    return [(poi, score) for poi, score, _ in scored]


def _shuffled_units(n: int, seed: int) -> list[int]:
    order = list(range(n))
    random.Random(seed).shuffle(order)
    return order


def _as_tagset(raw, what: str) -> frozenset[str]:
    if not isinstance(raw, (list, tuple)):
        raise ParseError(f"{what} must be a list of strings")
    return frozenset(str(item) for item in raw)


def poi_from_dict(record: dict, config: Config = _DEFAULT_CONFIG) -> POI:
    """One catalog record -> POI; unknown categories are rejected at load time."""
    try:
        poi = POI(
            poi_id=str(record["id"]),
            name=str(record["name"]),
            location=GeoPoint(float(record["lat"]), float(record["lon"])),
            categories=_as_tagset(record.get("categories", []), "categories"),
            indoor=bool(record.get("indoor", False)),
            constraint_tags=_as_tagset(record.get("tags", []), "tags"),
        )
    except KeyError as exc:
        raise ParseError(f"poi record missing field {exc.args[0]!r}") from None
    vocabulary = set(config.get("profile.categories"))
    unknown = poi.categories - vocabulary
    if unknown:
        raise ParseError(f"poi {poi.poi_id}: unknown categories {sorted(unknown)}")
    return poi


def profile_from_dict(record: dict) -> UserProfile:
    try:
        scores = record["bigfive"]
        bigfive = BigFive(**{trait: float(scores[trait]) for trait in TRAITS})
        return UserProfile(
            user_id=str(record["user_id"]),
            pet=str(record["pet"]),
            bigfive=bigfive,
            preferred_categories=_as_tagset(record.get("preferred_categories", []), "preferred_categories"),
            constraints=_as_tagset(record.get("constraints", []), "constraints"),
        )
    except KeyError as exc:
        raise ParseError(f"profile record missing field {exc.args[0]!r}") from None


def load_catalog(path: str, config: Config = _DEFAULT_CONFIG) -> list[POI]:
    """Read a JSON array of POI records."""
    with open(path, "r", encoding="utf-8") as fh:
        records = json.load(fh)
    if not isinstance(records, list):
        raise ParseError(f"{path}: catalog must be a JSON array")
    return [poi_from_dict(record, config) for record in records]


def load_profiles(path: str) -> list[UserProfile]:
    """Read a JSON profile object, or an array of them."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    records = data if isinstance(data, list) else [data]
    return [profile_from_dict(record) for record in records]
