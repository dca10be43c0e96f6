"""Evaluation arithmetic: exact Wilcoxon signed-rank test, rank-biserial
effect size, effect-size labels, and questionnaire sub-scale aggregation.

The signed-rank p-value is exact: it counts, over all 2^n equiprobable sign
assignments of the observed rank magnitudes, how many produce a min rank sum
at or below the observed one. Zero differences are dropped and tied
magnitudes share average ranks (the classic conventions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from statistics import fmean
from typing import Sequence

from .errors import DegenerateSampleError, DomainError

# Exact enumeration is fine for pilot-study sizes; refuse beyond this.
MAX_EXACT_N = 25


class EffectLabel(Enum):
    NEGLIGIBLE = "Negligible"
    SMALL = "Small"
    MEDIUM = "Medium"
    LARGE = "Large"


@dataclass(frozen=True)
class WilcoxonResult:
    w: float  # min(r_plus, r_minus)
    r_plus: float
    r_minus: float
    n_eff: int  # pairs with a non-zero difference
    p_two_tailed: float


@dataclass(frozen=True)
class UeqsAggregate:
    pq: float
    hq: float
    overall: float


@dataclass(frozen=True)
class Q13Aggregate:
    utility: float
    acceptance: float
    vp: float
    overall: float


def _validate_pairs(pairs: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    if len(pairs) < 1:
        raise DomainError("need at least one pair")
    for i, (a, b) in enumerate(pairs):
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"pair {i} is not finite: ({a!r}, {b!r})")
    return [(float(a), float(b)) for a, b in pairs]


def _average_ranks(magnitudes: Sequence[float]) -> list[float]:
    """Ranks 1..n of the values, ties sharing the average of their positions."""
    order = sorted(range(len(magnitudes)), key=lambda i: magnitudes[i])
    ranks = [0.0] * len(magnitudes)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and magnitudes[order[j + 1]] == magnitudes[order[i]]:
            j += 1
        # positions i..j (0-based) hold a tie group; ranks are 1-based
        average = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = average
        i = j + 1
    return ranks


def _min_sum_tail_count(ranks: Sequence[float], w: float) -> int:
    """Number of the 2^n sign assignments with min(R+, R-) <= w.

    Tied ranks are half-integers, so doubling makes every rank an exact
    integer and the positive rank sum distribution can be counted with a
    subset-sum convolution. min(R+, R-) <= w  iff  R+ <= w or R+ >= S - w.
    """
    scaled = [int(round(2.0 * r)) for r in ranks]
    total = sum(scaled)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in scaled:
        for s in range(total, r - 1, -1):
            counts[s] += counts[s - r]
    w2 = int(math.floor(2.0 * w + 1e-9))
    low = sum(counts[: min(w2, total) + 1])
    high = sum(counts[max(total - w2, 0):])
    overlap = 0
    if w2 >= total - w2:
        overlap = sum(counts[max(total - w2, 0): min(w2, total) + 1])
    return low + high - overlap


def wilcoxon_exact(pairs: Sequence[tuple[float, float]]) -> WilcoxonResult:
    """Two-tailed exact Wilcoxon signed-rank test on (baseline, treatment) pairs."""
    pairs = _validate_pairs(pairs)
    diffs = [b - a for a, b in pairs]
    nonzero = [d for d in diffs if d != 0.0]
    n_eff = len(nonzero)
    if n_eff == 0:
        raise DegenerateSampleError("all paired differences are zero")
    if n_eff > MAX_EXACT_N:
        raise DomainError(f"exact enumeration supports up to {MAX_EXACT_N} non-zero pairs, got {n_eff}")
    ranks = _average_ranks([abs(d) for d in nonzero])
    r_plus = float(sum(r for r, d in zip(ranks, nonzero) if d > 0))
    r_minus = float(sum(r for r, d in zip(ranks, nonzero) if d < 0))
    w = min(r_plus, r_minus)
    count = _min_sum_tail_count(ranks, w)
    return WilcoxonResult(
        w=w,
        r_plus=r_plus,
        r_minus=r_minus,
        n_eff=n_eff,
        p_two_tailed=count / float(2 ** n_eff),
    )


def rank_biserial(pairs: Sequence[tuple[float, float]]) -> float:
    """Matched-pairs rank-biserial correlation (R+ - R-) / (R+ + R-)."""
    result = wilcoxon_exact(pairs)
    return (result.r_plus - result.r_minus) / (result.r_plus + result.r_minus)


def effect_label(r: float) -> EffectLabel:
    """Band |r| into the conventional qualitative labels."""
    if not math.isfinite(r) or abs(r) > 1.0:
        raise DomainError(f"effect size must lie in [-1, 1], got {r!r}")
    magnitude = abs(r)
    if magnitude < 0.10:
        return EffectLabel.NEGLIGIBLE
    if magnitude < 0.30:
        return EffectLabel.SMALL
    if magnitude < 0.50:
        return EffectLabel.MEDIUM
    return EffectLabel.LARGE


def _validate_items(items: Sequence[float], arity: int, what: str) -> list[float]:
    if len(items) != arity:
        raise DomainError(f"{what} expects exactly {arity} item means, got {len(items)}")
    if any(not math.isfinite(v) for v in items):
        raise DomainError(f"{what} item means must be finite")
    return [float(v) for v in items]


def ueqs_aggregate(item_means: Sequence[float]) -> UeqsAggregate:
    """Pragmatic (items 1-4), hedonic (items 5-8) and overall means."""
    items = _validate_items(item_means, 8, "ueqs_aggregate")
    return UeqsAggregate(
        pq=fmean(items[0:4]),
        hq=fmean(items[4:8]),
        overall=fmean(items),
    )


def q13_aggregate(item_means: Sequence[float]) -> Q13Aggregate:
    """Utility / acceptance / pet-mediation sub-scales of the 11-item block.

    Items arrive in questionnaire order 13.1 .. 13.11; utility covers the odd
    items 1,3,5,7,9, acceptance items 2,6,10, mediation items 4,8,11.
    """
    items = _validate_items(item_means, 11, "q13_aggregate")
    pick = lambda *idx: fmean(items[i - 1] for i in idx)
    return Q13Aggregate(
        utility=pick(1, 3, 5, 7, 9),
        acceptance=pick(2, 6, 10),
        vp=pick(4, 8, 11),
        overall=fmean(items),
    )
