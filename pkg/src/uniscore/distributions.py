"""Group score distributions, Jensen-Shannon distances, and direction signs.

Each criterion's low/high score columns are turned into smoothed probability
mass functions (over the five Likert levels, or over shared Sturges histogram
bins for continuous columns). The Jensen-Shannon distance between the two
PMFs measures how well the criterion discriminates the groups; the sign of
the group-mean difference carries its direction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .model import ScoreMatrix

logger = logging.getLogger(__name__)

LIKERT_LEVELS = (1.0, 2.0, 3.0, 4.0, 5.0)
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class DistributionPair:
    """Smoothed PMFs of one criterion's scores in the low and high groups.

    ``support`` holds the Likert levels, or the bin edges (len(pmf) + 1) for
    continuous columns.
    """

    support: tuple[float, ...]
    p_low: tuple[float, ...]
    q_high: tuple[float, ...]
    epsilon: float
    is_likert: bool

    def __post_init__(self) -> None:
        p = np.asarray(self.p_low)
        q = np.asarray(self.q_high)
        if p.size == 0 or p.size != q.size:
            raise ValueError("p_low and q_high must be non-empty and equal-length")
        expected = p.size if self.is_likert else p.size + 1
        if len(self.support) != expected:
            raise ValueError(
                f"support length {len(self.support)} does not match {expected}"
            )
        for name, vec in (("p_low", p), ("q_high", q)):
            if abs(float(vec.sum()) - 1.0) > 1e-12:
                raise ValueError(f"{name} does not sum to 1")
            if vec.min() <= 0.0:
                raise ValueError(f"{name} has a non-positive probability (smoothing missing?)")

    def to_dict(self) -> dict:
        return {
            "support": list(self.support),
            "p_low": list(self.p_low),
            "q_high": list(self.q_high),
            "epsilon": self.epsilon,
            "is_likert": self.is_likert,
        }


def _smooth(counts: np.ndarray, epsilon: float) -> np.ndarray:
    smoothed = counts.astype(float) + epsilon
    return smoothed / smoothed.sum()


def sturges_bins(n: int) -> int:
    """ceil(log2(n) + 1) histogram bins for n observations."""
    if n < 1:
        raise ValueError("need at least one observation")
    return int(math.ceil(math.log2(n) + 1.0))


def estimate_pmfs(
    low_scores, high_scores, is_likert: bool, epsilon: float = DEFAULT_EPSILON
) -> DistributionPair:
    """Smoothed empirical PMFs for the two groups over a shared support.

    Likert columns count over the levels 1..5. Continuous columns share
    histogram bin edges spanning the pooled min..max, with the bin count given
    by Sturges' formula on the pooled sample count; the last bin is
    right-closed so every observation lands in a bin.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    low = np.asarray(list(low_scores), dtype=float)
    high = np.asarray(list(high_scores), dtype=float)
    if low.size == 0 or high.size == 0:
        raise ValueError("both groups must be non-empty")
    if is_likert:
        support = LIKERT_LEVELS
        low_counts = np.array([np.sum(low == v) for v in support])
        high_counts = np.array([np.sum(high == v) for v in support])
        return DistributionPair(
            support=support,
            p_low=tuple(_smooth(low_counts, epsilon).tolist()),
            q_high=tuple(_smooth(high_counts, epsilon).tolist()),
            epsilon=epsilon,
            is_likert=True,
        )
    pooled = np.concatenate([low, high])
    lo, hi = float(pooled.min()), float(pooled.max())
    if lo == hi:
        # zero spread across both groups: a single bin, identical PMFs
        edges = np.array([lo, hi])
        low_counts = np.array([low.size])
        high_counts = np.array([high.size])
    else:
        edges = np.linspace(lo, hi, sturges_bins(pooled.size) + 1)
        low_counts, _ = np.histogram(low, bins=edges)
        high_counts, _ = np.histogram(high, bins=edges)
    return DistributionPair(
        support=tuple(edges.tolist()),
        p_low=tuple(_smooth(low_counts, epsilon).tolist()),
        q_high=tuple(_smooth(high_counts, epsilon).tolist()),
        epsilon=epsilon,
        is_likert=False,
    )


def _kl_base2(p: np.ndarray, m: np.ndarray) -> float:
    # terms with p(v) = 0 contribute 0; m > 0 is guaranteed by smoothing
    mask = p > 0
    return float(np.sum(p[mask] * np.log2(p[mask] / m[mask])))


def js_distance(dist: DistributionPair) -> float:
    """Jensen-Shannon distance (base 2): sqrt of the divergence against the
    mixture M = (P + Q) / 2. Bounded in [0, 1]; a true metric."""
    p = np.asarray(dist.p_low)
    q = np.asarray(dist.q_high)
    m = 0.5 * (p + q)
    divergence = 0.5 * _kl_base2(p, m) + 0.5 * _kl_base2(q, m)
    return min(1.0, math.sqrt(max(divergence, 0.0)))


def direction_sign(mean_low: float, mean_high: float) -> int:
    """Strict sign of (mean_high - mean_low); exact ties return 0."""
    return int(mean_high > mean_low) - int(mean_high < mean_low)


@dataclass(frozen=True)
class CriterionDiscrimination:
    name: str
    distance: float
    mean_low: float
    mean_high: float
    sign: int
    distributions: DistributionPair

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "distance": self.distance,
            "mean_low": self.mean_low,
            "mean_high": self.mean_high,
            "sign": self.sign,
            "distributions": self.distributions.to_dict(),
        }


@dataclass(frozen=True)
class DiscriminativenessReport:
    """Per-criterion distances, means, and signs, in criteria order."""

    criteria: tuple[CriterionDiscrimination, ...]
    epsilon: float

    def distances(self) -> list[float]:
        return [c.distance for c in self.criteria]

    def signs(self) -> list[int]:
        return [c.sign for c in self.criteria]

    def names(self) -> list[str]:
        return [c.name for c in self.criteria]

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "criteria": [c.to_dict() for c in self.criteria],
        }


def build_report(
    low: ScoreMatrix, high: ScoreMatrix, epsilon: float = DEFAULT_EPSILON
) -> DiscriminativenessReport:
    """Assemble distances, means, and signs for every shared criterion column."""
    if low.criteria != high.criteria or low.is_likert != high.is_likert:
        raise ValueError("low/high matrices disagree on criteria columns")
    entries = []
    for j, name in enumerate(low.criteria):
        low_col = low.values[:, j]
        high_col = high.values[:, j]
        pair = estimate_pmfs(low_col, high_col, low.is_likert[j], epsilon)
        mean_low = float(low_col.mean())
        mean_high = float(high_col.mean())
        sign = direction_sign(mean_low, mean_high)
        if sign == 0:
            logger.warning(
                "criterion %r has equal group means; its signed weight will be zero",
                name,
            )
        entries.append(
            CriterionDiscrimination(
                name=name,
                distance=js_distance(pair),
                mean_low=mean_low,
                mean_high=mean_high,
                sign=sign,
                distributions=pair,
            )
        )
    return DiscriminativenessReport(criteria=tuple(entries), epsilon=epsilon)
