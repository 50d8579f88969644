"""Split a dataset into balanced low/high comparison groups from the observed signal.

Discrete signals define the groups directly by label; continuous signals are
cut at symmetric percentile thresholds with an exact per-group count target.
All randomness (balancing, tie breaking, target sampling) flows from the
single seed in the config, so identical inputs always produce identical
groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ContinuousSignal, DiscreteSignal, TextSample


@dataclass(frozen=True)
class PartitionConfig:
    mode: str  # "discrete" | "continuous"
    percentile_p: float | None = None
    target_size: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in ("discrete", "continuous"):
            raise ValueError(f"mode must be 'discrete' or 'continuous', got {self.mode!r}")
        if self.mode == "continuous":
            if self.percentile_p is None or not (0.0 < self.percentile_p < 0.5):
                raise ValueError(
                    f"percentile_p must lie strictly between 0 and 0.5, got {self.percentile_p!r}"
                )
        if self.target_size is not None and self.target_size < 2:
            raise ValueError(f"target_size must be >= 2, got {self.target_size!r}")


@dataclass(frozen=True)
class GroupPair:
    """Low/high comparison groups; thresholds are set in continuous mode only."""

    low: list[TextSample]
    high: list[TextSample]
    thresholds: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        low_ids = {s.id for s in self.low}
        overlap = low_ids.intersection(s.id for s in self.high)
        if overlap:
            raise ValueError(f"groups overlap on sample ids: {sorted(overlap)[:5]}")


def _rank_count(x: float) -> int:
    # nearest-rank count; x within 1e-9 of an integer counts as that integer
    return math.ceil(x - 1e-9)


def _draw(rng: np.random.Generator, items: list[TextSample], n: int) -> list[TextSample]:
    """Seeded draw of n items without replacement, preserving input order."""
    if n >= len(items):
        return list(items)
    picked = rng.choice(len(items), size=n, replace=False)
    return [items[i] for i in sorted(picked)]


def partition_discrete(samples: list[TextSample], config: PartitionConfig) -> GroupPair:
    """Group by binary label, balance by down-sampling, optionally cap at target_size.

    Balancing happens first (the larger group is down-sampled to the smaller
    size), then both groups are capped at target_size if that is smaller.
    The result groups are always the same size.
    """
    for s in samples:
        if not isinstance(s.signal, DiscreteSignal):
            raise ValueError(f"sample {s.id!r} has a non-discrete signal")
    low = [s for s in samples if s.signal.label == 0]
    high = [s for s in samples if s.signal.label == 1]
    for label, group in ((0, low), (1, high)):
        if not group:
            raise ValueError(f"label {label} is absent from the dataset")
        if len(group) < 2:
            raise ValueError(f"label {label} has fewer than 2 samples")
    rng = np.random.default_rng(config.seed)
    k = min(len(low), len(high))
    if len(low) > k:
        low = _draw(rng, low, k)
    elif len(high) > k:
        high = _draw(rng, high, k)
    if config.target_size is not None and config.target_size < k:
        low = _draw(rng, low, config.target_size)
        high = _draw(rng, high, config.target_size)
    return GroupPair(low=low, high=high, thresholds=None)


def partition_continuous(samples: list[TextSample], config: PartitionConfig) -> GroupPair:
    """Cut at the p-th and (1-p)-th nearest-rank percentiles.

    Each group gets exactly ceil(p*N) samples: values strictly beyond the
    threshold are included first, then a seeded draw from threshold-valued
    samples fills the remainder.
    """
    for s in samples:
        if not isinstance(s.signal, ContinuousSignal):
            raise ValueError(f"sample {s.id!r} has a non-continuous signal")
    p = config.percentile_p
    if p is None:
        raise ValueError("continuous partitioning requires percentile_p")
    n = len(samples)
    if p * n < 1.0 - 1e-9:
        raise ValueError(
            f"percentile too strict for dataset size (p*N = {p * n:.3g} < 1)"
        )
    values = np.array([s.signal.value for s in samples])
    if values.min() == values.max():
        raise ValueError("degenerate signal: all values are equal")
    count = _rank_count(p * n)
    order = np.sort(values)
    tau_low = float(order[count - 1])
    tau_high = float(order[_rank_count((1.0 - p) * n) - 1])

    rng = np.random.default_rng(config.seed)
    taken: set[int] = set()

    def pick(strict_mask: np.ndarray, boundary_mask: np.ndarray) -> list[int]:
        strict = [i for i in range(n) if strict_mask[i]]
        boundary = [i for i in range(n) if boundary_mask[i] and i not in taken]
        need = count - len(strict)
        if need < 0:
            raise ValueError("internal error: strict side exceeds the percentile count")
        if need > len(boundary):
            raise ValueError(
                "cannot form disjoint groups: too few boundary samples "
                f"(p={p}, N={n})"
            )
        chosen = strict + (
            [boundary[i] for i in sorted(rng.choice(len(boundary), size=need, replace=False))]
            if need
            else []
        )
        taken.update(chosen)
        return sorted(chosen)

    low_idx = pick(values < tau_low, values == tau_low)
    high_idx = pick(values > tau_high, values == tau_high)
    return GroupPair(
        low=[samples[i] for i in low_idx],
        high=[samples[i] for i in high_idx],
        thresholds=(tau_low, tau_high),
    )
