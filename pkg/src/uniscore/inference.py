"""Apply a fitted weight model to new texts; baseline aggregators for comparison.

Inference is a weighted linear combination: each criterion is scored exactly
once (judge prompt or persisted quantitative scaling), multiplied by its
signed weight, and summed. The per-criterion contributions are returned
alongside the total so every score can be explained term by term.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .model import CriterionSpec, ScoreMatrix, TextSample, WeightModel
from .scoring import ScorerBackend, apply_scaling, judge_text, measure_text


@dataclass(frozen=True)
class ScoredText:
    """One scored text: criterion scores, signed contributions, and their sum."""

    sample_id: str
    criterion_scores: tuple[float, ...]
    contributions: tuple[float, ...]
    uniscore: float

    def __post_init__(self) -> None:
        if len(self.criterion_scores) != len(self.contributions):
            raise ValueError("criterion_scores and contributions length mismatch")
        if abs(self.uniscore - sum(self.contributions)) > 1e-12:
            raise ValueError("uniscore does not equal the sum of contributions")


def combine_scores(
    signed_weights, criterion_scores
) -> tuple[float, tuple[float, ...]]:
    """Weighted linear combination plus the per-criterion contribution breakdown."""
    weights = list(signed_weights)
    scores = list(criterion_scores)
    if len(weights) != len(scores):
        raise ValueError(
            f"weights length {len(weights)} does not match {len(scores)} scores"
        )
    contributions = tuple(w * s for w, s in zip(weights, scores))
    return sum(contributions), contributions


def score_text(
    model: WeightModel,
    backend: ScorerBackend,
    criteria: list[CriterionSpec],
    text: str,
    sample_id: str = "*",
) -> ScoredText:
    """Score one new text with the same prompts/measurers used at fit time.

    Quantitative criteria reuse the scaling statistics persisted in the
    model's fit metadata, never statistics of the single new text. Exactly one
    scoring operation runs per criterion.
    """
    names = [c.name for c in criteria]
    if names != list(model.criteria):
        raise ValueError(
            f"criteria {names} do not match the fitted model's {list(model.criteria)}"
        )
    scaling = model.fit_metadata.get("scaling_stats", {})
    scores: list[float] = []
    for crit in criteria:
        if crit.is_llm_judged:
            value, _ = judge_text(backend, crit, text, ref=sample_id)
        else:
            stats = scaling.get(crit.name)
            if stats is None:
                raise ValueError(
                    f"model lacks scaling statistics for quantitative criterion "
                    f"{crit.name!r}"
                )
            assert crit.measure is not None
            value = apply_scaling([measure_text(crit.measure, text)], stats)[0]
        scores.append(value)
    total, contributions = combine_scores(model.signed_weights, scores)
    return ScoredText(
        sample_id=sample_id,
        criterion_scores=tuple(scores),
        contributions=contributions,
        uniscore=total,
    )


def score_samples(
    model: WeightModel,
    backend: ScorerBackend,
    criteria: list[CriterionSpec],
    samples: list[TextSample],
) -> list[ScoredText]:
    return [score_text(model, backend, criteria, s.text, sample_id=s.id) for s in samples]


@dataclass(frozen=True)
class SingleCriterion:
    """Use one criterion column verbatim as the final score."""

    index: int


@dataclass(frozen=True)
class EqualMean:
    """Unweighted mean of all criterion scores."""


@dataclass(frozen=True)
class RandomWeights:
    """Fixed random linear weights, drawn once from U[-1, 1]^m at construction."""

    weights: tuple[float, ...]

    @classmethod
    def draw(cls, m: int, seed: int) -> "RandomWeights":
        rng = np.random.default_rng(seed)
        return cls(weights=tuple(rng.uniform(-1.0, 1.0, size=m).tolist()))


@dataclass(frozen=True)
class LeastSquares:
    """Ordinary least squares fit of the target signal on criterion scores."""

    coefficients: tuple[float, ...]
    intercept: float


BaselineAggregator = Union[SingleCriterion, EqualMean, RandomWeights, LeastSquares]


def _collinear_columns(design: np.ndarray, names: list[str]) -> list[str]:
    """Name score columns that lie in the span of the remaining design columns."""
    out = []
    for j in range(1, design.shape[1]):
        others = np.delete(design, j, axis=1)
        col = design[:, j]
        coef, *_ = np.linalg.lstsq(others, col, rcond=None)
        residual = col - others @ coef
        if np.linalg.norm(residual) <= 1e-8 * max(1.0, np.linalg.norm(col)):
            out.append(names[j - 1])
    return out or list(names)


def fit_least_squares(scores: ScoreMatrix, targets) -> LeastSquares:
    """OLS with intercept via the normal equations."""
    y = np.asarray(list(targets), dtype=float)
    x = scores.values
    n, m = x.shape
    if y.size != n:
        raise ValueError(f"targets length {y.size} does not match {n} rows")
    if n < m + 1:
        raise ValueError(f"need at least {m + 1} rows to fit {m} columns, got {n}")
    design = np.column_stack([np.ones(n), x])
    if np.linalg.matrix_rank(design) < m + 1:
        collinear = _collinear_columns(design, list(scores.criteria))
        raise ValueError(f"design matrix is rank-deficient; collinear columns: {collinear}")
    beta = np.linalg.solve(design.T @ design, design.T @ y)
    return LeastSquares(coefficients=tuple(beta[1:].tolist()), intercept=float(beta[0]))


def apply_baseline(agg: BaselineAggregator, scores: ScoreMatrix) -> list[float]:
    """Run a baseline aggregator over every row of a score matrix."""
    x = scores.values
    m = len(scores.criteria)
    if isinstance(agg, SingleCriterion):
        if not 0 <= agg.index < m:
            raise ValueError(f"criterion index {agg.index} out of range for {m} columns")
        return x[:, agg.index].tolist()
    if isinstance(agg, EqualMean):
        return x.mean(axis=1).tolist()
    if isinstance(agg, RandomWeights):
        if len(agg.weights) != m:
            raise ValueError(f"aggregator arity {len(agg.weights)} does not match {m} columns")
        return (x @ np.asarray(agg.weights)).tolist()
    if isinstance(agg, LeastSquares):
        if len(agg.coefficients) != m:
            raise ValueError(
                f"aggregator arity {len(agg.coefficients)} does not match {m} columns"
            )
        return (x @ np.asarray(agg.coefficients) + agg.intercept).tolist()
    raise TypeError(f"unknown aggregator {type(agg).__name__}")
