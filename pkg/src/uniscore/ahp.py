"""Pairwise-comparison weighting: difference mapping, principal eigenvector, consistency.

Discriminativeness distances d_k in [0, 1] are mapped pairwise to comparison
ratios: a_ij = 1 + 8*(d_i - d_j) when the difference is non-negative, and the
reciprocal of that otherwise. The slope 8 stretches a difference of 1 to the
ratio-scale ceiling of 9, so every entry stays inside [1/9, 9] and
reciprocity holds exactly by construction. Weights are the sum-normalized
principal right eigenvector, found by power iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SAATY_MIN = 1.0 / 9.0
SAATY_MAX = 9.0
DIFFERENCE_SLOPE = 8.0

# Standard random-index constants for reciprocal matrices of order 1..10
# (externally sourced; the classic table used for consistency checks).
RANDOM_INDEX = {
    1: 0.0,
    2: 0.0,
    3: 0.58,
    4: 0.90,
    5: 1.12,
    6: 1.24,
    7: 1.32,
    8: 1.41,
    9: 1.45,
    10: 1.49,
}

CR_THRESHOLD = 0.1

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True, eq=False)
class ComparisonMatrix:
    """Positive reciprocal pairwise-comparison matrix with entries in [1/9, 9]."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"comparison matrix must be square, got shape {a.shape}")
        if a.shape[0] < 2:
            raise ValueError("comparison matrix order must be >= 2")
        if not np.all(np.diag(a) == 1.0):
            raise ValueError("diagonal entries must be exactly 1")
        if np.max(np.abs(a * a.T - 1.0)) > 1e-12:
            raise ValueError("matrix is not reciprocal (a_ij * a_ji != 1)")
        if a.min() < SAATY_MIN - 1e-12 or a.max() > SAATY_MAX + 1e-12:
            raise ValueError("entries outside the ratio-scale range [1/9, 9]")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def order(self) -> int:
        return self.entries.shape[0]


def build_comparison_matrix(distances) -> ComparisonMatrix:
    """Map distance differences onto pairwise ratios.

    Each unordered pair is computed once on its non-negative side and the
    opposite entry is set to the exact reciprocal, so a_ij * a_ji == 1 by
    construction.
    """
    d = np.asarray(list(distances), dtype=float)
    if d.size < 2:
        raise ValueError("need at least 2 distances")
    if not np.all(np.isfinite(d)) or d.min() < 0.0 or d.max() > 1.0:
        raise ValueError("distances must lie in [0, 1]")
    m = d.size
    a = np.ones((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            delta = d[i] - d[j]
            ratio = 1.0 + DIFFERENCE_SLOPE * abs(delta)
            if delta >= 0:
                a[i, j] = ratio
                a[j, i] = 1.0 / ratio
            else:
                a[i, j] = 1.0 / ratio
                a[j, i] = ratio
    return ComparisonMatrix(a)


@dataclass(frozen=True, eq=False)
class EigenResult:
    """Converged principal eigenpair: weights sum to 1 and are all positive."""

    lambda_max: float
    weights: tuple[float, ...]
    iterations: int
    residual: float

    def __post_init__(self) -> None:
        if any(w <= 0 for w in self.weights):
            raise ValueError("eigen weights must all be positive")
        total = sum(self.weights)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"eigen weights sum to {total!r}, expected 1")


def principal_eigenvector(
    matrix: ComparisonMatrix,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> EigenResult:
    """Power iteration from the uniform vector, sum-normalized each step.

    Converges when successive weight vectors differ by less than tol in the
    infinity norm. lambda_max is the mean componentwise ratio (Aw)_i / w_i,
    exact for the principal eigenpair.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = matrix.entries
    m = matrix.order
    w = np.full(m, 1.0 / m)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        v = a @ w
        w_next = v / v.sum()
        delta = float(np.max(np.abs(w_next - w)))
        w = w_next
        if delta < tol:
            converged = True
            break
    aw = a @ w
    lambda_max = float(np.mean(aw / w))
    residual = float(np.max(np.abs(aw - lambda_max * w)) / np.max(np.abs(w)))
    if not converged or residual > 1e-9:
        raise RuntimeError(
            f"power iteration did not converge within {max_iter} iterations "
            f"(residual {residual:.3e})"
        )
    return EigenResult(
        lambda_max=lambda_max,
        weights=tuple(w.tolist()),
        iterations=iterations,
        residual=residual,
    )


@dataclass(frozen=True)
class ConsistencyReport:
    lambda_max: float
    order: int
    consistency_index: float
    random_index: float
    consistency_ratio: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "lambda_max": self.lambda_max,
            "order": self.order,
            "consistency_index": self.consistency_index,
            "random_index": self.random_index,
            "consistency_ratio": self.consistency_ratio,
            "passed": self.passed,
        }


def consistency_ratio(matrix: ComparisonMatrix, lambda_max: float) -> ConsistencyReport:
    """CI = (lambda_max - m) / (m - 1); CR = CI / RI (0 for m <= 2, which are
    always consistent)."""
    m = matrix.order
    if m not in RANDOM_INDEX:
        raise ValueError(
            f"no random-index constant for order {m}; supported orders: "
            f"{sorted(RANDOM_INDEX)}"
        )
    ci = (lambda_max - m) / (m - 1)
    ri = RANDOM_INDEX[m]
    cr = 0.0 if m <= 2 else ci / ri
    return ConsistencyReport(
        lambda_max=lambda_max,
        order=m,
        consistency_index=ci,
        random_index=ri,
        consistency_ratio=cr,
        passed=cr <= CR_THRESHOLD,
    )


def signed_weights(eigen: EigenResult, signs: list[int]) -> list[float]:
    """Elementwise product of eigen weights and direction signs; no re-normalization."""
    if len(signs) != len(eigen.weights):
        raise ValueError(
            f"signs length {len(signs)} does not match {len(eigen.weights)} weights"
        )
    for s in signs:
        if s not in (-1, 0, 1):
            raise ValueError(f"sign {s!r} outside {{-1, 0, +1}}")
    return [s * w for s, w in zip(signs, eigen.weights)]


def cr_experiment(m: int, trials: int, seed: int) -> dict:
    """Consistency-ratio statistics over random distance vectors from U[0,1]^m."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(trials):
        d = rng.uniform(0.0, 1.0, size=m)
        matrix = build_comparison_matrix(d)
        eigen = principal_eigenvector(matrix)
        ratios.append(consistency_ratio(matrix, eigen.lambda_max).consistency_ratio)
    arr = np.asarray(ratios)
    return {
        "m": m,
        "trials": trials,
        "seed": seed,
        "mean": float(arr.mean()),
        "variance": float(arr.var()),
        "max": float(arr.max()),
        "all_within_threshold": bool(np.all(arr <= CR_THRESHOLD)),
    }
