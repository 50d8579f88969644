"""Evaluation metrics: rank correlations, Welch's t-test, classification, shape stats.

Everything here is implemented directly from the defining formulas (the test
suite cross-checks each function against independent reference
implementations). Spearman uses mid-ranks for ties; Kendall is the
tie-corrected tau-b; the t-distribution tail is evaluated through the
regularized incomplete beta function via its continued-fraction expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

P_VALUE_FLOOR = 1e-300


def _paired(x, y, min_len: int = 3) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(list(x), dtype=float)
    ya = np.asarray(list(y), dtype=float)
    if xa.size != ya.size:
        raise ValueError(f"length mismatch: {xa.size} vs {ya.size}")
    if xa.size < min_len:
        raise ValueError(f"need at least {min_len} paired observations, got {xa.size}")
    return xa, ya


def pearson(x, y) -> float:
    """Sample Pearson correlation coefficient."""
    xa, ya = _paired(x, y)
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    sx = math.sqrt(float(np.dot(xc, xc)))
    sy = math.sqrt(float(np.dot(yc, yc)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("undefined correlation: zero variance input")
    r = float(np.dot(xc, yc)) / (sx * sy)
    return max(-1.0, min(1.0, r))


def midranks(values) -> np.ndarray:
    """1-based ranks with tied runs assigned their average rank."""
    arr = np.asarray(list(values), dtype=float)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Spearman rho: Pearson correlation of mid-ranks."""
    xa, ya = _paired(x, y)
    try:
        return pearson(midranks(xa), midranks(ya))
    except ValueError:
        raise ValueError("undefined rank correlation: all values tied") from None


def kendall(x, y) -> float:
    """Kendall tau-b with tie correction.

    tau_b = (concordant - discordant) / sqrt((n0 - t_x) * (n0 - t_y)) where
    n0 = n(n-1)/2 and t_x, t_y count tied pairs in each argument.
    """
    xa, ya = _paired(x, y)
    n = xa.size
    concordant_minus_discordant = 0.0
    ties_x = 0
    ties_y = 0
    for i in range(n - 1):
        dx = np.sign(xa[i] - xa[i + 1 :])
        dy = np.sign(ya[i] - ya[i + 1 :])
        concordant_minus_discordant += float(np.sum(dx * dy))
        ties_x += int(np.sum(dx == 0))
        ties_y += int(np.sum(dy == 0))
    n0 = n * (n - 1) / 2.0
    denom = math.sqrt((n0 - ties_x) * (n0 - ties_y))
    if denom == 0.0:
        raise ValueError("undefined rank correlation: all values tied")
    return max(-1.0, min(1.0, concordant_minus_discordant / denom))


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued-fraction expansion for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), accurate to well below 1e-10 absolute error."""
    if a <= 0 or b <= 0:
        raise ValueError("beta parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T_df| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


def welch_t_test(a, b) -> tuple[float, float]:
    """Unequal-variance t statistic, Welch-Satterthwaite df, two-sided p.

    Degenerate rule: two zero-variance samples give p = 1 when their means
    are equal and p = 0 (infinite t) otherwise.
    """
    aa = np.asarray(list(a), dtype=float)
    bb = np.asarray(list(b), dtype=float)
    if aa.size < 2 or bb.size < 2:
        raise ValueError("need at least 2 observations per sample")
    na, nb = aa.size, bb.size
    ma, mb = float(aa.mean()), float(bb.mean())
    va, vb = float(aa.var(ddof=1)), float(bb.var(ddof=1))
    if va == 0.0 and vb == 0.0:
        if ma == mb:
            return 0.0, 1.0
        return (math.inf if ma > mb else -math.inf), 0.0
    se2 = va / na + vb / nb
    t = (ma - mb) / math.sqrt(se2)
    df = se2 * se2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return float(t), float(student_t_two_sided_p(t, df))


def classification_metrics(scores, labels, threshold: float) -> tuple[float, float]:
    """F1 on class 1 and accuracy; prediction is 1 iff score >= threshold."""
    sa = np.asarray(list(scores), dtype=float)
    la = np.asarray(list(labels), dtype=int)
    if sa.size != la.size:
        raise ValueError(f"length mismatch: {sa.size} vs {la.size}")
    if not np.all((la == 0) | (la == 1)):
        raise ValueError("labels must be 0 or 1")
    if la.min() == la.max():
        raise ValueError("labels contain a single class")
    pred = sa >= threshold
    tp = int(np.sum(pred & (la == 1)))
    fp = int(np.sum(pred & (la == 0)))
    fn = int(np.sum(~pred & (la == 1)))
    tn = int(np.sum(~pred & (la == 0)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0.0 else 2 * precision * recall / (precision + recall)
    accuracy = (tp + tn) / sa.size
    return float(f1), float(accuracy)


def choose_threshold_max_f1(scores, labels) -> float:
    """The score value that maximizes F1 when used as the decision threshold.

    Candidates are the distinct scores themselves (F1 only changes there);
    ties favor the smallest threshold.
    """
    sa = np.asarray(list(scores), dtype=float)
    best_threshold = None
    best_f1 = -1.0
    for candidate in np.unique(sa):
        f1, _ = classification_metrics(sa, labels, float(candidate))
        if f1 > best_f1:
            best_f1 = f1
            best_threshold = float(candidate)
    assert best_threshold is not None
    return best_threshold


def shape_stats(scores) -> tuple[float, float]:
    """(coefficient of variation, adjusted Fisher-Pearson skewness).

    CV uses the population standard deviation over the absolute mean; a zero
    mean is an error. Zero spread yields skewness 0.
    """
    arr = np.asarray(list(scores), dtype=float)
    if arr.size < 3:
        raise ValueError("need at least 3 observations")
    mean = float(arr.mean())
    if mean == 0.0:
        raise ValueError("coefficient of variation undefined for zero mean")
    sigma = float(arr.std())
    cv = sigma / abs(mean)
    if sigma == 0.0:
        return cv, 0.0
    n = arr.size
    centered = arr - mean
    m2 = float(np.mean(centered**2))
    m3 = float(np.mean(centered**3))
    g1 = m3 / m2**1.5
    skewness = g1 * math.sqrt(n * (n - 1.0)) / (n - 2.0)
    return cv, skewness


@dataclass(frozen=True)
class EvaluationReport:
    """Metric battery for one scored set: correlations for continuous ground
    truth, classification metrics for discrete, Welch and shape stats always."""

    mode: str
    pearson_r: float | None
    spearman_rho: float | None
    kendall_tau: float | None
    welch_t: float
    welch_p: float
    welch_p_clamped: bool
    f1: float | None
    accuracy: float | None
    threshold: float | None
    cv: float
    skewness: float

    def to_dict(self) -> dict:
        doc = {
            "mode": self.mode,
            "pearson_r": self.pearson_r,
            "spearman_rho": self.spearman_rho,
            "kendall_tau": self.kendall_tau,
            "welch_t": self.welch_t,
            "welch_p": self.welch_p,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "threshold": self.threshold,
            "cv": self.cv,
            "skewness": self.skewness,
        }
        if self.welch_p_clamped:
            doc["welch_p_display"] = f"< {P_VALUE_FLOOR:g}"
        return doc


def _rank_count(x: float) -> int:
    return math.ceil(x - 1e-9)


def evaluate_scores(
    scores,
    truth,
    mode: str,
    percentile_p: float = 0.05,
    threshold: float | None = None,
) -> EvaluationReport:
    """Score a prediction set against ground truth.

    Continuous mode: Pearson/Spearman/Kendall against the truth values, plus
    Welch's t-test between the score distributions of the bottom-p and top-p
    truth groups (nearest-rank thresholds; all threshold-valued samples
    included). Discrete mode: Welch between the two label groups and F1 /
    accuracy at ``threshold`` (chosen to maximize F1 on this data when not
    given, which is only appropriate for training splits).
    """
    sa = np.asarray(list(scores), dtype=float)
    if mode == "continuous":
        ta = np.asarray(list(truth), dtype=float)
        if sa.size != ta.size:
            raise ValueError(f"length mismatch: {sa.size} vs {ta.size}")
        r = pearson(sa, ta)
        rho = spearman(sa, ta)
        tau = kendall(sa, ta)
        n = ta.size
        if not (0.0 < percentile_p < 0.5) or percentile_p * n < 1.0 - 1e-9:
            raise ValueError(
                f"percentile {percentile_p!r} too strict to form evaluation groups"
            )
        order = np.sort(ta)
        tau_low = order[_rank_count(percentile_p * n) - 1]
        tau_high = order[_rank_count((1.0 - percentile_p) * n) - 1]
        low_scores = sa[ta <= tau_low]
        high_scores = sa[ta >= tau_high]
        if low_scores.size < 2 or high_scores.size < 2:
            raise ValueError("percentile groups too small for Welch's t-test")
        t, p = welch_t_test(high_scores, low_scores)
        f1 = accuracy = used_threshold = None
    elif mode == "discrete":
        la = np.asarray(list(truth), dtype=int)
        if sa.size != la.size:
            raise ValueError(f"length mismatch: {sa.size} vs {la.size}")
        if not np.all((la == 0) | (la == 1)):
            raise ValueError("discrete truth labels must be 0 or 1")
        if la.min() == la.max():
            raise ValueError("labels contain a single class")
        t, p = welch_t_test(sa[la == 1], sa[la == 0])
        used_threshold = (
            threshold if threshold is not None else choose_threshold_max_f1(sa, la)
        )
        f1, accuracy = classification_metrics(sa, la, used_threshold)
        r = rho = tau = None
    else:
        raise ValueError(f"mode must be 'continuous' or 'discrete', got {mode!r}")
    clamped = p < P_VALUE_FLOOR
    cv, skewness = shape_stats(sa)
    return EvaluationReport(
        mode=mode,
        pearson_r=r,
        spearman_rho=rho,
        kendall_tau=tau,
        welch_t=t,
        welch_p=max(p, P_VALUE_FLOOR) if clamped else p,
        welch_p_clamped=clamped,
        f1=f1,
        accuracy=accuracy,
        threshold=used_threshold,
        cv=cv,
        skewness=skewness,
    )
