"""Two-class countermeasure metrics: error curves, EER, DCF family, Cllr.

Higher scores favour bona fide.  A trial is accepted as bona fide iff
``score >= threshold``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import MissingClass

DEFAULT_BETA = 1.9


@dataclass(frozen=True)
class CostConfig:
    """Track 1 cost basis.

    Give either ``beta`` directly or all of ``c_miss``, ``c_fa`` and
    ``pi_spf``; ``beta = c_miss * (1 - pi_spf) / (c_fa * pi_spf)``.
    """

    beta: float | None = None
    c_miss: float | None = None
    c_fa: float | None = None
    pi_spf: float | None = None

    def __post_init__(self):
        derived = (self.c_miss, self.c_fa, self.pi_spf)
        if self.beta is not None:
            if any(v is not None for v in derived):
                raise ValueError("give beta or (c_miss, c_fa, pi_spf), not both")
            if not self.beta > 0:
                raise ValueError(f"beta must be positive, got {self.beta}")
        elif all(v is not None for v in derived):
            if not (self.c_miss > 0 and self.c_fa > 0):
                raise ValueError("costs must be positive")
            if not 0 < self.pi_spf < 1:
                raise ValueError(f"pi_spf must lie in (0, 1), got {self.pi_spf}")
        elif any(v is not None for v in derived):
            raise ValueError("c_miss, c_fa and pi_spf must be given together")
        else:
            object.__setattr__(self, "beta", DEFAULT_BETA)

    @property
    def effective_beta(self) -> float:
        if self.beta is not None:
            return float(self.beta)
        return self.c_miss * (1.0 - self.pi_spf) / (self.c_fa * self.pi_spf)

    def describe(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if v is not None}
        out["beta"] = self.effective_beta
        return out


@dataclass(frozen=True)
class ErrorCurve:
    thresholds: np.ndarray
    p_miss: np.ndarray
    p_fa: np.ndarray

    def __len__(self) -> int:
        return len(self.thresholds)


@dataclass(frozen=True)
class CmReport:
    min_dcf: float
    act_dcf: float
    cllr: float
    eer: float
    tau_min: float
    tau_bayes: float

    def to_dict(self) -> dict:
        return asdict(self)


def _as_scores(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.size == 0:
        raise MissingClass(name)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} scores contain non-finite values")
    return arr


def candidate_thresholds(*score_sets) -> np.ndarray:
    """-inf, midpoints between adjacent distinct pooled scores, +inf."""
    u = np.unique(np.concatenate(score_sets))
    lo, hi = u[:-1], u[1:]
    mid = lo / 2 + hi / 2
    # adjacent floats: the midpoint may round onto lo; hi gives the same split
    mid = np.where(mid > lo, mid, hi)
    return np.concatenate(([-np.inf], mid, [np.inf]))


def rate_below(sorted_scores: np.ndarray, thresholds) -> np.ndarray:
    """Fraction of scores strictly below each threshold (rejections)."""
    return np.searchsorted(sorted_scores, thresholds, side="left") / sorted_scores.size


def rate_at_or_above(sorted_scores: np.ndarray, thresholds) -> np.ndarray:
    """Fraction of scores >= each threshold (acceptances)."""
    n = sorted_scores.size
    return (n - np.searchsorted(sorted_scores, thresholds, side="left")) / n


def error_curve(bona, spoof) -> ErrorCurve:
    bona = np.sort(_as_scores(bona, "bonafide"))
    spoof = np.sort(_as_scores(spoof, "spoof"))
    t = candidate_thresholds(bona, spoof)
    return ErrorCurve(t, rate_below(bona, t), rate_at_or_above(spoof, t))


def dcf(p_miss, p_fa, cfg: CostConfig | None = None):
    cfg = cfg or CostConfig()
    return cfg.effective_beta * p_miss + p_fa


def min_dcf(curve: ErrorCurve, cfg: CostConfig | None = None) -> tuple[float, float]:
    """Minimum DCF over the curve and its (smallest) minimising threshold."""
    costs = dcf(curve.p_miss, curve.p_fa, cfg)
    i = int(np.argmin(costs))
    return float(costs[i]), float(curve.thresholds[i])


def bayes_threshold(cfg: CostConfig | None = None) -> float:
    cfg = cfg or CostConfig()
    return -math.log(cfg.effective_beta)


def act_dcf(bona, spoof, cfg: CostConfig | None = None) -> float:
    bona = _as_scores(bona, "bonafide")
    spoof = _as_scores(spoof, "spoof")
    tau = bayes_threshold(cfg)
    p_miss = np.count_nonzero(bona < tau) / bona.size
    p_fa = np.count_nonzero(spoof >= tau) / spoof.size
    return float(dcf(p_miss, p_fa, cfg))


def softplus(x) -> np.ndarray:
    """log(1 + e^x) without overflow."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x > 0
    out[pos] = x[pos] + np.log1p(np.exp(-x[pos]))
    out[~pos] = np.log1p(np.exp(x[~pos]))
    return out


def cllr(bona, spoof) -> float:
    """Cost of log-likelihood ratios, in bits.  Scores are natural-log LLRs."""
    bona = _as_scores(bona, "bonafide")
    spoof = _as_scores(spoof, "spoof")
    # fsum keeps the class means exact and independent of trial order
    c_bona = math.fsum(softplus(-bona)) / bona.size
    c_spoof = math.fsum(softplus(spoof)) / spoof.size
    return (c_bona + c_spoof) / (2.0 * math.log(2.0))


def rocch(curve: ErrorCurve) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the ROC convex hull in (p_fa, p_miss), p_fa ascending."""
    pts = sorted(set(zip(curve.p_fa.tolist(), curve.p_miss.tolist())))
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # pop the middle point unless it turns counter-clockwise (lower hull)
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    # the lower-left hull ends where p_miss reaches its minimum
    xs = np.array([h[0] for h in hull])
    ys = np.array([h[1] for h in hull])
    last = int(np.argmin(ys))
    return xs[: last + 1], ys[: last + 1]


def eer_rocch(curve: ErrorCurve) -> float:
    fa, miss = rocch(curve)
    for i in range(len(fa) - 1):
        x1, y1, x2, y2 = fa[i], miss[i], fa[i + 1], miss[i + 1]
        d1, d2 = y1 - x1, y2 - x2
        if d1 >= 0 >= d2:
            if d1 == d2:
                return float(x1)
            # intersection of the hull segment with p_miss == p_fa
            lam = d1 / (d1 - d2)
            return float(x1 + lam * (x2 - x1))
    return float(min(fa[0], miss[0]))


def eer_nearest(curve: ErrorCurve) -> float:
    """Mean of the two rates at the point where they are closest."""
    i = int(np.argmin(np.abs(curve.p_miss - curve.p_fa)))
    return float((curve.p_miss[i] + curve.p_fa[i]) / 2)


def eer(curve: ErrorCurve, method: str = "rocch") -> tuple[float, float]:
    """Equal error rate and an operating threshold near it.

    ``method="rocch"`` interpolates on the ROC convex hull;
    ``method="nearest"`` averages the rates at the closest empirical point.
    The threshold is always the empirical point with minimal |p_miss - p_fa|.
    """
    i = int(np.argmin(np.abs(curve.p_miss - curve.p_fa)))
    tau = float(curve.thresholds[i])
    if method == "rocch":
        return eer_rocch(curve), tau
    if method == "nearest":
        return eer_nearest(curve), tau
    raise ValueError(f"unknown EER method {method!r}")


def evaluate_cm(bona, spoof, cfg: CostConfig | None = None, eer_method: str = "rocch") -> CmReport:
    cfg = cfg or CostConfig()
    curve = error_curve(bona, spoof)
    mdcf, tau_min = min_dcf(curve, cfg)
    e, _ = eer(curve, eer_method)
    return CmReport(
        min_dcf=mdcf,
        act_dcf=act_dcf(bona, spoof, cfg),
        cllr=cllr(bona, spoof),
        eer=e,
        tau_min=tau_min,
        tau_bayes=bayes_threshold(cfg),
    )
