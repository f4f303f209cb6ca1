"""Score calibration and calibration diagnostics.

* ``logit`` maps probability-like scores to LLR-like scores.
* ``fit_affine`` trains ``scale * s + offset`` by minimising Cllr.
* ``pav_calibrate`` is the oracle (label-using) monotone calibration.
* ``ape_sweep`` evaluates normalised DCF over a spectrum of Bayes thresholds.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .detmetrics import _as_scores, cllr, error_curve, softplus

log = logging.getLogger(__name__)

CLAMP_LLR = 35.0


class LogitClampWarning(UserWarning):
    pass


def logit_with_count(p, clamp_llr: float = CLAMP_LLR) -> tuple[np.ndarray, int]:
    p = np.asarray(p, dtype=np.float64)
    if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
        raise ValueError("logit input must lie in [0, 1]")
    out = np.empty_like(p)
    lo, hi = p == 0, p == 1
    inner = ~(lo | hi)
    out[inner] = np.log(p[inner]) - np.log1p(-p[inner])
    out[lo] = -clamp_llr
    out[hi] = clamp_llr
    return out, int(np.count_nonzero(lo | hi))


def logit(p, clamp_llr: float = CLAMP_LLR) -> np.ndarray:
    """log(p / (1 - p)); exact 0 and 1 map to -/+ ``clamp_llr`` with a warning."""
    out, n = logit_with_count(p, clamp_llr)
    if n:
        warnings.warn(f"{n} probability scores at 0 or 1 clamped to +/-{clamp_llr}",
                      LogitClampWarning, stacklevel=2)
    return out


# ---------------------------------------------------------------------------
# affine calibration


@dataclass(frozen=True)
class AffineCalibration:
    scale: float
    offset: float
    iterations: int = 0
    objective: float = float("nan")
    grad_norm: float = 0.0
    converged: bool = True
    history: tuple[float, ...] = ()
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = "affine"
        d["history"] = list(self.history)
        d["warnings"] = list(self.warnings)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AffineCalibration":
        return cls(
            scale=float(d["scale"]),
            offset=float(d["offset"]),
            iterations=int(d.get("iterations", 0)),
            objective=float(d.get("objective", float("nan"))),
            grad_norm=float(d.get("grad_norm", 0.0)),
            converged=bool(d.get("converged", True)),
            history=tuple(d.get("history", ())),
            warnings=tuple(d.get("warnings", ())),
        )


def _objective(theta, bona, spoof) -> float:
    a, b = theta
    return cllr(a * bona + b, a * spoof + b)


def _grad_hess(theta, bona, spoof):
    """Gradient and Hessian of Cllr (in bits) w.r.t. (scale, offset)."""
    a, b = theta
    k = 1.0 / (2.0 * math.log(2.0))
    # d/dz log(1+e^{-z}) = -sigmoid(-z) ; d/dz log(1+e^{z}) = sigmoid(z)
    zb = a * bona + b
    zs = a * spoof + b
    sb = np.exp(-softplus(zb))          # sigmoid(-zb)
    ss = np.exp(-softplus(-zs))         # sigmoid(zs)
    wb = sb * (1 - sb) / bona.size
    ws = ss * (1 - ss) / spoof.size
    g = k * np.array([
        -np.sum(sb * bona) / bona.size + np.sum(ss * spoof) / spoof.size,
        -np.sum(sb) / bona.size + np.sum(ss) / spoof.size,
    ])
    h = k * np.array([
        [np.sum(wb * bona * bona) + np.sum(ws * spoof * spoof),
         np.sum(wb * bona) + np.sum(ws * spoof)],
        [np.sum(wb * bona) + np.sum(ws * spoof), np.sum(wb) + np.sum(ws)],
    ])
    return g, h


def fit_affine(bona_dev, spoof_dev, tol: float = 1e-8, max_iter: int = 500) -> AffineCalibration:
    """Cllr-minimising affine calibration (prior-0.5 logistic regression).

    Damped Newton from (1, 0) with backtracking, so the objective never
    increases and the scale stays positive (if scores rank the classes the
    wrong way round, the fit stalls near scale 0 and reports non-convergence).  Stops when the gradient norm drops below ``tol`` or after
    ``max_iter`` iterations.
    """
    bona = _as_scores(bona_dev, "bonafide")
    spoof = _as_scores(spoof_dev, "spoof")
    notes = []
    pooled = np.concatenate((bona, spoof))
    constant = bool(np.all(pooled == pooled[0]))
    if constant:
        notes.append("all dev scores are identical; only the offset is identifiable")
    elif np.all(bona == bona[0]) or np.all(spoof == spoof[0]):
        notes.append("one dev class has constant scores")
    if not constant and bona.min() > spoof.max():
        notes.append("dev classes are separable; scale grows until the gradient vanishes")

    theta = np.array([1.0, 0.0])
    f = _objective(theta, bona, spoof)
    history = [f]
    gnorm = float("inf")
    it = 0
    for it in range(1, max_iter + 1):
        g, h = _grad_hess(theta, bona, spoof)
        if constant:
            g[0] = 0.0
        gnorm = float(np.linalg.norm(g))
        if gnorm < tol:
            it -= 1
            break
        step = None
        if not constant:
            try:
                step = -np.linalg.solve(h, g)
                if not np.all(np.isfinite(step)) or step @ g >= 0:
                    step = None
            except np.linalg.LinAlgError:
                step = None
        if step is None:
            step = -g / max(h[1, 1], 1e-12) if constant else -g
        t = 1.0
        while True:
            cand = theta + t * step
            # scale must stay positive so the map preserves score order
            fc = _objective(cand, bona, spoof) if cand[0] > 0 else float("inf")
            if fc <= f or t < 1e-12:
                break
            t *= 0.5
        if fc > f:
            break
        theta, f = cand, fc
        history.append(f)
    else:
        g, _ = _grad_hess(theta, bona, spoof)
        if constant:
            g[0] = 0.0
        gnorm = float(np.linalg.norm(g))
    converged = gnorm < tol
    if not converged:
        log.warning("affine calibration stopped after %d iterations, |grad| = %.3g", it, gnorm)
        notes.append(f"not converged: gradient norm {gnorm:.3g}")
    return AffineCalibration(float(theta[0]), float(theta[1]), it, f, gnorm, converged,
                             tuple(history), tuple(notes))


def apply_affine(cal: AffineCalibration, scores) -> np.ndarray:
    return cal.scale * np.asarray(scores, dtype=np.float64) + cal.offset


# ---------------------------------------------------------------------------
# oracle PAV calibration


@dataclass(frozen=True)
class PavMapping:
    """Monotone step function from raw score to calibrated LLR.

    Segment ``i`` covers raw scores in ``[lower[i], upper[i]]``.  A score
    takes the LLR of the last segment whose ``lower`` is <= it; scores
    below the first segment take the first LLR.  ``posterior`` is the
    pooled bona fide fraction per segment, ``llr`` its log-odds minus the
    log prior odds of the training data, clamped to +/- ``clamp_llr``.
    This mapping uses evaluation labels and is an oracle.
    """

    lower: np.ndarray
    upper: np.ndarray
    llr: np.ndarray
    posterior: np.ndarray
    n_bona: np.ndarray = field(repr=False)
    n_total: np.ndarray = field(repr=False)
    clamp_llr: float = CLAMP_LLR
    oracle: bool = True

    def __len__(self) -> int:
        return len(self.llr)

    @property
    def breakpoints(self) -> np.ndarray:
        return self.lower

    def __call__(self, scores) -> np.ndarray:
        s = np.asarray(scores, dtype=np.float64)
        i = np.searchsorted(self.lower, s, side="right") - 1
        return self.llr[np.clip(i, 0, len(self.llr) - 1)]

    def to_dict(self) -> dict:
        return {
            "kind": "pav",
            "oracle": self.oracle,
            "clamp_llr": self.clamp_llr,
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "llr": self.llr.tolist(),
            "posterior": self.posterior.tolist(),
            "n_bona": self.n_bona.tolist(),
            "n_total": self.n_total.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PavMapping":
        arr = {k: np.asarray(d[k], dtype=np.float64) for k in ("lower", "upper", "llr", "posterior")}
        return cls(n_bona=np.asarray(d["n_bona"], dtype=np.int64),
                   n_total=np.asarray(d["n_total"], dtype=np.int64),
                   clamp_llr=float(d.get("clamp_llr", CLAMP_LLR)),
                   oracle=bool(d.get("oracle", True)), **arr)


def _pooled_blocks(scores, labels):
    u, inv = np.unique(np.asarray(scores, dtype=np.float64), return_inverse=True)
    pos = np.bincount(inv, weights=labels, minlength=u.size).astype(np.int64)
    tot = np.bincount(inv, minlength=u.size).astype(np.int64)
    bp, bw, be = _kernels.pav_blocks(pos, tot)
    return u, inv, bp, bw, be


def isotonic_posteriors(scores, labels) -> np.ndarray:
    """Isotonic (non-decreasing) least-squares fit of 0/1 labels on scores.

    Tied scores always receive the same fitted value.  Returned per input
    item, in input order.
    """
    u, inv, bp, bw, be = _pooled_blocks(scores, np.asarray(labels, dtype=np.int64))
    fitted_u = np.repeat(bp / bw, np.diff(np.concatenate(([0], be))))
    return fitted_u[inv]


def pav_calibrate(bona_eval, spoof_eval, clamp_llr: float = CLAMP_LLR) -> PavMapping:
    bona = _as_scores(bona_eval, "bonafide")
    spoof = _as_scores(spoof_eval, "spoof")
    s = np.concatenate((bona, spoof))
    y = np.concatenate((np.ones(bona.size, np.int64), np.zeros(spoof.size, np.int64)))
    u, _, bp, bw, be = _pooled_blocks(s, y)
    starts = np.concatenate(([0], be[:-1]))
    lower, upper = u[starts], u[be - 1]
    post = bp / bw
    prior_log_odds = math.log(bona.size) - math.log(spoof.size)
    with np.errstate(divide="ignore"):
        log_odds = np.log(bp.astype(np.float64)) - np.log((bw - bp).astype(np.float64))
    llr = np.clip(log_odds - prior_log_odds, -clamp_llr, clamp_llr)
    return PavMapping(lower, upper, llr, post, bp, bw, clamp_llr)


# ---------------------------------------------------------------------------
# normalised-DCF sweep over Bayes thresholds


@dataclass(frozen=True)
class ApeCurve:
    pi: np.ndarray
    beta: np.ndarray
    tau_bayes: np.ndarray
    norm_act_dcf: np.ndarray
    norm_act_dcf_unclipped: np.ndarray
    norm_min_dcf: np.ndarray
    dummy_bound: np.ndarray
    c_miss: float = 1.0
    c_fa: float = 10.0

    COLUMNS = ("pi", "beta", "tau_bayes", "norm_act_dcf", "norm_min_dcf", "dummy_bound",
               "norm_act_dcf_unclipped")

    def rows(self):
        cols = [getattr(self, c) for c in self.COLUMNS]
        return [tuple(float(c[i]) for c in cols) for i in range(len(self.pi))]


def prior_grid(n: int = 199, lo: float = 0.001, hi: float = 0.999) -> np.ndarray:
    """Priors uniformly spaced in log-odds, endpoints exactly ``lo`` and ``hi``."""
    if n < 2:
        raise ValueError("grid needs at least two points")
    lo_lo, hi_lo = math.log(lo / (1 - lo)), math.log(hi / (1 - hi))
    z = np.linspace(lo_lo, hi_lo, n)
    grid = 1.0 / (1.0 + np.exp(-z))
    grid[0], grid[-1] = lo, hi
    return grid


def dummy_bound(beta) -> np.ndarray:
    """min(beta, 1) / (1 + beta), the better of reject-all and accept-all."""
    beta = np.asarray(beta, dtype=np.float64)
    # same operation order as the normalised DCF, so a dummy decision
    # reproduces the bound bit for bit
    return (1.0 / (1.0 + beta)) * np.minimum(beta, 1.0)


def ape_sweep(bona, spoof, c_miss: float = 1.0, c_fa: float = 10.0, grid=None) -> ApeCurve:
    """Normalised actual and minimum DCF for every prior in ``grid``.

    ``beta(pi) = c_miss (1 - pi) / (c_fa pi)``, the actual DCF uses the
    Bayes threshold ``-log beta(pi)`` and everything is scaled by
    ``1 / (1 + beta(pi))``.  ``norm_act_dcf`` is clipped at the dummy bound.
    """
    bona = np.sort(_as_scores(bona, "bonafide"))
    spoof = np.sort(_as_scores(spoof, "spoof"))
    pi = prior_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    beta = c_miss * (1 - pi) / (c_fa * pi)
    tau = -np.log(beta)
    p_miss = np.searchsorted(bona, tau, side="left") / bona.size
    p_fa = (spoof.size - np.searchsorted(spoof, tau, side="left")) / spoof.size
    scale = 1.0 / (1.0 + beta)
    act = scale * (beta * p_miss + p_fa)
    curve = error_curve(bona, spoof)
    mins = scale * _kernels.min_cost_grid(beta, curve.p_miss, curve.p_fa)
    bound = dummy_bound(beta)
    return ApeCurve(pi, beta, tau, np.minimum(act, bound), act, mins, bound, c_miss, c_fa)
