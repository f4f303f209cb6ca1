"""Three-class SASV metrics: a-DCF, ASV-constrained t-DCF and concurrent t-EER.

Trial classes are ``target``, ``nontarget`` and ``spoof``; only targets
should be accepted.  Every sub-system accepts iff ``score >= threshold`` and
a tandem (ASV + CM) accepts iff both sub-systems accept.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .detmetrics import (
    _as_scores,
    candidate_thresholds,
    error_curve,
    rate_at_or_above,
    rate_below,
)
from .errors import DegenerateTandem

DEFAULT_ALPHA = 1.58
DEFAULT_GAMMA = 0.84
T_EER_TOL = 1e-4


@dataclass(frozen=True)
class TandemCosts:
    """Decision costs and class priors shared by a-DCF and t-DCF.

    Defaults are the cost vector that reproduces alpha ~ 1.58 and
    gamma ~ 0.84 (and beta = 1.9 on the CM side).
    """

    c_miss: float = 1.0
    c_fa_non: float = 10.0
    c_fa_spf: float = 10.0
    pi_tar: float = 0.95 * 0.99
    pi_non: float = 0.95 * 0.01
    pi_spf: float = 0.05

    def __post_init__(self):
        if min(self.c_miss, self.c_fa_non, self.c_fa_spf) <= 0:
            raise ValueError("costs must be positive")
        priors = (self.pi_tar, self.pi_non, self.pi_spf)
        if min(priors) <= 0 or abs(sum(priors) - 1.0) > 1e-9:
            raise ValueError(f"priors must be positive and sum to 1, got {priors}")

    @property
    def alpha(self) -> float:
        return self.c_miss * self.pi_tar / self._fa_norm

    @property
    def gamma(self) -> float:
        return self.c_fa_spf * self.pi_spf / self._fa_norm

    @property
    def _fa_norm(self) -> float:
        return self.c_fa_non * self.pi_non + self.c_fa_spf * self.pi_spf


@dataclass(frozen=True)
class SasvCostConfig:
    """alpha/gamma for the a-DCF plus the cost vector used by the t-DCF.

    When both forms are supplied they must agree within 1e-6 unless
    ``override`` is set.  The default takes alpha = 1.58 and gamma = 0.84 at
    face value and overrides the (1.5807, 0.8403) implied by the costs.
    """

    alpha: float = DEFAULT_ALPHA
    gamma: float = DEFAULT_GAMMA
    costs: TandemCosts = field(default_factory=TandemCosts)
    override: bool = True

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.override:
            da = abs(self.alpha - self.costs.alpha)
            dg = abs(self.gamma - self.costs.gamma)
            if max(da, dg) > 1e-6:
                raise ValueError(
                    f"alpha/gamma ({self.alpha}, {self.gamma}) disagree with costs "
                    f"({self.costs.alpha:.6f}, {self.costs.gamma:.6f}); set override=True"
                )

    @classmethod
    def from_costs(cls, costs: TandemCosts) -> "SasvCostConfig":
        return cls(costs.alpha, costs.gamma, costs, override=False)

    def describe(self) -> dict:
        return {"alpha": self.alpha, "gamma": self.gamma, "costs": asdict(self.costs),
                "override": self.override}


@dataclass(frozen=True)
class SasvCurve:
    thresholds: np.ndarray
    p_miss: np.ndarray
    p_fa_non: np.ndarray
    p_fa_spf: np.ndarray


@dataclass(frozen=True)
class TandemScores:
    """Per-class (asv, cm) score arrays."""

    asv_tar: np.ndarray
    asv_non: np.ndarray
    asv_spf: np.ndarray
    cm_tar: np.ndarray
    cm_non: np.ndarray
    cm_spf: np.ndarray

    @classmethod
    def from_arrays(cls, asv, cm, labels) -> "TandemScores":
        asv = np.asarray(asv, dtype=np.float64)
        cm = np.asarray(cm, dtype=np.float64)
        labels = np.asarray(labels)
        parts = {}
        for lab, tag in (("target", "tar"), ("nontarget", "non"), ("spoof", "spf")):
            m = labels == lab
            parts[f"asv_{tag}"] = _as_scores(asv[m], lab)
            parts[f"cm_{tag}"] = _as_scores(cm[m], lab)
        return cls(**parts)


@dataclass(frozen=True)
class TdcfResult:
    value: float
    tau_cm: float
    tau_asv: float
    asv_rates: dict


@dataclass(frozen=True)
class TeerResult:
    """Concurrent t-EER.

    ``value`` is the mean of the three interpolated rates at the solution;
    ``rates`` holds them individually and ``discrete_rates`` the plain
    counting rates at the nearest empirical thresholds (tau_asv, tau_cm).
    """

    value: float
    tau_asv: float
    tau_cm: float
    rates: dict
    discrete_rates: dict


@dataclass(frozen=True)
class SasvReport:
    min_a_dcf: float
    tau_sasv: float
    t_dcf: float | None = None
    t_eer: float | None = None
    tau_asv: float | None = None
    tau_cm: float | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def a_dcf_curve(target, nontarget, spoof) -> SasvCurve:
    tar = np.sort(_as_scores(target, "target"))
    non = np.sort(_as_scores(nontarget, "nontarget"))
    spf = np.sort(_as_scores(spoof, "spoof"))
    t = candidate_thresholds(tar, non, spf)
    return SasvCurve(t, rate_below(tar, t), rate_at_or_above(non, t), rate_at_or_above(spf, t))


def a_dcf(p_miss, p_fa_non, p_fa_spf, cfg: SasvCostConfig | None = None):
    cfg = cfg or SasvCostConfig()
    return cfg.alpha * p_miss + (1 - cfg.gamma) * p_fa_non + cfg.gamma * p_fa_spf


def min_a_dcf(curve: SasvCurve, cfg: SasvCostConfig | None = None) -> tuple[float, float]:
    costs = a_dcf(curve.p_miss, curve.p_fa_non, curve.p_fa_spf, cfg)
    i = int(np.argmin(costs))
    return float(costs[i]), float(curve.thresholds[i])


# ---------------------------------------------------------------------------
# t-DCF


def asv_eer_threshold(asv_tar, asv_non) -> float:
    """Empirical threshold where ASV miss and false-alarm rates are closest."""
    c = error_curve(asv_tar, asv_non)
    return float(c.thresholds[int(np.argmin(np.abs(c.p_miss - c.p_fa)))])


def t_dcf_curve(ts: TandemScores, asv_threshold, costs: TandemCosts, method: str = "joint"):
    """Normalised tandem cost at every CM candidate threshold.

    ``method="joint"`` counts tandem decisions trial by trial (CM first,
    then ASV).  ``method="marginal"`` combines the two sub-systems' separate
    error rates assuming independence.  Both normalise by the cheaper dummy
    CM (accept all / reject all), so 1.0 means the CM adds nothing.
    """
    t_asv = float(asv_threshold)
    cm_all = (ts.cm_tar, ts.cm_non, ts.cm_spf)
    taus = candidate_thresholds(*cm_all)
    p_miss_asv = np.count_nonzero(ts.asv_tar < t_asv) / ts.asv_tar.size
    p_fa_asv = np.count_nonzero(ts.asv_non >= t_asv) / ts.asv_non.size
    p_fa_spf_asv = np.count_nonzero(ts.asv_spf >= t_asv) / ts.asv_spf.size
    c = costs
    if method == "joint":
        tar_acc = np.sort(ts.cm_tar[ts.asv_tar >= t_asv])
        non_acc = np.sort(ts.cm_non[ts.asv_non >= t_asv])
        spf_acc = np.sort(ts.cm_spf[ts.asv_spf >= t_asv])
        n_tar, n_non, n_spf = ts.cm_tar.size, ts.cm_non.size, ts.cm_spf.size
        cm_rej_tar = np.searchsorted(np.sort(ts.cm_tar), taus, side="left") / n_tar
        cm_acc_asv_rej_tar = (
            (n_tar - np.searchsorted(np.sort(ts.cm_tar), taus, side="left"))
            - (tar_acc.size - np.searchsorted(tar_acc, taus, side="left"))
        ) / n_tar
        acc_non = (non_acc.size - np.searchsorted(non_acc, taus, side="left")) / n_non
        acc_spf = (spf_acc.size - np.searchsorted(spf_acc, taus, side="left")) / n_spf
        cost = (
            c.pi_tar * c.c_miss * cm_rej_tar
            + c.pi_tar * c.c_miss * cm_acc_asv_rej_tar
            + c.pi_non * c.c_fa_non * acc_non
            + c.pi_spf * c.c_fa_spf * acc_spf
        )
        accept_all = cost[0]
        reject_all = c.pi_tar * c.c_miss
    elif method == "marginal":
        bona = np.sort(np.concatenate((ts.cm_tar, ts.cm_non)))
        p_miss_cm = rate_below(bona, taus)
        p_fa_cm = rate_at_or_above(np.sort(ts.cm_spf), taus)
        c0 = c.pi_tar * c.c_miss * p_miss_asv + c.pi_non * c.c_fa_non * p_fa_asv
        c1 = c.pi_tar * c.c_miss - c0
        c2 = c.pi_spf * c.c_fa_spf * p_fa_spf_asv
        cost = c0 + c1 * p_miss_cm + c2 * p_fa_cm
        accept_all, reject_all = c0 + c2, c0 + c1
    else:
        raise ValueError(f"unknown t-DCF method {method!r}")
    norm = min(accept_all, reject_all)
    if not norm > 0:
        raise DegenerateTandem("a dummy CM already has zero tandem cost; t-DCF is undefined")
    rates = {"p_miss_asv": p_miss_asv, "p_fa_asv": p_fa_asv, "p_fa_spf_asv": p_fa_spf_asv}
    return taus, cost / norm, rates


def t_dcf_constrained(
    ts: TandemScores,
    asv_threshold: float | str = "eer",
    cfg: SasvCostConfig | None = None,
    method: str = "joint",
) -> TdcfResult:
    """Minimum normalised t-DCF over CM thresholds at a fixed ASV threshold.

    ``asv_threshold="eer"`` places the ASV threshold at its target/nontarget
    EER point; a number fixes it directly.
    """
    cfg = cfg or SasvCostConfig()
    if isinstance(asv_threshold, str):
        if asv_threshold != "eer":
            raise ValueError(f"unknown ASV threshold policy {asv_threshold!r}")
        t_asv = asv_eer_threshold(ts.asv_tar, ts.asv_non)
    else:
        t_asv = float(asv_threshold)
    taus, curve, rates = t_dcf_curve(ts, t_asv, cfg.costs, method)
    i = int(np.argmin(curve))
    return TdcfResult(float(curve[i]), float(taus[i]), t_asv, rates)


# ---------------------------------------------------------------------------
# concurrent t-EER
#
# Thresholds are parametrised by a continuous rank position t in [0, K] over
# the K distinct scores u_0 < ... < u_{K-1}.  A trial of rank r is accepted
# with weight clip(r + 1 - t, 0, 1): integer t = k accepts exactly the
# scores >= u_k, and fractional t linearly interpolates between neighbouring
# operating points.  Tandem acceptance weight is the product of the ASV and
# CM weights, so all three rates are continuous and monotone in each
# coordinate.


class _RankedAxis:
    def __init__(self, values: np.ndarray):
        self.u = np.unique(values)
        self.k = self.u.size
        bounds = self.u[:-1] / 2 + self.u[1:] / 2
        bounds = np.where(bounds > self.u[:-1], bounds, self.u[1:])
        self.bounds = np.concatenate(([-np.inf], bounds, [np.inf]))

    def ranks(self, x: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.u, x)

    def threshold(self, t: float) -> float:
        return float(self.bounds[int(round(t))])


def _weight(rank: np.ndarray, t: float) -> np.ndarray:
    return np.clip(rank + 1.0 - t, 0.0, 1.0)


class _TandemSearch:
    def __init__(self, ts: TandemScores):
        self.asv = _RankedAxis(np.concatenate((ts.asv_tar, ts.asv_non, ts.asv_spf)))
        self.cm = _RankedAxis(np.concatenate((ts.cm_tar, ts.cm_non, ts.cm_spf)))
        self.classes = {}
        for tag in ("tar", "non", "spf"):
            a = getattr(ts, f"asv_{tag}")
            c = getattr(ts, f"cm_{tag}")
            self.classes[tag] = (self.asv.ranks(a), self.cm.ranks(c), a.size)

    def _tails(self, ta: float) -> dict:
        out = {}
        for tag, (ra, rc, n) in self.classes.items():
            out[tag] = _kernels.tail_sums(rc, _weight(ra, ta), self.cm.k) / n
        return out

    @staticmethod
    def _at(tail: np.ndarray, tc: float) -> float:
        k = int(math.floor(tc))
        if k >= tail.size - 1:
            return float(tail[-1])
        frac = tc - k
        return float(tail[k] + frac * (tail[k + 1] - tail[k]))

    def inner(self, ta: float):
        """CM position equalising target miss and spoof false alarm."""
        tails = self._tails(ta)
        g = (1.0 - tails["tar"]) - tails["spf"]
        k = int(np.argmax(g >= 0))  # g[-1] == 1, so a crossing exists
        if k == 0:
            tc = 0.0
        else:
            tc = (k - 1) + (-g[k - 1]) / (g[k] - g[k - 1])
        rates = {
            "p_miss": 1.0 - self._at(tails["tar"], tc),
            "p_fa_non": self._at(tails["non"], tc),
            "p_fa_spf": self._at(tails["spf"], tc),
        }
        return tc, rates

    def solve(self, max_iter: int = 200):
        lo, hi = 0.0, float(self.asv.k)
        tc, rates = self.inner(lo)
        if rates["p_miss"] - rates["p_fa_non"] >= 0:
            return lo, tc, rates
        best = None
        for _ in range(max_iter):
            mid = (lo + hi) / 2
            if mid in (lo, hi):
                break
            tc_m, r_m = self.inner(mid)
            if r_m["p_miss"] - r_m["p_fa_non"] >= 0:
                hi, best = mid, (mid, tc_m, r_m)
            else:
                lo = mid
        if best is None:
            return (hi,) + self.inner(hi)
        return best


def _discrete_rates(ts: TandemScores, t_asv: float, t_cm: float) -> dict:
    def acc(a, c):
        return np.count_nonzero((a >= t_asv) & (c >= t_cm)) / a.size

    return {
        "p_miss": 1.0 - acc(ts.asv_tar, ts.cm_tar),
        "p_fa_non": acc(ts.asv_non, ts.cm_non),
        "p_fa_spf": acc(ts.asv_spf, ts.cm_spf),
    }


def t_eer(ts: TandemScores, tol: float = T_EER_TOL) -> TeerResult:
    """Concurrent tandem EER via nested search (ASV outer, CM inner).

    Raises ``DegenerateTandem`` when the three rates at the solution differ
    by more than ``tol``.
    """
    search = _TandemSearch(ts)
    ta, tc, rates = search.solve()
    spread = max(rates.values()) - min(rates.values())
    if spread > tol:
        raise DegenerateTandem(
            f"no concurrent crossing: tandem rates {rates} differ by {spread:.3g} > {tol}"
        )
    tau_asv = search.asv.threshold(ta)
    tau_cm = search.cm.threshold(tc)
    value = sum(rates.values()) / 3
    return TeerResult(value, tau_asv, tau_cm, rates, _discrete_rates(ts, tau_asv, tau_cm))


def evaluate_sasv(
    target,
    nontarget,
    spoof,
    cfg: SasvCostConfig | None = None,
    tandem: TandemScores | None = None,
    asv_threshold: float | str = "eer",
    tdcf_method: str = "joint",
) -> SasvReport:
    cfg = cfg or SasvCostConfig()
    value, tau = min_a_dcf(a_dcf_curve(target, nontarget, spoof), cfg)
    if tandem is None:
        return SasvReport(value, tau)
    td = t_dcf_constrained(tandem, asv_threshold, cfg, tdcf_method)
    te = t_eer(tandem)
    return SasvReport(value, tau, td.value, te.value, te.tau_asv, te.tau_cm)
