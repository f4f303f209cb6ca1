"""Synthetic scores with known ground truth, and brute-force oracles.

Random numbers come from ``numpy.random.Generator(numpy.random.PCG64(seed))``
and ``Generator.standard_normal`` (ziggurat).  Draw order is part of the
contract and is documented on each sampler, so fixtures are reproducible
byte for byte.

The ``brute_*`` oracles are deliberately naive pure-Python loops that share
no code with the modules they check.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class GaussianModel:
    """Two unit-variance Gaussian classes.

    One stream of ``n_bona + n_spoof`` standard normals is drawn; the first
    ``n_bona`` become bona fide scores, the rest spoof scores.
    """

    mu_bona: float
    mu_spoof: float
    n_bona: int
    n_spoof: int
    seed: int = 0

    def __post_init__(self):
        if self.mu_bona < self.mu_spoof:
            raise ValueError("separation d = mu_bona - mu_spoof must be >= 0")
        if self.n_bona < 1 or self.n_spoof < 1:
            raise ValueError("trial counts must be >= 1")

    @classmethod
    def symmetric(cls, d: float, n: int, seed: int = 0) -> "GaussianModel":
        return cls(d / 2, -d / 2, n, n, seed)

    @property
    def d(self) -> float:
        return self.mu_bona - self.mu_spoof

    def llr(self, scores) -> np.ndarray:
        """Exact bona-vs-spoof log-likelihood ratio of a raw score."""
        mid = (self.mu_bona + self.mu_spoof) / 2
        return self.d * (np.asarray(scores) - mid)


def sample(model: GaussianModel) -> tuple[np.ndarray, np.ndarray]:
    z = _rng(model.seed).standard_normal(model.n_bona + model.n_spoof)
    return model.mu_bona + z[: model.n_bona], model.mu_spoof + z[model.n_bona :]


def sample_llr(d: float, n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Perfectly calibrated LLRs of the symmetric model with separation d."""
    model = GaussianModel.symmetric(d, n, seed)
    bona, spoof = sample(model)
    return model.llr(bona), model.llr(spoof)


def std_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def analytic_eer(d: float) -> float:
    """EER of two unit-variance Gaussians separated by d: Phi(-d/2)."""
    if d < 0:
        raise ValueError("d must be >= 0")
    return std_normal_cdf(-d / 2)


@dataclass(frozen=True)
class TandemModel:
    """ASV and CM scores for target / nontarget / spoof trials.

    ASV: targets and spoofs ~ N(+d_asv/2, 1), nontargets ~ N(-d_asv/2, 1).
    CM: bona fide (targets, nontargets) ~ N(+d_cm/2, 1), spoofs ~ N(-d_cm/2, 1).
    SASV = ASV + CM.  Draw order: for each class in (target, nontarget,
    spoof), n ASV normals then n CM normals, from one stream.
    """

    d_asv: float = 2.0
    d_cm: float = 2.0
    n: int = 1000
    seed: int = 0


def sample_tandem(model: TandemModel) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    rng = _rng(model.seed)
    ha, hc = model.d_asv / 2, model.d_cm / 2
    means = {"target": (ha, hc), "nontarget": (-ha, hc), "spoof": (ha, -hc)}
    out = {}
    for label, (ma, mc) in means.items():
        asv = ma + rng.standard_normal(model.n)
        cm = mc + rng.standard_normal(model.n)
        out[label] = (asv, cm)
    return out


# ---------------------------------------------------------------------------
# synthetic challenge: score + key files in trialdata formats

DEFAULT_ATTACKS = {"A17": 3.0, "A18": 1.5, "A19": 0.8, "A26": 2.5, "A27": 2.0}
DEFAULT_CODECS = (("none", None, 1.0), ("opus", 3, 0.8), ("encodec", 3, 0.5))


@dataclass(frozen=True)
class SyntheticChallenge:
    """A grid of attacks x codec conditions.

    For each codec condition ``(codec, quality, factor)`` in order: Track 1
    draws ``n_bona`` bona fide scores ~ N(0, 1), then for each attack in
    order ``n_spoof`` spoof scores ~ N(-factor * strength * d_attack, 1).  Track 2
    draws per condition ``n_bona`` targets, ``n_bona`` nontargets and per
    attack ``n_spoof`` spoofs, each as (ASV normal, CM normal) with
    ASV means +/- d_asv / 2 (spoofs at the target mean) and CM means 0 for
    bona fide and -factor * strength * d_attack for spoofs.  ``scores="probability"``
    passes every emitted score through a sigmoid.
    """

    track: int = 1
    attacks: dict = field(default_factory=lambda: dict(DEFAULT_ATTACKS))
    codecs: tuple = DEFAULT_CODECS
    n_bona: int = 200
    n_spoof: int = 100
    d_asv: float = 3.0
    seed: int = 0
    scores: str = "llr"
    triplets: bool = True
    n_speakers: int = 10
    strength: float = 1.0

    def config(self) -> dict:
        d = asdict(self)
        d["codecs"] = [list(c) for c in self.codecs]
        d["generator"] = "numpy PCG64 + Generator.standard_normal"
        return d

    def _emit(self, x: np.ndarray) -> np.ndarray:
        if self.scores == "probability":
            return 1.0 / (1.0 + np.exp(-x))
        if self.scores != "llr":
            raise ValueError(f"unknown score kind {self.scores!r}")
        return x

    def generate(self) -> tuple[list[str], list[str], dict]:
        """Returns (score lines, key lines, class counts)."""
        rng = _rng(self.seed)
        score_lines, key_lines = [], []
        counts: dict[str, int] = {}
        n_trial = 0

        def add(label, attack, codec, q, s, cm=None, asv=None, enroll=None):
            nonlocal n_trial
            n_trial += 1
            trial = f"T{self.track}_{n_trial:07d}"
            qs = "-" if q is None else str(q)
            if self.track == 1:
                score_lines.append(f"{trial} {s!r}")
                key_lines.append(f"{trial} {label} {attack} {codec} {qs}")
            else:
                cols = [enroll, trial, repr(s)]
                if self.triplets:
                    cols += [repr(cm), repr(asv)]
                score_lines.append(" ".join(cols))
                key_lines.append(f"{enroll} {trial} {label} {attack} {codec} {qs}")
            counts[label] = counts.get(label, 0) + 1

        for codec, q, factor in self.codecs:
            if self.track == 1:
                bona = self._emit(rng.standard_normal(self.n_bona))
                for s in bona:
                    add("bonafide", "-", codec, q, float(s))
                for attack, d in self.attacks.items():
                    spoof = self._emit(-factor * d * self.strength + rng.standard_normal(self.n_spoof))
                    for s in spoof:
                        add("spoof", attack, codec, q, float(s))
                continue
            ha = self.d_asv / 2
            blocks = [("target", "-", ha, 0.0, self.n_bona), ("nontarget", "-", -ha, 0.0, self.n_bona)]
            blocks += [("spoof", a, ha, -factor * d * self.strength, self.n_spoof) for a, d in self.attacks.items()]
            for label, attack, ma, mc, n in blocks:
                asv = ma + rng.standard_normal(n)
                cm = mc + rng.standard_normal(n)
                sasv = self._emit(asv + cm)
                cm_e, asv_e = self._emit(cm), self._emit(asv)
                for i in range(n):
                    enroll = f"spk{(n_trial % self.n_speakers):03d}"
                    add(label, attack, codec, q, float(sasv[i]), float(cm_e[i]), float(asv_e[i]), enroll)
        return score_lines, key_lines, counts

    def write(self, outdir, prefix: str = "") -> dict:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        scores, keys, counts = self.generate()
        sp = outdir / f"{prefix}scores.txt"
        kp = outdir / f"{prefix}keys.txt"
        sp.write_text("".join(line + "\n" for line in scores), encoding="utf-8")
        kp.write_text("".join(line + "\n" for line in keys), encoding="utf-8")
        manifest = {"model": self.config(), "counts": counts,
                    "files": {"scores": sp.name, "keys": kp.name}}
        (outdir / f"{prefix}simulation.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return manifest


# ---------------------------------------------------------------------------
# brute-force oracles


def _oracle_thresholds(values):
    distinct = sorted(set(values))
    ts = [-math.inf]
    for a, b in zip(distinct, distinct[1:]):
        m = (a + b) / 2
        ts.append(m if a < m else b)
    ts.append(math.inf)
    return ts


def brute_error_curve(bona, spoof):
    """[(threshold, p_miss, p_fa)] by direct counting at every candidate."""
    bona, spoof = [float(x) for x in bona], [float(x) for x in spoof]
    out = []
    for t in _oracle_thresholds(bona + spoof):
        miss = sum(1 for s in bona if s < t)
        fa = sum(1 for s in spoof if s >= t)
        out.append((t, miss / len(bona), fa / len(spoof)))
    return out


def brute_min_dcf(bona, spoof, beta: float = 1.9) -> float:
    if len(bona) + len(spoof) > 10_000:
        raise ValueError("oracle limited to 10^4 trials")
    return min(beta * m + f for _, m, f in brute_error_curve(bona, spoof))


def brute_min_a_dcf(target, nontarget, spoof, alpha: float = 1.58, gamma: float = 0.84) -> float:
    tar = [float(x) for x in target]
    non = [float(x) for x in nontarget]
    spf = [float(x) for x in spoof]
    best = math.inf
    for t in _oracle_thresholds(tar + non + spf):
        pm = sum(1 for s in tar if s < t) / len(tar)
        pn = sum(1 for s in non if s >= t) / len(non)
        ps = sum(1 for s in spf if s >= t) / len(spf)
        best = min(best, alpha * pm + (1 - gamma) * pn + gamma * ps)
    return best


def brute_a_dcf_curve(target, nontarget, spoof):
    tar, non, spf = list(target), list(nontarget), list(spoof)
    out = []
    for t in _oracle_thresholds(tar + non + spf):
        out.append((t,
                    sum(1 for s in tar if s < t) / len(tar),
                    sum(1 for s in non if s >= t) / len(non),
                    sum(1 for s in spf if s >= t) / len(spf)))
    return out


def brute_tandem_cost(trials, t_asv: float, costs) -> float:
    """Minimum normalised tandem cost over CM midpoints at fixed ASV threshold.

    ``trials`` is a list of (label, asv, cm).  Cascade: a target rejected by
    the CM costs c_miss, a target passed by the CM but rejected by the ASV
    costs c_miss, a nontarget or spoof accepted by both costs its false
    alarm cost; each term weighted by its class prior over class count.
    """
    n = {lab: sum(1 for l, _, _ in trials if l == lab) for lab in ("target", "nontarget", "spoof")}
    c = costs

    def cost_at(t_cm):
        per = {"target": 0, "nontarget": 0, "spoof": 0}
        for label, a, m in trials:
            both = a >= t_asv and m >= t_cm
            if label == "target" and not both:
                per["target"] += 1
            elif label != "target" and both:
                per[label] += 1
        return (c.pi_tar * c.c_miss * per["target"] / n["target"]
                 + c.pi_non * c.c_fa_non * per["nontarget"] / n["nontarget"]
                 + c.pi_spf * c.c_fa_spf * per["spoof"] / n["spoof"])

    ts = _oracle_thresholds([m for _, _, m in trials])
    costs_at = [cost_at(t) for t in ts]
    norm = min(costs_at[0], c.pi_tar * c.c_miss)
    return min(costs_at) / norm


def brute_pav(scores, labels) -> list[float]:
    """Isotonic fit of 0/1 labels by exhaustive search over contiguous poolings.

    Items are ordered by score; tied scores may not be split across pools.
    Returns fitted values in input order, each an exact ``count / size``.
    """
    n = len(scores)
    if n > 8:
        raise ValueError("exhaustive PAV oracle limited to n <= 8")
    order = sorted(range(n), key=lambda i: scores[i])
    s = [scores[i] for i in order]
    y = [int(labels[i]) for i in order]
    best, best_fit = None, None
    for cuts in itertools.product((False, True), repeat=n - 1):
        if any(c and s[i] == s[i + 1] for i, c in enumerate(cuts)):
            continue
        pools, start = [], 0
        for i, c in enumerate(cuts):
            if c:
                pools.append((start, i + 1))
                start = i + 1
        pools.append((start, n))
        means = [(sum(y[a:b]), b - a) for a, b in pools]
        if any(p1 * w2 > p2 * w1 for (p1, w1), (p2, w2) in zip(means, means[1:])):
            continue
        sse = sum(sum((Fraction(yi) - Fraction(p, w)) ** 2 for yi in y[a:b])
                  for (a, b), (p, w) in zip(pools, means))
        if best is None or sse < best:
            best = sse
            best_fit = [0.0] * n
            for (a, b), (p, w) in zip(pools, means):
                for j in range(a, b):
                    best_fit[order[j]] = p / w
    return best_fit
