"""Condition-sliced metrics, top-half medians, leaderboards and group roll-ups."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import conditions
from .detmetrics import CmReport, CostConfig, evaluate_cm
from .errors import (EmptyGroup, EmptySlice, MissingClass, TooFewSubmissions, TrialSetMismatch,
                     UnmappedAttack)
from .tandem import SasvCostConfig, SasvReport, TandemScores, evaluate_sasv
from .trialdata import NO_ATTACK, NO_CODEC, JoinedTrialSet

SLICE_KINDS = ("all", "attack", "group", "codec", "codec_quality")
PAIRING_POLICIES = ("pooled", "matched")


@dataclass(frozen=True)
class Slice:
    """A trial selector.

    ``value`` is an attack id, a group label, a codec id or a
    ``(codec, quality)`` pair depending on ``kind``; it is ``None`` for
    ``"all"``.
    """

    kind: str
    value: object = None

    def __post_init__(self):
        if self.kind not in SLICE_KINDS:
            raise ValueError(f"unknown slice kind {self.kind!r}; expected one of {SLICE_KINDS}")
        if (self.kind == "all") != (self.value is None):
            raise ValueError(f"slice kind {self.kind!r} and value {self.value!r} disagree")
        if self.kind == "codec_quality":
            codec, quality = self.value
            object.__setattr__(self, "value", (str(codec), int(quality)))

    @property
    def name(self) -> str:
        if self.kind == "all":
            return "all"
        if self.kind == "codec_quality":
            return f"codec_quality:{self.value[0]}/{self.value[1]}"
        return f"{self.kind}:{self.value}"

    @classmethod
    def parse(cls, text: str) -> "Slice":
        """Inverse of ``name``: ``all``, ``attack:A17``, ``codec_quality:opus/3``, ..."""
        if text == "all":
            return cls("all")
        kind, sep, value = text.partition(":")
        if not sep or not value:
            raise ValueError(f"cannot parse slice {text!r}")
        if kind == "codec_quality":
            codec, _, q = value.rpartition("/")
            return cls(kind, (codec, int(q)))
        return cls(kind, value)


@dataclass(frozen=True)
class SliceResult:
    slice: Slice
    report: CmReport | SasvReport
    counts: dict
    policy: str
    bitrate_kbps: object = None

    @property
    def n_bona(self) -> int:
        return sum(v for k, v in self.counts.items() if k != "spoof")

    @property
    def n_spoof(self) -> int:
        return self.counts.get("spoof", 0)

    def to_dict(self) -> dict:
        out = {
            "slice": self.slice.name,
            "metrics": self.report.to_dict(),
            "counts": dict(self.counts),
            "n_bona": self.n_bona,
            "n_spoof": self.n_spoof,
            "policy": self.policy,
        }
        if self.bitrate_kbps is not None:
            b = self.bitrate_kbps
            out["bitrate_kbps"] = list(b) if isinstance(b, tuple) else b
        return out


def expand_slices(joined: JoinedTrialSet, kinds, group_map: dict | None = None) -> list[Slice]:
    """Every slice of the requested kinds that has spoof trials in ``joined``."""
    spoof = joined.mask("spoof")
    attacks = sorted(set(joined.attacks[spoof]) - {NO_ATTACK})
    out: list[Slice] = []
    for kind in kinds:
        if kind == "all":
            out.append(Slice("all"))
        elif kind == "attack":
            out.extend(Slice("attack", a) for a in attacks)
        elif kind == "group":
            gm = resolve_group_map(attacks, group_map)
            out.extend(Slice("group", g) for g in conditions.ATTACK_GROUPS if g in gm.values())
        elif kind == "codec":
            out.extend(Slice("codec", c) for c in sorted(set(joined.codecs)))
        elif kind == "codec_quality":
            pairs = {(c, int(q)) for c, q in zip(joined.codecs, joined.qualities) if c != NO_CODEC}
            out.extend(Slice("codec_quality", p) for p in sorted(pairs))
        else:
            raise ValueError(f"unknown slice kind {kind!r}")
    return out


def resolve_group_map(attacks, group_map: dict | None = None) -> dict:
    """Restrict a group map to ``attacks``; every attack must be mapped."""
    gm = conditions.DEFAULT_ATTACK_GROUPS if group_map is None else group_map
    for a in sorted(attacks):
        if a not in gm:
            raise UnmappedAttack(a)
    return {a: gm[a] for a in sorted(attacks)}


def _condition_keys(joined: JoinedTrialSet) -> np.ndarray:
    return np.array([f"{c}/{q}" for c, q in zip(joined.codecs, joined.qualities)], dtype=object)


def select(joined: JoinedTrialSet, sl: Slice, policy: str = "pooled",
           group_map: dict | None = None) -> JoinedTrialSet:
    """Trials entering the metric for one slice under a pairing policy.

    Attack and group slices keep the matching spoof trials.  Under
    ``"pooled"`` every bona fide trial (target and nontarget for Track 2)
    is paired with them; under ``"matched"`` only bona fide trials whose
    codec condition occurs among the selected spoofs.  Codec slices restrict
    all classes alike.
    """
    if policy not in PAIRING_POLICIES:
        raise ValueError(f"unknown pairing policy {policy!r}; expected one of {PAIRING_POLICIES}")
    if sl.kind == "all":
        return joined
    spoof = joined.mask("spoof")
    if sl.kind in ("codec", "codec_quality"):
        keep = joined.codecs == sl.value[0] if sl.kind == "codec_quality" else joined.codecs == sl.value
        if sl.kind == "codec_quality":
            keep &= joined.qualities == sl.value[1]
        return joined.subset(keep)
    if sl.kind == "attack":
        chosen = spoof & (joined.attacks == sl.value)
    else:
        present = set(joined.attacks[spoof]) - {NO_ATTACK}
        gm = resolve_group_map(present, group_map)
        members = [a for a, g in gm.items() if g == sl.value]
        if not members:
            raise EmptyGroup(sl.value)
        chosen = spoof & np.isin(joined.attacks, members)
    bona = ~spoof
    if policy == "matched":
        cond = _condition_keys(joined)
        bona &= np.isin(cond, sorted(set(cond[chosen])))
    return joined.subset(chosen | bona)


def _evaluate(sub: JoinedTrialSet, cfg, eer_method: str, with_tandem: bool, context: str):
    want = CostConfig if sub.track == 1 else SasvCostConfig
    if cfg is None:
        cfg = want()
    elif not isinstance(cfg, want):
        raise TypeError(f"Track {sub.track} needs a {want.__name__}, got {type(cfg).__name__}")
    if sub.track == 1:
        sub.require(("bonafide", "spoof"), context)
        return evaluate_cm(sub.class_scores("bonafide"), sub.class_scores("spoof"), cfg, eer_method)
    sub.require(("target", "nontarget", "spoof"), context)
    tandem = None
    if with_tandem and sub.has_triplets:
        tandem = TandemScores.from_arrays(sub.asv_scores, sub.cm_scores, sub.labels)
    return evaluate_sasv(sub.class_scores("target"), sub.class_scores("nontarget"),
                         sub.class_scores("spoof"), cfg, tandem)


def slice_metrics(
    joined: JoinedTrialSet,
    slices,
    cfg: CostConfig | SasvCostConfig | None = None,
    policy: str = "pooled",
    group_map: dict | None = None,
    eer_method: str = "rocch",
    with_tandem: bool = False,
) -> list[SliceResult]:
    """Per-slice Track 1 ``CmReport`` or Track 2 ``SasvReport``.

    Raises ``EmptySlice`` when a slice lacks one of the classes its metric
    needs.  Tandem metrics are computed per slice only on request.
    """
    results = []
    for sl in slices:
        sub = select(joined, sl, policy, group_map)
        try:
            report = _evaluate(sub, cfg, eer_method, with_tandem, f"slice {sl.name}")
        except MissingClass as exc:
            raise EmptySlice(f"slice {sl.name} under policy {policy!r}: {exc}") from exc
        rate = None
        if sl.kind == "codec_quality" and sl.value[0] in conditions.CODEC_BITRATES_KBPS:
            rate = conditions.bitrate(*sl.value)
        results.append(SliceResult(sl, report, sub.counts, policy, rate))
    return results


def primary_metric(report: CmReport | SasvReport) -> float:
    return report.min_dcf if isinstance(report, CmReport) else report.min_a_dcf


def primary_name(track: int) -> str:
    return "min_dcf" if track == 1 else "min_a_dcf"


# ---------------------------------------------------------------------------
# aggregation


def median(values, average: bool = True) -> float:
    """Median; for even counts the mean of the middle pair, or the lower one."""
    v = sorted(float(x) for x in values)
    if not v:
        raise ValueError("median of an empty sequence")
    n = len(v)
    if n % 2:
        return v[n // 2]
    lo, hi = v[n // 2 - 1], v[n // 2]
    return (lo + hi) / 2 if average else lo


def quantiles(values) -> dict:
    """Five-number summary (numpy linear-interpolation quartiles)."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        raise ValueError("quantiles of an empty sequence")
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return {"min": float(v[0]), "q1": float(q1), "median": float(med),
            "q3": float(q3), "max": float(v[-1])}


def top_half(overall: dict) -> list[str]:
    """Best ceil(n/2) submission ids by overall primary metric, ties by id."""
    if len(overall) < 2:
        raise TooFewSubmissions(f"need at least 2 submissions, got {len(overall)}")
    order = sorted(overall, key=lambda s: (overall[s], s))
    return order[: math.ceil(len(order) / 2)]


def median_top_half(per_slice: dict, overall: dict, average: bool = True) -> dict:
    """Median of each slice's values over the top-half cohort.

    ``per_slice`` maps submission id -> {slice name -> value};
    ``overall`` maps submission id -> overall primary metric.
    """
    if set(per_slice) != set(overall):
        raise TrialSetMismatch("per-slice and overall submissions differ")
    cohort = top_half(overall)
    names = set(per_slice[cohort[0]])
    for s in sorted(per_slice):
        if set(per_slice[s]) != names:
            raise TrialSetMismatch(f"submission {s} has a different slice set")
    return {n: median([per_slice[s][n] for s in cohort], average) for n in sorted(names)}


def top_half_quantiles(per_slice: dict, overall: dict) -> dict:
    cohort = top_half(overall)
    names = sorted(per_slice[cohort[0]])
    return {n: quantiles([per_slice[s][n] for s in cohort]) for n in names}


# ---------------------------------------------------------------------------
# ranking


@dataclass(frozen=True)
class Submission:
    id: str
    report: CmReport | SasvReport
    checksum: str


@dataclass(frozen=True)
class LeaderboardEntry:
    rank: int
    submission: str
    primary: float
    secondary: dict


@dataclass(frozen=True)
class Leaderboard:
    track: int
    condition: str
    metric: str
    entries: tuple[LeaderboardEntry, ...] = field(default_factory=tuple)

    @property
    def order(self) -> list[str]:
        return [e.submission for e in self.entries]

    def to_dict(self) -> dict:
        return {
            "track": self.track,
            "condition": self.condition,
            "metric": self.metric,
            "entries": [
                {"rank": e.rank, "submission": e.submission, self.metric: e.primary, **e.secondary}
                for e in self.entries
            ],
        }


def rank(submissions, track: int, condition: str = "open") -> Leaderboard:
    """Ascending primary metric; ties broken by submission id.

    All submissions must share one trial set (compared by checksum).
    """
    subs = list(submissions)
    if not subs:
        raise TooFewSubmissions("no submissions to rank")
    ids = [s.id for s in subs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate submission ids")
    ref = subs[0].checksum
    for s in subs[1:]:
        if s.checksum != ref:
            raise TrialSetMismatch(f"submission {s.id} was scored on a different trial set than {subs[0].id}")
    metric = primary_name(track)
    subs.sort(key=lambda s: (primary_metric(s.report), s.id))
    entries = []
    for i, s in enumerate(subs, start=1):
        d = s.report.to_dict()
        primary = d.pop(metric)
        entries.append(LeaderboardEntry(i, s.id, primary, d))
    return Leaderboard(track, condition, metric, tuple(entries))


# ---------------------------------------------------------------------------
# attack groups


@dataclass(frozen=True)
class GroupSummary:
    group: str
    values: dict
    easiest: str
    hardest: str

    def to_dict(self) -> dict:
        return {"group": self.group, "values": dict(self.values), "easiest": self.easiest,
                "hardest": self.hardest, **quantiles(list(self.values.values()))}


def group_rollup(attack_values: dict, group_map: dict | None = None, groups=None) -> dict:
    """Group per-attack values and mark the easiest (min) and hardest (max) attack.

    Every attack must be mapped.  Groups listed in ``groups`` that end up
    with no attacks raise ``EmptyGroup``; by default only groups with
    members are reported.
    """
    gm = resolve_group_map(attack_values, group_map)
    wanted = tuple(groups) if groups is not None else tuple(
        g for g in conditions.ATTACK_GROUPS if g in gm.values())
    out = {}
    for g in wanted:
        vals = {a: float(attack_values[a]) for a in sorted(gm) if gm[a] == g}
        if not vals:
            raise EmptyGroup(g)
        easiest = min(vals, key=lambda a: (vals[a], a))
        hardest = min(vals, key=lambda a: (-vals[a], a))
        out[g] = GroupSummary(g, vals, easiest, hardest)
    return out
