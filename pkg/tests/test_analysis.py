import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asv5eval import conditions, simgen
from asv5eval.analysis import (GroupSummary, Slice, Submission, expand_slices, group_rollup, median,
                               median_top_half, primary_metric, quantiles, rank, select, slice_metrics,
                               top_half)
from asv5eval.detmetrics import CostConfig, evaluate_cm
from asv5eval.errors import (EmptyGroup, EmptySlice, InputError, TooFewSubmissions, TrialSetMismatch,
                             UnmappedAttack)
from asv5eval.tandem import SasvCostConfig, TandemScores, evaluate_sasv
from asv5eval.trialdata import load

from .conftest import write_lines


def _joined(tmp_path, rows, track=1):
    """rows: (trial, label, attack, codec, quality, score)."""
    scores = [f"{t} {s!r}" for t, _, _, _, _, s in rows]
    keys = [f"{t} {lab} {a} {c} {q}" for t, lab, a, c, q, _ in rows]
    return load(write_lines(tmp_path / "s.txt", scores), write_lines(tmp_path / "k.txt", keys), track)


# bona fide {0, 1}; attack A17 at -1, attack A18 at 0.5
TWO_ATTACKS = [
    ("b1", "bonafide", "-", "none", "-", 0.0),
    ("b2", "bonafide", "-", "opus", 3, 1.0),
    ("s1", "spoof", "A17", "none", "-", -1.0),
    ("s2", "spoof", "A18", "opus", 3, 0.5),
]


def test_slice_names_round_trip():
    for sl in (Slice("all"), Slice("attack", "A17"), Slice("group", "TTS"), Slice("codec", "opus"),
               Slice("codec_quality", ("opus", 3))):
        assert Slice.parse(sl.name) == sl
    assert Slice("codec_quality", ("mp3", "2")).name == "codec_quality:mp3/2"
    with pytest.raises(ValueError):
        Slice("speaker", "x")
    with pytest.raises(ValueError):
        Slice.parse("attack")


def test_expand_slices(tmp_path):
    j = _joined(tmp_path, TWO_ATTACKS)
    names = [s.name for s in expand_slices(j, ["all", "attack", "group", "codec", "codec_quality"])]
    assert names == ["all", "attack:A17", "attack:A18", "group:TTS", "group:adversarial",
                     "codec:none", "codec:opus", "codec_quality:opus/3"]


def test_select_policies(tmp_path):
    j = _joined(tmp_path, TWO_ATTACKS)
    pooled = select(j, Slice("attack", "A18"))
    assert pooled.counts == {"bonafide": 2, "spoof": 1}
    matched = select(j, Slice("attack", "A18"), policy="matched")
    assert matched.counts == {"bonafide": 1, "spoof": 1}
    assert list(matched.codecs) == ["opus", "opus"]
    codec = select(j, Slice("codec", "none"))
    assert codec.counts == {"bonafide": 1, "spoof": 1}
    with pytest.raises(ValueError):
        select(j, Slice("attack", "A17"), policy="weird")


def test_per_attack_metric_against_oracle(tmp_path):
    j = _joined(tmp_path, TWO_ATTACKS)
    res = {r.slice.name: r.report.min_dcf for r in slice_metrics(j, expand_slices(j, ["all", "attack"]))}
    assert res["attack:A17"] == simgen.brute_min_dcf([0.0, 1.0], [-1.0]) == 0.0
    assert res["attack:A18"] == pytest.approx(simgen.brute_min_dcf([0.0, 1.0], [0.5]), abs=1e-15)
    assert res["attack:A18"] == pytest.approx(0.95, abs=1e-15)
    # the pooled value is neither the mean nor the worst of the per-attack values
    assert res["all"] == pytest.approx(0.5, abs=1e-15)
    assert res["all"] not in (res["attack:A18"], (res["attack:A17"] + res["attack:A18"]) / 2)


def test_all_slice_equals_whole_set_evaluation(tmp_path):
    lines_s, lines_k = simgen.SyntheticChallenge(track=1, n_bona=200, n_spoof=300, seed=5).generate()[:2]
    j = load(write_lines(tmp_path / "s.txt", lines_s), write_lines(tmp_path / "k.txt", lines_k), 1)
    (r,) = slice_metrics(j, [Slice("all")])
    whole = evaluate_cm(j.class_scores("bonafide"), j.class_scores("spoof"), CostConfig())
    assert r.report == whole


def test_track2_all_slice_and_tandem(tmp_path):
    lines_s, lines_k = simgen.SyntheticChallenge(track=2, n_bona=150, n_spoof=150, seed=6).generate()[:2]
    j = load(write_lines(tmp_path / "s.txt", lines_s), write_lines(tmp_path / "k.txt", lines_k), 2)
    (r,) = slice_metrics(j, [Slice("all")], with_tandem=True)
    ts = TandemScores.from_arrays(j.asv_scores, j.cm_scores, j.labels)
    whole = evaluate_sasv(j.class_scores("target"), j.class_scores("nontarget"),
                          j.class_scores("spoof"), SasvCostConfig(), ts)
    assert r.report == whole
    assert r.n_bona == j.counts["target"] + j.counts["nontarget"]
    with pytest.raises(TypeError):
        slice_metrics(j, [Slice("all")], cfg=CostConfig())


def test_empty_slice(tmp_path):
    j = _joined(tmp_path, TWO_ATTACKS)
    with pytest.raises(EmptySlice):
        slice_metrics(j, [Slice("attack", "A99")])
    # no bona fide trial shares the encodec/2 condition of the A19 spoof
    j = _joined(tmp_path, TWO_ATTACKS + [("s3", "spoof", "A19", "encodec", 2, 0.1)])
    assert slice_metrics(j, [Slice("attack", "A19")])[0].n_bona == 2
    with pytest.raises(EmptySlice):
        slice_metrics(j, [Slice("attack", "A19")], policy="matched")


def test_groups(tmp_path):
    j = _joined(tmp_path, TWO_ATTACKS + [("s3", "spoof", "A99", "none", "-", 0.2)])
    with pytest.raises(UnmappedAttack):
        expand_slices(j, ["group"])
    gm = {"A17": "TTS", "A18": "adversarial", "A99": "TTS"}
    assert select(j, Slice("group", "TTS"), group_map=gm).counts == {"bonafide": 2, "spoof": 2}
    with pytest.raises(EmptyGroup):
        select(j, Slice("group", "VC"), group_map=gm)


def test_bitrate_table():
    assert conditions.bitrate("opus", 3) == 18.0
    assert conditions.bitrate("mp3", 1) == (45, 85)
    assert conditions.bitrate("encodec", 5) == 24.0
    with pytest.raises(ValueError):
        conditions.bitrate("opus", 0)
    with pytest.raises(KeyError):
        conditions.bitrate("flac", 1)


def test_codec_quality_result_carries_bitrate(tmp_path):
    j = _joined(tmp_path, TWO_ATTACKS + [("b3", "bonafide", "-", "opus", 3, 0.7),
                                         ("s4", "spoof", "A17", "opus", 3, -0.2)])
    (r,) = slice_metrics(j, [Slice("codec_quality", ("opus", 3))])
    assert r.bitrate_kbps == 18.0 and r.to_dict()["bitrate_kbps"] == 18.0


def test_group_map_file(tmp_path):
    p = tmp_path / "g.json"
    p.write_text('{"A17": "TTS"}')
    assert conditions.load_group_map(p) == {"A17": "TTS"}
    p.write_text('{"A17": "codec"}')
    with pytest.raises(InputError):
        conditions.load_group_map(p)
    with pytest.raises(InputError):
        conditions.load_group_map(tmp_path / "missing.json")


# -- aggregation -------------------------------------------------------------


def test_median_conventions():
    assert median([0.1, 0.3]) == pytest.approx(0.2)
    assert median([0.1, 0.3], average=False) == 0.1
    assert median([0.3, 0.1, 0.2]) == 0.2
    with pytest.raises(ValueError):
        median([])


def test_quantiles():
    q = quantiles([4.0, 1.0, 3.0, 2.0, 5.0])
    assert q == {"min": 1.0, "q1": 2.0, "median": 3.0, "q3": 4.0, "max": 5.0}


def test_median_top_half_cohort():
    overall = {"s1": 0.1, "s2": 0.2, "s3": 0.3, "s4": 0.4}
    per = {"s1": {"a": 0.2}, "s2": {"a": 0.4}, "s3": {"a": 0.0}, "s4": {"a": 0.0}}
    assert top_half(overall) == ["s1", "s2"]
    assert median_top_half(per, overall)["a"] == pytest.approx(0.3)
    odd = {"s1": 0.1, "s2": 0.2, "s3": 0.3}
    assert top_half(odd) == ["s1", "s2"]
    with pytest.raises(TooFewSubmissions):
        top_half({"s1": 0.1})
    with pytest.raises(TrialSetMismatch):
        median_top_half({"s1": {"a": 1}, "s2": {"b": 1}}, {"s1": 0.1, "s2": 0.2})


def test_median_top_half_identical_values():
    overall = {f"s{i}": 0.1 * i for i in range(5)}
    per = {s: {"x": 0.25} for s in overall}
    assert median_top_half(per, overall) == {"x": 0.25}


def test_top_half_ties_by_id():
    assert top_half({"b": 0.1, "a": 0.1, "c": 0.1, "d": 0.1}) == ["a", "b"]


@given(st.dictionaries(st.sampled_from("abcdefgh"), st.floats(0, 1), min_size=2), st.randoms())
def test_median_top_half_permutation_invariant(overall, rnd):
    per = {s: {"x": v / 2, "y": 1 - v} for s, v in overall.items()}
    keys = list(overall)
    rnd.shuffle(keys)
    shuffled_overall = {k: overall[k] for k in keys}
    shuffled_per = {k: per[k] for k in keys}
    assert median_top_half(per, overall) == median_top_half(shuffled_per, shuffled_overall)


# -- ranking -----------------------------------------------------------------


def _sub(name, bona, spoof, checksum="x"):
    return Submission(name, evaluate_cm(bona, spoof), checksum)


def test_rank_orders_by_primary_metric():
    good = _sub("good", [1, 2], [-1, -2])
    mid = _sub("mid", [0.0, 2.0], [-1.0, 0.5])
    bad = _sub("bad", [0.0], [0.0])
    lb = rank([bad, good, mid], track=1)
    assert lb.order == ["good", "mid", "bad"]
    assert [e.rank for e in lb.entries] == [1, 2, 3]
    d = lb.to_dict()
    assert d["metric"] == "min_dcf" and d["entries"][0]["min_dcf"] == 0.0
    assert "eer" in d["entries"][0]


def test_rank_ties_and_mismatch():
    a = _sub("a", [1.0], [0.0])
    b = _sub("b", [1.0], [0.0])
    assert rank([b, a], track=1).order == ["a", "b"]
    with pytest.raises(TrialSetMismatch):
        rank([a, _sub("c", [1.0], [0.0], checksum="y")], track=1)
    with pytest.raises(TooFewSubmissions):
        rank([], track=1)


@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), min_size=1, max_size=6))
def test_rank_is_sorted_permutation(pairs):
    subs = [_sub(f"s{i}", [b], [s]) for i, (b, s) in enumerate(pairs)]
    lb = rank(subs, track=1)
    assert sorted(lb.order) == sorted(s.id for s in subs)
    prim = [e.primary for e in lb.entries]
    assert prim == sorted(prim)
    assert all(e.primary == primary_metric(next(s for s in subs if s.id == e.submission).report)
               for e in lb.entries)


# -- group rollup -------------------------------------------------------------


def test_group_rollup_easiest_and_hardest():
    out = group_rollup({"A18": 0.4, "A27": 0.2, "A17": 0.1})
    assert set(out) == {"TTS", "adversarial"}
    adv = out["adversarial"]
    assert isinstance(adv, GroupSummary)
    assert (adv.easiest, adv.hardest) == ("A27", "A18")
    assert adv.to_dict()["median"] == pytest.approx(0.3)
    tie = group_rollup({"A18": 0.3, "A27": 0.3})["adversarial"]
    assert (tie.easiest, tie.hardest) == ("A18", "A18")


def test_group_rollup_errors():
    with pytest.raises(EmptyGroup):
        group_rollup({"A17": 0.1}, groups=["TTS", "VC"])
    with pytest.raises(UnmappedAttack):
        group_rollup({"A99": 0.1})


def test_default_group_map_is_valid():
    assert conditions.validate_group_map(conditions.DEFAULT_ATTACK_GROUPS)
    assert np.all([g in conditions.ATTACK_GROUPS for g in conditions.DEFAULT_ATTACK_GROUPS.values()])
