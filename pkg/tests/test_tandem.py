import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asv5eval import simgen
from asv5eval.detmetrics import CostConfig, error_curve, min_dcf
from asv5eval.errors import DegenerateTandem, MissingClass
from asv5eval.tandem import (DEFAULT_ALPHA, DEFAULT_GAMMA, SasvCostConfig, SasvReport, TandemCosts,
                             TandemScores, a_dcf, a_dcf_curve, asv_eer_threshold, evaluate_sasv,
                             min_a_dcf, t_dcf_constrained, t_eer)

from .conftest import load_golden

# Concurrent t-EER of the Gaussian tandem model (ASV target/spoof mean +1,
# nontarget -1; CM bona fide +1, spoof -1; unit variances).  Solved with
# mpmath.findroot on the three closed-form tandem rates at 40 digits.
GAUSSIAN_TANDEM_T_EER = 0.20144527981196430544

# (label, asv, cm); the ASV EER threshold, found by hand from the nearest
# crossing of target {2, 1, 0.5} against nontarget {-1, 0.7}, is 0.6.
EIGHT_TRIALS = [
    ("target", 2.0, 1.5), ("target", 1.0, -0.5), ("target", 0.5, 0.8),
    ("nontarget", -1.0, 1.0), ("nontarget", 0.7, 0.2),
    ("spoof", 1.5, -1.0), ("spoof", 0.9, 0.6), ("spoof", -0.5, -2.0),
]
# brute_tandem_cost(EIGHT_TRIALS, 0.6, TandemCosts())
EIGHT_TRIALS_T_DCF = 0.7599615938550168


def _ts(trials):
    labels = np.array([t[0] for t in trials])
    return TandemScores.from_arrays([t[1] for t in trials], [t[2] for t in trials], labels)


def _arr(*x):
    return np.array(x, dtype=float)


def test_default_costs_reproduce_weights():
    c = TandemCosts()
    assert c.alpha == pytest.approx(0.9405 / 0.595, abs=1e-12)
    assert c.gamma == pytest.approx(0.5 / 0.595, abs=1e-12)
    assert round(c.alpha, 2) == DEFAULT_ALPHA and round(c.gamma, 2) == DEFAULT_GAMMA


def test_sasv_config_consistency_check():
    cfg = SasvCostConfig()
    assert (cfg.alpha, cfg.gamma, cfg.override) == (1.58, 0.84, True)
    with pytest.raises(ValueError, match="disagree"):
        SasvCostConfig(override=False)
    derived = SasvCostConfig.from_costs(TandemCosts())
    assert derived.alpha == TandemCosts().alpha
    with pytest.raises(ValueError):
        SasvCostConfig(gamma=1.0)
    with pytest.raises(ValueError):
        TandemCosts(pi_tar=0.5)


def test_a_dcf_curve_examples():
    c = a_dcf_curve([1.0], [-1.0], [-1.0])
    pts = set(zip(c.p_miss, c.p_fa_non, c.p_fa_spf))
    assert (0, 0, 0) in pts
    c = a_dcf_curve([0.0], [0.0], [0.0])
    assert list(zip(c.p_miss, c.p_fa_non, c.p_fa_spf)) == [(0, 1, 1), (1, 0, 0)]


def test_a_dcf_curve_golden():
    g = load_golden("a_dcf_curve_5trial.json")
    c = a_dcf_curve(g["target"], g["nontarget"], g["spoof"])
    rows = [list(r) for r in zip(c.thresholds.tolist(), c.p_miss.tolist(), c.p_fa_non.tolist(),
                                 c.p_fa_spf.tolist())]
    assert rows == g["curve"]
    assert min_a_dcf(c)[0] == g["min_a_dcf"]


def test_min_a_dcf_examples():
    assert min_a_dcf(a_dcf_curve([1, 2], [-1], [-2]))[0] == 0.0
    assert min_a_dcf(a_dcf_curve([0.0], [0.0], [0.0]))[0] == 1.0
    assert a_dcf(1, 0, 0) == 1.58


def test_missing_class():
    with pytest.raises(MissingClass):
        a_dcf_curve([1.0], [], [0.0])


def test_asv_eer_threshold_hand_value():
    assert asv_eer_threshold(_arr(2, 1, 0.5), _arr(-1, 0.7)) == 0.6


def test_t_dcf_examples():
    perfect = TandemScores(_arr(1, 2), _arr(-1, -2), _arr(1, 2), _arr(1, 2), _arr(1, 2), _arr(-1, -2))
    assert t_dcf_constrained(perfect).value == 0.0
    const_cm = TandemScores(_arr(1, 2), _arr(-1, -2), _arr(1, 2), _arr(0, 0), _arr(0, 0), _arr(0, 0))
    assert t_dcf_constrained(const_cm).value == 1.0
    assert t_dcf_constrained(const_cm, method="marginal").value == 1.0


def test_t_dcf_eight_trial_golden():
    res = t_dcf_constrained(_ts(EIGHT_TRIALS))
    assert res.tau_asv == 0.6
    assert res.value == pytest.approx(EIGHT_TRIALS_T_DCF, abs=1e-15)


def test_t_dcf_unknown_method_and_policy():
    ts = _ts(EIGHT_TRIALS)
    with pytest.raises(ValueError):
        t_dcf_constrained(ts, method="magic")
    with pytest.raises(ValueError):
        t_dcf_constrained(ts, asv_threshold="median")


def test_t_dcf_zero_normalizer_raises():
    # every ASV decision already perfect and every spoof rejected by ASV:
    # the accept-all CM dummy costs nothing
    ts = TandemScores(_arr(1, 2), _arr(-1, -2), _arr(-1, -2), _arr(0, 1), _arr(0, 1), _arr(0, 1))
    with pytest.raises(DegenerateTandem):
        t_dcf_constrained(ts)


@pytest.mark.parametrize("method", ["joint", "marginal"])
def test_perfect_asv_reduces_to_cm_dcf(rng, method):
    n = 40
    cm_tar = rng.normal(1, 1, n)
    cm_non = cm_tar.copy() if method == "marginal" else rng.normal(1, 1, n)
    cm_spf = rng.normal(-1, 1, n)
    ts = TandemScores(np.full(n, 5.0), np.full(n, -5.0), np.full(n, 5.0), cm_tar, cm_non, cm_spf)
    costs = TandemCosts()
    beta = costs.pi_tar * costs.c_miss / (costs.pi_spf * costs.c_fa_spf)
    expected = min_dcf(error_curve(cm_tar, cm_spf), CostConfig(beta=beta))[0] / min(beta, 1.0)
    got = t_dcf_constrained(ts, method=method).value
    assert got == pytest.approx(expected, rel=1e-12)


small_scores = st.lists(st.integers(-3, 3).map(float), min_size=1, max_size=3)


@st.composite
def tandem_trials(draw):
    trials = []
    for label in ("target", "nontarget", "spoof"):
        asv = draw(small_scores)
        cm = draw(st.lists(st.integers(-3, 3).map(float), min_size=len(asv), max_size=len(asv)))
        trials += [(label, a, c) for a, c in zip(asv, cm)]
    return trials


@given(tandem_trials(), st.sampled_from([-2.5, -0.5, 0.5, 1.5]))
def test_t_dcf_matches_counting_oracle(trials, t_asv):
    ts = _ts(trials)
    try:
        got = t_dcf_constrained(ts, t_asv).value
    except DegenerateTandem:
        with pytest.raises(ZeroDivisionError):
            simgen.brute_tandem_cost(trials, t_asv, TandemCosts())
        return
    assert got == pytest.approx(simgen.brute_tandem_cost(trials, t_asv, TandemCosts()), rel=1e-12)


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=8),
       st.lists(st.floats(-3, 3), min_size=2, max_size=8), st.data())
def test_t_dcf_monotone_in_cm_quality(cm_tar, cm_spf, data):
    n_t, n_s = len(cm_tar), len(cm_spf)
    cm_tar, cm_spf = np.array(cm_tar), np.array(cm_spf)
    ts = TandemScores(np.full(n_t, 5.0), np.full(3, -5.0), np.full(n_s, 5.0),
                      cm_tar, np.zeros(3), cm_spf)
    i = data.draw(st.integers(0, n_t - 1))
    j = data.draw(st.integers(0, n_s - 1))
    if cm_tar[i] <= cm_spf[j]:
        return
    worse_tar, worse_spf = cm_tar.copy(), cm_spf.copy()
    worse_tar[i], worse_spf[j] = cm_spf[j], cm_tar[i]
    worse = TandemScores(ts.asv_tar, ts.asv_non, ts.asv_spf, worse_tar, ts.cm_non, worse_spf)
    assert t_dcf_constrained(worse).value >= t_dcf_constrained(ts).value


def test_t_eer_examples():
    perfect = TandemScores(_arr(1, 2), _arr(-1, -2), _arr(1, 2), _arr(1, 2), _arr(1, 2), _arr(-1, -2))
    assert t_eer(perfect).value == 0.0
    const = TandemScores(*(np.zeros(2) for _ in range(6)))
    res = t_eer(const)
    assert res.value == 0.5
    assert res.rates == {"p_miss": 0.5, "p_fa_non": 0.5, "p_fa_spf": 0.5}


def test_t_eer_degenerate():
    ts = TandemScores(_arr(0, 1), _arr(0, 1), _arr(0, 1), _arr(0, 1), _arr(-10, -10), _arr(0, 1))
    with pytest.raises(DegenerateTandem):
        t_eer(ts)


def test_t_eer_gaussian_tandem_matches_closed_form():
    data = simgen.sample_tandem(simgen.TandemModel(d_asv=2, d_cm=2, n=100_000, seed=0))
    ts = TandemScores(*(data[c][0] for c in ("target", "nontarget", "spoof")),
                      *(data[c][1] for c in ("target", "nontarget", "spoof")))
    res = t_eer(ts)
    assert max(res.rates.values()) - min(res.rates.values()) <= 1e-4
    se = np.sqrt(GAUSSIAN_TANDEM_T_EER * (1 - GAUSSIAN_TANDEM_T_EER) / 100_000)
    assert abs(res.value - GAUSSIAN_TANDEM_T_EER) <= 3 * se
    # discrete counting at the reported thresholds sits within one trial step
    for k, v in res.discrete_rates.items():
        assert abs(v - res.rates[k]) <= 2e-5


@given(tandem_trials())
def test_t_eer_rates_agree_or_degenerate(trials):
    ts = _ts(trials)
    try:
        res = t_eer(ts)
    except DegenerateTandem:
        return
    assert max(res.rates.values()) - min(res.rates.values()) <= 1e-4
    assert 0 <= res.value <= 1


def test_evaluate_sasv_fields():
    ts = _ts(EIGHT_TRIALS)
    sasv_only = evaluate_sasv(ts.asv_tar, ts.asv_non, ts.asv_spf)
    assert set(sasv_only.to_dict()) == {"min_a_dcf", "tau_sasv"}
    full = evaluate_sasv(ts.asv_tar + ts.cm_tar, ts.asv_non + ts.cm_non, ts.asv_spf + ts.cm_spf,
                         tandem=ts)
    assert isinstance(full, SasvReport)
    assert set(full.to_dict()) == {"min_a_dcf", "tau_sasv", "t_dcf", "t_eer", "tau_asv", "tau_cm"}
