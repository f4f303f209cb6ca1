import numpy as np
import pytest

from asv5eval import simgen
from asv5eval.detmetrics import eer, error_curve
from asv5eval.trialdata import load

# Phi(-1) from mpmath at 50 significant digits
PHI_MINUS_1 = 0.15865525393145705141


def test_analytic_eer():
    assert simgen.analytic_eer(0) == 0.5
    assert simgen.analytic_eer(2) == pytest.approx(PHI_MINUS_1, rel=1e-15)
    with pytest.raises(ValueError):
        simgen.analytic_eer(-1)


def test_same_seed_same_draws():
    m = simgen.GaussianModel.symmetric(2.0, 100, seed=4)
    a, b = simgen.sample(m), simgen.sample(m)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    other = simgen.sample(simgen.GaussianModel.symmetric(2.0, 100, seed=5))
    assert not np.array_equal(a[0], other[0])


def test_model_validation():
    with pytest.raises(ValueError):
        simgen.GaussianModel(-1.0, 1.0, 10, 10)
    with pytest.raises(ValueError):
        simgen.GaussianModel(1.0, 0.0, 0, 10)


def test_llr_of_sampled_scores():
    m = simgen.GaussianModel(1.5, -0.5, 3, 3)
    assert m.llr([0.5]).tolist() == [0.0]
    assert m.llr([1.5]).tolist() == [2.0]


@pytest.mark.parametrize("d", [0.0, 1.0, 2.0, 3.0])
def test_empirical_eer_within_three_se(d):
    n = 100_000
    bona, spoof = simgen.sample(simgen.GaussianModel.symmetric(d, n, seed=0))
    p = simgen.analytic_eer(d)
    se = np.sqrt(p * (1 - p) / n)
    assert abs(eer(error_curve(bona, spoof))[0] - p) <= 3 * se


def test_challenge_files_reparse_to_counts(tmp_path):
    for track in (1, 2):
        ch = simgen.SyntheticChallenge(track=track, n_bona=20, n_spoof=10, seed=1)
        manifest = ch.write(tmp_path / str(track), prefix="x_")
        joined = load(tmp_path / str(track) / "x_scores.txt", tmp_path / str(track) / "x_keys.txt", track)
        assert joined.counts == manifest["counts"]
        assert (tmp_path / str(track) / "x_simulation.json").exists()
    assert joined.has_triplets


def test_challenge_deterministic_and_probability_scores():
    a = simgen.SyntheticChallenge(seed=2, n_bona=5, n_spoof=5).generate()
    assert a == simgen.SyntheticChallenge(seed=2, n_bona=5, n_spoof=5).generate()
    s, _, _ = simgen.SyntheticChallenge(seed=2, n_bona=5, n_spoof=5, scores="probability").generate()
    vals = [float(line.split()[1]) for line in s]
    assert all(0 <= v <= 1 for v in vals)


def test_strength_scales_attacks():
    weak = simgen.SyntheticChallenge(strength=0.0, n_bona=5, n_spoof=5, codecs=(("none", None, 1.0),))
    s, k, _ = weak.generate()
    ref = simgen.SyntheticChallenge(n_bona=5, n_spoof=5, codecs=(("none", None, 1.0),)).generate()[0]
    spoof_rows = [i for i, line in enumerate(k) if " spoof " in line]
    # same standard-normal draws, shifted by the attack mean
    first = spoof_rows[0]
    assert float(ref[first].split()[1]) == pytest.approx(float(s[first].split()[1]) - 3.0)


def test_brute_pav_examples():
    assert simgen.brute_pav([1, 2, 3], [0, 0, 1]) == [0, 0, 1]
    assert simgen.brute_pav([1, 2], [1, 0]) == [0.5, 0.5]
    assert simgen.brute_pav([1, 1, 2], [1, 0, 1]) == [0.5, 0.5, 1]
    with pytest.raises(ValueError):
        simgen.brute_pav(list(range(9)), [0] * 9)


def test_brute_error_curve_example():
    assert simgen.brute_error_curve([0.0], [0.0]) == [(-np.inf, 0.0, 1.0), (np.inf, 1.0, 0.0)]
