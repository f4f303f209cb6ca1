import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asv5eval import _kernels
from asv5eval.calib import ape_sweep, pav_calibrate
from asv5eval.tandem import TandemScores, t_eer

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def test_env_flag_selects_backend(monkeypatch):
    monkeypatch.setenv("ASV5EVAL_NUMBA", "0")
    assert not _kernels.numba_enabled()
    monkeypatch.setenv("ASV5EVAL_NUMBA", "1")
    assert _kernels.numba_enabled() == _kernels.HAVE_NUMBA


@needs_numba
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=1, max_size=60))
def test_pav_blocks_backends_identical(points):
    w = np.array([max(p, q) + 1 for p, q in points], dtype=np.int64)
    pos = np.array([min(p, x) for (p, _), x in zip(points, w)], dtype=np.int64)
    a = _kernels.pav_blocks_numpy(pos, w)
    b = _kernels._pav_blocks_jit(pos, w)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


@needs_numba
@given(st.lists(st.tuples(st.integers(0, 9), st.floats(0, 1)), min_size=1, max_size=60))
def test_tail_sums_backends_identical(items):
    idx = np.array([i for i, _ in items], dtype=np.int64)
    w = np.array([v for _, v in items])
    assert np.array_equal(_kernels.tail_sums_numpy(idx, w, 10), _kernels._tail_sums_jit(idx, w, 10))


@needs_numba
@given(st.lists(st.floats(0.001, 1000), min_size=1, max_size=20),
       st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=40))
def test_min_cost_grid_backends_identical(betas, points):
    b = np.array(betas)
    pm = np.array([p for p, _ in points])
    pf = np.array([f for _, f in points])
    assert np.array_equal(_kernels.min_cost_grid_numpy(b, pm, pf), _kernels._min_cost_grid_jit(b, pm, pf))


@needs_numba
def test_end_to_end_results_do_not_depend_on_backend(monkeypatch, rng):
    bona, spoof = rng.normal(1, 1, 3000), rng.normal(-1, 1, 2000)
    ts = TandemScores(*(rng.normal(size=500) for _ in range(6)))

    def run():
        m = pav_calibrate(bona, spoof)
        return m.llr.tolist(), ape_sweep(bona, spoof).rows(), t_eer(ts).value

    monkeypatch.setenv("ASV5EVAL_NUMBA", "1")
    fast = run()
    monkeypatch.setenv("ASV5EVAL_NUMBA", "0")
    assert run() == fast
