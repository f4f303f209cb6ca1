"""Time the compiled and pure-numpy kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 5]

Each kernel is run once per backend to warm up (and to check that both
backends agree bit for bit), then timed ``--repeat`` times; the best time
is reported.
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from asv5eval import _kernels, calib, tandem
from asv5eval.simgen import TandemModel, sample_llr, sample_tandem


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(n: int, seed: int):
    rng = np.random.default_rng(seed)
    bona, spoof = sample_llr(2.0, n, seed)
    pos = rng.integers(0, 3, n).astype(np.int64)
    weight = pos + rng.integers(1, 3, n).astype(np.int64)
    idx = rng.integers(0, n // 10, n)
    w = rng.random(n)
    curve_n = min(n, 20_000)
    pm = np.sort(rng.random(curve_n))
    pf = np.sort(rng.random(curve_n))[::-1].copy()
    betas = np.exp(np.linspace(-7, 7, 199))
    ts_data = sample_tandem(TandemModel(n=max(1000, n // 20), seed=seed))
    ts = tandem.TandemScores(*(ts_data[c][0] for c in ("target", "nontarget", "spoof")),
                             *(ts_data[c][1] for c in ("target", "nontarget", "spoof")))
    return {
        "pav_blocks": lambda: _kernels.pav_blocks(pos, weight),
        "tail_sums": lambda: _kernels.tail_sums(idx, w, n // 10),
        "min_cost_grid": lambda: _kernels.min_cost_grid(betas, pm, pf),
        "pav_calibrate (end to end)": lambda: calib.pav_calibrate(bona, spoof),
        "ape_sweep (end to end)": lambda: calib.ape_sweep(bona, spoof),
        "t_eer (end to end)": lambda: tandem.t_eer(ts),
    }


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if hasattr(a, "__dataclass_fields__"):
        return all(_same(getattr(a, f), getattr(b, f)) for f in a.__dataclass_fields__)
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    cases = _cases(args.n, args.seed)
    print(f"n={args.n} repeat={args.repeat}")
    print(f"{'kernel':30s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}  same")
    for name, fn in cases.items():
        times, outs = {}, {}
        for flag in ("1", "0"):
            os.environ["ASV5EVAL_NUMBA"] = flag
            outs[flag] = fn()
            times[flag] = _best(fn, args.repeat)
        os.environ.pop("ASV5EVAL_NUMBA", None)
        same = _same(outs["1"], outs["0"])
        print(f"{name:30s} {times['1']:10.4f} {times['0']:10.4f} "
              f"{times['0'] / times['1']:8.1f}x  {'yes' if same else 'NO'}")


if __name__ == "__main__":
    main()
