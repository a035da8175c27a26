#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run from the repo root:

    PYTHONPATH=src python benchmarks/bench_kernels.py

The same comparison with the fallback forced everywhere:

    MODELPROBE_NO_NUMBA=1 PYTHONPATH=src python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from modelprobe import _kernels


def timeit(fn, *args, warmup: int = 2, runs: int = 5) -> float:
    for _ in range(warmup):
        fn(*args)
    t0 = time.perf_counter()
    for _ in range(runs):
        fn(*args)
    return (time.perf_counter() - t0) / runs


def bench_bin_assign():
    rng = np.random.default_rng(0)
    values = rng.normal(size=1_500_000)
    values[::97] = np.nan
    return ("bin_assign (1.5M values, 10 bins)", (values, -4.0, 4.0, 10))


def bench_anchor_distances():
    rng = np.random.default_rng(1)
    n, pn, pc = 100_000, 10, 5
    num = rng.normal(size=(n, pn))
    num[rng.random(size=(n, pn)) < 0.02] = np.nan
    cat = rng.integers(0, 8, size=(n, pc)).astype(np.int64)
    args = (
        num,
        num[0].copy(),
        rng.uniform(0.5, 2.0, size=pn),
        cat,
        cat[0].copy(),
        rng.uniform(0.1, 0.9, size=pc),
        False,
    )
    return ("anchor_distances (100k x 15 features, L1)", args)


def bench_threshold_sweep():
    rng = np.random.default_rng(2)
    n = 100_000
    scores = np.sort(rng.uniform(size=n))
    labels = rng.integers(0, 2, size=n).astype(np.int64)
    thresholds = np.unique(np.concatenate(([0.0, 1.0], (scores[:-1] + scores[1:]) / 2)))
    return ("threshold_sweep (100k scores, ~100k thresholds)", (scores, labels, thresholds))


def bench_target_scan():
    rng = np.random.default_rng(3)
    qty, cost, thr, offsets = [], [], [], [0]
    for _ in range(2):
        m = 20_000
        qty.append(np.sort(rng.uniform(size=m)))
        cost.append(rng.integers(0, 50, size=m).astype(float))
        thr.append(np.sort(rng.uniform(size=m)))
        offsets.append(offsets[-1] + m)
    args = (
        np.concatenate(qty),
        np.concatenate(cost),
        np.concatenate(thr),
        np.array(offsets, dtype=np.int64),
        np.arange(1001) / 1000.0,
    )
    return ("target_scan (2 slices x 20k candidates, 1001 targets)", args)


def bench_dense_forward():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(100_000, 40))
    W = rng.normal(size=(20, 40))
    b = rng.normal(size=20)
    return ("dense_forward (100k x 40 -> 20, relu)", (X, W, b, True))


BENCHES = [
    ("bin_assign", bench_bin_assign),
    ("anchor_distances", bench_anchor_distances),
    ("threshold_sweep", bench_threshold_sweep),
    ("target_scan", bench_target_scan),
    ("dense_forward", bench_dense_forward),
]


def main() -> None:
    print(f"numba active: {_kernels.NUMBA_ACTIVE}")
    print(f"{'kernel':<52} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    print("-" * 89)
    for name, build in BENCHES:
        label, args = build()
        numpy_fn = getattr(_kernels, f"{name}_numpy")
        numba_fn = getattr(_kernels, f"{name}_numba")
        t_np = timeit(numpy_fn, *args) * 1000
        if numba_fn is None:
            print(f"{label:<52} {t_np:>12.2f} {'n/a':>12} {'n/a':>9}")
            continue
        t_nb = timeit(numba_fn, *args) * 1000
        print(f"{label:<52} {t_np:>12.2f} {t_nb:>12.2f} {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
