"""Hot numeric kernels with two interchangeable implementations.

Each kernel exists as a numba ``@njit`` build (loop style, compiled and
disk-cached) and a pure-numpy build. Both are kept semantically identical,
including tie-breaking, so switching never changes results; they
cross-check each other in tests and ``benchmarks/bench_kernels.py``
compares their speed.

Defaults follow the benchmark: numba for bin_assign, anchor_distances and
dense_forward (4-13x), numpy for threshold_sweep and target_scan, where the
vectorized searchsorted formulation beats the compiled brute loop. Setting
``MODELPROBE_NO_NUMBA`` (or missing numba) forces the numpy path everywhere.
"""

from __future__ import annotations

import os

import numpy as np


def _numba_disabled() -> bool:
    return os.environ.get("MODELPROBE_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}


try:
    if _numba_disabled():
        raise ImportError("numba disabled via MODELPROBE_NO_NUMBA")
    from numba import njit

    NUMBA_ACTIVE = True
except ImportError:
    njit = None
    NUMBA_ACTIVE = False


# ---------------------------------------------------------------------------
# uniform-width bin assignment
# ---------------------------------------------------------------------------

def bin_assign_numpy(values: np.ndarray, lo: float, hi: float, nbins: int) -> np.ndarray:
    """Assign each value to a half-open [lo, hi) uniform bin.

    The maximum of the range lands in the last bin; NaN maps to -1.
    Values outside [lo, hi] are clamped into the edge bins.
    """
    out = np.full(values.shape[0], -1, dtype=np.int64)
    ok = ~np.isnan(values)
    if hi > lo:
        scaled = (values[ok] - lo) * (nbins / (hi - lo))
        idx = np.floor(scaled).astype(np.int64)
        np.clip(idx, 0, nbins - 1, out=idx)
        out[ok] = idx
    else:
        out[ok] = 0
    return out


def _bin_assign_loop(values, lo, hi, nbins):
    n = values.shape[0]
    out = np.full(n, -1, dtype=np.int64)
    if hi > lo:
        scale = nbins / (hi - lo)
        for i in range(n):
            v = values[i]
            if np.isnan(v):
                continue
            b = int(np.floor((v - lo) * scale))
            if b < 0:
                b = 0
            elif b > nbins - 1:
                b = nbins - 1
            out[i] = b
    else:
        for i in range(n):
            if not np.isnan(values[i]):
                out[i] = 0
    return out


# ---------------------------------------------------------------------------
# counterfactual distances from one anchor to every point
# ---------------------------------------------------------------------------
# Numeric features: |a-b|/std, 0 when std == 0, 1.0 when exactly one side is
# missing, 0 when both are. Categorical features are integer-coded with -1
# for missing: 0 when codes match (incl. both missing), else the feature's
# collision probability. norm_l2 switches the aggregate from sum to sqrt of
# sum of squares.

def anchor_distances_numpy(
    num: np.ndarray,
    num_anchor: np.ndarray,
    num_std: np.ndarray,
    cat: np.ndarray,
    cat_anchor: np.ndarray,
    cat_coll: np.ndarray,
    norm_l2: bool,
) -> np.ndarray:
    n = num.shape[0] if num.shape[1] else cat.shape[0]
    total = np.zeros(n, dtype=np.float64)
    if num.shape[1]:
        inv = np.where(num_std > 0.0, 1.0 / np.where(num_std > 0.0, num_std, 1.0), 0.0)
        d = np.abs(num - num_anchor[None, :]) * inv[None, :]
        col_nan = np.isnan(num)
        anc_nan = np.isnan(num_anchor)[None, :]
        d[col_nan & anc_nan] = 0.0
        d[col_nan ^ anc_nan] = 1.0
        total += np.square(d).sum(axis=1) if norm_l2 else d.sum(axis=1)
    if cat.shape[1]:
        differs = cat != cat_anchor[None, :]
        d = np.where(differs, cat_coll[None, :], 0.0)
        total += np.square(d).sum(axis=1) if norm_l2 else d.sum(axis=1)
    return np.sqrt(total) if norm_l2 else total


def _anchor_distances_loop(num, num_anchor, num_std, cat, cat_anchor, cat_coll, norm_l2):
    n = num.shape[0] if num.shape[1] else cat.shape[0]
    out = np.zeros(n, dtype=np.float64)
    for i in range(n):
        acc = 0.0
        for j in range(num.shape[1]):
            a = num_anchor[j]
            b = num[i, j]
            a_nan = np.isnan(a)
            b_nan = np.isnan(b)
            if a_nan and b_nan:
                d = 0.0
            elif a_nan or b_nan:
                d = 1.0
            elif num_std[j] > 0.0:
                d = abs(a - b) / num_std[j]
            else:
                d = 0.0
            acc += d * d if norm_l2 else d
        for j in range(cat.shape[1]):
            if cat[i, j] != cat_anchor[j]:
                d = cat_coll[j]
                acc += d * d if norm_l2 else d
        out[i] = np.sqrt(acc) if norm_l2 else acc
    return out


# ---------------------------------------------------------------------------
# confusion counts at many thresholds
# ---------------------------------------------------------------------------
# Inputs are scores sorted ascending with labels aligned (1 = positive).
# A point is predicted positive when score >= threshold.

def threshold_sweep_numpy(
    scores_sorted: np.ndarray, labels_sorted: np.ndarray, thresholds: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    n = scores_sorted.shape[0]
    total_pos = int(labels_sorted.sum())
    cum_pos = np.concatenate(([0], np.cumsum(labels_sorted)))
    below = np.searchsorted(scores_sorted, thresholds, side="left")
    fn = cum_pos[below]
    tp = total_pos - fn
    fp = (n - below) - tp
    tn = below - fn
    return tp.astype(np.int64), fp.astype(np.int64), tn.astype(np.int64), fn.astype(np.int64)


def _threshold_sweep_loop(scores_sorted, labels_sorted, thresholds):
    n = scores_sorted.shape[0]
    m = thresholds.shape[0]
    total_pos = 0
    for i in range(n):
        total_pos += labels_sorted[i]
    cum_pos = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        cum_pos[i + 1] = cum_pos[i] + labels_sorted[i]
    tp = np.empty(m, dtype=np.int64)
    fp = np.empty(m, dtype=np.int64)
    tn = np.empty(m, dtype=np.int64)
    fn = np.empty(m, dtype=np.int64)
    for t in range(m):
        below = np.searchsorted(scores_sorted, thresholds[t], side="left")
        fn[t] = cum_pos[below]
        tp[t] = total_pos - fn[t]
        fp[t] = (n - below) - tp[t]
        tn[t] = below - fn[t]
    return tp, fp, tn, fn


# ---------------------------------------------------------------------------
# fairness target scan
# ---------------------------------------------------------------------------
# Candidates for all slices are flattened into qty/cost/thr with offsets
# delimiting each slice. For every target tau, each slice picks the
# candidate minimizing (|qty - tau|, cost, thr) lexicographically; the tau
# minimizing (max qty - min qty, total cost) wins, first tau on full ties.
# Returns (best disparity, best total cost, chosen flat index per slice).

def target_scan_numpy(
    qty: np.ndarray,
    cost: np.ndarray,
    thr: np.ndarray,
    offsets: np.ndarray,
    taus: np.ndarray,
) -> tuple[float, float, np.ndarray]:
    n_slices = offsets.shape[0] - 1
    n_taus = taus.shape[0]
    chosen_q = np.empty((n_taus, n_slices))
    chosen_c = np.empty((n_taus, n_slices))
    chosen_i = np.empty((n_taus, n_slices), dtype=np.int64)
    for s in range(n_slices):
        lo, hi = offsets[s], offsets[s + 1]
        q, c, t = qty[lo:hi], cost[lo:hi], thr[lo:hi]
        order = np.lexsort((t, c, q))
        qs, cs = q[order], c[order]
        # one representative per distinct quantity: the (cost, thr)-minimal one
        keep = np.concatenate(([True], qs[1:] != qs[:-1]))
        rep_q, rep_c = qs[keep], cs[keep]
        rep_i = order[keep]
        pos = np.searchsorted(rep_q, taus)
        left = np.clip(pos - 1, 0, rep_q.shape[0] - 1)
        right = np.clip(pos, 0, rep_q.shape[0] - 1)
        dl = np.where(pos > 0, taus - rep_q[left], np.inf)
        dr = np.where(pos < rep_q.shape[0], rep_q[right] - taus, np.inf)
        rep_t = t[rep_i]
        pick_left = (dl < dr) | (
            (dl == dr)
            & ((rep_c[left] < rep_c[right])
               | ((rep_c[left] == rep_c[right]) & (rep_t[left] <= rep_t[right])))
        )
        sel = np.where(pick_left, left, right)
        chosen_q[:, s] = rep_q[sel]
        chosen_c[:, s] = rep_c[sel]
        chosen_i[:, s] = rep_i[sel] + lo
    disparity = chosen_q.max(axis=1) - chosen_q.min(axis=1)
    total_cost = chosen_c.sum(axis=1)
    best = np.lexsort((total_cost, disparity))[0]
    return float(disparity[best]), float(total_cost[best]), chosen_i[best].copy()


def _target_scan_loop(qty, cost, thr, offsets, taus):
    n_slices = offsets.shape[0] - 1
    chosen = np.empty(n_slices, dtype=np.int64)
    best_chosen = np.zeros(n_slices, dtype=np.int64)
    best_disp = np.inf
    best_cost = np.inf
    for t in range(taus.shape[0]):
        tau = taus[t]
        q_min = np.inf
        q_max = -np.inf
        total = 0.0
        for s in range(n_slices):
            lo, hi = offsets[s], offsets[s + 1]
            bi = lo
            bd = abs(qty[lo] - tau)
            bc = cost[lo]
            bt = thr[lo]
            for i in range(lo + 1, hi):
                d = abs(qty[i] - tau)
                if d < bd or (
                    d == bd and (cost[i] < bc or (cost[i] == bc and thr[i] < bt))
                ):
                    bi, bd, bc, bt = i, d, cost[i], thr[i]
            chosen[s] = bi
            if qty[bi] < q_min:
                q_min = qty[bi]
            if qty[bi] > q_max:
                q_max = qty[bi]
            total += bc
        disp = q_max - q_min
        if disp < best_disp or (disp == best_disp and total < best_cost):
            best_disp = disp
            best_cost = total
            best_chosen[:] = chosen
    return best_disp, best_cost, best_chosen


# ---------------------------------------------------------------------------
# dense layer forward pass
# ---------------------------------------------------------------------------
# Per-row matvec so a point's score is bit-identical whether it is inferred
# alone or inside a batch (matrix-matrix BLAS does not guarantee that), and
# identical between the numba and numpy paths. Single-row weight matrices
# take a special-cased reduction in numpy that compiled np.dot does not use,
# so both paths pad them to two rows and the shared multi-row matvec runs.

def _pad_single_row(W: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    W2 = np.empty((2, W.shape[1]))
    W2[0] = W[0]
    W2[1] = W[0]
    b2 = np.empty(2)
    b2[0] = b[0]
    b2[1] = b[0]
    return W2, b2


def dense_forward_numpy(X: np.ndarray, W: np.ndarray, b: np.ndarray, relu: bool) -> np.ndarray:
    m = W.shape[0]
    if m == 1:
        W, b = _pad_single_row(W, b)
    out = np.empty((X.shape[0], W.shape[0]))
    for i in range(X.shape[0]):
        out[i] = np.dot(W, X[i]) + b
    if relu:
        np.maximum(out, 0.0, out=out)
    return out[:, :m]


def _dense_forward_loop(X, W, b, relu):
    n = X.shape[0]
    m = W.shape[0]
    if m == 1:
        W2 = np.empty((2, W.shape[1]))
        W2[0] = W[0]
        W2[1] = W[0]
        b2 = np.empty(2)
        b2[0] = b[0]
        b2[1] = b[0]
        W, b = W2, b2
    rows = W.shape[0]
    out = np.empty((n, rows))
    for i in range(n):
        row = np.dot(W, X[i]) + b
        if relu:
            for j in range(rows):
                if row[j] < 0.0:
                    row[j] = 0.0
        out[i] = row
    return out[:, :m]


if NUMBA_ACTIVE:
    bin_assign_numba = njit(cache=True)(_bin_assign_loop)
    anchor_distances_numba = njit(cache=True)(_anchor_distances_loop)
    threshold_sweep_numba = njit(cache=True)(_threshold_sweep_loop)
    target_scan_numba = njit(cache=True)(_target_scan_loop)
    dense_forward_numba = njit(cache=True)(_dense_forward_loop)

    bin_assign = bin_assign_numba
    anchor_distances = anchor_distances_numba
    dense_forward = dense_forward_numba
else:
    bin_assign_numba = None
    anchor_distances_numba = None
    threshold_sweep_numba = None
    target_scan_numba = None
    dense_forward_numba = None

    bin_assign = bin_assign_numpy
    anchor_distances = anchor_distances_numpy
    dense_forward = dense_forward_numpy

# numpy wins these two regardless (see benchmarks/bench_kernels.py)
threshold_sweep = threshold_sweep_numpy
target_scan = target_scan_numpy


def warmup() -> None:
    """Force JIT compilation (or cache load) of every kernel on tiny inputs."""
    vals = np.array([0.0, 0.5, 1.0, np.nan])
    bin_assign(vals, 0.0, 1.0, 2)
    anchor_distances(
        np.array([[0.0], [1.0]]),
        np.array([0.0]),
        np.array([1.0]),
        np.array([[0], [1]], dtype=np.int64),
        np.array([0], dtype=np.int64),
        np.array([0.5]),
        False,
    )
    scores = np.array([0.2, 0.8])
    labels = np.array([0, 1], dtype=np.int64)
    threshold_sweep(scores, labels, np.array([0.5]))
    target_scan(
        np.array([0.0, 1.0, 0.5]),
        np.array([1.0, 0.0, 0.0]),
        np.array([0.0, 1.0, 0.5]),
        np.array([0, 2, 3], dtype=np.int64),
        np.array([0.0, 0.5, 1.0]),
    )
    dense_forward(np.zeros((1, 2)), np.zeros((1, 2)), np.zeros(1), True)
