"""Hot numeric kernels with numba and pure-numpy implementations.

Every kernel exists twice: a loop version compiled with numba and a vectorized
numpy version. ``hdclt._accel.USING_NUMBA`` picks which one is exported; both
are importable for equivalence tests and benchmarks. Counting kernels return
integers, so the two backends agree exactly; summation kernels may differ by
float rounding (different accumulation orders) but each backend is
deterministic on its own.

Membership convention: closed at finite endpoints (lower <= x <= upper).
Infinite endpoints behave as open half-lines automatically.
"""

from __future__ import annotations

import numpy as np

from ._accel import USING_NUMBA, maybe_jit

__all__ = [
    "count_in_boxes",
    "empirical_max_stats",
    "count_in_boxes_numpy",
    "empirical_max_stats_numpy",
]

_jit = maybe_jit(cache=True, nogil=True)


# ---------------------------------------------------------------------------
# rectangle membership counting
# ---------------------------------------------------------------------------

def count_in_boxes_numpy(points: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Count points inside each closed box. points (m, p); lower/upper (k, p)."""
    m, p = points.shape
    k = lower.shape[0]
    out = np.zeros(k, dtype=np.int64)
    for r in range(k):
        mask = np.ones(m, dtype=bool)
        for j in range(p):
            lo = lower[r, j]
            hi = upper[r, j]
            col = points[:, j]
            if lo != -np.inf:
                mask &= col >= lo
            if hi != np.inf:
                mask &= col <= hi
            if not mask.any():
                break
        out[r] = np.count_nonzero(mask)
    return out


@_jit
def _count_in_boxes_loop(points, lower, upper):  # pragma: no cover - numba path
    m, p = points.shape
    k = lower.shape[0]
    out = np.zeros(k, dtype=np.int64)
    for r in range(k):
        c = 0
        for i in range(m):
            inside = True
            for j in range(p):
                x = points[i, j]
                if x < lower[r, j] or x > upper[r, j]:
                    inside = False
                    break
            if inside:
                c += 1
        out[r] = c
    return out


def _count_in_boxes_numba(points, lower, upper):
    return _count_in_boxes_loop(
        np.ascontiguousarray(points, dtype=np.float64),
        np.ascontiguousarray(lower, dtype=np.float64),
        np.ascontiguousarray(upper, dtype=np.float64),
    )


# ---------------------------------------------------------------------------
# empirical bootstrap resampling
# ---------------------------------------------------------------------------

def empirical_max_stats_numpy(data: np.ndarray, col_mean: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Max-abs centered column sums of resampled rows, scaled by 1/sqrt(n).

    data (n, p); col_mean (p,); indices (B, n) row picks with replacement.
    Replicate b returns max_j |sum_i data[indices[b, i], j] - n * col_mean_j| / sqrt(n).
    """
    n, p = data.shape
    b_count = indices.shape[0]
    counts = np.zeros((b_count, n), dtype=np.float64)
    np.add.at(counts, (np.arange(b_count)[:, None], indices), 1.0)
    sums = counts @ data
    sums -= n * col_mean
    return np.abs(sums).max(axis=1) / np.sqrt(n)


@_jit
def _empirical_max_stats_loop(data, col_mean, indices):  # pragma: no cover - numba path
    n, p = data.shape
    b_count = indices.shape[0]
    root_n = np.sqrt(n)
    out = np.empty(b_count, dtype=np.float64)
    sums = np.empty(p, dtype=np.float64)
    for b in range(b_count):
        for j in range(p):
            sums[j] = 0.0
        for i in range(n):
            row = indices[b, i]
            for j in range(p):
                sums[j] += data[row, j]
        best = 0.0
        for j in range(p):
            v = abs(sums[j] - n * col_mean[j])
            if v > best:
                best = v
        out[b] = best / root_n
    return out


def _empirical_max_stats_numba(data, col_mean, indices):
    return _empirical_max_stats_loop(
        np.ascontiguousarray(data, dtype=np.float64),
        np.ascontiguousarray(col_mean, dtype=np.float64),
        np.ascontiguousarray(indices, dtype=np.int64),
    )


if USING_NUMBA:
    count_in_boxes = _count_in_boxes_numba
    empirical_max_stats = _empirical_max_stats_numba
else:
    count_in_boxes = count_in_boxes_numpy
    empirical_max_stats = empirical_max_stats_numpy
