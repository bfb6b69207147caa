"""Empirical and Gaussian-multiplier bootstrap for the max statistic.

The statistic is M = max_j |sum_i X_ij| / sqrt(n). Both bootstrap engines
return the sorted replicate statistics together with the selected quantile;
simultaneous intervals, the mean test, and the coverage experiment all reduce
to the event max_j t_j <= q_hat over the per-coordinate values
t_j = |sum_i X_ij - n mu_j| / sqrt(n), so the interval formulation and the
max-statistic formulation agree exactly, not just in real arithmetic.

The multiplier engine uses the Gaussian identity: the normalized sum of n iid
N(0, S) vectors is one N(0, S) draw, so each replicate is a single draw
through the Cholesky factor of the sample covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ._kernels import empirical_max_stats
from .populations import SampleMatrix, cholesky_lower, sample_covariance, sample_population
from .util import ValidationError, child_seed, derive_rng

__all__ = [
    "BootstrapSummary",
    "SimultaneousIntervals",
    "CoverageReport",
    "METHOD_EMPIRICAL",
    "METHOD_MULTIPLIER",
    "coordinate_stats",
    "max_statistic",
    "empirical_resample",
    "multiplier_sample",
    "empirical_boot_vectors",
    "multiplier_boot_vectors",
    "bootstrap_quantile",
    "simultaneous_cis",
    "covers",
    "mean_test",
    "coverage_experiment",
    "DEFAULT_B",
    "DEFAULT_REPS",
]

METHOD_EMPIRICAL = "empirical"
METHOD_MULTIPLIER = "multiplier"
DEFAULT_B = 2000
DEFAULT_REPS = 2000


def _as_data(x) -> np.ndarray:
    data = x.data if isinstance(x, SampleMatrix) else np.asarray(x, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ValidationError("sample must be a nonempty 2-d matrix")
    return data


def coordinate_stats(x, mu: Optional[np.ndarray] = None) -> np.ndarray:
    """Per-coordinate values t_j = |sum_i X_ij - n mu_j| / sqrt(n).

    Every membership event in this module compares these same floats against
    a quantile, which is what makes the interval and max-statistic
    formulations exactly equivalent.
    """
    data = _as_data(x)
    n = data.shape[0]
    sums = data.sum(axis=0)
    if mu is not None:
        sums = sums - n * np.asarray(mu, dtype=np.float64)
    return np.abs(sums) / math.sqrt(n)


def max_statistic(x, mu: Optional[np.ndarray] = None) -> float:
    """Max-abs normalized column sum, optionally centered at a mean vector."""
    return float(coordinate_stats(x, mu).max())


@dataclass(frozen=True)
class BootstrapSummary:
    """Sorted replicate max statistics plus the quantile they select."""

    method: str
    B: int
    max_stats: np.ndarray
    alpha: float
    q_hat: float

    def __post_init__(self):
        if self.method not in (METHOD_EMPIRICAL, METHOD_MULTIPLIER):
            raise ValidationError("unknown bootstrap method %r" % (self.method,))
        stats = np.asarray(self.max_stats, dtype=np.float64)
        if stats.ndim != 1 or stats.shape[0] != self.B or self.B < 1:
            raise ValidationError("max_stats must hold exactly B values")
        if np.any(np.diff(stats) < 0):
            raise ValidationError("max_stats must be sorted ascending")
        if not (0.0 < self.alpha < 1.0):
            raise ValidationError("alpha must lie in (0, 1)")
        object.__setattr__(self, "max_stats", stats)
        expected = _order_statistic(stats, self.alpha)
        if not (self.q_hat == expected):
            raise ValidationError("q_hat does not match the selected order statistic")

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "B": self.B,
            "alpha": self.alpha,
            "q_hat": self.q_hat,
            "max_stats": [float(v) for v in self.max_stats],
        }


def _order_statistic(sorted_stats: np.ndarray, alpha: float) -> float:
    if not (0.0 < alpha < 1.0):
        raise ValidationError("alpha must lie in (0, 1)")
    b_count = sorted_stats.shape[0]
    # ceil((1-alpha) B) with a guard against float droop on exact integers
    rank = math.ceil((1.0 - alpha) * b_count - 1e-9)
    rank = min(max(rank, 1), b_count)
    return float(sorted_stats[rank - 1])


def bootstrap_quantile(summary: BootstrapSummary, alpha: float) -> float:
    """Smallest replicate value t with (number of replicates <= t)/B >= 1-alpha."""
    return _order_statistic(summary.max_stats, alpha)


def _summarize(method: str, stats: np.ndarray, alpha: float) -> BootstrapSummary:
    stats = np.sort(stats)
    return BootstrapSummary(
        method=method,
        B=stats.shape[0],
        max_stats=stats,
        alpha=alpha,
        q_hat=_order_statistic(stats, alpha),
    )


def empirical_resample(x, B: int, seed: int, alpha: float = 0.1) -> BootstrapSummary:
    """Resample rows with replacement; statistics of (1/sqrt n) sum (X* - Xbar)."""
    data = _as_data(x)
    if B < 1:
        raise ValidationError("B must be >= 1")
    n = data.shape[0]
    rng = derive_rng(seed, "empboot", n, data.shape[1])
    indices = rng.integers(0, n, size=(B, n), dtype=np.int64)
    col_mean = data.mean(axis=0)
    stats = empirical_max_stats(data, col_mean, indices)
    return _summarize(METHOD_EMPIRICAL, stats, alpha)


def multiplier_sample(x, B: int, seed: int, alpha: float = 0.1) -> BootstrapSummary:
    """Gaussian bootstrap from the sample covariance, one draw per replicate."""
    data = _as_data(x)
    if B < 1:
        raise ValidationError("B must be >= 1")
    sigma = sample_covariance(data)
    rng = derive_rng(seed, "multboot", data.shape[0], data.shape[1])
    if np.max(np.abs(sigma)) == 0.0:
        stats = np.zeros(B)
    else:
        lower, _ = cholesky_lower(sigma)
        draws = rng.standard_normal((B, data.shape[1])) @ lower.T
        stats = np.abs(draws).max(axis=1)
    return _summarize(METHOD_MULTIPLIER, stats, alpha)


def empirical_boot_vectors(x, B: int, seed: int) -> np.ndarray:
    """Replicate vectors (1/sqrt n) sum (X* - Xbar), shape (B, p).

    Same resampling stream as empirical_resample; the summary's max_stats are
    the max-abs coordinates of these rows up to accumulation order.
    """
    data = _as_data(x)
    if B < 1:
        raise ValidationError("B must be >= 1")
    n = data.shape[0]
    rng = derive_rng(seed, "empboot", n, data.shape[1])
    indices = rng.integers(0, n, size=(B, n), dtype=np.int64)
    counts = np.empty((B, n))
    for b in range(B):
        counts[b] = np.bincount(indices[b], minlength=n)
    vectors = counts @ data
    vectors -= n * data.mean(axis=0)
    return vectors / math.sqrt(n)


def multiplier_boot_vectors(x, B: int, seed: int) -> np.ndarray:
    """Replicate vectors N(0, sample covariance), shape (B, p)."""
    data = _as_data(x)
    if B < 1:
        raise ValidationError("B must be >= 1")
    sigma = sample_covariance(data)
    rng = derive_rng(seed, "multboot", data.shape[0], data.shape[1])
    if np.max(np.abs(sigma)) == 0.0:
        return np.zeros((B, data.shape[1]))
    lower, _ = cholesky_lower(sigma)
    return rng.standard_normal((B, data.shape[1])) @ lower.T


@dataclass(frozen=True)
class SimultaneousIntervals:
    """Coordinatewise intervals center +- half_width covering all means jointly."""

    centers: Tuple[float, ...]
    half_width: float
    alpha: float

    def __post_init__(self):
        if self.half_width < 0:
            raise ValidationError("half_width must be >= 0")

    def to_json_dict(self) -> dict:
        return {
            "centers": list(self.centers),
            "half_width": self.half_width,
            "alpha": self.alpha,
        }


def simultaneous_cis(x, summary: BootstrapSummary, alpha: float) -> SimultaneousIntervals:
    data = _as_data(x)
    q_hat = bootstrap_quantile(summary, alpha)
    return SimultaneousIntervals(
        centers=tuple(float(v) for v in data.mean(axis=0)),
        half_width=q_hat / math.sqrt(data.shape[0]),
        alpha=alpha,
    )


def covers(x, mu, q_hat: float) -> bool:
    """Joint coverage event: every coordinate stat at mu is within q_hat.

    Identical floats to max_statistic(x, mu) <= q_hat, so interval membership
    and the max-statistic event cannot disagree.
    """
    return bool(np.all(coordinate_stats(x, mu) <= q_hat))


def mean_test(x, summary: BootstrapSummary, alpha: float) -> bool:
    """Reject the all-zero-means null iff the max statistic exceeds q_hat."""
    return not covers(x, None, bootstrap_quantile(summary, alpha))


@dataclass
class CoverageReport:
    n: int
    p: int
    alpha: float
    B: int
    reps: int
    coverage: dict
    std_error: dict

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "alpha": self.alpha,
            "B": self.B,
            "reps": self.reps,
            "coverage": dict(self.coverage),
            "std_error": dict(self.std_error),
        }


def coverage_experiment(
    spec,
    n: int,
    alpha: float,
    B: int = DEFAULT_B,
    reps: int = DEFAULT_REPS,
    seed: int = 0,
) -> CoverageReport:
    """Fraction of datasets whose intervals cover the true (zero) mean vector.

    Each replicate dataset gets its own derived seeds keyed by replicate
    index, so results do not depend on scheduling. Both bootstrap methods run
    on the same datasets.
    """
    if reps < 100:
        raise ValidationError("reps must be >= 100")
    if not (0.0 < alpha < 1.0):
        raise ValidationError("alpha must lie in (0, 1)")
    hits = {METHOD_EMPIRICAL: 0, METHOD_MULTIPLIER: 0}
    for r in range(reps):
        sample = sample_population(spec, n, child_seed(seed, "coverage-data", r))
        stats = coordinate_stats(sample.data)
        observed = float(stats.max())
        emp = empirical_resample(sample.data, B, child_seed(seed, "coverage-emp", r), alpha)
        mult = multiplier_sample(sample.data, B, child_seed(seed, "coverage-mult", r), alpha)
        if observed <= emp.q_hat:
            hits[METHOD_EMPIRICAL] += 1
        if observed <= mult.q_hat:
            hits[METHOD_MULTIPLIER] += 1
    coverage = {m: hits[m] / reps for m in hits}
    std_error = {
        m: math.sqrt(max(coverage[m] * (1.0 - coverage[m]), 1.0 / reps) / reps)
        for m in coverage
    }
    return CoverageReport(
        n=n,
        p=spec.p,
        alpha=alpha,
        B=B,
        reps=reps,
        coverage=coverage,
        std_error=std_error,
    )
