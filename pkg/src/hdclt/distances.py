"""Rectangle probabilities and Kolmogorov-type sup distances over finite families.

Estimates P(cloud in A) empirically, P(N(0, Sigma) in A) exactly for diagonal
Sigma or by antithetic Monte Carlo otherwise, and supplies two exact reference
laws (diagonal Gaussian; normalized n-fold Rademacher sums via the binomial
CDF). The sup distance over a rectangle family accepts any mix of point clouds
and exact oracles on either side.

Also houses two distributional checks used by the acceptance suite: boundary
mass of inflated-minus-deflated rectangles against the t*sqrt(log p)/sigma
anti-concentration envelope, and a pointwise coupled-indicator inequality that
must hold outcome by outcome.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln, ndtr

from ._kernels import count_in_boxes
from .populations import cholesky_lower
from .rectangles import (
    EMPTY,
    Hyperrectangle,
    RectangleFamily,
    contains_batch,
    corner_set,
    enlarge,
    make_family,
    rectangle,
    shrink,
    symmetric_box,
)
from .util import ValidationError, clipped_log, derive_rng

__all__ = [
    "RectProbEstimate",
    "DistanceEstimate",
    "empirical_rect_prob",
    "gaussian_rect_prob",
    "binomial_clt_oracle",
    "orthant_corner_prob",
    "DiagonalGaussianOracle",
    "NormalizedRademacherOracle",
    "kolmogorov_sup",
    "write_distance_csv",
    "nazarov_check",
    "NazarovReport",
    "coupling_check",
    "CouplingReport",
    "family_refinement_curve",
]

_LATTICE_SLACK = 1e-9


@dataclass(frozen=True)
class RectProbEstimate:
    """A rectangle probability with its Monte Carlo error (0 for exact methods)."""

    value: float
    mc_std_error: float
    method: str

    def __post_init__(self):
        if self.method not in ("MonteCarlo", "ExactProduct", "ExactBinomial"):
            raise ValidationError("unknown probability method %r" % (self.method,))
        if not (-1e-12 <= self.value <= 1.0 + 1e-12):
            raise ValidationError("probability outside [0,1]")
        if self.method != "MonteCarlo" and self.mc_std_error != 0.0:
            raise ValidationError("exact methods carry zero std error")


@dataclass(frozen=True)
class DistanceEstimate:
    """Sup over a family of |p_P(A) - p_Q(A)| with per-rectangle detail."""

    value: float
    per_rectangle: Tuple[Tuple[str, float], ...]
    mc_std_error: float
    argmax_id: str
    family_kind: str
    p_hat_p: Tuple[float, ...]
    p_hat_q: Tuple[float, ...]


def _cloud_array(cloud) -> np.ndarray:
    data = getattr(cloud, "data", cloud)
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValidationError("point cloud must be a nonempty (m, p) array")
    return arr


def empirical_rect_prob(cloud, rect) -> RectProbEstimate:
    """Fraction of cloud points inside the rectangle, with binomial std error."""
    if rect is EMPTY:
        return RectProbEstimate(0.0, 0.0, "MonteCarlo")
    points = _cloud_array(cloud)
    if points.shape[1] != rect.dim:
        raise ValidationError("cloud dimension does not match rectangle")
    m = points.shape[0]
    p_hat = float(np.count_nonzero(contains_batch(rect, points))) / m
    se = math.sqrt(p_hat * (1.0 - p_hat) / m)
    return RectProbEstimate(p_hat, se, "MonteCarlo")


def _diag_product_prob(variances: np.ndarray, rect: Hyperrectangle) -> float:
    lower, upper = rect.bounds()
    prob = 1.0
    for j in range(rect.dim):
        sd = math.sqrt(variances[j])
        if sd == 0.0:
            # degenerate coordinate: unit mass at 0
            inside_lo = lower[j] < 0.0 or (lower[j] == 0.0 and rect.closed_lower[j])
            inside_hi = upper[j] > 0.0 or (upper[j] == 0.0 and rect.closed_upper[j])
            prob *= 1.0 if (inside_lo and inside_hi) else 0.0
            continue
        hi = ndtr(upper[j] / sd) if math.isfinite(upper[j]) else 1.0
        lo = ndtr(lower[j] / sd) if math.isfinite(lower[j]) else 0.0
        prob *= max(hi - lo, 0.0)
    return min(prob, 1.0)


def gaussian_rect_prob(
    sigma: np.ndarray,
    rect: Hyperrectangle,
    budget: int = 2_000_000,
    seed: int = 0,
) -> RectProbEstimate:
    """P(N(0, Sigma) in A): exact product for diagonal Sigma, else antithetic MC."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValidationError("covariance must be square")
    if sigma.shape[0] != rect.dim:
        raise ValidationError("covariance dimension does not match rectangle")
    off_diag = sigma - np.diag(np.diag(sigma))
    if not off_diag.any():
        return RectProbEstimate(_diag_product_prob(np.diag(sigma), rect), 0.0, "ExactProduct")

    chol, _ = cholesky_lower(sigma)
    rng = derive_rng(seed, "gaussrect", rect.dim, budget)
    n_pairs = max(budget // 2, 1)
    chunk = 200_000
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_pairs:
        take = min(chunk, n_pairs - done)
        z = rng.standard_normal((take, rect.dim))
        x = z @ chol.T
        h = 0.5 * (
            contains_batch(rect, x).astype(np.float64)
            + contains_batch(rect, -x).astype(np.float64)
        )
        total += float(h.sum())
        total_sq += float((h * h).sum())
        done += take
    mean = total / n_pairs
    var = max(total_sq / n_pairs - mean * mean, 0.0)
    se = math.sqrt(var / n_pairs)
    return RectProbEstimate(min(max(mean, 0.0), 1.0), se, "MonteCarlo")


@lru_cache(maxsize=128)
def _binomial_cdf_table(n: int) -> np.ndarray:
    """CDF of Binomial(n, 1/2) at 0..n, via log-domain coefficients."""
    h = np.arange(n + 1, dtype=np.float64)
    log_pmf = gammaln(n + 1.0) - gammaln(h + 1.0) - gammaln(n - h + 1.0) - n * math.log(2.0)
    cdf = np.cumsum(np.exp(log_pmf))
    cdf[-1] = 1.0
    return cdf


def binomial_clt_oracle(n: int, t: float) -> float:
    """Exact P(S_n / sqrt(n) <= t) for a sum of n independent signs.

    The sum takes values (2h - n)/sqrt(n) for h successes; the count threshold
    carries a small slack so float endpoints that are mathematically on the
    lattice resolve to the closed comparison.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if math.isnan(t):
        raise ValidationError("threshold is NaN")
    if t == math.inf:
        return 1.0
    if t == -math.inf:
        return 0.0
    m = math.floor((n + t * math.sqrt(n)) / 2.0 + _LATTICE_SLACK)
    if m < 0:
        return 0.0
    if m >= n:
        return 1.0
    return float(_binomial_cdf_table(n)[m])


def orthant_corner_prob(rho: float) -> float:
    """Exact P(Z_1 <= 0, Z_2 <= 0) for a bivariate normal with correlation rho.

    Classical identity 1/4 + arcsin(rho) / (2 pi); serves as the closed-form
    reference the correlated Monte Carlo estimates are checked against.
    """
    if not (-1.0 <= rho <= 1.0):
        raise ValidationError("correlation must lie in [-1, 1]")
    return 0.25 + math.asin(rho) / (2.0 * math.pi)


class DiagonalGaussianOracle:
    """Exact rectangle probabilities for independent centered Gaussians."""

    def __init__(self, variances: Sequence[float]):
        self.variances = np.asarray(variances, dtype=np.float64)
        if self.variances.ndim != 1 or np.any(self.variances < 0):
            raise ValidationError("variances must be a nonnegative vector")

    @property
    def dim(self) -> int:
        return int(self.variances.shape[0])

    def rect_prob(self, rect: Hyperrectangle) -> RectProbEstimate:
        if rect.dim != self.dim:
            raise ValidationError("rectangle dimension mismatch")
        return RectProbEstimate(_diag_product_prob(self.variances, rect), 0.0, "ExactProduct")


class NormalizedRademacherOracle:
    """Exact law of (x_1 + ... + x_n)/sqrt(n) for independent signs, p = 1.

    Interval probabilities honor open/closed endpoints on the value lattice
    (2h - n)/sqrt(n), with the same float slack as binomial_clt_oracle.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValidationError("n must be >= 1")
        self.n = int(n)

    @property
    def dim(self) -> int:
        return 1

    def _count_bounds(self, rect: Hyperrectangle) -> Tuple[int, int]:
        n = self.n
        root = math.sqrt(n)
        a, b = rect.lower[0], rect.upper[0]
        if a == -math.inf:
            h_lo = 0
        else:
            q = (a * root + n) / 2.0
            if rect.closed_lower[0]:
                h_lo = math.ceil(q - _LATTICE_SLACK)
            else:
                h_lo = math.floor(q + _LATTICE_SLACK) + 1
        if b == math.inf:
            h_hi = n
        else:
            q = (b * root + n) / 2.0
            if rect.closed_upper[0]:
                h_hi = math.floor(q + _LATTICE_SLACK)
            else:
                h_hi = math.ceil(q - _LATTICE_SLACK) - 1
        return max(h_lo, 0), min(h_hi, n)

    def rect_prob(self, rect: Hyperrectangle) -> RectProbEstimate:
        if rect.dim != 1:
            raise ValidationError("this law is one-dimensional")
        h_lo, h_hi = self._count_bounds(rect)
        if h_hi < h_lo:
            return RectProbEstimate(0.0, 0.0, "ExactBinomial")
        cdf = _binomial_cdf_table(self.n)
        value = float(cdf[h_hi] - (cdf[h_lo - 1] if h_lo > 0 else 0.0))
        return RectProbEstimate(min(max(value, 0.0), 1.0), 0.0, "ExactBinomial")


CloudOrOracle = Union[np.ndarray, DiagonalGaussianOracle, NormalizedRademacherOracle]


def _family_probs(side: CloudOrOracle, family: RectangleFamily):
    """Per-rectangle probabilities and std errors for one side of the distance."""
    if hasattr(side, "rect_prob"):
        vals = np.array([side.rect_prob(r).value for r in family.rectangles])
        return vals, np.zeros_like(vals)
    points = _cloud_array(side)
    if points.shape[1] != family.dim:
        raise ValidationError("cloud dimension does not match family")
    m = points.shape[0]
    flag_exact = all(
        (not math.isfinite(r.lower[j]) or r.closed_lower[j])
        and (not math.isfinite(r.upper[j]) or r.closed_upper[j])
        for r in family.rectangles
        for j in range(family.dim)
    )
    if flag_exact:
        lower, upper = family.bounds_arrays()
        counts = count_in_boxes(points, lower, upper)
        p_hat = counts.astype(np.float64) / m
    else:
        p_hat = np.array(
            [np.count_nonzero(contains_batch(r, points)) / m for r in family.rectangles]
        )
    se = np.sqrt(p_hat * (1.0 - p_hat) / m)
    return p_hat, se


def kolmogorov_sup(cloud_p: CloudOrOracle, cloud_q: CloudOrOracle, family: RectangleFamily) -> DistanceEstimate:
    """Max over the family of |p_P(A) - p_Q(A)|, clouds or exact laws on each side."""
    if len(family.rectangles) == 0:
        raise ValidationError("empty rectangle family")
    p_vals, p_se = _family_probs(cloud_p, family)
    q_vals, q_se = _family_probs(cloud_q, family)
    diffs = np.abs(p_vals - q_vals)
    idx = int(np.argmax(diffs))
    ids = ["%s[%d]" % (family.kind, i) for i in range(len(family.rectangles))]
    return DistanceEstimate(
        value=float(diffs[idx]),
        per_rectangle=tuple(zip(ids, (float(d) for d in diffs))),
        mc_std_error=float(math.sqrt(p_se[idx] ** 2 + q_se[idx] ** 2)),
        argmax_id=ids[idx],
        family_kind=family.kind,
        p_hat_p=tuple(float(v) for v in p_vals),
        p_hat_q=tuple(float(v) for v in q_vals),
    )


def write_distance_csv(estimate: DistanceEstimate, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family_id", "rect_id", "p_hat_P", "p_hat_Q", "abs_diff"])
        for (rect_id, diff), pv, qv in zip(
            estimate.per_rectangle, estimate.p_hat_p, estimate.p_hat_q
        ):
            writer.writerow(
                [estimate.family_kind, rect_id, repr(pv), repr(qv), repr(diff)]
            )


# ---------------------------------------------------------------------------
# anti-concentration: boundary mass of inflated minus deflated rectangles
# ---------------------------------------------------------------------------

@dataclass
class NazarovReport:
    p: int
    sigma_min: float
    t_grid: Tuple[float, ...]
    budget: int
    max_ratio: float
    t_exponent: float
    passed: bool
    table: Tuple[Tuple[str, float, float], ...]  # (rect id, t, boundary prob)

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "sigma_min": self.sigma_min,
            "t_grid": list(self.t_grid),
            "budget": self.budget,
            "max_ratio": self.max_ratio,
            "t_exponent": self.t_exponent,
            "passed": self.passed,
        }


def _nazarov_default_family(p: int) -> List[Hyperrectangle]:
    rects = [corner_set([u] * p) for u in np.linspace(-1.0, 1.5, 6)]
    rects += [symmetric_box(p, t) for t in (0.5, 1.0, 1.75)]
    return rects


def nazarov_check(
    sigma: np.ndarray,
    family: Optional[Sequence[Hyperrectangle]] = None,
    t_grid: Sequence[float] = (0.01, 0.02, 0.04, 0.08),
    budget: int = 1_000_000,
    seed: int = 0,
) -> NazarovReport:
    """Boundary-band mass of N(0, Sigma) against the t*sqrt(log p)/sigma envelope.

    For each rectangle A and band half-width t, the boundary probability is
    P(A enlarged by t) - P(A shrunk by t). The ratio to t*sqrt(log p)/sigma_min
    must stay below 10 (log clipped at 1 so p = 1 is well defined), and the
    fitted t-exponent of the largest boundary mass must be near 1.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    p = sigma.shape[0]
    diag = np.diag(sigma)
    if np.min(diag) <= 0:
        raise ValidationError("covariance needs positive diagonal")
    sigma_min = math.sqrt(float(np.min(diag)))
    rects = list(family) if family is not None else _nazarov_default_family(p)
    ts = [float(t) for t in t_grid]
    if any(t <= 0 for t in ts):
        raise ValidationError("t grid must be positive")

    banded = []
    for r in rects:
        for t in ts:
            banded.append(enlarge(r, t))
            inner = shrink(r, t)
            banded.append(symmetric_box(p, 0.0) if inner is EMPTY else inner)
            # a collapsed inner rectangle contributes probability ~0; the
            # zero-width placeholder keeps the array rectangular
    lower = np.array([b.lower for b in banded])
    upper = np.array([b.upper for b in banded])

    off_diag = sigma - np.diag(diag)
    chol = None if not off_diag.any() else cholesky_lower(sigma)[0]
    sd = np.sqrt(diag)

    rng = derive_rng(seed, "nazarov", p, budget)
    counts = np.zeros(len(banded), dtype=np.int64)
    chunk = 200_000
    done = 0
    while done < budget:
        take = min(chunk, budget - done)
        z = rng.standard_normal((take, p))
        x = z * sd[None, :] if chol is None else z @ chol.T
        counts += count_in_boxes(x, lower, upper)
        done += take

    probs = counts.astype(np.float64) / budget
    n_t = len(ts)
    boundary = np.empty((len(rects), n_t))
    for i in range(len(rects)):
        for j in range(n_t):
            k = 2 * (i * n_t + j)
            boundary[i, j] = max(probs[k] - probs[k + 1], 0.0)

    envelope = np.array([t * math.sqrt(clipped_log(float(p))) / sigma_min for t in ts])
    ratios = boundary / envelope[None, :]
    max_ratio = float(ratios.max())

    h = boundary.max(axis=0)
    if np.any(h <= 0):
        t_exponent = math.nan
    else:
        t_exponent = float(np.polyfit(np.log(ts), np.log(h), 1)[0])
    passed = max_ratio <= 10.0 and 0.9 <= t_exponent <= 1.1

    table = tuple(
        ("rect[%d]" % i, ts[j], float(boundary[i, j]))
        for i in range(len(rects))
        for j in range(n_t)
    )
    return NazarovReport(
        p=p,
        sigma_min=sigma_min,
        t_grid=tuple(ts),
        budget=budget,
        max_ratio=max_ratio,
        t_exponent=t_exponent,
        passed=passed,
        table=table,
    )


# ---------------------------------------------------------------------------
# pointwise coupled-indicator inequality
# ---------------------------------------------------------------------------

@dataclass
class CouplingReport:
    p: int
    n_draws: int
    n_pairs: int
    violations: int
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "n_draws": self.n_draws,
            "n_pairs": self.n_pairs,
            "violations": self.violations,
            "passed": self.passed,
        }


def coupling_check(p: int = 8, n_draws: int = 100_000, n_pairs: int = 50, seed: int = 0) -> CouplingReport:
    """Outcome-by-outcome check of the two-point indicator inequality.

    For coupled draws (zeta, xi) and every rectangle-band pair (A, t):
    1{zeta in A} - 1{xi in A} <= 1{xi in boundary band of A at t} +
    1{max-abs(zeta - xi) >= t}. Violations are counted exactly; the expected
    count is zero for any correct enlarge/shrink/membership implementation.
    """
    rng = derive_rng(seed, "coupling", p, n_draws)
    xi = rng.standard_normal((n_draws, p))
    # perturbation magnitudes mix well below and well above the t values used
    scales = np.array([0.005, 0.02, 0.08, 0.4, 1.5])
    scale = scales[rng.integers(0, scales.size, size=n_draws)]
    zeta = xi + rng.standard_normal((n_draws, p)) * scale[:, None]
    gap = np.max(np.abs(zeta - xi), axis=1)

    pairs = []
    corner_grid = np.linspace(-1.2, 1.2, 10)
    box_grid = (0.4, 0.8, 1.3, 2.0)
    t_vals = (0.01, 0.05, 0.15, 0.5)
    i = 0
    while len(pairs) < n_pairs:
        t = t_vals[i % len(t_vals)]
        if i % 3 == 0:
            rect = corner_set([float(corner_grid[(i // 3) % corner_grid.size])] * p)
        elif i % 3 == 1:
            rect = symmetric_box(p, box_grid[(i // 3) % len(box_grid)])
        else:
            lo = rng.uniform(-2.0, 1.0, size=p)
            rect = rectangle(lo, lo + rng.uniform(0.5, 3.0, size=p))
        pairs.append((rect, t))
        i += 1

    violations = 0
    for rect, t in pairs:
        in_a_zeta = contains_batch(rect, zeta)
        in_a_xi = contains_batch(rect, xi)
        in_enl = contains_batch(enlarge(rect, t), xi)
        inner = shrink(rect, t)
        in_shr = (
            np.zeros(n_draws, dtype=bool)
            if inner is EMPTY
            else contains_batch(inner, xi)
        )
        in_band = in_enl & ~in_shr
        bad = in_a_zeta & ~in_a_xi & ~in_band & (gap < t)
        violations += int(np.count_nonzero(bad))
    return CouplingReport(
        p=p,
        n_draws=n_draws,
        n_pairs=len(pairs),
        violations=violations,
        passed=violations == 0,
    )


def family_refinement_curve(
    cloud_p: CloudOrOracle,
    cloud_q: CloudOrOracle,
    p: int,
    sizes: Sequence[int] = (64, 128, 256, 512),
    seed: int = 20240915,
) -> List[Tuple[int, float]]:
    """Distance vs family size over nested random families (diagnostic).

    Families are prefixes of one random family, so the curve is nondecreasing
    by construction; a flattening tail suggests the finite family has
    approached the sup over all rectangles.
    """
    sizes = sorted(set(int(s) for s in sizes))
    full = make_family("random", p, count=max(sizes), seed=seed)
    curve = []
    for size in sizes:
        fam = RectangleFamily(kind="random", rectangles=full.rectangles[:size])
        curve.append((size, kolmogorov_sup(cloud_p, cloud_q, fam).value))
    return curve
