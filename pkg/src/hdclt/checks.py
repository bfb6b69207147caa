"""Self-check suites.

Each check exercises one module invariant end to end and reports a dict
``{"id", "passed", "detail"}``. Suites are small enough to run on every
build; the heavyweight versions of the same properties live in the test
suite with full probe counts. A check that raises is reported as failed
with the exception text, never propagated.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from ._kernels import (
    count_in_boxes,
    count_in_boxes_numpy,
    empirical_max_stats,
    empirical_max_stats_numpy,
)
from .bootstrap import (
    bootstrap_quantile,
    covers,
    empirical_resample,
    max_statistic,
    mean_test,
    multiplier_sample,
    simultaneous_cis,
)
from .interpolation import (
    decomposition_check,
    delta_k_estimate,
    epsilon_k,
    exact_delta_k_p1,
    moment_matching_check,
    taylor_terms,
    telescoping_check,
    telescoping_exact_p1,
)
from .populations import CorrelationModel, EntryLaw, PopulationSpec
from .rectangles import (
    EMPTY,
    Hyperrectangle,
    contains,
    contains_batch,
    corner_set,
    enlarge,
    in_boundary,
    make_family,
    rectangle,
    shrink,
    sup_distance,
    symmetric_box,
)
from .smoothing import (
    SmoothedIndicator,
    derivative_growth_probe,
    far_field_bound_check,
    grad_phi,
    hess_phi,
    phi,
    scaling_check,
    third_phi,
)
from .util import ValidationError, derive_rng

__all__ = ["SUITES", "run_suite", "suite_passed"]

SUITES = ("smoothing", "geometry", "lindeberg", "bootstrap")

_FD_REL = 1e-4
_FD_ABS = 1e-10


# ---------------------------------------------------------------------------
# smoothing suite
# ---------------------------------------------------------------------------

def _random_smoothed(rng, p: int, eps: float) -> Tuple[SmoothedIndicator, np.ndarray]:
    """Rectangle with mixed finite/infinite endpoints plus a probe point
    within a few bandwidths of the faces, where derivatives are alive."""
    lo = rng.uniform(-2.0, 0.0, size=p)
    hi = lo + rng.uniform(0.5, 3.0, size=p)
    kind = rng.integers(0, 4, size=p)
    lo = np.where(kind == 1, -np.inf, lo)
    hi = np.where(kind == 2, np.inf, hi)
    anchor = np.where(np.isfinite(hi), hi, np.where(np.isfinite(lo), lo, 0.0))
    s = anchor + rng.uniform(-2.0, 2.0, size=p) * eps
    return SmoothedIndicator(rectangle(lo, hi), eps), s


def _within_fd_tol(analytic: np.ndarray, fd: np.ndarray) -> float:
    """Worst ratio of |analytic - fd| to the allowed tolerance (<= 1 passes)."""
    gap = np.abs(analytic - fd)
    allowed = np.maximum(_FD_ABS, _FD_REL * np.maximum(np.abs(analytic), np.abs(fd)))
    return float((gap / allowed).max())


def fd_gradient(si: SmoothedIndicator, s: np.ndarray, h: float) -> np.ndarray:
    p = si.dim
    out = np.empty(p)
    for j in range(p):
        e = np.zeros(p)
        e[j] = h
        out[j] = (phi(si, s + e) - phi(si, s - e)) / (2.0 * h)
    return out


def fd_hessian(si: SmoothedIndicator, s: np.ndarray, h: float) -> np.ndarray:
    # first difference of the order-1 tensor: validates order 2 against
    # order 1, which fd_gradient has already tied back to phi
    p = si.dim
    out = np.empty((p, p))
    for j in range(p):
        e = np.zeros(p)
        e[j] = h
        hi = grad_phi(si, s + e).entries
        lo = grad_phi(si, s - e).entries
        out[:, j] = (hi - lo) / (2.0 * h)
    return 0.5 * (out + out.T)


def fd_third(si: SmoothedIndicator, s: np.ndarray, h: float) -> np.ndarray:
    p = si.dim
    out = np.empty((p, p, p))
    for l in range(p):
        e = np.zeros(p)
        e[l] = h
        hi = hess_phi(si, s + e).entries
        lo = hess_phi(si, s - e).entries
        out[:, :, l] = (hi - lo) / (2.0 * h)
    return out


def _check_values(seed: int) -> Tuple[bool, str]:
    full = SmoothedIndicator(rectangle([-math.inf], [math.inf]), 1.0)
    one = phi(full, [123.0])
    ref = math.erf(1.0 / math.sqrt(2.0))  # 2 Phi(1) - 1
    v1 = phi(SmoothedIndicator(rectangle([-1.0], [1.0]), 1.0), [0.0])
    v2 = phi(SmoothedIndicator(rectangle([-1.0, -1.0], [1.0, 1.0]), 1.0), [0.0, 0.0])
    half = SmoothedIndicator(rectangle([0.0], [math.inf]), 1.0)
    g = grad_phi(half, [0.0]).entries[0]
    density0 = 1.0 / math.sqrt(2.0 * math.pi)
    deep = third_phi(SmoothedIndicator(symmetric_box(2, 1.0), 0.05), [0.0, 0.0])
    worst = max(
        abs(one - 1.0),
        abs(v1 - ref),
        abs(v2 - ref * ref),
        abs(g - density0) / density0,
    )
    ok = worst <= 1e-12 and float(np.abs(deep.entries).max()) < 1e-20
    return ok, "closed-form value gap %.2e, deep-interior third max %.1e" % (
        worst,
        float(np.abs(deep.entries).max()),
    )


def _check_finite_difference(seed: int) -> Tuple[bool, str]:
    rng = derive_rng(seed, "check-fd")
    worst = {1: 0.0, 2: 0.0, 3: 0.0}
    for p in (1, 2, 4):
        for i in range(40):
            eps = 0.3 if i % 2 else 1.0
            si, s = _random_smoothed(rng, p, eps)
            h = 1e-4 * eps
            worst[1] = max(worst[1], _within_fd_tol(grad_phi(si, s).entries, fd_gradient(si, s, h)))
            worst[2] = max(worst[2], _within_fd_tol(hess_phi(si, s).entries, fd_hessian(si, s, h)))
            worst[3] = max(worst[3], _within_fd_tol(third_phi(si, s).entries, fd_third(si, s, h)))
    ok = all(v <= 1.0 for v in worst.values())
    return ok, "worst tolerance ratios by order: %.3f / %.3f / %.3f" % (
        worst[1],
        worst[2],
        worst[3],
    )


def _check_dilation(seed: int) -> Tuple[bool, str]:
    rng = derive_rng(seed, "check-dilation")
    configs = [
        (rectangle([0.0], [1.0]), np.array([0.3]), 0.5, 1),
    ]
    for order, p, eps in ((2, 3, 0.25), (3, 2, 0.25)):
        si, s = _random_smoothed(rng, p, eps)
        configs.append((si.rect, s, eps, order))
    worst = 0.0
    for rect, s, eps, order in configs:
        direct, rescaled = scaling_check(rect, s, eps, order)
        gap = np.abs(direct.entries - rescaled.entries)
        allowed = np.maximum(1e-18, 1e-10 * np.abs(direct.entries))
        worst = max(worst, float((gap / allowed).max()))
    # eps = 1 must reproduce the very same floats
    si, s = _random_smoothed(rng, 2, 1.0)
    a, b = scaling_check(si.rect, s, 1.0, 3)
    identical = bool(np.array_equal(a.entries, b.entries))
    return worst <= 1.0 and identical, "worst dilation ratio %.3f, unit-bandwidth exact: %s" % (
        worst,
        identical,
    )


def _check_far_field(seed: int) -> Tuple[bool, str]:
    r1 = far_field_bound_check(4, 100, 0.5, seed=seed)
    r2 = far_field_bound_check(1, 10, 1.0, seed=seed)
    margin = max(r1.max_l1 / r1.bound, r2.max_l1 / r2.bound)
    return r1.passed and r2.passed, "largest observed/bound ratio %.3e" % margin


def _check_sharpen(seed: int) -> Tuple[bool, str]:
    box = symmetric_box(2, 1.0)
    rng = derive_rng(seed, "check-sharpen")
    pts = rng.uniform(-2.0, 2.0, size=(64, 2))
    dist = np.array([sup_distance(box, x) for x in pts])
    inside = contains_batch(box, pts)
    margin = np.where(inside, 1.0 - np.abs(pts).max(axis=1), dist)
    keep = margin > 0.05
    pts, inside = pts[keep], inside[keep]
    errs = []
    for eps in (1e-1, 1e-2, 1e-3):
        si = SmoothedIndicator(box, eps)
        vals = np.array([phi(si, x) for x in pts])
        errs.append(np.abs(vals - inside.astype(float)))
    monotone = bool(np.all(errs[0] >= errs[1] - 1e-15) and np.all(errs[1] >= errs[2] - 1e-15))
    final = float(errs[2].max())
    return monotone and final < 1e-8, "monotone: %s, error at eps=1e-3: %.1e" % (monotone, final)


def _check_monotone_in_set(seed: int) -> Tuple[bool, str]:
    rng = derive_rng(seed, "check-monotone")
    worst = 0.0
    for _ in range(50):
        p = int(rng.integers(1, 5))
        si, s = _random_smoothed(rng, p, 0.5)
        bigger = SmoothedIndicator(enlarge(si.rect, float(rng.uniform(0.1, 2.0))), 0.5)
        worst = max(worst, phi(si, s) - phi(bigger, s))
    return worst <= 1e-12, "largest monotonicity violation %.2e" % worst


def _growth_check(order: int) -> Callable[[int], Tuple[bool, str]]:
    def run(seed: int) -> Tuple[bool, str]:
        report = derivative_growth_probe(order, seed=seed)
        hi = order / 2.0 + 0.25
        ok = 0.0 <= report.exponent <= hi
        return ok, "fitted log-p exponent %.3f, window [0, %.2f]" % (report.exponent, hi)

    return run


# ---------------------------------------------------------------------------
# geometry suite
# ---------------------------------------------------------------------------

def _membership_oracle(rect: Hyperrectangle, x: np.ndarray) -> bool:
    for j in range(rect.dim):
        lo, hi = rect.lower[j], rect.upper[j]
        v = float(x[j])
        if math.isfinite(lo) and v < lo:
            return False
        if math.isfinite(hi) and v > hi:
            return False
    return True


def _random_rect(rng, p: int) -> Hyperrectangle:
    a = rng.uniform(-3.0, 3.0, size=p)
    b = rng.uniform(-3.0, 3.0, size=p)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    lo = np.where(rng.random(p) < 0.15, -np.inf, lo)
    hi = np.where(rng.random(p) < 0.15, np.inf, hi)
    return rectangle(lo, hi)


def _check_membership(seed: int) -> Tuple[bool, str]:
    rng = derive_rng(seed, "check-membership")
    mismatches = 0
    total = 0
    for p in (1, 3):
        pts = rng.uniform(-4.0, 4.0, size=(200, p))
        for _ in range(25):
            rect = _random_rect(rng, p)
            fast = contains_batch(rect, pts)
            slow = np.array([_membership_oracle(rect, x) for x in pts])
            mismatches += int(np.count_nonzero(fast != slow))
            lower, upper = rect.bounds()
            count = count_in_boxes(pts, lower[None, :], upper[None, :])[0]
            mismatches += int(count != slow.sum())
            total += pts.shape[0]
    return mismatches == 0, "%d mismatches over %d membership evaluations" % (mismatches, total)


def _check_backends(seed: int) -> Tuple[bool, str]:
    from ._accel import USING_NUMBA

    rng = derive_rng(seed, "check-backends")
    pts = rng.standard_normal((500, 3))
    lower = rng.uniform(-2.0, 0.0, size=(20, 3))
    upper = lower + rng.uniform(0.2, 3.0, size=(20, 3))
    lower[rng.random((20, 3)) < 0.2] = -np.inf
    upper[rng.random((20, 3)) < 0.2] = np.inf
    counts_active = count_in_boxes(pts, lower, upper)
    counts_plain = count_in_boxes_numpy(pts, lower, upper)
    counting_exact = bool(np.array_equal(counts_active, counts_plain))

    data = rng.standard_normal((50, 4))
    idx = rng.integers(0, 50, size=(30, 50))
    col_mean = data.mean(axis=0)
    a = empirical_max_stats(data, col_mean, idx)
    b = empirical_max_stats_numpy(data, col_mean, idx)
    stats_close = bool(np.allclose(a, b, rtol=1e-12, atol=0.0))
    ok = counting_exact and stats_close
    return ok, "active backend %s; counting exact: %s, resample stats close: %s" % (
        "numba" if USING_NUMBA else "numpy",
        counting_exact,
        stats_close,
    )


def _check_band_operations(seed: int) -> Tuple[bool, str]:
    rng = derive_rng(seed, "check-bands")
    bad = 0
    for _ in range(60):
        p = int(rng.integers(1, 4))
        rect = _random_rect(rng, p)
        t = float(rng.uniform(0.05, 1.5))
        grown = enlarge(rect, t)
        back = shrink(grown, t)
        if back is EMPTY:
            bad += 1
            continue
        finite = np.isfinite(rect.lower) | np.isfinite(rect.upper)
        if not np.allclose(
            np.where(finite, back.lower, 0.0), np.where(finite, rect.lower, 0.0), atol=1e-12
        ):
            bad += 1
        x = rng.uniform(-4.0, 4.0, size=p)
        d = sup_distance(rect, x)
        if abs(d - t) > 1e-9 and contains(grown, x) != (d <= t):
            bad += 1
        if in_boundary(rect, x, t) != (contains(grown, x) and not contains(shrink(rect, t), x)):
            bad += 1
    # collapse and the closed boundary case, pinned with exact dyadic floats
    collapsed = shrink(symmetric_box(2, 0.5), 0.75)
    if collapsed is not EMPTY or contains(collapsed, [0.0, 0.0]):
        bad += 1
    edge = rectangle([1.0], [2.0])
    if not contains(enlarge(edge, 0.5), [0.5]) or sup_distance(edge, [0.5]) > 0.5:
        bad += 1
    return bad == 0, "%d band-consistency failures" % bad


def _check_serialization(seed: int) -> Tuple[bool, str]:
    rng = derive_rng(seed, "check-serialize")
    bad = 0
    for _ in range(40):
        rect = _random_rect(rng, int(rng.integers(1, 5)))
        again = Hyperrectangle.from_json(rect.to_json())
        same = np.array_equal(np.array(rect.lower), np.array(again.lower)) and np.array_equal(
            np.array(rect.upper), np.array(again.upper)
        )
        bad += int(not same)
    return bad == 0, "%d round-trip failures over 40 rectangles" % bad


def _check_families(seed: int) -> Tuple[bool, str]:
    p = 3
    fam = make_family("corner_sets", p, axis_grid=(-1.0, 0.0, 1.0))
    corners_ok = all(np.all(np.isneginf(r.lower)) for r in fam.rectangles)
    rng = derive_rng(seed, "check-family")
    pts = rng.uniform(-2.0, 2.0, size=(100, p))
    lower, upper = fam.bounds_arrays()
    counts = count_in_boxes(pts, lower, upper)
    direct = np.array(
        [int(np.count_nonzero(contains_batch(r, pts))) for r in fam.rectangles]
    )
    agree = bool(np.array_equal(counts, direct))
    rand = make_family("random", p, count=16, seed=seed)
    sizes_ok = len(fam) == 27 and len(rand) == 16 and rand.dim == p
    ok = corners_ok and agree and sizes_ok
    return ok, "corner grid 27 sets, counting agrees: %s" % agree


# ---------------------------------------------------------------------------
# lindeberg suite
# ---------------------------------------------------------------------------

def _check_taylor(seed: int) -> Tuple[bool, str]:
    rng = derive_rng(seed, "check-taylor")
    worst = 0.0
    for _ in range(400):
        p = int(rng.integers(1, 5))
        si, s = _random_smoothed(rng, p, float(rng.uniform(0.2, 1.5)))
        v = rng.standard_normal(p)
        n = int(rng.integers(1, 200))
        terms = taylor_terms(si, s, v, n)
        increment = phi(si, s + v / math.sqrt(n)) - phi(si, s)
        worst = max(worst, abs(increment - (terms.linear + terms.quadratic + terms.remainder)))
    return worst <= 1e-12, "worst expansion identity residual %.2e" % worst


def _check_epsilon_window(seed: int) -> Tuple[bool, str]:
    n, rho = 64, 0.37
    vals = [epsilon_k(n, k, rho) for k in range(1, n)]
    decreasing = all(a > b for a, b in zip(vals, vals[1:]))
    first_ok = abs(vals[0] - math.sqrt(rho * (n - 1) / n)) <= 1e-15
    rejected = 0
    for k in (0, n):
        try:
            epsilon_k(n, k, rho)
        except ValidationError:
            rejected += 1
    ok = decreasing and first_ok and vals[-1] > 0.0 and rejected == 2
    return ok, "strictly decreasing: %s, k outside 1..n-1 rejected: %s" % (
        decreasing,
        rejected == 2,
    )


def _check_exact_telescoping(seed: int) -> Tuple[bool, str]:
    worst = 0.0
    for n in (2, 3, 5, 8, 12):
        for t in np.linspace(-2.0, 2.0, 7):
            total, direct, gap = telescoping_exact_p1(n, float(t))
            worst = max(worst, abs(gap), abs(total - direct))
    return worst <= 1e-12, "worst telescoping gap %.2e" % worst


def _check_exact_vs_mc(seed: int) -> Tuple[bool, str]:
    n, k, t = 16, 5, 0.7
    exact = exact_delta_k_p1(n, k, t)
    spec_x = PopulationSpec(1, EntryLaw("rademacher"), CorrelationModel("identity"))
    spec_y = PopulationSpec(1, EntryLaw("standard_normal"), CorrelationModel("identity"))
    est = delta_k_estimate(spec_x, spec_y, n, k, corner_set([t]), 40_000, seed=seed)
    gap = abs(est.difference - exact.difference)
    ok = gap <= 4.0 * est.std_error
    return ok, "|mc - exact| = %.2e at %.1f standard errors" % (
        gap,
        gap / max(est.std_error, 1e-300),
    )


def _check_moment_match(seed: int) -> Tuple[bool, str]:
    spec = PopulationSpec(3, EntryLaw("rademacher"), CorrelationModel("equicorrelated", rho_bar=0.3))
    rep = moment_matching_check(spec, 32, 7, symmetric_box(3, 1.2), 30_000, seed=seed)
    return rep.passed, "linear diff %.1f se, quadratic diff %.1f se" % (
        abs(rep.l_diff) / max(rep.l_se, 1e-300),
        abs(rep.q_diff) / max(rep.q_se, 1e-300),
    )


def _check_telescoping_mc(seed: int) -> Tuple[bool, str]:
    spec = PopulationSpec(2, EntryLaw("rademacher"), CorrelationModel("identity"))
    rep = telescoping_check(spec, 8, symmetric_box(2, 1.0), 40_000, seed=seed)
    return rep.gap == 0.0, "per-sample telescoping gap %r" % (rep.gap,)


def _check_decomposition(seed: int) -> Tuple[bool, str]:
    spec = PopulationSpec(2, EntryLaw("rademacher"), CorrelationModel("equicorrelated", rho_bar=0.3))
    rep = decomposition_check(spec, 16, 4, budget=100_000, seed=seed)
    return rep.passed, "tail-smoothed vs direct distance %.2e (se %.2e), cov gap %.1e" % (
        rep.distance,
        rep.distance_se,
        rep.cov_gap,
    )


# ---------------------------------------------------------------------------
# bootstrap suite
# ---------------------------------------------------------------------------

def _quantile_oracle(sorted_stats: np.ndarray, alpha: Fraction) -> float:
    """Smallest drawn value whose empirical cdf reaches 1 - alpha.

    Exact rational arithmetic on a rational alpha; no float-rounding knife
    edges, which is what makes this an independent oracle."""
    B = len(sorted_stats)
    need = (Fraction(1) - alpha) * B
    i = 0
    while i < B:
        q = sorted_stats[i]
        while i < B and sorted_stats[i] == q:
            i += 1
        if Fraction(i) >= need:
            return float(q)
    return float(sorted_stats[-1])


def _check_quantile_contract(seed: int) -> Tuple[bool, str]:
    from .bootstrap import BootstrapSummary, METHOD_MULTIPLIER

    rng = derive_rng(seed, "check-quantile")
    bad = 0
    for trial in range(500):
        B = int(rng.integers(5, 400))
        vals = np.round(rng.gamma(2.0, 1.0, size=B), int(rng.integers(0, 3)))
        vals.sort()  # rounding injects ties
        # alpha on a round rational grid; the float handed to the API and the
        # Fraction handed to the oracle name the same number
        k = int(rng.integers(1, 101))
        alpha, alpha_exact = k / 200.0, Fraction(k, 200)
        expected = _quantile_oracle(vals, alpha_exact)
        summary = BootstrapSummary(
            method=METHOD_MULTIPLIER,
            B=B,
            max_stats=tuple(float(v) for v in vals),
            alpha=alpha,
            q_hat=expected,
        )
        if bootstrap_quantile(summary, alpha) != expected:
            bad += 1
    return bad == 0, "%d of 500 randomized summaries broke the quantile contract" % bad


def _check_alpha_monotone(seed: int) -> Tuple[bool, str]:
    rng = derive_rng(seed, "check-alpha")
    x = rng.standard_normal((40, 3))
    summary = multiplier_sample(x, B=400, seed=7)
    grid = np.linspace(0.02, 0.5, 25)
    qs = [bootstrap_quantile(summary, float(a)) for a in grid]
    ok = all(a >= b for a, b in zip(qs, qs[1:]))
    return ok, "quantile nonincreasing across 25 alpha values: %s" % ok


def _check_event_identity(seed: int) -> Tuple[bool, str]:
    rng = derive_rng(seed, "check-events")
    bad = 0
    for trial in range(30):
        x = rng.standard_normal((25, 4)) * float(rng.uniform(0.5, 2.0))
        summary = (empirical_resample if trial % 2 else multiplier_sample)(x, B=200, seed=trial)
        q = bootstrap_quantile(summary, 0.1)
        mu = np.zeros(4)
        c1 = covers(x, mu, q)
        c2 = max_statistic(x, mu) <= q
        c3 = not mean_test(x, summary, 0.1)
        cis = simultaneous_cis(x, summary, 0.1)
        c4 = bool(np.all(np.abs(np.asarray(cis.centers)) <= cis.half_width))
        if not (c1 == c2 == c3 == c4):
            bad += 1
    return bad == 0, "%d event-identity mismatches over 30 datasets" % bad


def _check_rescaling(seed: int) -> Tuple[bool, str]:
    rng = derive_rng(seed, "check-rescale")
    x = rng.standard_normal((30, 3))
    c = 4.0  # power of two: every float scales exactly
    gaps = []
    for sampler in (empirical_resample, multiplier_sample):
        base = sampler(x, B=300, seed=11)
        scaled = sampler(c * x, B=300, seed=11)
        exact = np.array_equal(np.asarray(scaled.max_stats), c * np.asarray(base.max_stats))
        same_events = covers(x, np.zeros(3), base.q_hat) == covers(
            c * x, np.zeros(3), scaled.q_hat
        )
        gaps.append(exact and scaled.q_hat == c * base.q_hat and same_events)
    return all(gaps), "empirical exact: %s, multiplier exact: %s" % (gaps[0], gaps[1])


def _check_multiplier_tail(seed: int) -> Tuple[bool, str]:
    rng = derive_rng(seed, "check-tail")
    x = rng.standard_normal((4000, 1))
    summary = multiplier_sample(x, B=8000, seed=3)
    sd_hat = float(np.std(x - x.mean(axis=0), axis=0)[0])
    target = 1.6448536269514722 * sd_hat  # one-sided 0.95 normal quantile
    gap = abs(summary.q_hat - target) / sd_hat
    return gap <= 0.08, "p=1 multiplier quantile off the normal value by %.3f sd" % gap


def _check_zero_data(seed: int) -> Tuple[bool, str]:
    x = np.zeros((12, 5))
    summary = multiplier_sample(x, B=100, seed=0)
    cis = simultaneous_cis(x, summary, 0.1)
    ok = (
        summary.q_hat == 0.0
        and cis.half_width == 0.0
        and covers(x, np.zeros(5), summary.q_hat)
        and not mean_test(x, summary, 0.1)
    )
    return ok, "degenerate data gives zero quantile and no rejection: %s" % ok


# ---------------------------------------------------------------------------
# suite registry
# ---------------------------------------------------------------------------

_SUITE_CHECKS: Dict[str, Sequence[Tuple[str, Callable[[int], Tuple[bool, str]]]]] = {
    "smoothing": (
        ("smoothing.values", _check_values),
        ("smoothing.finite_difference", _check_finite_difference),
        ("smoothing.dilation", _check_dilation),
        ("smoothing.far_field", _check_far_field),
        ("smoothing.sharpen", _check_sharpen),
        ("smoothing.monotone_in_set", _check_monotone_in_set),
        ("smoothing.growth_order_1", _growth_check(1)),
        ("smoothing.growth_order_2", _growth_check(2)),
        ("smoothing.growth_order_3", _growth_check(3)),
    ),
    "geometry": (
        ("geometry.membership", _check_membership),
        ("geometry.backends", _check_backends),
        ("geometry.band_operations", _check_band_operations),
        ("geometry.serialization", _check_serialization),
        ("geometry.families", _check_families),
    ),
    "lindeberg": (
        ("lindeberg.taylor_identity", _check_taylor),
        ("lindeberg.epsilon_window", _check_epsilon_window),
        ("lindeberg.exact_telescoping", _check_exact_telescoping),
        ("lindeberg.exact_vs_mc", _check_exact_vs_mc),
        ("lindeberg.moment_match", _check_moment_match),
        ("lindeberg.telescoping_mc", _check_telescoping_mc),
        ("lindeberg.decomposition", _check_decomposition),
    ),
    "bootstrap": (
        ("bootstrap.quantile_contract", _check_quantile_contract),
        ("bootstrap.alpha_monotone", _check_alpha_monotone),
        ("bootstrap.event_identity", _check_event_identity),
        ("bootstrap.rescaling", _check_rescaling),
        ("bootstrap.multiplier_tail", _check_multiplier_tail),
        ("bootstrap.zero_data", _check_zero_data),
    ),
}


def run_suite(suite: str, seed: int = 0) -> List[dict]:
    """Run one named suite (or ``all``) and return per-check dicts."""
    if suite == "all":
        results: List[dict] = []
        for name in SUITES:
            results.extend(run_suite(name, seed))
        return results
    try:
        checks = _SUITE_CHECKS[suite]
    except KeyError:
        raise ValidationError(
            "unknown suite %r (choose from %s)" % (suite, ", ".join(SUITES + ("all",)))
        )
    results = []
    for check_id, fn in checks:
        try:
            passed, detail = fn(seed)
        except Exception as exc:  # noqa: BLE001 - a crashed check is a failed check
            passed, detail = False, "raised %r" % (exc,)
        results.append({"id": check_id, "passed": bool(passed), "detail": detail})
    return results


def suite_passed(results: Sequence[dict]) -> bool:
    return all(item["passed"] for item in results)

