"""Distribution-distance estimators against exact enumeration and closed forms."""

import csv
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import binom

from hdclt.distances import (
    DiagonalGaussianOracle,
    NormalizedRademacherOracle,
    binomial_clt_oracle,
    coupling_check,
    empirical_rect_prob,
    family_refinement_curve,
    gaussian_rect_prob,
    kolmogorov_sup,
    nazarov_check,
    orthant_corner_prob,
    write_distance_csv,
)
from hdclt.rectangles import corner_set, default_family, make_family, rectangle
from hdclt.util import ValidationError

# the p = 1, n = 1 sup against the standard normal: Phi(1) - 1/2
D_ONE = 0.5 * math.erf(1.0 / math.sqrt(2.0))


def sign_sum_prob(n, rect):
    """Exact interval probability of (x_1+...+x_n)/sqrt(n) by enumeration."""
    root = math.sqrt(n)
    lo, hi = rect.lower[0], rect.upper[0]
    count = 0
    for signs in itertools.product((-1, 1), repeat=n):
        v = sum(signs) / root
        ok_lo = v > lo or (v == lo and rect.closed_lower[0])
        ok_hi = v < hi or (v == hi and rect.closed_upper[0])
        if ok_lo and ok_hi:
            count += 1
    return Fraction(count, 2**n)


def test_binomial_oracle_against_scipy_off_lattice():
    rng = np.random.default_rng(0)
    for n in (1, 5, 12, 40):
        root = math.sqrt(n)
        done = 0
        while done < 25:
            t = float(rng.uniform(-3.0, 3.0))
            q = (n + t * root) / 2.0
            if abs(q - round(q)) < 1e-6:
                continue  # keep clear of the lattice knife edge
            expected = float(binom.cdf(math.floor(q), n, 0.5))
            assert binomial_clt_oracle(n, t) == pytest.approx(expected, abs=1e-13)
            done += 1


def test_binomial_oracle_on_lattice_points():
    for n in (3, 7, 16):
        root = math.sqrt(n)
        for h in range(n + 1):
            t = (2 * h - n) / root
            assert binomial_clt_oracle(n, t) == pytest.approx(
                float(binom.cdf(h, n, 0.5)), abs=1e-13
            )


def test_binomial_oracle_edges():
    assert binomial_clt_oracle(6, math.inf) == 1.0
    assert binomial_clt_oracle(6, -math.inf) == 0.0
    assert binomial_clt_oracle(6, -100.0) == 0.0
    assert binomial_clt_oracle(6, 100.0) == 1.0
    with pytest.raises(ValidationError):
        binomial_clt_oracle(0, 1.0)
    with pytest.raises(ValidationError):
        binomial_clt_oracle(6, math.nan)


def test_sign_sum_oracle_against_enumeration():
    rng = np.random.default_rng(1)
    for n in (2, 4, 7):
        oracle = NormalizedRademacherOracle(n)
        for _ in range(40):
            lo = float(rng.uniform(-3.0, 1.0))
            hi = lo + float(rng.uniform(0.2, 4.0))
            closed = (bool(rng.integers(2)), bool(rng.integers(2)))
            rect = rectangle([lo], [hi], closed_lower=[closed[0]], closed_upper=[closed[1]])
            est = oracle.rect_prob(rect)
            assert est.mc_std_error == 0.0
            assert Fraction(est.value).limit_denominator(2**n) == sign_sum_prob(n, rect)


def test_sign_sum_oracle_endpoint_flags_on_lattice():
    # n = 4: atom weights 1,4,6,4,1 over values -2,-1,0,1,2; the CDF table is a
    # float cumsum so compare as nearest dyadic rationals
    oracle = NormalizedRademacherOracle(4)

    def grab(r):
        return Fraction(oracle.rect_prob(r).value).limit_denominator(16)

    assert grab(rectangle([-1.0], [1.0])) == Fraction(14, 16)
    assert grab(rectangle([-1.0], [1.0], closed_lower=[False])) == Fraction(10, 16)
    assert grab(rectangle([-1.0], [1.0], closed_upper=[False])) == Fraction(10, 16)
    assert grab(
        rectangle([-1.0], [1.0], closed_lower=[False], closed_upper=[False])
    ) == Fraction(6, 16)
    assert grab(rectangle([-math.inf], [0.0])) == Fraction(11, 16)


def test_diagonal_gaussian_oracle_products():
    from scipy.special import ndtr

    oracle = DiagonalGaussianOracle([1.0, 4.0, 0.25])
    rng = np.random.default_rng(2)
    for _ in range(30):
        lo = rng.uniform(-3.0, 0.5, size=3)
        hi = lo + rng.uniform(0.2, 4.0, size=3)
        rect = rectangle(lo, hi)
        expected = 1.0
        for j, sd in enumerate((1.0, 2.0, 0.5)):
            expected *= ndtr(hi[j] / sd) - ndtr(lo[j] / sd)
        est = oracle.rect_prob(rect)
        assert est.method == "ExactProduct"
        assert est.value == pytest.approx(expected, rel=1e-13, abs=1e-300)


def test_diagonal_oracle_rejects_bad_input():
    with pytest.raises(ValidationError):
        DiagonalGaussianOracle([1.0, -0.5])
    with pytest.raises(ValidationError):
        DiagonalGaussianOracle([1.0]).rect_prob(rectangle([0.0, 0.0], [1.0, 1.0]))


def test_gaussian_rect_prob_diagonal_is_exact():
    est = gaussian_rect_prob(np.diag([1.0, 9.0]), rectangle([-1.0, -3.0], [1.0, 3.0]))
    expected = math.erf(1.0 / math.sqrt(2.0)) ** 2
    assert est.method == "ExactProduct"
    assert est.mc_std_error == 0.0
    assert est.value == pytest.approx(expected, abs=1e-14)


def test_gaussian_rect_prob_correlated_orthant():
    sigma = np.array([[1.0, 0.5], [0.5, 1.0]])
    est = gaussian_rect_prob(sigma, corner_set([0.0, 0.0]), budget=400_000, seed=0)
    assert est.method == "MonteCarlo"
    assert est.mc_std_error > 0.0
    assert abs(est.value - 1.0 / 3.0) <= 4.0 * est.mc_std_error


def test_orthant_corner_values():
    assert orthant_corner_prob(0.0) == 0.25
    assert orthant_corner_prob(1.0) == pytest.approx(0.5, abs=1e-15)
    assert orthant_corner_prob(-1.0) == pytest.approx(0.0, abs=1e-15)
    assert orthant_corner_prob(0.5) == pytest.approx(1.0 / 3.0, abs=1e-15)
    with pytest.raises(ValidationError):
        orthant_corner_prob(1.5)


def test_empirical_rect_prob_hand_count():
    cloud = np.array([[0.0], [1.0], [2.0]])
    est = empirical_rect_prob(cloud, rectangle([0.5], [2.0]))
    assert est.value == 2.0 / 3.0
    assert est.mc_std_error == pytest.approx(math.sqrt((2 / 3) * (1 / 3) / 3))
    assert empirical_rect_prob(cloud, rectangle([5.0], [6.0])).value == 0.0


def test_sup_distance_frozen_one_dimensional_value():
    est = kolmogorov_sup(
        NormalizedRademacherOracle(1), DiagonalGaussianOracle([1.0]), default_family(1)
    )
    assert est.value == pytest.approx(D_ONE, abs=1e-9)
    assert est.value == pytest.approx(0.3413447460685429, abs=1e-9)
    assert est.mc_std_error == 0.0


def test_sup_distance_identical_sides_is_zero():
    fam = default_family(2)
    est = kolmogorov_sup(
        DiagonalGaussianOracle([1.0, 1.0]), DiagonalGaussianOracle([1.0, 1.0]), fam
    )
    assert est.value == 0.0
    assert len(est.per_rectangle) == len(fam.rectangles)


def test_sup_distance_argmax_labels():
    fam = make_family("random", 2, count=16, seed=5)
    rng = np.random.default_rng(6)
    est = kolmogorov_sup(
        rng.standard_normal((500, 2)), rng.standard_normal((500, 2)) + 0.5, fam
    )
    assert est.family_kind == "random"
    idx = int(est.argmax_id[len("random[") : -1])
    assert est.argmax_id == "random[%d]" % idx
    assert est.per_rectangle[idx][1] == est.value
    assert len(est.p_hat_p) == len(est.p_hat_q) == 16


def test_sup_distance_rejects_empty_family():
    from hdclt.rectangles import RectangleFamily

    with pytest.raises(ValidationError):
        kolmogorov_sup(
            DiagonalGaussianOracle([1.0]),
            DiagonalGaussianOracle([1.0]),
            RectangleFamily(kind="random", rectangles=()),
        )


def test_distance_csv_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    fam = make_family("random", 3, count=8, seed=8)
    est = kolmogorov_sup(
        rng.standard_normal((200, 3)), rng.standard_normal((200, 3)), fam
    )
    path = str(tmp_path / "dist.csv")
    write_distance_csv(est, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["family_id", "rect_id", "p_hat_P", "p_hat_Q", "abs_diff"]
    assert len(rows) == 1 + 8
    for i, row in enumerate(rows[1:]):
        assert row[0] == "random"
        assert row[1] == "random[%d]" % i
        # repr cells must reproduce the exact doubles
        assert float(row[2]) == est.p_hat_p[i]
        assert float(row[3]) == est.p_hat_q[i]
        assert float(row[4]) == est.per_rectangle[i][1]


def test_boundary_band_mass_small_run():
    rep = nazarov_check(np.eye(2), budget=400_000, seed=1)
    assert rep.passed
    assert rep.max_ratio <= 10.0
    assert 0.9 <= rep.t_exponent <= 1.1
    assert rep.t_grid == (0.01, 0.02, 0.04, 0.08)
    # shared draws make per-rectangle band mass exactly monotone in t
    by_rect = {}
    for rect_id, t, mass in rep.table:
        by_rect.setdefault(rect_id, []).append((t, mass))
    for entries in by_rect.values():
        masses = [m for _, m in sorted(entries)]
        assert all(b >= a for a, b in zip(masses, masses[1:]))


def test_boundary_band_mass_rejects_bad_grid():
    with pytest.raises(ValidationError):
        nazarov_check(np.eye(2), t_grid=(0.1, -0.2))
    with pytest.raises(ValidationError):
        nazarov_check(np.diag([1.0, 0.0]))


def test_coupled_indicator_inequality():
    rep = coupling_check(p=3, n_draws=20_000, n_pairs=12, seed=2)
    assert rep.violations == 0
    assert rep.passed
    assert rep.n_pairs == 12


def test_family_refinement_curve_is_nondecreasing():
    rng = np.random.default_rng(9)
    cloud_p = rng.standard_normal((2_000, 2))
    cloud_q = rng.standard_normal((2_000, 2)) * 1.3
    curve = family_refinement_curve(cloud_p, cloud_q, 2, sizes=(32, 64, 128))
    assert [s for s, _ in curve] == [32, 64, 128]
    values = [v for _, v in curve]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] > 0.0
