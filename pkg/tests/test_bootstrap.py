"""Bootstrap quantiles, event algebra, scaling invariance, coverage."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import kstest

from hdclt.bootstrap import (
    BootstrapSummary,
    bootstrap_quantile,
    coordinate_stats,
    coverage_experiment,
    covers,
    empirical_boot_vectors,
    empirical_resample,
    max_statistic,
    mean_test,
    multiplier_sample,
    simultaneous_cis,
)
from hdclt.populations import CorrelationModel, EntryLaw, PopulationSpec
from hdclt.util import ValidationError


def quantile_oracle(sorted_stats, alpha: Fraction) -> float:
    """Smallest value whose cumulative replicate count reaches 1 - alpha, exactly."""
    B = len(sorted_stats)
    need = (Fraction(1) - alpha) * B
    i = 0
    while i < B:
        v = sorted_stats[i]
        while i < B and sorted_stats[i] == v:
            i += 1
        if Fraction(i) >= need:
            return float(v)
    return float(sorted_stats[-1])


def summarize(stats, alpha):
    stats = np.sort(np.asarray(stats, dtype=np.float64))
    # build through the public constructor so the contract is enforced
    return BootstrapSummary(
        method="empirical",
        B=len(stats),
        max_stats=stats,
        alpha=alpha,
        q_hat=quantile_oracle(stats, Fraction(alpha).limit_denominator(200)),
    )


def test_quantile_reference_example():
    stats = np.arange(1.0, 11.0)
    s = BootstrapSummary(method="empirical", B=10, max_stats=stats, alpha=0.1, q_hat=9.0)
    assert s.q_hat == 9.0
    assert bootstrap_quantile(s, 0.1) == 9.0


def test_quantile_contract_randomized_with_ties():
    rng = np.random.default_rng(0)
    for _ in range(400):
        B = int(rng.integers(1, 60))
        stats = np.sort(np.round(rng.standard_normal(B), 1))
        k = int(rng.integers(1, 200))
        alpha = k / 200.0
        expected = quantile_oracle(stats, Fraction(k, 200))
        s = BootstrapSummary(
            method="multiplier", B=B, max_stats=stats, alpha=alpha, q_hat=expected
        )
        q = s.q_hat
        assert q == expected
        # inf definition, checked directly on the replicate counts
        count_at = int(np.count_nonzero(stats <= q))
        assert Fraction(count_at, B) >= 1 - Fraction(k, 200)
        below = stats[stats < q]
        if below.size:
            count_below = int(np.count_nonzero(stats <= below[-1]))
            assert Fraction(count_below, B) < 1 - Fraction(k, 200)


def test_quantile_monotone_in_alpha():
    rng = np.random.default_rng(1)
    stats = np.sort(rng.standard_normal(200))
    s = summarize(stats, 0.5)
    qs = [bootstrap_quantile(s, a) for a in (0.02, 0.1, 0.25, 0.5, 0.9)]
    assert all(b <= a for a, b in zip(qs, qs[1:]))


def test_single_replicate_quantile():
    s = BootstrapSummary(method="empirical", B=1, max_stats=np.array([2.5]), alpha=0.3, q_hat=2.5)
    assert bootstrap_quantile(s, 0.9) == 2.5
    assert bootstrap_quantile(s, 0.01) == 2.5


def test_summary_contract_rejections():
    stats = np.arange(1.0, 11.0)
    with pytest.raises(ValidationError):
        BootstrapSummary(method="empirical", B=10, max_stats=stats, alpha=0.1, q_hat=8.0)
    with pytest.raises(ValidationError):
        BootstrapSummary(method="empirical", B=10, max_stats=stats[::-1].copy(), alpha=0.1, q_hat=9.0)
    with pytest.raises(ValidationError):
        BootstrapSummary(method="empirical", B=9, max_stats=stats, alpha=0.1, q_hat=9.0)
    with pytest.raises(ValidationError):
        BootstrapSummary(method="empirical", B=10, max_stats=stats, alpha=1.5, q_hat=9.0)
    with pytest.raises(ValidationError):
        BootstrapSummary(method="jackknife", B=10, max_stats=stats, alpha=0.1, q_hat=9.0)


def test_coordinate_stats_hand_values():
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    expected = np.array([4.0, 6.0]) / math.sqrt(2.0)
    assert np.array_equal(coordinate_stats(x), expected)
    assert np.array_equal(coordinate_stats(x, np.array([2.0, 3.0])), np.zeros(2))
    assert max_statistic(x) == expected[1]
    with pytest.raises(ValidationError):
        coordinate_stats(np.zeros((0, 2)))


def test_event_identity_four_ways():
    rng = np.random.default_rng(2)
    for _ in range(30):
        n, p = int(rng.integers(5, 40)), int(rng.integers(1, 6))
        x = rng.standard_normal((n, p))
        method = empirical_resample if rng.integers(2) else multiplier_sample
        s = method(x, 150, int(rng.integers(1 << 30)), alpha=0.1)
        mu = rng.standard_normal(p) * 0.2
        stats = coordinate_stats(x, mu)
        event_max = max_statistic(x, mu) <= s.q_hat
        event_cov = covers(x, mu, s.q_hat)
        event_all = bool(np.all(stats <= s.q_hat))
        assert event_max == event_cov == event_all
        # the zero-mean test is the complement of covering zero
        assert mean_test(x, s, 0.1) == (not covers(x, np.zeros(p), s.q_hat))


def test_interval_membership_matches_coverage():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((60, 4))
    s = multiplier_sample(x, 400, 7, alpha=0.1)
    ci = simultaneous_cis(x, s, 0.1)
    assert ci.half_width == s.q_hat / math.sqrt(60)
    assert ci.centers == tuple(x.mean(axis=0))
    for _ in range(20):
        mu = rng.standard_normal(4) * 0.3
        inside = all(
            abs(c - m) <= ci.half_width for c, m in zip(ci.centers, mu)
        )
        assert inside == covers(x, mu, s.q_hat)


def test_power_of_two_rescaling_is_exact():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((40, 3))
    c = 4.0
    for method in (empirical_resample, multiplier_sample):
        s1 = method(x, 300, 11, alpha=0.1)
        s2 = method(c * x, 300, 11, alpha=0.1)
        assert np.array_equal(s2.max_stats, c * s1.max_stats)
        assert s2.q_hat == c * s1.q_hat
        mu = rng.standard_normal(3)
        for _ in range(10):
            assert covers(x, mu, s1.q_hat) == covers(c * x, c * mu, s2.q_hat)


def test_multiplier_tail_is_folded_normal():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((2_000, 1))
    s = multiplier_sample(x, 8_000, 13, alpha=0.1)
    sd = math.sqrt(float(np.cov(x.T, bias=True)))
    normalized = s.max_stats / sd
    res = kstest(normalized, lambda t: np.vectorize(math.erf)(t / math.sqrt(2.0)))
    assert res.pvalue > 0.01
    # 0.95 two-sided quantile of N(0,1), scaled by the sample sd
    assert abs(s.q_hat - 1.6448536269514722 * sd) < 0.05 * sd


def test_zero_data_degenerates_cleanly():
    x = np.zeros((20, 3))
    for method in (empirical_resample, multiplier_sample):
        s = method(x, 100, 17, alpha=0.1)
        assert s.q_hat == 0.0
        assert np.array_equal(s.max_stats, np.zeros(100))
        assert not mean_test(x, s, 0.1)
        assert simultaneous_cis(x, s, 0.1).half_width == 0.0


def test_empirical_vectors_consistent_with_stats():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((25, 3))
    s = empirical_resample(x, 200, 19, alpha=0.1)
    vectors = empirical_boot_vectors(x, 200, 19)
    assert vectors.shape == (200, 3)
    maxes = np.sort(np.abs(vectors).max(axis=1))
    assert np.allclose(maxes, s.max_stats, rtol=1e-10, atol=1e-12)


def test_coverage_experiment_small():
    spec = PopulationSpec(
        p=3,
        seed=0,
        law=EntryLaw(kind="standard_normal"),
        model=CorrelationModel(kind="identity"),
    )
    rep = coverage_experiment(spec, n=50, alpha=0.1, B=200, reps=100, seed=21)
    assert set(rep.coverage) == {"empirical", "multiplier"}
    for m, value in rep.coverage.items():
        assert 0.75 <= value <= 1.0
        assert rep.std_error[m] > 0.0
    again = coverage_experiment(spec, n=50, alpha=0.1, B=200, reps=100, seed=21)
    assert again.coverage == rep.coverage
    with pytest.raises(ValidationError):
        coverage_experiment(spec, n=50, alpha=0.1, B=200, reps=50)
