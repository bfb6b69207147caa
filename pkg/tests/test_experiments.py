"""Experiment configs, slope fitting, and the runnable study harness."""

import json
import math

import numpy as np
import pytest

from hdclt.experiments import (
    CSV_COLUMNS,
    ExperimentConfig,
    fit_loglog_slope,
    run_bootstrap_rate,
    run_clt_rate,
    run_experiment,
    run_gaussian_compare,
)
from hdclt.populations import CorrelationModel, EntryLaw, PopulationSpec
from hdclt.util import ValidationError


def _spec(p=1, law="rademacher", model="identity", **kw):
    law_kw = {}
    model_kw = {}
    if law == "two_point_asymmetric":
        law_kw["pi"] = kw.get("pi", 0.2)
    if model == "equicorrelated":
        model_kw["rho_bar"] = kw.get("rho_bar", 0.3)
    if model == "ar1":
        model_kw["phi"] = kw.get("phi", 0.5)
    return PopulationSpec(
        p=p, seed=0, law=EntryLaw(kind=law, **law_kw), model=CorrelationModel(kind=model, **model_kw)
    )


def test_config_round_trip():
    cfg = ExperimentConfig(
        experiment="clt_rate",
        spec=_spec(p=2, law="standard_normal", model="equicorrelated"),
        n_grid=(4, 16, 64),
        budget=12_345,
        alpha=0.05,
        method="multiplier",
        delta_grid=(0.01, 0.02),
        estimator="monte_carlo",
        seed=7,
        out_path="sweep",
    )
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.to_json() == cfg.to_json()


def test_config_field_validation():
    spec = _spec()
    good = dict(experiment="clt_rate", spec=spec)
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**good, "experiment": "nope"})
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**good, "n_grid": ()})
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**good, "n_grid": (8, 8)})
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**good, "n_grid": (16, 8)})
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**good, "alpha": 1.0})
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**good, "method": "wild"})
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**good, "estimator": "exact"})
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**good, "delta_grid": (0.05, 0.02)})
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**good, "budget": 0})


def test_config_json_error_paths():
    with pytest.raises(ValidationError, match="not valid JSON"):
        ExperimentConfig.from_json("{nope")
    with pytest.raises(ValidationError, match="JSON object"):
        ExperimentConfig.from_json("[1, 2]")
    with pytest.raises(ValidationError, match="experiment"):
        ExperimentConfig.from_json_dict({"population": _spec().to_json_dict()})
    with pytest.raises(ValidationError, match="population"):
        ExperimentConfig.from_json_dict({"experiment": "clt_rate"})
    base = json.loads(
        ExperimentConfig(experiment="clt_rate", spec=_spec()).to_json()
    )
    base["surprise"] = 1
    with pytest.raises(ValidationError, match="surprise"):
        ExperimentConfig.from_json_dict(base)


def test_fit_recovers_exact_power_laws():
    ns = [4.0, 8.0, 16.0, 32.0, 64.0, 128.0]
    for target, c in ((-0.5, 3.0), (-1.0, 0.7)):
        pts = [(n, c * n**target, 0.0) for n in ns]
        fit = fit_loglog_slope(pts, label="t")
        assert fit.fitted
        assert fit.slope == pytest.approx(target, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(c), abs=1e-12)
        assert fit.label == "t"


def test_fit_refuses_thin_or_noisy_input():
    assert not fit_loglog_slope([(4, 1.0, 0.0), (8, 0.7, 0.0)]).fitted
    drowned = [(n, 1e-4, 1e-3) for n in (4, 8, 16, 32, 64)]
    fit = fit_loglog_slope(drowned)
    assert not fit.fitted
    assert len(fit.excluded) == 5
    flat = fit_loglog_slope([(8, 1.0, 0.0), (8, 0.9, 0.0), (8, 0.8, 0.0)])
    assert not flat.fitted
    assert "grid" in flat.note


def test_fit_error_bars_are_calibrated():
    rng = np.random.default_rng(0)
    ns = np.array([4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0])
    noise = 0.05
    hits = 0
    for _ in range(100):
        d = ns**-0.5 * np.exp(noise * rng.standard_normal(ns.size))
        fit = fit_loglog_slope([(n, di, noise * di) for n, di in zip(ns, d)])
        assert fit.fitted
        if abs(fit.slope + 0.5) <= 2.0 * fit.slope_std_error:
            hits += 1
    assert hits >= 85


def test_clt_rate_exact_path():
    cfg = ExperimentConfig(
        experiment="clt_rate", spec=_spec(), n_grid=(4, 8, 16, 32, 64)
    )
    fit = run_clt_rate(cfg)
    assert fit.label == "exact_oracle"
    assert all(se == 0.0 for _, _, se in fit.points)
    assert fit.points[0][1] == 0.1875
    assert fit.fitted
    assert -0.55 <= fit.slope <= -0.45


def test_clt_rate_oracle_estimator_needs_sign_sums():
    cfg = ExperimentConfig(
        experiment="clt_rate",
        spec=_spec(p=2, law="standard_normal"),
        n_grid=(4, 8, 16),
        estimator="oracle",
    )
    with pytest.raises(ValidationError):
        run_clt_rate(cfg)


def test_clt_rate_gaussian_population_has_zero_distance():
    cfg = ExperimentConfig(
        experiment="clt_rate",
        spec=_spec(p=2, law="standard_normal"),
        n_grid=(4, 8, 16, 32),
        budget=100_000,
    )
    fit = run_clt_rate(cfg)
    assert all(d == 0.0 for _, d, _ in fit.points)
    assert not fit.fitted


def test_bootstrap_rate_small_run():
    cfg = ExperimentConfig(
        experiment="bootstrap_rate",
        spec=_spec(),
        n_grid=(8, 16, 32),
        data_reps=6,
        B=200,
        budget=50_000,
        seed=3,
    )
    result = run_bootstrap_rate(cfg)
    assert set(result.fits) == {"empirical", "multiplier"}
    assert len(result.layers) == 6
    for row in result.layers:
        assert set(row) == {"n", "method", "data_layer_se", "boot_layer_se"}
        assert row["data_layer_se"] >= 0.0
    for fit in result.fits.values():
        assert all(d > 0.0 for _, d, _ in fit.points)


def test_gaussian_compare_closed_form_two_dim():
    cfg = ExperimentConfig(
        experiment="gaussian_compare",
        spec=_spec(p=2, law="standard_normal"),
        delta_grid=(0.02, 0.032, 0.05, 0.08, 0.126, 0.2),
    )
    result = run_gaussian_compare(cfg)
    assert result.estimator == "oracle"
    assert result.dropped == ()
    assert result.std_errors == (0.0,) * 6
    for d, dist in zip(result.deltas, result.distances):
        assert dist == pytest.approx(math.asin(d) / (2.0 * math.pi), abs=1e-15)
    assert result.passed
    assert 0.9 <= result.fit.slope <= 1.1
    assert result.delta_inf_error <= 1e-12


def test_gaussian_compare_drops_invalid_perturbations():
    cfg = ExperimentConfig(
        experiment="gaussian_compare",
        spec=_spec(p=2, law="standard_normal", model="equicorrelated", rho_bar=0.9),
        delta_grid=(0.02, 0.05, 0.126),
    )
    result = run_gaussian_compare(cfg)
    assert result.dropped == (0.126,)
    assert result.deltas == (0.02, 0.05)
    assert not result.fit.fitted
    assert not result.passed


def test_gaussian_compare_guards():
    with pytest.raises(ValidationError):
        run_gaussian_compare(
            ExperimentConfig(experiment="gaussian_compare", spec=_spec(p=1))
        )
    with pytest.raises(ValidationError):
        run_gaussian_compare(
            ExperimentConfig(
                experiment="gaussian_compare",
                spec=_spec(p=4, law="standard_normal"),
                estimator="oracle",
            )
        )
    with pytest.raises(ValidationError):
        run_gaussian_compare(
            ExperimentConfig(
                experiment="gaussian_compare",
                spec=_spec(p=2, law="standard_normal", model="ar1"),
            )
        )


def test_dispatch_emits_uniform_rows_for_every_kind():
    configs = [
        ExperimentConfig(experiment="clt_rate", spec=_spec(), n_grid=(4, 8, 16, 32)),
        ExperimentConfig(
            experiment="bootstrap_rate",
            spec=_spec(),
            n_grid=(8, 16, 32),
            data_reps=4,
            B=100,
            budget=20_000,
        ),
        ExperimentConfig(
            experiment="gaussian_compare",
            spec=_spec(p=2, law="standard_normal"),
            delta_grid=(0.02, 0.05, 0.126),
        ),
        ExperimentConfig(
            experiment="coverage",
            spec=_spec(p=2, law="standard_normal"),
            n_grid=(20,),
            B=100,
            reps=100,
        ),
        ExperimentConfig(experiment="smoothing_checks", spec=_spec()),
        ExperimentConfig(experiment="lindeberg_checks", spec=_spec()),
    ]
    for cfg in configs:
        outcome = run_experiment(cfg)
        assert outcome.summary["config"] == cfg.to_json_dict()
        assert len(outcome.csv_rows) > 0
        for row in outcome.csv_rows:
            assert len(row) == len(CSV_COLUMNS)
            float(row[4])  # distance column parses
            float(row[5])  # std error column parses


def test_dispatch_gaussian_compare_rows_index_the_delta_grid():
    cfg = ExperimentConfig(
        experiment="gaussian_compare",
        spec=_spec(p=2, law="standard_normal"),
        delta_grid=(0.02, 0.05, 0.126),
    )
    outcome = run_experiment(cfg)
    assert [row[1] for row in outcome.csv_rows] == ["1", "2", "3"]
    result = run_gaussian_compare(cfg)
    for row, dist in zip(outcome.csv_rows, result.distances):
        assert float(row[4]) == dist


def test_dispatch_check_kind_rows_carry_check_ids():
    cfg = ExperimentConfig(experiment="lindeberg_checks", spec=_spec())
    outcome = run_experiment(cfg)
    for row in outcome.csv_rows:
        assert row[0] == "lindeberg_checks"
        assert row[1] == "0"
        assert row[3].startswith("lindeberg.")
        assert float(row[4]) == 0.0  # every check in this suite passes
