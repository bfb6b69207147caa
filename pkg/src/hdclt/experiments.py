"""Experiment drivers: rate curves, comparison sweeps, and slope fitting.

Monte Carlo distance curves use common random numbers: one shared uniform
stream feeds every grid point (binomial quantile transforms for two-point
sums, the normal quantile for the Gaussian side), so estimation errors are
strongly correlated along the grid and fitted slopes stay stable at desk
budgets. Exact oracle paths (one-dimensional sign sums, the bivariate median
orthant) bypass sampling entirely.

Slopes come from weighted least squares on log-log points; points not
separated from zero by two standard errors are excluded and reported rather
than fitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtri

from ._kernels import count_in_boxes
from .bootstrap import (
    DEFAULT_B,
    DEFAULT_REPS,
    METHOD_EMPIRICAL,
    METHOD_MULTIPLIER,
    empirical_boot_vectors,
    coverage_experiment,
)
from .distances import (
    DiagonalGaussianOracle,
    NormalizedRademacherOracle,
    kolmogorov_sup,
    orthant_corner_prob,
)
from .interpolation import _two_point_weights
from .populations import (
    CorrelationModel,
    EntryLaw,
    PopulationSpec,
    build_correlation,
    cholesky_lower,
    delta_infinity,
    sample_covariance,
    sample_population,
    sample_sum_cloud,
)
from .rectangles import RectangleFamily, default_family
from .util import ValidationError, canonical_json, child_seed, derive_rng

__all__ = [
    "EXPERIMENT_KINDS",
    "ExperimentConfig",
    "RateFit",
    "fit_loglog_slope",
    "run_clt_rate",
    "BootstrapRateResult",
    "run_bootstrap_rate",
    "GaussianCompareResult",
    "run_gaussian_compare",
    "ExperimentOutcome",
    "run_experiment",
    "CSV_COLUMNS",
    "DEFAULT_N_GRID",
]

EXPERIMENT_KINDS = (
    "clt_rate",
    "bootstrap_rate",
    "gaussian_compare",
    "coverage",
    "smoothing_checks",
    "lindeberg_checks",
)

DEFAULT_N_GRID = tuple(2 ** k for k in range(2, 13))
DEFAULT_DELTA_GRID = (0.02, 0.032, 0.05, 0.08, 0.126, 0.2)
ESTIMATOR_KINDS = ("auto", "oracle", "monte_carlo")
CSV_COLUMNS = ("experiment", "n", "p", "method", "distance", "std_error", "slope_so_far")

_CHUNK = 250_000


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete, serializable description of one experiment run."""

    experiment: str
    spec: PopulationSpec
    n_grid: Tuple[int, ...] = DEFAULT_N_GRID
    budget: int = 2_000_000
    data_reps: int = 50
    B: int = DEFAULT_B
    reps: int = DEFAULT_REPS
    alpha: float = 0.1
    method: str = "both"
    delta_grid: Tuple[float, ...] = DEFAULT_DELTA_GRID
    estimator: str = "auto"
    use_true_sigma: bool = False
    seed: int = 0
    out_path: str = "results"

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "delta_grid", tuple(float(d) for d in self.delta_grid))
        if self.experiment not in EXPERIMENT_KINDS:
            raise ValidationError("unknown experiment %r" % (self.experiment,))
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise ValidationError("n_grid must be nonempty positive integers")
        if any(b >= a for a, b in zip(self.n_grid[1:], self.n_grid)):
            raise ValidationError("n_grid must be strictly increasing")
        if self.budget < 1 or self.B < 1 or self.data_reps < 1 or self.reps < 1:
            raise ValidationError("budgets must be positive")
        if not (0.0 < self.alpha < 1.0):
            raise ValidationError("alpha must lie in (0, 1)")
        if self.method not in (METHOD_EMPIRICAL, METHOD_MULTIPLIER, "both"):
            raise ValidationError("method must be empirical, multiplier, or both")
        if self.estimator not in ESTIMATOR_KINDS:
            raise ValidationError("estimator must be one of %r" % (ESTIMATOR_KINDS,))
        if any(d < 0 for d in self.delta_grid):
            raise ValidationError("delta_grid entries must be >= 0")
        if any(b >= a for a, b in zip(self.delta_grid[1:], self.delta_grid)):
            raise ValidationError("delta_grid must be strictly increasing")

    def to_json_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "population": self.spec.to_json_dict(),
            "n_grid": list(self.n_grid),
            "budget": self.budget,
            "data_reps": self.data_reps,
            "B": self.B,
            "reps": self.reps,
            "alpha": self.alpha,
            "method": self.method,
            "delta_grid": list(self.delta_grid),
            "estimator": self.estimator,
            "use_true_sigma": self.use_true_sigma,
            "seed": self.seed,
            "out_path": self.out_path,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_json_dict())

    @staticmethod
    def from_json_dict(obj: dict) -> "ExperimentConfig":
        if "experiment" not in obj:
            raise ValidationError("config is missing the 'experiment' field")
        if "population" not in obj:
            raise ValidationError("config is missing the 'population' field")
        defaults = {
            "n_grid": DEFAULT_N_GRID,
            "budget": 2_000_000,
            "data_reps": 50,
            "B": DEFAULT_B,
            "reps": DEFAULT_REPS,
            "alpha": 0.1,
            "method": "both",
            "delta_grid": DEFAULT_DELTA_GRID,
            "estimator": "auto",
            "use_true_sigma": False,
            "seed": 0,
            "out_path": "results",
        }
        known = set(defaults) | {"experiment", "population"}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ValidationError("unknown config fields: %s" % (", ".join(unknown),))
        kwargs = {k: obj.get(k, v) for k, v in defaults.items()}
        return ExperimentConfig(
            experiment=obj["experiment"],
            spec=PopulationSpec.from_json_dict(obj["population"]),
            **kwargs,
        )

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        import json

        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError("config is not valid JSON: %s" % (exc,))
        if not isinstance(obj, dict):
            raise ValidationError("config must be a JSON object")
        return ExperimentConfig.from_json_dict(obj)


# ---------------------------------------------------------------------------
# slope fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    """Weighted log-log fit over (grid value, distance, std error) points."""

    points: Tuple[Tuple[float, float, float], ...]
    excluded: Tuple[float, ...]
    slope: float
    intercept: float
    slope_std_error: float
    fitted: bool
    note: str = ""
    label: str = ""

    def to_json_dict(self) -> dict:
        return {
            "points": [list(pt) for pt in self.points],
            "excluded": list(self.excluded),
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_std_error": self.slope_std_error,
            "fitted": self.fitted,
            "note": self.note,
            "label": self.label,
        }


def fit_loglog_slope(points: Iterable[Sequence[float]], label: str = "") -> RateFit:
    """WLS fit of log distance on log grid value.

    Weights are inverse relative variances (d/se)^2; a point whose distance
    is not above twice its std error carries no usable signal and is excluded
    (and reported). Fewer than three usable points yields a no-fit result
    rather than an error, since an indistinguishable-from-zero curve is a
    legitimate outcome.
    """
    pts = tuple((float(n), float(d), float(se)) for n, d, se in points)
    usable = [(n, d, se) for n, d, se in pts if d > 2.0 * se and d > 0.0]
    excluded = tuple(n for n, d, se in pts if not (d > 2.0 * se and d > 0.0))
    if len(usable) < 3:
        return RateFit(
            points=pts,
            excluded=excluded,
            slope=math.nan,
            intercept=math.nan,
            slope_std_error=math.nan,
            fitted=False,
            note="fewer than 3 points above the noise floor",
            label=label,
        )
    x = np.log([n for n, _, _ in usable])
    y = np.log([d for _, d, _ in usable])
    rel = np.array([se / d if se > 0 else 1e-12 for _, d, se in usable])
    w = 1.0 / np.square(np.maximum(rel, 1e-12))
    w = w / w.max()
    wsum = w.sum()
    x_bar = float((w * x).sum() / wsum)
    y_bar = float((w * y).sum() / wsum)
    sxx = float((w * (x - x_bar) ** 2).sum())
    if sxx <= 0.0:
        return RateFit(
            points=pts,
            excluded=excluded,
            slope=math.nan,
            intercept=math.nan,
            slope_std_error=math.nan,
            fitted=False,
            note="degenerate grid: no spread in the regressor",
            label=label,
        )
    slope = float((w * (x - x_bar) * (y - y_bar)).sum() / sxx)
    intercept = y_bar - slope * x_bar
    resid = y - (intercept + slope * x)
    dof = len(usable) - 2
    scale = float((w * resid ** 2).sum() / dof) if dof > 0 else 0.0
    return RateFit(
        points=pts,
        excluded=excluded,
        slope=slope,
        intercept=intercept,
        slope_std_error=math.sqrt(max(scale, 0.0) / sxx),
        fitted=True,
        note="",
        label=label,
    )


# ---------------------------------------------------------------------------
# CLT rate
# ---------------------------------------------------------------------------

def _require_closed_family(family: RectangleFamily) -> Tuple[np.ndarray, np.ndarray]:
    for r in family.rectangles:
        for j in range(family.dim):
            if (math.isfinite(r.lower[j]) and not r.closed_lower[j]) or (
                math.isfinite(r.upper[j]) and not r.closed_upper[j]
            ):
                raise ValidationError("counting path needs closed finite endpoints")
    return family.bounds_arrays()


def _sum_lattice(law: EntryLaw, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Sorted values of an n-entry two-point sum and the CDF over them."""
    values, weights = _two_point_weights(law, n)
    order = np.argsort(values, kind="stable")
    cdf = np.cumsum(weights[order])
    cdf[-1] = 1.0
    return values[order], cdf


def _mixing(spec: PopulationSpec) -> Optional[np.ndarray]:
    if spec.model.kind == "identity":
        return None
    lower, _ = cholesky_lower(build_correlation(spec.model, spec.p))
    return lower


def _crn_supported(law: EntryLaw) -> bool:
    return law.kind in ("rademacher", "two_point_asymmetric", "standard_normal")


def run_clt_rate(cfg: ExperimentConfig) -> RateFit:
    """Distance between the normalized n-sum and its Gaussian limit, per n.

    One-dimensional sign sums against the normal limit go through the exact
    lattice and CDF oracles with zero sampling error. Everything else runs a
    common-random-number stream: each uniform deviate is pushed through the
    n-specific sum quantile on the data side and the normal quantile on the
    Gaussian side, so the two clouds are comonotone and the distance curve is
    smooth in n.
    """
    spec = cfg.spec
    p = spec.p
    family = default_family(p)
    exact = (
        p == 1
        and spec.law.kind == "rademacher"
        and spec.model.kind == "identity"
        and cfg.estimator != "monte_carlo"
    )
    if exact:
        gauss = DiagonalGaussianOracle([1.0])
        points = []
        for n in cfg.n_grid:
            est = kolmogorov_sup(NormalizedRademacherOracle(n), gauss, family)
            points.append((n, est.value, 0.0))
        return fit_loglog_slope(points, label="exact_oracle")
    if cfg.estimator == "oracle":
        raise ValidationError(
            "exact path needs p = 1, sign entries, and the identity model"
        )

    if not _crn_supported(spec.law):
        # no closed-form sum quantile: independent clouds per grid point
        points = []
        gauss_spec = PopulationSpec(
            p=p, law=EntryLaw(kind="standard_normal"), model=spec.model
        )
        ref = sample_sum_cloud(gauss_spec, 1, cfg.budget, child_seed(cfg.seed, "clt-ref"), denominator_n=1)
        for n in cfg.n_grid:
            cloud = sample_sum_cloud(spec, n, cfg.budget, child_seed(cfg.seed, "clt-x", n), denominator_n=n)
            est = kolmogorov_sup(cloud, ref, family)
            points.append((n, est.value, est.mc_std_error))
        return fit_loglog_slope(points, label="monte_carlo")

    lower, upper = _require_closed_family(family)
    n_rects = len(family)
    mix = _mixing(spec)
    lattices = {}
    if spec.law.kind != "standard_normal":
        for n in cfg.n_grid:
            values, cdf = _sum_lattice(spec.law, n)
            lattices[n] = (values / math.sqrt(n), cdf)

    counts = np.zeros((len(cfg.n_grid) + 1, n_rects), dtype=np.int64)
    done = 0
    chunk_index = 0
    while done < cfg.budget:
        take = min(_CHUNK, cfg.budget - done)
        rng = derive_rng(cfg.seed, "clt-crn", chunk_index)
        u = rng.random((take, p))
        z = ndtri(u)
        gauss_pts = z if mix is None else z @ mix.T
        counts[-1] += count_in_boxes(gauss_pts, lower, upper)
        for i, n in enumerate(cfg.n_grid):
            if spec.law.kind == "standard_normal":
                pts = gauss_pts
            else:
                values, cdf = lattices[n]
                idx = np.searchsorted(cdf, u.ravel(), side="left").reshape(take, p)
                pts = values[np.minimum(idx, len(values) - 1)]
                if mix is not None:
                    pts = pts @ mix.T
            counts[i] += count_in_boxes(pts, lower, upper)
        done += take
        chunk_index += 1

    probs = counts.astype(np.float64) / cfg.budget
    gauss_probs = probs[-1]
    points = []
    for i, n in enumerate(cfg.n_grid):
        diffs = np.abs(probs[i] - gauss_probs)
        idx = int(np.argmax(diffs))
        # independent-cloud error formula; conservative for the coupled stream
        se = math.sqrt(
            (probs[i][idx] * (1 - probs[i][idx]) + gauss_probs[idx] * (1 - gauss_probs[idx]))
            / cfg.budget
        )
        points.append((n, float(diffs[idx]), se))
    return fit_loglog_slope(points, label="monte_carlo")


# ---------------------------------------------------------------------------
# bootstrap rate
# ---------------------------------------------------------------------------

@dataclass
class BootstrapRateResult:
    fits: Dict[str, RateFit]
    layers: Tuple[dict, ...]

    def to_json_dict(self) -> dict:
        return {
            "fits": {m: f.to_json_dict() for m, f in self.fits.items()},
            "layers": [dict(row) for row in self.layers],
        }


def _reference_side(spec: PopulationSpec, n: int, budget: int, seed: int):
    """Exact law of the normalized n-sum when available, else a cloud."""
    if spec.p == 1 and spec.law.kind == "rademacher" and spec.model.kind == "identity":
        return NormalizedRademacherOracle(n)
    if spec.law.kind == "standard_normal" and spec.model.kind == "identity":
        return DiagonalGaussianOracle(np.ones(spec.p))
    return sample_sum_cloud(spec, n, budget, seed, denominator_n=n)


def run_bootstrap_rate(cfg: ExperimentConfig) -> BootstrapRateResult:
    """Distance between the conditional bootstrap law and the law of the sum.

    Outer layer: data_reps independent datasets per n; inner layer: B
    bootstrap replicates (or the exact conditional Gaussian law where it is
    closed-form). The reported std error is the between-dataset spread, which
    carries both layers; the inner layer's own contribution is reported
    separately per grid point.
    """
    spec = cfg.spec
    p = spec.p
    methods = [cfg.method] if cfg.method != "both" else [METHOD_EMPIRICAL, METHOD_MULTIPLIER]
    family = default_family(p)
    true_corr = build_correlation(spec.model, p)
    per_method_points = {m: [] for m in methods}
    layer_rows = []
    for n in cfg.n_grid:
        ref = _reference_side(spec, n, cfg.budget, child_seed(cfg.seed, "boot-ref", n))
        dists = {m: [] for m in methods}
        inner = {m: [] for m in methods}
        for r in range(cfg.data_reps):
            sample = sample_population(spec, n, child_seed(cfg.seed, "boot-data", n, r))
            for m in methods:
                if m == METHOD_MULTIPLIER:
                    sigma = true_corr if cfg.use_true_sigma else sample_covariance(sample.data)
                    if p == 1:
                        side = DiagonalGaussianOracle([sigma[0, 0]])
                    else:
                        lw, _ = cholesky_lower(sigma)
                        rng = derive_rng(cfg.seed, "boot-mult", n, r)
                        side = rng.standard_normal((cfg.B, p)) @ lw.T
                else:
                    side = empirical_boot_vectors(
                        sample.data, cfg.B, child_seed(cfg.seed, "boot-emp", n, r)
                    )
                est = kolmogorov_sup(side, ref, family)
                dists[m].append(est.value)
                inner[m].append(est.mc_std_error)
        for m in methods:
            arr = np.asarray(dists[m])
            se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
            per_method_points[m].append((n, float(arr.mean()), se))
            layer_rows.append(
                {
                    "n": n,
                    "method": m,
                    "data_layer_se": se,
                    "boot_layer_se": float(np.mean(inner[m])),
                }
            )
    fits = {
        m: fit_loglog_slope(per_method_points[m], label=m) for m in methods
    }
    return BootstrapRateResult(fits=fits, layers=tuple(layer_rows))


# ---------------------------------------------------------------------------
# Gaussian comparison
# ---------------------------------------------------------------------------

@dataclass
class GaussianCompareResult:
    p: int
    rho_base: float
    deltas: Tuple[float, ...]
    distances: Tuple[float, ...]
    std_errors: Tuple[float, ...]
    dropped: Tuple[float, ...]
    fit: RateFit
    passed: bool
    estimator: str
    delta_inf_error: float

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "rho_base": self.rho_base,
            "deltas": list(self.deltas),
            "distances": list(self.distances),
            "std_errors": list(self.std_errors),
            "dropped": list(self.dropped),
            "fit": self.fit.to_json_dict(),
            "passed": self.passed,
            "estimator": self.estimator,
            "delta_inf_error": self.delta_inf_error,
        }


def _base_rho(spec: PopulationSpec) -> float:
    if spec.model.kind == "identity":
        return 0.0
    if spec.model.kind == "equicorrelated":
        return float(spec.model.rho_bar)
    raise ValidationError(
        "comparison sweep needs an identity or equicorrelated base model"
    )


def run_gaussian_compare(cfg: ExperimentConfig) -> GaussianCompareResult:
    """Distance between two Gaussian laws as the covariance gap grows.

    The perturbation adds delta to every off-diagonal entry (a unit-sup-norm
    bump), so the perturbed law stays in the equal-correlation class and its
    entrywise standardized gap equals delta exactly. At p = 2 the sup over
    corner sets is attained at the median corner, where both probabilities
    have the arcsine closed form; that path is sampling-free. Larger p runs
    a shared-normal-draw Monte Carlo over the default family.
    """
    spec = cfg.spec
    p = spec.p
    if p < 2:
        raise ValidationError("comparison sweep needs p >= 2")
    rho_base = _base_rho(spec)
    estimator = cfg.estimator
    if estimator == "auto":
        estimator = "oracle" if p == 2 else "monte_carlo"
    if estimator == "oracle" and p != 2:
        raise ValidationError("the closed-form comparison path needs p = 2")

    usable, dropped = [], []
    max_rho = 1.0
    for d in cfg.delta_grid:
        if rho_base + d < max_rho:
            usable.append(d)
        else:
            dropped.append(d)

    sigma_y = build_correlation(
        CorrelationModel(kind="equicorrelated", rho_bar=rho_base), p
    )
    delta_inf_error = 0.0
    for d in usable:
        if d == 0.0:
            continue
        sigma_z = build_correlation(
            CorrelationModel(kind="equicorrelated", rho_bar=rho_base + d), p
        )
        delta_inf_error = max(delta_inf_error, abs(delta_infinity(sigma_z, sigma_y) - d))

    if estimator == "oracle":
        base = orthant_corner_prob(rho_base)
        distances = [abs(orthant_corner_prob(rho_base + d) - base) for d in usable]
        ses = [0.0 for _ in usable]
    else:
        family = default_family(p)
        lower, upper = _require_closed_family(family)
        n_rects = len(family)
        factors = []
        for d in usable:
            lw, _ = cholesky_lower(
                build_correlation(CorrelationModel(kind="equicorrelated", rho_bar=rho_base + d), p)
            )
            factors.append(lw)
        lw_base, _ = cholesky_lower(sigma_y)
        counts = np.zeros((len(usable) + 1, n_rects), dtype=np.int64)
        done = 0
        chunk_index = 0
        while done < cfg.budget:
            take = min(_CHUNK, cfg.budget - done)
            z = derive_rng(cfg.seed, "gc-crn", chunk_index).standard_normal((take, p))
            counts[-1] += count_in_boxes(z @ lw_base.T, lower, upper)
            for i, lw in enumerate(factors):
                counts[i] += count_in_boxes(z @ lw.T, lower, upper)
            done += take
            chunk_index += 1
        probs = counts.astype(np.float64) / cfg.budget
        distances, ses = [], []
        for i in range(len(usable)):
            diffs = np.abs(probs[i] - probs[-1])
            idx = int(np.argmax(diffs))
            se = math.sqrt(
                (probs[i][idx] * (1 - probs[i][idx]) + probs[-1][idx] * (1 - probs[-1][idx]))
                / cfg.budget
            )
            distances.append(float(diffs[idx]))
            ses.append(se)

    fit = fit_loglog_slope(zip(usable, distances, ses), label=estimator)
    passed = fit.fitted and 0.8 <= fit.slope <= 1.2
    return GaussianCompareResult(
        p=p,
        rho_base=rho_base,
        deltas=tuple(usable),
        distances=tuple(distances),
        std_errors=tuple(ses),
        dropped=tuple(dropped),
        fit=fit,
        passed=passed,
        estimator=estimator,
        delta_inf_error=delta_inf_error,
    )


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

@dataclass
class ExperimentOutcome:
    """Everything a run produces: a JSON-ready summary and CSV rows."""

    summary: dict
    csv_rows: Tuple[Tuple[str, ...], ...]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _rate_rows(experiment: str, p: int, method: str, fit: RateFit) -> List[Tuple[str, ...]]:
    rows = []
    prefix = []
    for n, d, se in fit.points:
        prefix.append((n, d, se))
        partial = fit_loglog_slope(prefix)
        slope_cell = repr(partial.slope) if partial.fitted else ""
        rows.append(
            (
                experiment,
                _fmt(int(n) if float(n).is_integer() else n),
                str(p),
                method,
                repr(d),
                repr(se),
                slope_cell,
            )
        )
    return rows


def run_experiment(cfg: ExperimentConfig) -> ExperimentOutcome:
    """Execute the configured experiment; pure function of the config."""
    p = cfg.spec.p
    if cfg.experiment == "clt_rate":
        fit = run_clt_rate(cfg)
        summary = {
            "config": cfg.to_json_dict(),
            "fit": fit.to_json_dict(),
        }
        rows = _rate_rows("clt_rate", p, fit.label or "clt", fit)
        return ExperimentOutcome(summary=summary, csv_rows=tuple(rows))
    if cfg.experiment == "bootstrap_rate":
        result = run_bootstrap_rate(cfg)
        summary = {"config": cfg.to_json_dict(), "result": result.to_json_dict()}
        rows = []
        for m, fit in result.fits.items():
            rows.extend(_rate_rows("bootstrap_rate", p, m, fit))
        return ExperimentOutcome(summary=summary, csv_rows=tuple(rows))
    if cfg.experiment == "gaussian_compare":
        result = run_gaussian_compare(cfg)
        summary = {"config": cfg.to_json_dict(), "result": result.to_json_dict()}
        # the n column holds the 1-based grid index; delta values live in JSON
        rows = []
        prefix = []
        for i, (d, dist, se) in enumerate(
            zip(result.deltas, result.distances, result.std_errors)
        ):
            prefix.append((d, dist, se))
            partial = fit_loglog_slope(prefix)
            rows.append(
                (
                    "gaussian_compare",
                    str(i + 1),
                    str(p),
                    result.estimator,
                    repr(dist),
                    repr(se),
                    repr(partial.slope) if partial.fitted else "",
                )
            )
        return ExperimentOutcome(summary=summary, csv_rows=tuple(rows))
    if cfg.experiment == "coverage":
        reports = []
        rows = []
        for n in cfg.n_grid:
            rep = coverage_experiment(
                cfg.spec,
                n,
                cfg.alpha,
                B=cfg.B,
                reps=cfg.reps,
                seed=child_seed(cfg.seed, "coverage", n),
            )
            reports.append(rep.to_json_dict())
            for m in sorted(rep.coverage):
                rows.append(
                    (
                        "coverage",
                        str(n),
                        str(p),
                        m,
                        repr(abs(rep.coverage[m] - (1.0 - cfg.alpha))),
                        repr(rep.std_error[m]),
                        "",
                    )
                )
        summary = {"config": cfg.to_json_dict(), "reports": reports}
        return ExperimentOutcome(summary=summary, csv_rows=tuple(rows))
    if cfg.experiment in ("smoothing_checks", "lindeberg_checks"):
        from .checks import run_suite

        suite = "smoothing" if cfg.experiment == "smoothing_checks" else "lindeberg"
        results = run_suite(suite, seed=cfg.seed)
        rows = [
            (
                cfg.experiment,
                "0",
                str(p),
                item["id"],
                repr(0.0 if item["passed"] else 1.0),
                repr(0.0),
                "",
            )
            for item in results
        ]
        summary = {"config": cfg.to_json_dict(), "checks": results}
        return ExperimentOutcome(summary=summary, csv_rows=tuple(rows))
    raise ValidationError("unknown experiment %r" % (cfg.experiment,))
