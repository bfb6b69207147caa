"""Numerical laboratory for high-dimensional normal approximation.

The package estimates Kolmogorov-type distances over hyperrectangle
families between normalized sums, Gaussian references, and bootstrap
laws, and exposes the smoothing / interpolation calculus those
estimates rest on. Everything is deterministic given a master seed.
"""

from .bootstrap import (
    BootstrapSummary,
    bootstrap_quantile,
    coverage_experiment,
    empirical_resample,
    max_statistic,
    mean_test,
    multiplier_sample,
    simultaneous_cis,
)
from .distances import (
    DiagonalGaussianOracle,
    DistanceEstimate,
    NormalizedRademacherOracle,
    binomial_clt_oracle,
    coupling_check,
    empirical_rect_prob,
    gaussian_rect_prob,
    kolmogorov_sup,
    nazarov_check,
    orthant_corner_prob,
)
from .experiments import ExperimentConfig, RateFit, fit_loglog_slope, run_experiment
from .populations import (
    CorrelationModel,
    EntryLaw,
    PopulationSpec,
    SampleMatrix,
    load_matrix,
    orlicz_norm,
    sample_population,
    sample_sum_cloud,
    save_matrix,
)
from .rectangles import (
    EMPTY,
    Hyperrectangle,
    RectangleFamily,
    corner_set,
    default_family,
    make_family,
    rectangle,
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
from .util import NumericalError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BootstrapSummary",
    "bootstrap_quantile",
    "coverage_experiment",
    "empirical_resample",
    "max_statistic",
    "mean_test",
    "multiplier_sample",
    "simultaneous_cis",
    "DiagonalGaussianOracle",
    "DistanceEstimate",
    "NormalizedRademacherOracle",
    "binomial_clt_oracle",
    "coupling_check",
    "empirical_rect_prob",
    "gaussian_rect_prob",
    "kolmogorov_sup",
    "nazarov_check",
    "orthant_corner_prob",
    "ExperimentConfig",
    "RateFit",
    "fit_loglog_slope",
    "run_experiment",
    "CorrelationModel",
    "EntryLaw",
    "PopulationSpec",
    "SampleMatrix",
    "load_matrix",
    "orlicz_norm",
    "sample_population",
    "sample_sum_cloud",
    "save_matrix",
    "EMPTY",
    "Hyperrectangle",
    "RectangleFamily",
    "corner_set",
    "default_family",
    "make_family",
    "rectangle",
    "symmetric_box",
    "SmoothedIndicator",
    "derivative_growth_probe",
    "far_field_bound_check",
    "grad_phi",
    "hess_phi",
    "phi",
    "scaling_check",
    "third_phi",
    "NumericalError",
    "ValidationError",
]
