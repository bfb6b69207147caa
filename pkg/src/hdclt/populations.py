"""Correlated population models.

A population is a mean-zero random vector X = L xi where xi has iid entries
drawn from a unit-variance entry law and L is the lower Cholesky factor of a
correlation matrix. Rows of a sample matrix are independent draws of X.

Entry laws (all centered, unit variance):

* ``standard_normal``
* ``rademacher``             +/-1 with probability 1/2
* ``scaled_laplace``        Laplace with scale 1/sqrt(2)
* ``scaled_uniform``        uniform on [-sqrt(3), sqrt(3)]
* ``two_point_asymmetric``  a with probability pi, b otherwise, matched moments

Correlation models: ``identity``, ``equicorrelated`` (rho_bar in [0, 1)),
``ar1`` (phi in (-1, 1)), ``explicit`` (caller-supplied matrix).
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import integrate

from .util import NumericalError, ValidationError, derive_rng

__all__ = [
    "EntryLaw",
    "CorrelationModel",
    "PopulationSpec",
    "SampleMatrix",
    "LAW_KINDS",
    "MODEL_KINDS",
    "build_correlation",
    "min_eigenvalue",
    "cholesky_lower",
    "sample_population",
    "sample_sum_cloud",
    "sample_covariance",
    "delta_infinity",
    "orlicz_norm",
    "coordinate_orlicz_mc",
    "save_matrix",
    "load_matrix",
    "MATRIX_MAGIC",
]

LAW_KINDS = (
    "standard_normal",
    "rademacher",
    "scaled_laplace",
    "scaled_uniform",
    "two_point_asymmetric",
)

MODEL_KINDS = ("identity", "equicorrelated", "ar1", "explicit")

_LAPLACE_SCALE = 1.0 / math.sqrt(2.0)
_UNIFORM_HALF_WIDTH = math.sqrt(3.0)


@dataclass(frozen=True)
class EntryLaw:
    """One of the supported centered unit-variance entry distributions."""

    kind: str
    pi: Optional[float] = None

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise ValidationError("unknown entry law %r" % (self.kind,))
        if self.kind == "two_point_asymmetric":
            if self.pi is None or not (0.0 < self.pi < 1.0):
                raise ValidationError(
                    "two_point_asymmetric needs pi in (0, 1), got %r" % (self.pi,)
                )
        elif self.pi is not None:
            raise ValidationError("pi is only meaningful for two_point_asymmetric")

    def two_point_values(self) -> Tuple[float, float]:
        """Support points (a, b) with pi*a + (1-pi)*b = 0 and unit variance."""
        if self.kind == "rademacher":
            return 1.0, -1.0
        if self.kind == "two_point_asymmetric":
            pi = self.pi
            return math.sqrt((1.0 - pi) / pi), -math.sqrt(pi / (1.0 - pi))
        raise ValidationError("%s is not a two-point law" % (self.kind,))

    @property
    def success_probability(self) -> float:
        if self.kind == "rademacher":
            return 0.5
        if self.kind == "two_point_asymmetric":
            return self.pi
        raise ValidationError("%s is not a two-point law" % (self.kind,))

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "standard_normal":
            return rng.standard_normal(size)
        if self.kind == "rademacher":
            return rng.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0
        if self.kind == "scaled_laplace":
            return rng.laplace(0.0, _LAPLACE_SCALE, size=size)
        if self.kind == "scaled_uniform":
            return rng.uniform(-_UNIFORM_HALF_WIDTH, _UNIFORM_HALF_WIDTH, size=size)
        a, b = self.two_point_values()
        hits = rng.random(size=size) < self.pi
        return np.where(hits, a, b)

    def fourth_moment(self) -> float:
        """E U^4, used for sample-variance error bands in tests and checks."""
        if self.kind == "standard_normal":
            return 3.0
        if self.kind == "rademacher":
            return 1.0
        if self.kind == "scaled_laplace":
            return 6.0
        if self.kind == "scaled_uniform":
            return 9.0 / 5.0
        a, b = self.two_point_values()
        return self.pi * a**4 + (1.0 - self.pi) * b**4

    def to_json_dict(self) -> dict:
        params = {} if self.pi is None else {"pi": self.pi}
        return {"law": self.kind, "law_params": params}

    @staticmethod
    def from_json_dict(obj: dict) -> "EntryLaw":
        params = obj.get("law_params") or {}
        return EntryLaw(kind=obj["law"], pi=params.get("pi"))


@dataclass(frozen=True)
class CorrelationModel:
    """Correlation structure for the mixing step X = L xi."""

    kind: str
    rho_bar: Optional[float] = None
    phi: Optional[float] = None
    matrix: Optional[Tuple[Tuple[float, ...], ...]] = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValidationError("unknown correlation model %r" % (self.kind,))
        if self.kind == "equicorrelated":
            if self.rho_bar is None or not (0.0 <= self.rho_bar < 1.0):
                raise ValidationError(
                    "equicorrelated needs rho_bar in [0, 1), got %r" % (self.rho_bar,)
                )
        if self.kind == "ar1":
            if self.phi is None or not (-1.0 < self.phi < 1.0):
                raise ValidationError("ar1 needs phi in (-1, 1), got %r" % (self.phi,))
        if self.kind == "explicit" and self.matrix is None:
            raise ValidationError("explicit model needs a matrix")

    def to_json_dict(self) -> dict:
        params = {}
        if self.rho_bar is not None:
            params["rho_bar"] = self.rho_bar
        if self.phi is not None:
            params["phi"] = self.phi
        if self.matrix is not None:
            params["matrix"] = [list(row) for row in self.matrix]
        return {"model": self.kind, "model_params": params}

    @staticmethod
    def from_json_dict(obj: dict) -> "CorrelationModel":
        params = obj.get("model_params") or {}
        matrix = params.get("matrix")
        if matrix is not None:
            matrix = tuple(tuple(float(v) for v in row) for row in matrix)
        return CorrelationModel(
            kind=obj["model"],
            rho_bar=params.get("rho_bar"),
            phi=params.get("phi"),
            matrix=matrix,
        )


@dataclass(frozen=True)
class PopulationSpec:
    """Dimension, entry law, correlation model, and a default seed."""

    p: int
    law: EntryLaw
    model: CorrelationModel
    seed: int = 0

    def __post_init__(self):
        if self.p < 1:
            raise ValidationError("dimension p must be >= 1, got %r" % (self.p,))
        if self.model.kind == "explicit" and len(self.model.matrix) != self.p:
            raise ValidationError("explicit matrix size does not match p")

    def to_json_dict(self) -> dict:
        out = {"p": self.p, "seed": self.seed}
        out.update(self.law.to_json_dict())
        out.update(self.model.to_json_dict())
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @staticmethod
    def from_json_dict(obj: dict) -> "PopulationSpec":
        return PopulationSpec(
            p=int(obj["p"]),
            law=EntryLaw.from_json_dict(obj),
            model=CorrelationModel.from_json_dict(obj),
            seed=int(obj.get("seed", 0)),
        )

    @staticmethod
    def from_json(text: str) -> "PopulationSpec":
        return PopulationSpec.from_json_dict(json.loads(text))


@dataclass
class SampleMatrix:
    """n-by-p sample with rows X_i = L xi_i, plus its provenance."""

    data: np.ndarray
    spec: PopulationSpec
    seed: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValidationError("sample matrix must be 2-d")
        if self.data.shape[0] < 1:
            raise ValidationError("sample matrix needs at least one row")
        if self.data.shape[1] != self.spec.p:
            raise ValidationError("sample width does not match spec dimension")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


# ---------------------------------------------------------------------------
# correlation matrices
# ---------------------------------------------------------------------------

def build_correlation(model: CorrelationModel, p: int) -> np.ndarray:
    """Materialize the p-by-p correlation matrix for a model.

    The result is symmetric with unit diagonal; explicit matrices are checked
    for both before being accepted.
    """
    if p < 1:
        raise ValidationError("p must be >= 1")
    if model.kind == "identity":
        return np.eye(p)
    if model.kind == "equicorrelated":
        r = np.full((p, p), model.rho_bar)
        np.fill_diagonal(r, 1.0)
        return r
    if model.kind == "ar1":
        idx = np.arange(p)
        return model.phi ** np.abs(idx[:, None] - idx[None, :])
    mat = np.asarray(model.matrix, dtype=np.float64)
    if mat.shape != (p, p):
        raise ValidationError("explicit matrix has shape %r, expected (%d, %d)" % (mat.shape, p, p))
    if not np.allclose(mat, mat.T, rtol=0.0, atol=1e-12):
        raise ValidationError("explicit correlation matrix is not symmetric")
    if not np.allclose(np.diag(mat), 1.0, rtol=0.0, atol=1e-12):
        raise ValidationError("explicit correlation matrix diagonal is not 1")
    return mat


def min_eigenvalue(matrix: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix via LAPACK's symmetric solver."""
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError("min_eigenvalue needs a square matrix")
    if not np.allclose(mat, mat.T, rtol=0.0, atol=1e-10 * max(1.0, np.abs(mat).max())):
        raise ValidationError("min_eigenvalue needs a symmetric matrix")
    return float(np.linalg.eigvalsh(mat)[0])


def cholesky_lower(matrix: np.ndarray, jitter: float = 1e-10) -> Tuple[np.ndarray, bool]:
    """Lower Cholesky factor, with a recorded diagonal jitter for PSD inputs.

    Returns (L, jittered). When the smallest eigenvalue is below ``jitter`` the
    factorization runs on matrix + jitter * I instead, and the flag is True.
    Matrices that stay indefinite even then raise NumericalError.
    """
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError("cholesky_lower needs a square matrix")
    jittered = False
    work = mat
    if min_eigenvalue(mat) < jitter:
        work = mat + jitter * np.eye(mat.shape[0])
        jittered = True
    try:
        lower = np.linalg.cholesky(work)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("matrix indefinite beyond jitter: %s" % (exc,)) from exc
    return lower, jittered


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _mixing_factor(spec: PopulationSpec) -> np.ndarray:
    corr = build_correlation(spec.model, spec.p)
    lower, _ = cholesky_lower(corr)
    return lower


def sample_population(spec: PopulationSpec, n: int, seed: int) -> SampleMatrix:
    """Draw n iid rows X_i = L xi_i. Deterministic in (spec, n, seed)."""
    if n < 1:
        raise ValidationError("sample size n must be >= 1")
    rng = derive_rng(seed, "sample", spec.p, spec.law.kind)
    xi = spec.law.draw(rng, (n, spec.p))
    if spec.model.kind == "identity":
        data = xi
    else:
        data = xi @ _mixing_factor(spec).T
    return SampleMatrix(data=data, spec=spec, seed=seed)


def _sum_law_draw(law: EntryLaw, count: int, rng: np.random.Generator, size) -> Optional[np.ndarray]:
    """Exact draw of a sum of ``count`` iid entries, when the sum law is closed.

    Binomial counts for two-point laws, a single scaled normal for Gaussian
    entries. Returns None when no closed form is available.
    """
    if count == 0:
        return np.zeros(size)
    if law.kind == "standard_normal":
        return rng.standard_normal(size) * math.sqrt(count)
    if law.kind in ("rademacher", "two_point_asymmetric"):
        a, b = law.two_point_values()
        hits = rng.binomial(count, law.success_probability, size=size).astype(np.float64)
        return hits * a + (count - hits) * b
    return None


def sample_sum_cloud(
    spec: PopulationSpec,
    count: int,
    m: int,
    seed: int,
    denominator_n: Optional[int] = None,
) -> np.ndarray:
    """m draws of L * (sum of ``count`` iid entry vectors) / sqrt(denominator_n).

    With denominator_n = count this is the scaled sum of ``count`` population
    rows. Coordinate sums are drawn from their exact closed-form laws when one
    exists; otherwise rows are summed explicitly in chunks.
    """
    if count < 0:
        raise ValidationError("count must be >= 0")
    denom = count if denominator_n is None else denominator_n
    if denom < 1:
        raise ValidationError("denominator must be >= 1")
    rng = derive_rng(seed, "sumcloud", count, spec.p)
    sums = _sum_law_draw(spec.law, count, rng, (m, spec.p))
    if sums is None:
        sums = np.zeros((m, spec.p))
        chunk = max(1, int(4_000_000 // max(count, 1)))
        for start in range(0, m, chunk):
            stop = min(start + chunk, m)
            block = spec.law.draw(rng, (stop - start, count, spec.p))
            sums[start:stop] = block.sum(axis=1)
    sums /= math.sqrt(denom)
    if spec.model.kind == "identity":
        return sums
    return sums @ _mixing_factor(spec).T


# ---------------------------------------------------------------------------
# covariance summaries
# ---------------------------------------------------------------------------

def sample_covariance(data: np.ndarray) -> np.ndarray:
    """Centered second-moment matrix with divisor n (not n-1)."""
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValidationError("sample_covariance needs an (n, p) matrix with n >= 1")
    centered = x - x.mean(axis=0)
    return centered.T @ centered / x.shape[0]


def delta_infinity(sigma_x: np.ndarray, sigma_y: np.ndarray) -> float:
    """Max absolute entry of D^(-1/2) (sigma_x - sigma_y) D^(-1/2).

    D is the diagonal of sigma_y; its entries must be strictly positive.
    Invariant under a common diagonal rescaling of both matrices.
    """
    sx = np.asarray(sigma_x, dtype=np.float64)
    sy = np.asarray(sigma_y, dtype=np.float64)
    if sx.shape != sy.shape or sx.ndim != 2 or sx.shape[0] != sx.shape[1]:
        raise ValidationError("delta_infinity needs two square matrices of equal shape")
    diag = np.diag(sy)
    if np.any(diag <= 0.0):
        raise ValidationError("reference covariance has a non-positive diagonal entry")
    scale = 1.0 / np.sqrt(diag)
    diff = (sx - sy) * scale[:, None] * scale[None, :]
    return float(np.abs(diff).max())


# ---------------------------------------------------------------------------
# Orlicz norms
# ---------------------------------------------------------------------------

def _psi_expectation(law: EntryLaw, q: int, t: float) -> float:
    """E exp(|U|^q / t^q) for the entry law, or inf when divergent."""
    if law.kind in ("rademacher", "two_point_asymmetric"):
        a, b = law.two_point_values()
        pa = law.success_probability
        return pa * math.exp((abs(a) / t) ** q) + (1.0 - pa) * math.exp((abs(b) / t) ** q)
    if law.kind == "standard_normal" and q == 2:
        if t * t <= 2.0:
            return math.inf
        return (1.0 - 2.0 / (t * t)) ** -0.5
    if law.kind == "standard_normal" and q == 1:
        # E exp(|Z|/t) = 2 exp(1/(2 t^2)) Phi(1/t)
        from scipy.special import ndtr

        return 2.0 * math.exp(0.5 / (t * t)) * float(ndtr(1.0 / t))
    if law.kind == "scaled_laplace":
        if q == 1:
            rate = math.sqrt(2.0)
            if 1.0 / t >= rate:
                return math.inf
            return rate / (rate - 1.0 / t)
        return math.inf  # q == 2: tails exp(-sqrt(2)|u|) lose to exp(u^2/t^2)
    if law.kind == "scaled_uniform":
        if q == 1:
            return t / _UNIFORM_HALF_WIDTH * (math.exp(_UNIFORM_HALF_WIDTH / t) - 1.0)
        value, _ = integrate.quad(
            lambda u: math.exp((u / t) ** q) / _UNIFORM_HALF_WIDTH,
            0.0,
            _UNIFORM_HALF_WIDTH,
            epsabs=1e-10,
            epsrel=1e-10,
        )
        return value
    raise ValidationError("unsupported (law, q) combination: %s, %d" % (law.kind, q))


def _psi_expectation_quadrature(law: EntryLaw, q: int, t: float) -> float:
    """Same expectation, integrated numerically. Cross-check oracle."""
    if law.kind in ("rademacher", "two_point_asymmetric"):
        return _psi_expectation(law, q, t)

    if law.kind == "standard_normal":
        def density(u):
            return math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
        upper = 40.0
    elif law.kind == "scaled_laplace":
        def density(u):
            return math.exp(-u / _LAPLACE_SCALE) / (2.0 * _LAPLACE_SCALE)
        upper = 80.0
    elif law.kind == "scaled_uniform":
        def density(u):
            return 1.0 / (2.0 * _UNIFORM_HALF_WIDTH) if u <= _UNIFORM_HALF_WIDTH else 0.0
        upper = _UNIFORM_HALF_WIDTH
    else:
        raise ValidationError("unsupported law %r" % (law.kind,))

    value, _ = integrate.quad(
        lambda u: 2.0 * density(u) * math.exp((u / t) ** q),
        0.0,
        upper,
        epsabs=1e-10,
        epsrel=1e-10,
        limit=200,
    )
    return value


_CLOSED_FORM_NORMS = {
    ("rademacher", 2): 1.0 / math.sqrt(math.log(2.0)),
    ("rademacher", 1): 1.0 / math.log(2.0),
    ("standard_normal", 2): math.sqrt(8.0 / 3.0),
    ("scaled_laplace", 1): math.sqrt(2.0),
}


def orlicz_norm(law: EntryLaw, q: int) -> float:
    """psi_q norm inf{t > 0 : E exp(|U|^q / t^q) <= 2}.

    Closed forms where available, otherwise bisection on t with the expectation
    evaluated to 1e-8. Returns inf when no finite t works (scaled_laplace with
    q = 2).
    """
    if q not in (1, 2):
        raise ValidationError("q must be 1 or 2, got %r" % (q,))
    key = (law.kind, q)
    if key in _CLOSED_FORM_NORMS and law.kind != "two_point_asymmetric":
        return _CLOSED_FORM_NORMS[key]
    if law.kind == "scaled_laplace" and q == 2:
        return math.inf

    lo, hi = None, None
    t = 1.0
    for _ in range(200):
        if _psi_expectation(law, q, t) <= 2.0:
            hi = t
            break
        t *= 2.0
    if hi is None:
        return math.inf
    t = hi
    for _ in range(200):
        t /= 2.0
        if t <= 0.0 or _psi_expectation(law, q, t) > 2.0:
            lo = t
            break
    if lo is None:
        lo = hi / 2.0 ** 200
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _psi_expectation(law, q, mid) <= 2.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-10 * hi:
            break
    return hi


def coordinate_orlicz_mc(spec: PopulationSpec, q: int, n_draws: int, seed: int) -> float:
    """Monte Carlo psi_q estimate for the worst standardized coordinate of X.

    Coordinates of X = L xi have unit variance by construction, so the estimate
    solves mean(exp(|x_j|^q / t^q)) = 2 per coordinate on a sample and reports
    the largest root. A diagnostic companion to the entry-law norm, not an
    oracle-backed quantity.
    """
    if q not in (1, 2):
        raise ValidationError("q must be 1 or 2")
    if n_draws < 100:
        raise ValidationError("need at least 100 draws")
    sample = sample_population(spec, n_draws, seed).data
    worst = 0.0
    for j in range(spec.p):
        col = np.abs(sample[:, j]) ** q

        def crosses(t):
            return float(np.mean(np.exp(np.minimum(col / t**q, 700.0)))) <= 2.0

        t_hi = 1.0
        for _ in range(100):
            if crosses(t_hi):
                break
            t_hi *= 2.0
        t_lo = t_hi / 2.0
        for _ in range(80):
            mid = 0.5 * (t_lo + t_hi)
            if crosses(mid):
                t_hi = mid
            else:
                t_lo = mid
        worst = max(worst, t_hi)
    return worst


# ---------------------------------------------------------------------------
# binary matrix format
# ---------------------------------------------------------------------------

MATRIX_MAGIC = b"HDCLTMAT"


def save_matrix(path: str, data: np.ndarray) -> None:
    """Binary layout: 8-byte magic, u32 n, u32 p (little endian), f64 rows."""
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError("save_matrix needs a 2-d array")
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        fh.write(struct.pack("<II", x.shape[0], x.shape[1]))
        fh.write(np.ascontiguousarray(x, dtype="<f8").tobytes())


def load_matrix(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    return _parse_matrix(blob, path)


def _parse_matrix(blob: bytes, origin: str) -> np.ndarray:
    if len(blob) < 16 or blob[:8] != MATRIX_MAGIC:
        raise ValidationError("%s: not a matrix file (bad magic)" % (origin,))
    n, p = struct.unpack("<II", blob[8:16])
    expected = 16 + 8 * n * p
    if len(blob) != expected:
        raise ValidationError(
            "%s: truncated matrix payload (%d bytes, expected %d)" % (origin, len(blob), expected)
        )
    data = np.frombuffer(blob, dtype="<f8", offset=16).reshape(n, p)
    return data.astype(np.float64, copy=True)
