"""Hyperrectangles, their neighborhoods, and rectangle families.

A hyperrectangle is a product of intervals, possibly unbounded on either side.
Finite endpoints carry closedness flags; infinite endpoints are always open.
Neighborhood operations use the sup-norm: the outer enlargement moves every
finite endpoint outward by t, the inner shrinkage moves inward by t, and the
t-boundary is the set difference of the two. Enlarged and shrunk rectangles
are closed at finite endpoints by convention.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .util import ValidationError, derive_rng

__all__ = [
    "Hyperrectangle",
    "EMPTY",
    "EmptyRectangle",
    "RectangleFamily",
    "rectangle",
    "corner_set",
    "symmetric_box",
    "contains",
    "contains_batch",
    "enlarge",
    "shrink",
    "in_boundary",
    "sup_distance",
    "make_family",
    "default_family",
    "FAMILY_KINDS",
]

FAMILY_KINDS = ("max_symmetric", "corner_sets", "random")


class EmptyRectangle:
    """Sentinel for a shrinkage that collapsed. Contains nothing."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "EMPTY"


EMPTY = EmptyRectangle()


@dataclass(frozen=True)
class Hyperrectangle:
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    closed_lower: Tuple[bool, ...]
    closed_upper: Tuple[bool, ...]

    def __post_init__(self):
        p = len(self.lower)
        if p < 1:
            raise ValidationError("rectangle needs at least one coordinate")
        if not (len(self.upper) == len(self.closed_lower) == len(self.closed_upper) == p):
            raise ValidationError("rectangle field lengths disagree")
        for j in range(p):
            lo, hi = self.lower[j], self.upper[j]
            if math.isnan(lo) or math.isnan(hi):
                raise ValidationError("rectangle endpoints cannot be NaN")
            if lo > hi:
                raise ValidationError("lower[%d] = %r exceeds upper[%d] = %r" % (j, lo, j, hi))
            if math.isinf(lo) and self.closed_lower[j]:
                raise ValidationError("infinite endpoints must be open")
            if math.isinf(hi) and self.closed_upper[j]:
                raise ValidationError("infinite endpoints must be open")
            if lo == math.inf or hi == -math.inf:
                raise ValidationError("endpoint signs out of order")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lower, dtype=np.float64), np.asarray(self.upper, dtype=np.float64)

    def to_json_dict(self) -> dict:
        def encode(v):
            if v == math.inf:
                return "inf"
            if v == -math.inf:
                return "-inf"
            return v

        return {
            "lower": [encode(v) for v in self.lower],
            "upper": [encode(v) for v in self.upper],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json_dict(obj: dict) -> "Hyperrectangle":
        def decode(v):
            if v == "inf":
                return math.inf
            if v == "-inf":
                return -math.inf
            return float(v)

        lower = [decode(v) for v in obj["lower"]]
        upper = [decode(v) for v in obj["upper"]]
        return rectangle(lower, upper)

    @staticmethod
    def from_json(text: str) -> "Hyperrectangle":
        return Hyperrectangle.from_json_dict(json.loads(text))


def rectangle(
    lower: Sequence[float],
    upper: Sequence[float],
    closed_lower: Optional[Sequence[bool]] = None,
    closed_upper: Optional[Sequence[bool]] = None,
) -> Hyperrectangle:
    """Build a rectangle, closed at finite endpoints unless flags say otherwise."""
    lower = tuple(float(v) for v in lower)
    upper = tuple(float(v) for v in upper)
    if closed_lower is None:
        closed_lower = tuple(math.isfinite(v) for v in lower)
    else:
        closed_lower = tuple(bool(b) and math.isfinite(v) for b, v in zip(closed_lower, lower))
    if closed_upper is None:
        closed_upper = tuple(math.isfinite(v) for v in upper)
    else:
        closed_upper = tuple(bool(b) and math.isfinite(v) for b, v in zip(closed_upper, upper))
    return Hyperrectangle(lower, upper, closed_lower, closed_upper)


def corner_set(thresholds: Sequence[float]) -> Hyperrectangle:
    """Lower-left set {x : x_j <= b_j for all j}."""
    b = list(thresholds)
    return rectangle([-math.inf] * len(b), b)


def symmetric_box(p: int, t: float) -> Hyperrectangle:
    """Centered cube [-t, t]^p, the sup-norm ball of radius t."""
    if t < 0:
        raise ValidationError("box radius must be >= 0")
    return rectangle([-t] * p, [t] * p)


RectOrEmpty = Union[Hyperrectangle, EmptyRectangle]


def contains(rect: RectOrEmpty, x: Sequence[float]) -> bool:
    """Membership honoring closedness flags exactly."""
    if isinstance(rect, EmptyRectangle):
        return False
    for j in range(rect.dim):
        v = float(x[j])
        lo, hi = rect.lower[j], rect.upper[j]
        if v < lo or (v == lo and not rect.closed_lower[j]):
            return False
        if v > hi or (v == hi and not rect.closed_upper[j]):
            return False
    return True


def contains_batch(rect: RectOrEmpty, points: np.ndarray) -> np.ndarray:
    """Vectorized membership mask for an (m, p) point array."""
    points = np.asarray(points, dtype=np.float64)
    if isinstance(rect, EmptyRectangle):
        return np.zeros(points.shape[0], dtype=bool)
    lo, hi = rect.bounds()
    mask = np.ones(points.shape[0], dtype=bool)
    for j in range(rect.dim):
        col = points[:, j]
        mask &= (col > lo[j]) | ((col == lo[j]) & rect.closed_lower[j])
        mask &= (col < hi[j]) | ((col == hi[j]) & rect.closed_upper[j])
    return mask


def enlarge(rect: Hyperrectangle, t: float) -> Hyperrectangle:
    """Outer sup-norm neighborhood: finite endpoints move outward by t."""
    if t < 0:
        raise ValidationError("neighborhood radius must be >= 0")
    lower = [v if math.isinf(v) else v - t for v in rect.lower]
    upper = [v if math.isinf(v) else v + t for v in rect.upper]
    return rectangle(lower, upper)


def shrink(rect: Hyperrectangle, t: float) -> RectOrEmpty:
    """Inner sup-norm core: finite endpoints move inward by t; EMPTY on collapse."""
    if t < 0:
        raise ValidationError("neighborhood radius must be >= 0")
    lower = [v if math.isinf(v) else v + t for v in rect.lower]
    upper = [v if math.isinf(v) else v - t for v in rect.upper]
    for lo, hi in zip(lower, upper):
        if lo > hi:
            return EMPTY
    return rectangle(lower, upper)


def in_boundary(rect: Hyperrectangle, x: Sequence[float], t: float) -> bool:
    """x lies within sup-distance t of the rectangle's topological boundary."""
    return contains(enlarge(rect, t), x) and not contains(shrink(rect, t), x)


def sup_distance(rect: Hyperrectangle, x: Sequence[float]) -> float:
    """Sup-norm distance from x to the rectangle (0 inside)."""
    worst = 0.0
    for j in range(rect.dim):
        v = float(x[j])
        gap = 0.0
        if math.isfinite(rect.lower[j]):
            gap = max(gap, rect.lower[j] - v)
        if math.isfinite(rect.upper[j]):
            gap = max(gap, v - rect.upper[j])
        worst = max(worst, gap)
    return worst


@dataclass
class RectangleFamily:
    """A finite list of rectangles with a remembered construction kind."""

    kind: str
    rectangles: List[Hyperrectangle]

    def __post_init__(self):
        if not self.rectangles:
            raise ValidationError("rectangle family cannot be empty")
        dims = {r.dim for r in self.rectangles}
        if len(dims) != 1:
            raise ValidationError("family mixes dimensions: %r" % (sorted(dims),))
        self._bounds_cache = None

    @property
    def dim(self) -> int:
        return self.rectangles[0].dim

    def __len__(self) -> int:
        return len(self.rectangles)

    def bounds_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """(k, p) lower and upper endpoint arrays for the counting kernels."""
        if self._bounds_cache is None:
            lowers = np.asarray([r.lower for r in self.rectangles], dtype=np.float64)
            uppers = np.asarray([r.upper for r in self.rectangles], dtype=np.float64)
            self._bounds_cache = (lowers, uppers)
        return self._bounds_cache


def _corner_grid(p: int, axis_grid: Sequence[float]) -> List[Hyperrectangle]:
    grid = [float(v) for v in axis_grid]
    if p == 1:
        return [corner_set([t]) for t in grid]
    total = len(grid) ** p
    if total > 20000:
        raise ValidationError(
            "corner grid would hold %d rectangles; pass explicit thresholds instead" % (total,)
        )
    rects = []
    index = [0] * p
    while True:
        rects.append(corner_set([grid[i] for i in index]))
        j = p - 1
        while j >= 0:
            index[j] += 1
            if index[j] < len(grid):
                break
            index[j] = 0
            j -= 1
        if j < 0:
            return rects


def make_family(kind: str, p: int, **params) -> RectangleFamily:
    """Construct a family.

    * ``max_symmetric``: params t_grid (iterable of radii)
    * ``corner_sets``: params thresholds (list of p-vectors) or axis_grid
      (cross product over axes)
    * ``random``: params count, seed, endpoint_range (lo, hi); each endpoint
      independently becomes infinite with probability 0.1
    """
    if kind == "max_symmetric":
        t_grid = params.get("t_grid")
        if t_grid is None:
            raise ValidationError("max_symmetric needs t_grid")
        rects = [symmetric_box(p, float(t)) for t in t_grid]
        return RectangleFamily(kind=kind, rectangles=rects)

    if kind == "corner_sets":
        thresholds = params.get("thresholds")
        axis_grid = params.get("axis_grid")
        if thresholds is not None:
            rects = [corner_set(b) for b in thresholds]
        elif axis_grid is not None:
            rects = _corner_grid(p, axis_grid)
        else:
            raise ValidationError("corner_sets needs thresholds or axis_grid")
        for r in rects:
            if r.dim != p:
                raise ValidationError("corner threshold width does not match p")
        return RectangleFamily(kind=kind, rectangles=rects)

    if kind == "random":
        count = params.get("count")
        seed = params.get("seed")
        if count is None or seed is None:
            raise ValidationError("random family needs count and seed")
        lo_range, hi_range = params.get("endpoint_range", (-3.0, 3.0))
        inf_fraction = params.get("inf_fraction", 0.1)
        rng = derive_rng(int(seed), "family", p, int(count))
        rects = []
        for _ in range(int(count)):
            a = rng.uniform(lo_range, hi_range, size=p)
            b = rng.uniform(lo_range, hi_range, size=p)
            lower = np.minimum(a, b)
            upper = np.maximum(a, b)
            lower_inf = rng.random(p) < inf_fraction
            upper_inf = rng.random(p) < inf_fraction
            lower = np.where(lower_inf, -np.inf, lower)
            upper = np.where(upper_inf, np.inf, upper)
            rects.append(rectangle(lower, upper))
        return RectangleFamily(kind=kind, rectangles=rects)

    raise ValidationError("unknown family kind %r" % (kind,))


def default_family(p: int, seed: int = 20240915) -> RectangleFamily:
    """Default evaluation family.

    Corner-set grid with 41 thresholds per axis for p <= 2 (every lattice
    combination at p = 2); 512 random rectangles plus a 41-point symmetric-box
    grid for larger p. The corner grid spans [-2, 2] so the unit thresholds of
    the discrete oracles land exactly on grid points.
    """
    if p <= 2:
        return make_family("corner_sets", p, axis_grid=np.linspace(-2.0, 2.0, 41))
    random_part = make_family("random", p, count=512, seed=seed, endpoint_range=(-3.0, 3.0))
    box_part = make_family("max_symmetric", p, t_grid=np.linspace(0.25, 3.25, 41))
    return RectangleFamily(
        kind="mixed", rectangles=random_part.rectangles + box_part.rectangles
    )
