"""Covered volume of random balls in the unit cube.

n centers are uniform in [0, 1]^d and W estimates the volume of the union of
radius-eps balls (intersected with the cube).  Two centers interact exactly
when their balls can overlap, i.e. when they are within 2 eps of each other,
so the proximity rule at threshold 2 eps is an interaction graph for W.

The statistic is computed by one of two deterministic estimators:

* ``GridArea`` -- midpoint rule on a g^d lattice of cell centers.  Exact
  increment computations reuse a per-cell cover count, so removing or moving
  one ball costs O((eps g)^d) instead of a full repaint.
* ``ProbeArea`` -- fraction of a fixed (seeded) set of uniform probe points
  that lands in some ball.  The probes are part of the model, which keeps the
  statistic a deterministic function of the centers and gives every
  configuration common random numbers.

No ball covers more volume than a full ball, so the one-coordinate increment
is bounded by M_eps = min(V_d * eps^d, 1), the d-ball volume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.spatial import cKDTree

from ..coefficient import BoundReport
from ..errors import DegenerateStatisticError
from ..interaction import GraphicalRule, IndexGraph
from ..resample import CoordinateModel


@dataclass(frozen=True)
class GridArea:
    """Midpoint-rule area estimator on a resolution^d lattice."""

    resolution: int = 256

    def __post_init__(self) -> None:
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")


@dataclass(frozen=True)
class ProbeArea:
    """Monte Carlo area estimator with probes frozen by a seed."""

    samples: int = 4096
    seed: int = 20080901

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("need at least one probe")


AreaEstimator = Union[GridArea, ProbeArea]


def ball_volume(dim: int, radius: float) -> float:
    """Lebesgue volume of a d-ball, capped at the unit-cube volume 1."""
    v = math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0) * radius**dim
    return min(v, 1.0)


def _candidate_cells(point: np.ndarray, eps: float, g: int):
    """Flat indices and squared center distances of the cells whose centers
    could lie within eps of the point (axis-aligned bounding box)."""
    d = point.shape[0]
    axes = []
    for k in range(d):
        lo = max(0, math.ceil((point[k] - eps) * g - 0.5))
        hi = min(g - 1, math.floor((point[k] + eps) * g - 0.5))
        if lo > hi:
            return None, None
        axes.append(np.arange(lo, hi + 1))
    mesh = np.meshgrid(*axes, indexing="ij")
    dist2 = np.zeros(mesh[0].shape)
    flat = np.zeros(mesh[0].shape, dtype=np.int64)
    for k in range(d):
        centers = (mesh[k] + 0.5) / g
        dist2 += (centers - point[k]) ** 2
        flat = flat * g + mesh[k]
    return flat.ravel(), dist2.ravel()


def _grid_cover_counts(points: np.ndarray, eps: float, g: int) -> np.ndarray:
    """Per-cell count of covering balls, flattened to length g^d."""
    d = points.shape[1]
    counts = np.zeros(g**d, dtype=np.int32)
    r2 = eps * eps
    for p in points:
        flat, dist2 = _candidate_cells(p, eps, g)
        if flat is None:
            continue
        np.add.at(counts, flat[dist2 <= r2], 1)
    return counts


@dataclass(frozen=True)
class CoverageModel:
    """Union-of-balls volume of n uniform centers in the unit cube."""

    n_points: int
    radius: float
    dim: int = 2
    estimator: AreaEstimator = field(default_factory=GridArea)

    def __post_init__(self) -> None:
        if self.n_points < 1:
            raise ValueError("need at least one center")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")

    def _probes(self) -> np.ndarray:
        est = self.estimator
        return np.random.default_rng(est.seed).random((est.samples, self.dim))

    def statistic(self, points: np.ndarray) -> float:
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        est = self.estimator
        if isinstance(est, GridArea):
            g = est.resolution
            counts = _grid_cover_counts(points, self.radius, g)
            return float(np.count_nonzero(counts)) / g**self.dim
        probes = self._probes()
        if probes.shape[0] * points.shape[0] <= 500_000:
            d2 = ((probes[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
            hit = (d2.min(axis=1) <= self.radius**2).mean()
        else:
            dist, _ = cKDTree(points).query(probes, k=1)
            hit = (dist <= self.radius).mean()
        return float(hit)

    def all_deltas(self, x: np.ndarray, xp: np.ndarray) -> np.ndarray:
        """f(x) - f(x^j) for all j without repainting the whole grid.

        Only sensible for the grid estimator; cells lost are those covered
        solely by ball j, cells gained are those covered by the moved ball
        and nothing else.
        """
        est = self.estimator
        if not isinstance(est, GridArea):
            raise ValueError("fast increments require the grid estimator")
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        xp = np.asarray(xp, dtype=float).reshape(-1, self.dim)
        g = est.resolution
        r2 = self.radius**2
        counts = _grid_cover_counts(x, self.radius, g)
        out = np.empty(x.shape[0])
        for j in range(x.shape[0]):
            flat, dist2 = _candidate_cells(x[j], self.radius, g)
            lost = 0
            if flat is not None:
                lost = int(np.count_nonzero(counts[flat[dist2 <= r2]] == 1))
            flat_p, dist2_p = _candidate_cells(xp[j], self.radius, g)
            gained = 0
            if flat_p is not None:
                keep = dist2_p <= r2
                cells = flat_p[keep]
                centers = _flat_to_centers(cells, g, self.dim)
                by_old = ((centers - x[j]) ** 2).sum(axis=1) <= r2
                gained = int(np.count_nonzero(counts[cells] - by_old == 0))
            out[j] = (lost - gained) / g**self.dim
        return out

    def coordinate_model(self) -> CoordinateModel:
        def draw(rng: np.random.Generator, count: int) -> np.ndarray:
            return rng.random((count, self.dim))

        all_deltas = self.all_deltas if isinstance(self.estimator, GridArea) else None
        return CoordinateModel(
            n=self.n_points,
            draw_coords=draw,
            statistic=self.statistic,
            name="coverage",
            all_deltas=all_deltas,
        )

    def max_increment(self) -> float:
        """M_eps: no single ball changes the estimate by more than its volume."""
        return ball_volume(self.dim, self.radius)

    def pair_proximity_prob(
        self, reps: int = 0, rng: np.random.Generator | None = None
    ) -> float:
        """p_eps = P(two uniform centers are within 2 eps).

        Closed form in dimension 1, Monte Carlo otherwise.
        """
        r = 2.0 * self.radius
        if self.dim == 1:
            return min(1.0, 2.0 * r - r * r) if r <= 1 else 1.0
        if rng is None or reps < 1:
            raise ValueError("Monte Carlo proximity needs rng and reps")
        u = rng.random((reps, self.dim))
        v = rng.random((reps, self.dim))
        return float((((u - v) ** 2).sum(axis=1) <= r * r).mean())


def _flat_to_centers(flat: np.ndarray, g: int, d: int) -> np.ndarray:
    coords = np.empty((flat.shape[0], d))
    rest = flat.copy()
    for k in range(d - 1, -1, -1):
        coords[:, k] = (rest % g + 0.5) / g
        rest //= g
    return coords


def proximity_rule(threshold: float) -> GraphicalRule:
    """Edge between two centers iff they are within ``threshold`` (closed)."""

    def build(points: np.ndarray) -> IndexGraph:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        n = pts.shape[0]
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        ii, jj = np.triu_indices(n, k=1)
        close = d2[ii, jj] <= threshold * threshold
        edges = frozenset(
            (int(a), int(b)) for a, b in zip(ii[close], jj[close])
        )
        return IndexGraph(n, edges)

    return GraphicalRule(name=f"proximity[{threshold:g}]", build=build)


def coverage_bound(
    m_eps: float,
    p_eps: float,
    sigma2: float,
    n: int,
    constant_c: float = 1.0,
) -> BoundReport:
    """Graphical-rule bound specialized to the coverage statistic:

    C sqrt(n) M_eps^2 (1 + n p_eps) / sigma^2 + n M_eps^3 / (2 sigma^3),

    where the increment cap M_eps absorbs the eighth-moment factor and the
    proximity probability controls the degree moment.  Valid up to C.
    """
    if sigma2 <= 0:
        raise DegenerateStatisticError(f"sigma2 must be positive, got {sigma2}")
    if m_eps < 0 or not 0 <= p_eps <= 1 or n < 1:
        raise ValueError("invalid coverage-bound inputs")
    variance_term = constant_c * math.sqrt(n) * m_eps**2 * (1.0 + n * p_eps) / sigma2
    third_term = n * m_eps**3 / (2.0 * sigma2**1.5)
    return BoundReport(
        variance_term=float(variance_term),
        third_moment_term=float(third_term),
        total=float(variance_term + third_term),
        sigma2=sigma2,
        variance_level="given_x",
        modulo_c=True,
        constant_c=constant_c,
    )
