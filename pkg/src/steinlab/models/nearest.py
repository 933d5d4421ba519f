"""Statistics built from k-nearest-neighbor neighborhoods.

The rank of j seen from i is d_x(i, j) = #{l : |x_i - x_l| < |x_i - x_j|},
counting l = i, so d_x(i, i) = 0 and j is among i's k nearest others exactly
when d_x(i, j) <= k.  Strict ranks require distinct pairwise distances; exact
ties raise :class:`TieError` and samplers reject and redraw such
configurations (counting the rejections).

The statistic is a normalized sum of bounded local functionals of each
point's k-NN distance profile.  Its interaction graph joins i and j when some
point holds both within rank k+1 (one extra rank absorbs the shift a single
move can cause); the same rule with budget k+5 extends it to configurations
with four more points, in the containment sense.  Reverse neighborhoods obey
the cone geometry of the ambient dimension: at most cone_cover_number(d) * k
points can hold a given point among their k nearest.

The Levina-Bickel estimator of intrinsic dimension, built from the same
distance profiles, ships here because it is the natural consumer of the
normality machinery: it is exactly the kind of k-NN average the bound covers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from ..coefficient import BoundReport
from ..errors import DegenerateStatisticError, MomentOrderError, TieError
from ..interaction import GraphicalRule, IndexGraph
from ..resample import CoordinateModel


def cone_cover_number(dim: int) -> int:
    """Minimum number of 60-degree cones covering R^d: 2 on the line, 6 in
    the plane.  Higher dimensions have no simple closed form; supply the
    constant explicitly there."""
    if dim == 1:
        return 2
    if dim == 2:
        return 6
    raise ValueError(
        f"no built-in cone number for dimension {dim}; pass alpha explicitly"
    )


def _as_points(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return pts


def neighbor_ranks(points: np.ndarray, method: str = "auto") -> np.ndarray:
    """Full rank matrix R with R[i, j] = d_x(i, j); raises on exact ties.

    "brute" sorts a dense distance matrix, "tree" sorts kd-tree query
    results; both are exact and must agree, so "auto" just picks by size.
    """
    pts = _as_points(points)
    n = pts.shape[0]
    if method == "auto":
        method = "brute" if n <= 64 else "tree"
    if method == "brute":
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
        order = np.argsort(d, axis=1, kind="stable")
        sorted_d = np.take_along_axis(d, order, axis=1)
    elif method == "tree":
        sorted_d, order = cKDTree(pts).query(pts, k=n)
    else:
        raise ValueError(f"unknown method {method!r}")
    if np.any(sorted_d[:, 1:] == sorted_d[:, :-1]):
        raise TieError("tied distances make neighbor ranks ambiguous")
    ranks = np.empty((n, n), dtype=np.int64)
    np.put_along_axis(ranks, order, np.broadcast_to(np.arange(n), (n, n)), axis=1)
    return ranks


def co_neighbor_rule(k: int, budget: int | None = None, method: str = "auto") -> GraphicalRule:
    """Edge {i, j} iff some point holds both within rank ``budget``.

    The budget defaults to k + 1, the interaction rule of k-NN statistics;
    budget k + 5 is its four-point extension.
    """
    b = k + 1 if budget is None else int(budget)
    if b < 1:
        raise ValueError("budget must be at least 1")

    def build(points: np.ndarray) -> IndexGraph:
        pts = _as_points(points)
        n = pts.shape[0]
        if n - 1 <= b:
            ii, jj = np.triu_indices(n, k=1)
            return IndexGraph(n, frozenset(zip(map(int, ii), map(int, jj))))
        ranks = neighbor_ranks(pts, method=method)
        edges = set()
        for row in ranks <= b:
            members = np.flatnonzero(row)
            for a in range(members.size):
                for c in range(a + 1, members.size):
                    edges.add((int(members[a]), int(members[c])))
        return IndexGraph(n, frozenset(edges))

    return GraphicalRule(name=f"co_neighbor[k={k},budget={b}]", build=build)


def reverse_neighborhood(points: np.ndarray, j: int, k: int) -> np.ndarray:
    """Indices l with d_x(l, j) <= k: the points that would notice j moving."""
    ranks = neighbor_ranks(points)
    return np.flatnonzero(ranks[:, j] <= k)


def neighborhood_change(
    x: np.ndarray, x_prime: np.ndarray, j: int, k: int
) -> int:
    """Size of N_j(x) union N_j(x^j): how many points see coordinate j's move."""
    x = _as_points(x)
    xp = _as_points(x_prime)
    moved = x.copy()
    moved[j] = xp[j]
    before = set(reverse_neighborhood(x, j, k).tolist())
    after = set(reverse_neighborhood(moved, j, k).tolist())
    return len(before | after)


def draw_tiefree(
    rng: np.random.Generator, n: int, dim: int, max_tries: int = 64
) -> tuple[np.ndarray, int]:
    """Uniform cube points with all pairwise distances distinct.

    Exact ties have probability zero in theory but are possible in floats;
    rejected configurations are counted and the draw repeats.
    """
    for tries in range(max_tries):
        pts = rng.random((n, dim))
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        vals = np.sort(d2[np.triu_indices(n, k=1)])
        if not np.any(vals[1:] == vals[:-1]) and (vals.size == 0 or vals[0] > 0):
            return pts, tries
    raise TieError(f"no tie-free configuration in {max_tries} draws")


@dataclass(frozen=True)
class NnModel:
    """Normalized sum of a bounded local functional of k-NN distances.

    ``functional`` maps the sorted vector of a point's k nearest distances to
    a float; the statistic is n^(-1/2) times its sum over points.
    """

    n_points: int
    dim: int
    k: int
    functional: Callable[[np.ndarray], float]
    name: str = "knn"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.n_points < self.k + 2:
            raise ValueError("need at least k + 2 points")

    def _knn_distances(self, points: np.ndarray) -> np.ndarray:
        pts = _as_points(points)
        dist, _ = cKDTree(pts).query(pts, k=self.k + 1)
        return dist[:, 1:]

    def statistic(self, points: np.ndarray) -> float:
        dists = self._knn_distances(points)
        vals = np.array([self.functional(row) for row in dists])
        return float(vals.sum() / np.sqrt(self.n_points))

    def coordinate_model(self) -> CoordinateModel:
        def draw(rng: np.random.Generator, count: int) -> np.ndarray:
            return rng.random((count, self.dim))

        return CoordinateModel(
            n=self.n_points,
            draw_coords=draw,
            statistic=self.statistic,
            name=f"nearest[{self.name}]",
        )


def capped_scaled_distance(
    dim: int, n_points: int, cap: float = 1.0
) -> Callable[[np.ndarray], float]:
    """Bounded local functional: mean k-NN distance on the n^(1/d) scale.

    Uniform samples have k-NN distances of order n^(-1/d); multiplying by the
    density scale n^(1/d) and capping keeps the functional bounded uniformly
    in n, which is what the moment conditions of the bound want.
    """
    scale = float(n_points) ** (1.0 / dim)

    def fn(dists: np.ndarray) -> float:
        return min(cap, float(dists.mean()) * scale)

    return fn


def levina_bickel(points: np.ndarray, k: int) -> float:
    """Maximum-likelihood intrinsic-dimension estimate from k-NN distances.

    Averages, over points, the reciprocal mean log distance ratio
    ((1/(k-1)) sum_{j<k} log(D_k / D_j))^(-1).  Scale- and
    rotation-invariant, since only distance ratios enter.
    """
    if k < 2:
        raise MomentOrderError("the dimension estimate needs k >= 2")
    pts = _as_points(points)
    n = pts.shape[0]
    if n < k + 1:
        raise ValueError(f"need more than k = {k} points, got {n}")
    dist, _ = cKDTree(pts).query(pts, k=k + 1)
    d = dist[:, 1:]
    if np.any(d == 0.0) or np.any(d[:, 1:] == d[:, :-1]):
        raise TieError("duplicate points or tied distances in the profile")
    logs = np.log(d[:, -1][:, None] / d[:, :-1])
    denom = logs.mean(axis=1)
    if np.any(denom == 0.0):
        raise TieError("degenerate distance profile")
    return float(np.mean(1.0 / denom))


def nn_bound(
    alpha: float,
    k: int,
    gamma_p: float,
    p: float,
    sigma2: float,
    n: int,
    constant_c: float = 1.0,
) -> BoundReport:
    """Distance bound for bounded k-NN statistics, up to a universal constant:

    C alpha^3 k^4 gamma_p^(2/p) / (sigma^2 n^((p-8)/(2p)))
      + C alpha^3 k^3 gamma_p^(3/p) / (sigma^3 n^((p-6)/(2p))),

    where gamma_p is the p-th moment of the local functional and alpha the
    cone covering number of the ambient dimension.  Requires p >= 8.
    """
    if p < 8:
        raise MomentOrderError(f"the bound needs moment order p >= 8, got {p}")
    if sigma2 <= 0:
        raise DegenerateStatisticError(f"sigma2 must be positive, got {sigma2}")
    if alpha < 1 or k < 1 or gamma_p < 0 or n < 1:
        raise ValueError("invalid bound inputs")
    a3 = alpha**3
    variance_term = (
        constant_c * a3 * k**4 * gamma_p ** (2.0 / p)
        / (sigma2 * n ** ((p - 8.0) / (2.0 * p)))
    )
    third_term = (
        constant_c * a3 * k**3 * gamma_p ** (3.0 / p)
        / (sigma2**1.5 * n ** ((p - 6.0) / (2.0 * p)))
    )
    return BoundReport(
        variance_term=float(variance_term),
        third_moment_term=float(third_term),
        total=float(variance_term + third_term),
        sigma2=sigma2,
        variance_level="given_x",
        modulo_c=True,
        constant_c=constant_c,
    )
