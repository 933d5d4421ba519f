"""The empty-boxes statistic of a uniform occupancy scheme.

n balls land uniformly and independently in m = alpha * n boxes; W counts the
empty boxes.  Two balls interact exactly when they share a box, so the
natural graphical rule joins indices with equal labels.  The count has a
classical closed-form variance

    Var(W) = m q1 + m (m-1) q2 - m^2 q1^2,
    q1 = (1 - 1/m)^n,  q2 = (1 - 2/m)^n,

which grows like n * (alpha e^(-1/alpha) - (1 + alpha) e^(-2/alpha)); the
constant in the resulting sqrt(n) convergence-rate estimate is

    rate_constant(alpha) = (alpha e^(-1/alpha) - (1+alpha) e^(-2/alpha))^(-3/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateSampleError
from ..interaction import GraphicalRule, IndexGraph
from ..resample import CoordinateModel


def empty_box_count(labels: np.ndarray, m_boxes: int) -> int:
    """Number of boxes in [0, m) not hit by any label."""
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= m_boxes):
        raise ValueError(f"labels must lie in [0, {m_boxes})")
    return m_boxes - len(np.unique(labels))


@dataclass(frozen=True)
class OccupancyModel:
    """n balls in round(alpha * n) boxes; alpha * n must be integral."""

    n_balls: int
    alpha: float

    def __post_init__(self) -> None:
        if self.n_balls < 1:
            raise ValueError("need at least one ball")
        m = self.alpha * self.n_balls
        if abs(m - round(m)) > 1e-9 or round(m) < 1:
            raise ValueError(
                f"alpha * n = {m} must be a positive integer (alpha={self.alpha})"
            )

    @property
    def m_boxes(self) -> int:
        return int(round(self.alpha * self.n_balls))

    def statistic(self, labels: np.ndarray) -> float:
        return float(empty_box_count(labels, self.m_boxes))

    def batch_statistic(self, labels: np.ndarray) -> np.ndarray:
        """Empty-box counts for many configurations at once (sort-based)."""
        arr = np.sort(np.asarray(labels, dtype=np.int64), axis=1)
        distinct = 1 + (arr[:, 1:] != arr[:, :-1]).sum(axis=1)
        return (self.m_boxes - distinct).astype(float)

    def all_deltas(self, x: np.ndarray, xp: np.ndarray) -> np.ndarray:
        """f(x) - f(x^j) for all j from one histogram of x.

        Moving ball j from box x_j to box x'_j vacates its box iff it was
        alone there and fills the target iff the target was empty.
        """
        x = np.asarray(x, dtype=np.int64)
        xp = np.asarray(xp, dtype=np.int64)
        hist = np.bincount(x, minlength=self.m_boxes)
        gained = hist[x] == 1  # source box becomes empty
        filled = hist[xp] == 0  # target box was empty
        return np.where(x == xp, 0.0, filled.astype(float) - gained.astype(float))

    def coordinate_model(self) -> CoordinateModel:
        m = self.m_boxes

        def draw(rng: np.random.Generator, count: int) -> np.ndarray:
            return rng.integers(0, m, size=count)

        return CoordinateModel(
            n=self.n_balls,
            draw_coords=draw,
            statistic=self.statistic,
            name="occupancy",
            support=(np.arange(m), np.full(m, 1.0 / m)),
            batch_statistic=self.batch_statistic,
            all_deltas=self.all_deltas,
        )

    def mean(self) -> float:
        """E(W) = m (1 - 1/m)^n, exactly."""
        m, n = self.m_boxes, self.n_balls
        return m * (1.0 - 1.0 / m) ** n

    def variance(self, mode: str = "exact", reps: int = 0, rng=None) -> float:
        """Var(W): "exact" closed form, "asymptotic" linear-in-n limit, or
        "empirical" from fresh draws."""
        m, n = self.m_boxes, self.n_balls
        if mode == "exact":
            q1 = (1.0 - 1.0 / m) ** n
            q2 = (1.0 - 2.0 / m) ** n if m >= 2 else 0.0
            return m * q1 + m * (m - 1) * q2 - m * m * q1 * q1
        if mode == "asymptotic":
            a = self.alpha
            return n * (a * np.exp(-1.0 / a) - (1.0 + a) * np.exp(-2.0 / a))
        if mode == "empirical":
            if rng is None or reps < 2:
                raise DegenerateSampleError("empirical variance needs rng and reps >= 2")
            draws = rng.integers(0, m, size=(reps, n))
            return float(self.batch_statistic(draws).var(ddof=1))
        raise ValueError(f"unknown variance mode {mode!r}")


def same_box_rule(m_boxes: int) -> GraphicalRule:
    """Edge between two balls iff they occupy the same box."""

    def build(labels: np.ndarray) -> IndexGraph:
        labels = np.asarray(labels)
        n = labels.shape[0]
        order = np.argsort(labels, kind="stable")
        edges = set()
        start = 0
        for t in range(1, n + 1):
            if t == n or labels[order[t]] != labels[order[start]]:
                group = order[start:t]
                for a in range(t - start):
                    for b in range(a + 1, t - start):
                        edges.add((int(group[a]), int(group[b])))
                start = t
        return IndexGraph(n, frozenset(edges))

    return GraphicalRule(name=f"same_box[{m_boxes}]", build=build)


def rate_constant(alpha: float) -> float:
    """Constant of the sqrt(n)-rate estimate for the empty-box count.

    (alpha e^(-1/alpha) - (1+alpha) e^(-2/alpha))^(-3/2); defined for every
    alpha > 0 because the base is positive there.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    base = alpha * np.exp(-1.0 / alpha) - (1.0 + alpha) * np.exp(-2.0 / alpha)
    if base <= 0:
        raise ValueError(f"degenerate base {base} at alpha={alpha}")
    return float(base**-1.5)
