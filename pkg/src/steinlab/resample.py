"""Coordinate resampling primitives.

A statistic ``W = f(X_1, ..., X_n)`` of i.i.d. coordinates is probed by
redrawing some coordinates from an independent copy and looking at the
induced change in ``f``.  This module owns the three basic objects that
everything else builds on:

* :class:`CoordinateModel` -- the coordinate law together with ``f``,
* :class:`PairedSample` -- a draw ``(x, x')`` of two independent copies,
* :func:`recombine` -- the hybrid vector that takes primed coordinates on a
  subset ``A`` and original ones elsewhere.

The *randomized derivative* along coordinate ``j`` is the first-order
difference ``f(vector) - f(vector with coordinate j replaced)``.  Its third
absolute moment is the smoothness input of every normality bound downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateSampleError,
    EnumerationLimitError,
    InvalidSubsetError,
)

# Hard cap for exhaustive state enumeration (number of states, and number of
# joint states in two-copy enumerations).
ENUMERATION_CAP = 10_000_000


@dataclass(frozen=True)
class CoordinateModel:
    """An i.i.d. coordinate law with a real statistic of n coordinates.

    ``draw_coords(rng, count)`` returns ``count`` i.i.d. coordinate values;
    a coordinate may itself be a vector (shape ``(count, d)``).  ``statistic``
    maps a full coordinate vector (shape ``(n,)`` or ``(n, d)``) to a float.

    ``support`` lists ``(values, probs)`` when the coordinate law is finite,
    which unlocks exhaustive enumeration.  ``batch_statistic`` and
    ``all_deltas`` are optional fast paths; when present they must agree with
    the plain statistic (the test suite checks this route-against-route).
    ``all_deltas(x, x_prime)`` returns the vector of first-order differences
    ``f(x) - f(x with coordinate j replaced by x_prime[j])`` for all j.
    """

    n: int
    draw_coords: Callable[[np.random.Generator, int], np.ndarray]
    statistic: Callable[[np.ndarray], float]
    name: str = "model"
    support: tuple[np.ndarray, np.ndarray] | None = None
    batch_statistic: Callable[[np.ndarray], np.ndarray] | None = None
    all_deltas: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need at least one coordinate, got n={self.n}")
        if self.support is not None:
            values, probs = self.support
            values = np.asarray(values)
            probs = np.asarray(probs, dtype=float)
            if values.shape[0] != probs.shape[0]:
                raise ValueError("support values and probabilities differ in length")
            if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
                raise ValueError("support probabilities must be >= 0 and sum to 1")
            object.__setattr__(self, "support", (values, probs))

    def sample_x(self, rng: np.random.Generator) -> np.ndarray:
        return np.asarray(self.draw_coords(rng, self.n))

    def sample_pair(self, rng: np.random.Generator) -> "PairedSample":
        return PairedSample(self.sample_x(rng), self.sample_x(rng))


@dataclass(frozen=True)
class PairedSample:
    """Two independent coordinate vectors ``x`` and ``x_prime`` of equal shape."""

    x: np.ndarray
    x_prime: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x)
        xp = np.asarray(self.x_prime)
        if x.shape != xp.shape:
            raise ValueError(f"shape mismatch: {x.shape} vs {xp.shape}")
        if x.shape[0] < 1:
            raise ValueError("empty sample")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "x_prime", xp)

    @property
    def n(self) -> int:
        return self.x.shape[0]


def _normalize_subset(n: int, subset: Iterable[int]) -> np.ndarray:
    idx = np.asarray(sorted(set(int(i) for i in subset)), dtype=np.intp)
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise InvalidSubsetError(f"subset indices must lie in [0, {n}), got {idx}")
    return idx

def subset_mask(n: int, subset: Iterable[int]) -> np.ndarray:
    """Boolean mask of length n with True on the (validated) subset."""
    mask = np.zeros(n, dtype=bool)
    mask[_normalize_subset(n, subset)] = True
    return mask


def mix(x: np.ndarray, x_prime: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Hybrid vector: primed coordinates where mask is True."""
    if x.ndim == 1:
        return np.where(mask, x_prime, x)
    return np.where(mask[:, None], x_prime, x)


def recombine(pair: PairedSample, subset: Iterable[int]) -> np.ndarray:
    """The vector X^A: primed coordinates on ``subset``, originals elsewhere.

    The empty subset returns ``x`` and the full index set returns ``x_prime``.
    """
    return mix(pair.x, pair.x_prime, subset_mask(pair.n, subset))


def randomized_derivative(
    model: CoordinateModel,
    pair: PairedSample,
    subset: Iterable[int],
    j: int,
) -> float:
    """First-order difference of f at X^A along coordinate j: f(X^A) - f(X^(A+j)).

    ``j`` must not already belong to the subset.
    """
    mask = subset_mask(pair.n, subset)
    j = int(j)
    if not 0 <= j < pair.n:
        raise InvalidSubsetError(f"coordinate {j} out of range for n={pair.n}")
    if mask[j]:
        raise InvalidSubsetError(f"coordinate {j} already in the resampled subset")
    base = mix(pair.x, pair.x_prime, mask)
    mask[j] = True
    shifted = mix(pair.x, pair.x_prime, mask)
    return float(model.statistic(base)) - float(model.statistic(shifted))


def coordinate_deltas(model: CoordinateModel, pair: PairedSample) -> np.ndarray:
    """Vector of f(x) - f(x with coordinate j primed), for every j.

    Uses the model's ``all_deltas`` fast path when available, otherwise
    recomputes the statistic n+1 times.
    """
    if model.all_deltas is not None:
        return np.asarray(model.all_deltas(pair.x, pair.x_prime), dtype=float)
    f0 = float(model.statistic(pair.x))
    out = np.empty(pair.n)
    for j in range(pair.n):
        vec = pair.x.copy()
        vec[j] = pair.x_prime[j]
        out[j] = f0 - float(model.statistic(vec))
    return out


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo estimate with its standard error."""

    mean: float
    std_error: float
    reps: int


def delta_third_moment(
    model: CoordinateModel,
    j: int,
    reps: int,
    rng: np.random.Generator,
) -> Estimate:
    """Monte Carlo estimate of E|f(X) - f(X^j)|^3 for one coordinate."""
    if reps < 2:
        raise DegenerateSampleError("need reps >= 2 for a standard error")
    if not 0 <= j < model.n:
        raise InvalidSubsetError(f"coordinate {j} out of range for n={model.n}")
    vals = np.empty(reps)
    for r in range(reps):
        pair = model.sample_pair(rng)
        vals[r] = abs(coordinate_deltas(model, pair)[j]) ** 3
    return Estimate(float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(reps)), reps)


def delta_third_moment_sum(
    model: CoordinateModel,
    reps: int,
    rng: np.random.Generator,
) -> Estimate:
    """Monte Carlo estimate of sum_j E|f(X) - f(X^j)|^3, sharing draws across j."""
    if reps < 2:
        raise DegenerateSampleError("need reps >= 2 for a standard error")
    sums = np.empty(reps)
    for r in range(reps):
        pair = model.sample_pair(rng)
        sums[r] = np.sum(np.abs(coordinate_deltas(model, pair)) ** 3)
    return Estimate(float(sums.mean()), float(sums.std(ddof=1) / np.sqrt(reps)), reps)


# ---------------------------------------------------------------------------
# ready-made models and enumeration helpers


def iid_sum_model(n: int, law: str = "rademacher") -> CoordinateModel:
    """Normalized i.i.d. sum n^(-1/2) * sum(X_i) with unit-variance coordinates."""
    root = float(np.sqrt(n))

    def statistic(x: np.ndarray) -> float:
        return float(x.sum() / root)

    def batch_statistic(xs: np.ndarray) -> np.ndarray:
        return xs.sum(axis=1) / root

    def all_deltas(x: np.ndarray, xp: np.ndarray) -> np.ndarray:
        return (x - xp) / root

    if law == "rademacher":
        def draw(rng: np.random.Generator, count: int) -> np.ndarray:
            return rng.integers(0, 2, size=count) * 2.0 - 1.0

        support = (np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
    elif law == "gaussian":
        def draw(rng: np.random.Generator, count: int) -> np.ndarray:
            return rng.standard_normal(count)

        support = None
    else:
        raise ValueError(f"unknown coordinate law {law!r}")

    return CoordinateModel(
        n=n,
        draw_coords=draw,
        statistic=statistic,
        name=f"iid_sum[{law}]",
        support=support,
        batch_statistic=batch_statistic,
        all_deltas=all_deltas,
    )


def finite_model(
    n: int,
    values: Sequence[float],
    probs: Sequence[float],
    statistic: Callable[[np.ndarray], float],
    name: str = "finite",
    batch_statistic: Callable[[np.ndarray], np.ndarray] | None = None,
    all_deltas: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
) -> CoordinateModel:
    """A model whose coordinates take finitely many values (enables enumeration)."""
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)

    def draw(rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.choice(values, size=count, p=probs)

    return CoordinateModel(
        n=n,
        draw_coords=draw,
        statistic=statistic,
        name=name,
        support=(values, probs),
        batch_statistic=batch_statistic,
        all_deltas=all_deltas,
    )


def rademacher_model(
    n: int,
    statistic: Callable[[np.ndarray], float],
    name: str = "rademacher",
    batch_statistic: Callable[[np.ndarray], np.ndarray] | None = None,
    all_deltas: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
) -> CoordinateModel:
    """Independent sign coordinates with an arbitrary statistic."""
    return finite_model(
        n,
        [-1.0, 1.0],
        [0.5, 0.5],
        statistic,
        name=name,
        batch_statistic=batch_statistic,
        all_deltas=all_deltas,
    )


def enumerate_states(model: CoordinateModel) -> tuple[np.ndarray, np.ndarray]:
    """All coordinate vectors of a finite model with their probabilities.

    Returns ``(states, probs)`` with ``states`` of shape ``(s**n, n)``.  The
    state count is capped at ENUMERATION_CAP.
    """
    if model.support is None:
        raise EnumerationLimitError("model has no finite support to enumerate")
    values, probs = model.support
    s, n = len(values), model.n
    total = s**n
    if total > ENUMERATION_CAP:
        raise EnumerationLimitError(
            f"{s}^{n} = {total} states exceeds the cap of {ENUMERATION_CAP}"
        )
    digits = np.indices((s,) * n).reshape(n, total).T
    states = values[digits]
    state_probs = probs[digits].prod(axis=1)
    return states, state_probs


def statistic_table(model: CoordinateModel, states: np.ndarray) -> np.ndarray:
    """Evaluate the statistic on every row of ``states``."""
    if model.batch_statistic is not None:
        return np.asarray(model.batch_statistic(states), dtype=float)
    return np.array([model.statistic(row) for row in states], dtype=float)
