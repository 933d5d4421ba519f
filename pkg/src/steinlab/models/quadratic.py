"""Quadratic forms in independent signs.

W = 1/2 * x' A x for a symmetric matrix A with zero diagonal and Rademacher
coordinates.  Everything the normality bound needs is closed-form here:

* Var(W) = 1/2 * tr(A^2),
* E(T | X) = 1/2 * X' A^2 X  (the Stein coefficient concentrates on a second
  quadratic form),
* Var(E(T | X)) = sum_{i<j} (A^2)_{ij}^2 <= 1/2 * tr(A^4),

which yields the fully explicit bound

    sqrt(tr(A^4) / 2) / sigma^2 + (5 / (2 sigma^3)) * sum_i (sum_j a_ij^2)^(3/2).

This model doubles as the regression test bed for the coefficient machinery
because the conditional coefficient is exactly computable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..coefficient import BoundReport
from ..errors import DegenerateStatisticError, InvalidCoordinateError
from ..resample import CoordinateModel


def _check_signs(x: np.ndarray) -> None:
    if not np.all(np.abs(x) == 1.0):
        raise InvalidCoordinateError("quadratic-form coordinates must be +-1")


@dataclass(frozen=True)
class QuadraticFormModel:
    """Symmetric zero-diagonal coefficient matrix with sign coordinates."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("need a square matrix")
        if not np.allclose(a, a.T, atol=1e-12, rtol=0.0):
            raise ValueError("matrix must be symmetric")
        if np.any(np.diag(a) != 0.0):
            raise ValueError("matrix must have zero diagonal")
        object.__setattr__(self, "matrix", a)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def sigma2(self) -> float:
        """Var(W) = 1/2 * tr(A^2)."""
        return 0.5 * float(np.sum(self.matrix**2))

    def statistic(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        _check_signs(x)
        return 0.5 * float(x @ self.matrix @ x)

    def batch_statistic(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        _check_signs(xs)
        return 0.5 * ((xs @ self.matrix) * xs).sum(axis=1)

    def all_deltas(self, x: np.ndarray, xp: np.ndarray) -> np.ndarray:
        """f(x) - f(x^j) = (x_j - x'_j) * (A x)_j, for every j at once."""
        return (np.asarray(x) - np.asarray(xp)) * (self.matrix @ np.asarray(x))

    def conditional_coefficient(self, x: np.ndarray) -> float:
        """E(T | X = x) = 1/2 * x' A^2 x, exactly."""
        ax = self.matrix @ np.asarray(x, dtype=float)
        return 0.5 * float(ax @ ax)

    def coordinate_model(self) -> CoordinateModel:
        def draw(rng: np.random.Generator, count: int) -> np.ndarray:
            return rng.integers(0, 2, size=count) * 2.0 - 1.0

        return CoordinateModel(
            n=self.n,
            draw_coords=draw,
            statistic=self.statistic,
            name="quadratic_form",
            support=(np.array([-1.0, 1.0]), np.array([0.5, 0.5])),
            batch_statistic=self.batch_statistic,
            all_deltas=self.all_deltas,
        )

    def conditional_variance(self) -> float:
        """Var(E(T | X)) = sum_{i<j} (A^2)_{ij}^2, exactly."""
        b = self.matrix @ self.matrix
        return float(np.sum(np.triu(b, k=1) ** 2))


def quadratic_bound(model: QuadraticFormModel) -> BoundReport:
    """Fully explicit normality bound for the standardized quadratic form.

    Uses the closed forms above; the variance term relaxes
    sum_{i<j} (A^2)_{ij}^2 to tr(A^4)/2 as displayed in the module docstring.
    """
    a = model.matrix
    sigma2 = model.sigma2
    if sigma2 <= 0:
        raise DegenerateStatisticError("zero matrix has a degenerate statistic")
    tr_a4 = float(np.sum((a @ a) ** 2))
    row_norms2 = np.sum(a**2, axis=1)
    variance_term = np.sqrt(tr_a4 / 2.0) / sigma2
    third_term = 2.5 * float(np.sum(row_norms2**1.5)) / sigma2**1.5
    return BoundReport(
        variance_term=float(variance_term),
        third_moment_term=third_term,
        total=float(variance_term + third_term),
        sigma2=sigma2,
        variance_level="given_x",
    )


def goe_like_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random symmetric zero-diagonal matrix with N(0, 1/n) entries.

    The 1/sqrt(n) scale keeps Var(W) of order 1 as n grows, so sweeps over n
    measure the convergence rate rather than a drifting variance.
    """
    a = rng.standard_normal((n, n)) / np.sqrt(n)
    a = (a + a.T) / 2.0
    np.fill_diagonal(a, 0.0)
    return a
