"""Gaussian comparison tools: the Stein equation and an empirical distance.

The Stein equation for a test function h with E h(Z) = c (Z standard normal)
is ``phi'(x) - x phi(x) = h(x) - c``.  Its bounded solution is

    phi(x) = exp(x^2/2) * integral_{-inf}^{x} exp(-t^2/2) (h(t) - c) dt
           = -exp(x^2/2) * integral_{x}^{inf} exp(-t^2/2) (h(t) - c) dt,

and for Lipschitz h it satisfies sup|phi'| <= sqrt(2/pi) * Lip(h) and
sup|phi''| <= 2 * Lip(h).  Those two constants are what turn a pairing
inequality for the Stein coefficient into a distance bound, so the solver and
an empirical check of the constants live here.

The empirical distance is the dual/quantile form of the first Wasserstein
distance between a standardized sample and the standard normal: sort the
sample and average |order statistic - normal quantile at (i - 1/2)/m|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtri

from .errors import DegenerateSampleError, SolverAccuracyError

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-12, limit=400)
_ACCURACY_BUDGET = 1e-9
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gaussian_expectation(h: Callable[[float], float]) -> float:
    """E h(Z) for standard normal Z, by adaptive quadrature split at 0."""
    total = 0.0
    err = 0.0
    for lo, hi in ((-np.inf, 0.0), (0.0, np.inf)):
        val, abserr = quad(
            lambda t: h(t) * _INV_SQRT_2PI * math.exp(-0.5 * t * t), lo, hi, **_QUAD_OPTS
        )
        total += val
        err += abserr
    if err > _ACCURACY_BUDGET:
        raise SolverAccuracyError("Gaussian expectation quadrature too inaccurate", err)
    return total


@dataclass(frozen=True)
class SteinSolution:
    """Solution phi of phi'(x) - x phi(x) = h(x) - gauss_mean.

    ``phi`` and ``phi_prime`` accept scalars or arrays.  The solver integrates
    the substituted forms

        phi(x) = integral_0^inf exp(x s - s^2/2) (h(x - s) - c) ds   (x <= 0)
        phi(x) = -integral_0^inf exp(-x s - s^2/2) (h(x + s) - c) ds (x > 0)

    whose integrands decay like exp(-s^2/2) on both branches, and recovers
    phi' from the equation itself.
    """

    h: Callable[[float], float]
    lipschitz: float
    gauss_mean: float

    def _phi_scalar(self, x: float) -> float:
        c = self.gauss_mean
        h = self.h
        if x <= 0:
            val, abserr = quad(
                lambda s: math.exp(x * s - 0.5 * s * s) * (h(x - s) - c),
                0.0,
                np.inf,
                **_QUAD_OPTS,
            )
        else:
            val, abserr = quad(
                lambda s: -math.exp(-x * s - 0.5 * s * s) * (h(x + s) - c),
                0.0,
                np.inf,
                **_QUAD_OPTS,
            )
        if abserr > _ACCURACY_BUDGET:
            raise SolverAccuracyError(f"Stein solution quadrature at x={x}", abserr)
        return val

    def phi(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.array([self._phi_scalar(v) for v in arr.ravel()])
        return out.reshape(arr.shape) if arr.shape else float(out[0])

    def phi_prime(self, x):
        arr = np.asarray(x, dtype=float)
        hv = np.array([self.h(v) for v in arr.ravel()], dtype=float).reshape(arr.shape)
        return arr * self.phi(arr) + hv - self.gauss_mean


def stein_solve(
    h: Callable[[float], float],
    lipschitz: float,
    gauss_mean: float | None = None,
) -> SteinSolution:
    """Solve the Stein equation for a Lipschitz test function.

    ``gauss_mean`` may be supplied when E h(Z) is known in closed form;
    otherwise it is computed by quadrature.
    """
    if lipschitz <= 0:
        raise ValueError("the Lipschitz constant must be positive")
    c = gaussian_expectation(h) if gauss_mean is None else float(gauss_mean)
    return SteinSolution(h=h, lipschitz=lipschitz, gauss_mean=c)


@dataclass(frozen=True)
class TestFunction:
    """A Lipschitz test function with its a.e. derivative and constant."""

    fn: Callable[[float], float]
    deriv: Callable[[float], float]
    lipschitz: float


@dataclass(frozen=True)
class ConstantReport:
    """Observed suprema of |phi'| / Lip(h) and |phi''| / Lip(h) over a family."""

    max_first_ratio: float
    max_second_ratio: float
    functions: int
    grid_points: int


def stein_constant_check(
    family: Sequence[TestFunction], grid: np.ndarray
) -> ConstantReport:
    """Empirical check of the solution's derivative bounds on a grid.

    The second derivative is evaluated through the equation itself,
    phi'' = phi + x phi' + h', so no finite differences straddle kinks of h.
    """
    grid = np.asarray(grid, dtype=float)
    r1 = 0.0
    r2 = 0.0
    for tf in family:
        sol = stein_solve(tf.fn, tf.lipschitz)
        phi = sol.phi(grid)
        hv = np.array([tf.fn(v) for v in grid])
        dv = np.array([tf.deriv(v) for v in grid])
        phi_p = grid * phi + hv - sol.gauss_mean
        phi_pp = phi + grid * phi_p + dv
        r1 = max(r1, float(np.max(np.abs(phi_p))) / tf.lipschitz)
        r2 = max(r2, float(np.max(np.abs(phi_pp))) / tf.lipschitz)
    return ConstantReport(r1, r2, len(family), grid.size)


# ---------------------------------------------------------------------------
# empirical Wasserstein-1 distance to the standard normal


@dataclass(frozen=True)
class EmpiricalDistance:
    """Quantile-coupling estimate of W1 between a standardized sample and Z."""

    w1: float
    sample_size: int
    standardization: str  # "known" | "empirical"
    mean_used: float
    std_used: float


def standardize(
    samples: np.ndarray,
    standardization: str = "empirical",
    mean: float | None = None,
    std: float | None = None,
) -> tuple[np.ndarray, float, float]:
    """Center and scale a sample; returns (standardized, mean_used, std_used).

    "known" uses the supplied moments; "empirical" uses the sample mean and
    the ddof=1 standard deviation.
    """
    arr = np.asarray(samples, dtype=float).ravel()
    if standardization == "known":
        if mean is None or std is None:
            raise ValueError("known-moment standardization needs mean and std")
        if std <= 0:
            raise DegenerateSampleError("known std must be positive")
        mu, sd = float(mean), float(std)
    elif standardization == "empirical":
        if arr.size < 2:
            raise DegenerateSampleError("need at least two observations")
        mu = float(arr.mean())
        sd = float(arr.std(ddof=1))
        if sd == 0:
            raise DegenerateSampleError("sample is constant")
    else:
        raise ValueError(f"unknown standardization {standardization!r}")
    return (arr - mu) / sd, mu, sd


def wasserstein1_to_gaussian(
    samples: np.ndarray,
    standardization: str = "empirical",
    mean: float | None = None,
    std: float | None = None,
) -> EmpiricalDistance:
    """W1 distance between the standardized empirical law and N(0, 1).

    Couples the i-th order statistic with the normal quantile at
    (i - 1/2) / m and averages absolute differences; this converges to the
    integral |F^-1 - Phi^-1| form of W1 as m grows.
    """
    s, mu, sd = standardize(samples, standardization, mean, std)
    m = s.size
    if m < 1:
        raise DegenerateSampleError("empty sample")
    q = ndtri((np.arange(1, m + 1) - 0.5) / m)
    w1 = float(np.mean(np.abs(np.sort(s) - q)))
    return EmpiricalDistance(
        w1=w1,
        sample_size=m,
        standardization=standardization,
        mean_used=mu,
        std_used=sd,
    )
