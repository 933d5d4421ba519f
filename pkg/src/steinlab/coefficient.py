"""The Stein coefficient of a statistic and the normality bound built from it.

For a statistic ``W = f(X)`` of i.i.d. coordinates and an independent copy
``X'``, the Stein coefficient is the subset-averaged quadratic form

    T = 1/2 * sum over proper subsets A of [n], j not in A, of
        [f(X) - f(X^j)] * [f(X^A) - f(X^(A+j))] / (binom(n, |A|) * (n - |A|))

where ``X^A`` takes primed coordinates on ``A``.  Its two key properties are
``E(T) = Var(W)`` and, more generally, the covariance identity

    Cov(g(X), f(X)) = 1/2 * sum_{A, j not in A} E[(g(X) - g(X^j)) *
                      (f(X^A) - f(X^(A+j)))] / (binom(n, |A|) * (n - |A|)).

A statistic whose coefficient concentrates (small ``Var(E(T|X))``) and whose
coordinate increments have small third moments is provably close to Gaussian:

    d_W(W/sigma, Z) <= sqrt(Var(E(T|X))) / sigma^2
                       + sum_j E|f(X) - f(X^j)|^3 / (2 sigma^3).

This module computes T exactly (subset enumeration), by unbiased Monte Carlo
(uniform size, uniform subset, uniform outside index), and estimates the
conditional-variance and third-moment ingredients of the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSampleError,
    DegenerateStatisticError,
    EnumerationLimitError,
    InvalidSubsetError,
)
from .resample import (
    ENUMERATION_CAP,
    CoordinateModel,
    Estimate,
    PairedSample,
    coordinate_deltas,
    enumerate_states,
    mix,
    statistic_table,
)

VARIANCE_LEVELS = ("given_w", "given_x", "unconditional")


@dataclass(frozen=True)
class CoefficientEstimate:
    """Value of the Stein coefficient for one (x, x') pair.

    ``mode`` is "exact" (subset enumeration, std_error 0) or "monte_carlo".
    """

    value: float
    std_error: float
    reps: int
    mode: str

    def __post_init__(self) -> None:
        if self.mode not in ("exact", "monte_carlo"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "exact" and self.std_error != 0.0:
            raise ValueError("exact estimates carry no Monte Carlo error")


@dataclass(frozen=True)
class BoundReport:
    """A two-term normality bound: variance term + third-moment term.

    ``variance_level`` records which conditioning the variance term used
    ("given_w", "given_x" or "unconditional"); lower levels give tighter
    bounds.  ``modulo_c`` marks bounds stated up to an unspecified universal
    constant, reported with the explicit placeholder ``constant_c``.
    """

    variance_term: float
    third_moment_term: float
    total: float
    sigma2: float
    variance_level: str
    modulo_c: bool = False
    constant_c: float = 1.0

    def __post_init__(self) -> None:
        if self.variance_level not in VARIANCE_LEVELS:
            raise ValueError(f"unknown variance level {self.variance_level!r}")
        if self.sigma2 <= 0:
            raise DegenerateStatisticError("sigma2 must be positive")


def subset_weight(n: int, size: int) -> float:
    """Weight 1 / (binom(n, size) * (n - size)) of one proper subset."""
    if not 0 <= size < n:
        raise InvalidSubsetError(f"proper subsets of [{n}] have size in [0, {n})")
    return 1.0 / (math.comb(n, size) * (n - size))


def _mask_bits(n: int, masks: np.ndarray) -> np.ndarray:
    """Boolean table of the low n bits of each mask."""
    return (masks[:, None] >> np.arange(n)) & 1 > 0


def _mask_weights(n: int) -> np.ndarray:
    """Subset weights indexed by bitmask; the full mask gets weight 0."""
    masks = np.arange(2**n)
    pop = _mask_bits(n, masks).sum(axis=1)
    w = np.zeros(2**n)
    for k in range(n):
        w[pop == k] = subset_weight(n, k)
    return w


def exact_coefficient(model: CoordinateModel, pair: PairedSample) -> CoefficientEstimate:
    """The Stein coefficient of one (x, x') pair by full subset enumeration.

    Costs 2^n statistic evaluations; refuses n > 24.
    """
    n = pair.n
    if n > 24:
        raise EnumerationLimitError(f"subset enumeration needs 2^{n} evaluations")
    masks = np.arange(2**n)
    bits = _mask_bits(n, masks)
    if model.batch_statistic is not None and pair.x.ndim == 1:
        f_of_mask = np.asarray(
            model.batch_statistic(np.where(bits, pair.x_prime, pair.x)), dtype=float
        )
    else:
        f_of_mask = np.array(
            [model.statistic(mix(pair.x, pair.x_prime, row)) for row in bits]
        )
    w = _mask_weights(n)

    total = 0.0
    half = np.arange(2 ** (n - 1))
    for j in range(n):
        bit = 1 << j
        low = half & (bit - 1)
        without_j = ((half >> j) << (j + 1)) | low
        d0 = f_of_mask[0] - f_of_mask[bit]
        inner = np.sum(w[without_j] * (f_of_mask[without_j] - f_of_mask[without_j | bit]))
        total += d0 * inner
    return CoefficientEstimate(0.5 * total, 0.0, 0, "exact")


def sample_subset_index_pair(
    n: int, rng: np.random.Generator
) -> tuple[np.ndarray, int]:
    """One draw of (A, j): uniform size in [0, n), uniform subset of that
    size, uniform j outside.  Marginal probability of a given (A, j) is
    1 / (n * binom(n, |A|) * (n - |A|))."""
    if n < 1:
        raise InvalidSubsetError("need n >= 1")
    perm = rng.permutation(n)
    k = int(rng.integers(n))
    j = int(perm[k + int(rng.integers(n - k))])
    return np.sort(perm[:k]), j


def _sample_subset_batch(
    n: int, reps: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized draws from the (A, j) law: boolean masks and outside indices."""
    perm = np.argsort(rng.random((reps, n)), axis=1)
    ranks = np.empty_like(perm)
    np.put_along_axis(ranks, perm, np.broadcast_to(np.arange(n), (reps, n)), axis=1)
    k = rng.integers(0, n, size=reps)
    a_mask = ranks < k[:, None]
    u = np.minimum((rng.random(reps) * (n - k)).astype(np.int64), n - k - 1)
    j = np.take_along_axis(perm, (k + u)[:, None], axis=1).ravel()
    return a_mask, j


def mc_coefficient(
    model: CoordinateModel,
    pair: PairedSample,
    reps: int,
    rng: np.random.Generator,
) -> CoefficientEstimate:
    """Unbiased Monte Carlo estimate of the Stein coefficient of one pair.

    Each draw evaluates (n/2) * [f(x) - f(x^j)] * [f(x^A) - f(x^(A+j))] at a
    subset/index pair from :func:`sample_subset_index_pair`; averaging over
    draws is unbiased for the exact coefficient.
    """
    if reps < 2:
        raise DegenerateSampleError("need reps >= 2 for a standard error")
    n = pair.n
    a_mask, j = _sample_subset_batch(n, reps, rng)
    d0 = coordinate_deltas(model, pair)[j]

    if model.batch_statistic is not None and pair.x.ndim == 1:
        xa = np.where(a_mask, pair.x_prime, pair.x)
        fa = np.asarray(model.batch_statistic(xa), dtype=float)
        rows = np.arange(reps)
        xa[rows, j] = pair.x_prime[j]
        faj = np.asarray(model.batch_statistic(xa), dtype=float)
        dd = fa - faj
    else:
        dd = np.empty(reps)
        for r in range(reps):
            base = mix(pair.x, pair.x_prime, a_mask[r])
            fa = float(model.statistic(base))
            base[j[r]] = pair.x_prime[j[r]]
            dd[r] = fa - float(model.statistic(base))

    vals = 0.5 * n * d0 * dd
    return CoefficientEstimate(
        float(vals.mean()),
        float(vals.std(ddof=1) / np.sqrt(reps)),
        reps,
        "monte_carlo",
    )


# ---------------------------------------------------------------------------
# exhaustive two-copy enumeration for finite models


class _FiniteEnumeration:
    """State table of a finite model plus digit bookkeeping for recombination.

    With s support values, state index ``i`` encodes the coordinate digits of
    the i-th vector in base s (first coordinate most significant), so the
    index of a recombined vector is a separable integer expression in the
    indices of x and x'.
    """

    def __init__(self, model: CoordinateModel):
        states, probs = enumerate_states(model)
        values, _ = model.support  # type: ignore[misc]
        s, n = len(values), model.n
        total = s**n
        digits = np.indices((s,) * n).reshape(n, total).T
        place = s ** (n - 1 - np.arange(n))
        self.model = model
        self.n = n
        self.states = states
        self.probs = probs
        self.base = np.arange(total)
        self.dp = digits * place  # per-coordinate index contribution
        self.f_table = statistic_table(model, states)

    def require_pairs(self) -> None:
        if len(self.probs) ** 2 > ENUMERATION_CAP:
            raise EnumerationLimitError(
                f"{len(self.probs)}^2 joint states exceed the cap of {ENUMERATION_CAP}"
            )

    def table(self, fn) -> np.ndarray:
        return np.array([fn(row) for row in self.states], dtype=float)

    def delta0_matrix(self, tab: np.ndarray, j: int) -> np.ndarray:
        """Matrix over (x, x') states of g(x) - g(x with coordinate j primed)."""
        dj = self.dp[:, j]
        return tab[self.base][:, None] - tab[(self.base - dj)[:, None] + dj[None, :]]


def _pair_coefficient_matrix(
    enum: _FiniteEnumeration, f_tab: np.ndarray, g_tab: np.ndarray
) -> np.ndarray:
    """Matrix over (x, x') states of the cross Stein coefficient

    1/2 * sum_{A, j not in A} w_A * (g(x) - g(x^j)) * (f(x^A) - f(x^(A+j))).

    With g = f this is the Stein coefficient of each pair; its expectation
    against the product law is Cov(g, f).
    """
    enum.require_pairs()
    n = enum.n
    w = _mask_weights(n)
    masks = np.arange(2**n)
    bits = _mask_bits(n, masks)
    # index contribution of each mask's primed coordinates, per state
    mask_sum = enum.dp @ bits.T.astype(np.int64)  # (S, 2^n)
    out = np.zeros((len(enum.probs), len(enum.probs)))
    for j in range(n):
        dj = enum.dp[:, j]
        g0 = enum.delta0_matrix(g_tab, j)
        acc = np.zeros_like(out)
        for m in masks[~bits[:, j]]:
            xm = enum.base - mask_sum[:, m]
            pm = mask_sum[:, m]
            fm = f_tab[xm[:, None] + pm[None, :]]
            fmj = f_tab[(xm - dj)[:, None] + (pm + dj)[None, :]]
            acc += w[m] * (fm - fmj)
        out += g0 * acc
    return 0.5 * out


@dataclass(frozen=True)
class ExhaustiveMoments:
    """Exact moments of the Stein coefficient of a finite model.

    ``var_given_w <= var_given_x <= var_total`` always (tower property).
    """

    mean: float
    variance_w: float
    var_total: float
    var_given_x: float
    var_given_w: float


def exhaustive_coefficient_moments(model: CoordinateModel) -> ExhaustiveMoments:
    """E(T), Var(W) and the conditional-variance chain of T by enumeration."""
    enum = _FiniteEnumeration(model)
    enum.require_pairs()
    t_mat = _pair_coefficient_matrix(enum, enum.f_table, enum.f_table)
    p = enum.probs
    mean = float(p @ t_mat @ p)
    var_total = float(p @ (t_mat**2) @ p) - mean**2
    cond_x = t_mat @ p
    var_given_x = float(p @ (cond_x - mean) ** 2)
    # group states by the value of W = f(x)
    _, groups = np.unique(np.round(enum.f_table, 12), return_inverse=True)
    gp = np.bincount(groups, weights=p)
    gcond = np.bincount(groups, weights=p * cond_x)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond_w = np.where(gp > 0, gcond / np.maximum(gp, 1e-300), 0.0)
    var_given_w = float(gp @ (cond_w - mean) ** 2)
    ew = float(p @ enum.f_table)
    variance_w = float(p @ enum.f_table**2) - ew**2
    return ExhaustiveMoments(mean, variance_w, var_total, var_given_x, var_given_w)


def exact_third_moment_sum(model: CoordinateModel) -> float:
    """sum_j E|f(X) - f(X^j)|^3 by exhaustive two-copy enumeration."""
    enum = _FiniteEnumeration(model)
    enum.require_pairs()
    p = enum.probs
    total = 0.0
    for j in range(enum.n):
        d0 = enum.delta0_matrix(enum.f_table, j)
        total += float(p @ (np.abs(d0) ** 3) @ p)
    return total


def cov_identity_residual(model: CoordinateModel, g_statistic, f_statistic=None) -> float:
    """|Cov(g, f) - subset-averaged increment form|, both by enumeration.

    Zero (to rounding) for every finite model; this is the identity that makes
    E(T) = Var(W) a special case (g = f).
    """
    enum = _FiniteEnumeration(model)
    g_tab = enum.table(g_statistic)
    f_tab = enum.f_table if f_statistic is None else enum.table(f_statistic)
    p = enum.probs
    lhs = float(p @ (g_tab * f_tab)) - float(p @ g_tab) * float(p @ f_tab)
    rhs_mat = _pair_coefficient_matrix(enum, f_tab, g_tab)
    rhs = float(p @ rhs_mat @ p)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Monte Carlo estimates of the bound ingredients


@dataclass(frozen=True)
class MeanVarianceReport:
    """Paired comparison of mean Stein coefficient and Var(W) on shared draws."""

    mean_coefficient: float
    variance_w: float
    z_score: float
    outer_reps: int
    inner_reps: int


def coefficient_mean_and_variance(
    model: CoordinateModel,
    outer_reps: int,
    inner_reps: int,
    rng: np.random.Generator,
) -> MeanVarianceReport:
    """Estimate E(T) and Var(W) from the same draws, with a z-score for
    their difference (which is exactly zero in law).

    The z-score pairs each coefficient estimate with the matching squared
    deviation of W, so the comparison is robust to the correlation between
    the two estimates.
    """
    if outer_reps < 3:
        raise DegenerateSampleError("need outer_reps >= 3")
    t_hat = np.empty(outer_reps)
    w = np.empty(outer_reps)
    for i in range(outer_reps):
        pair = model.sample_pair(rng)
        w[i] = float(model.statistic(pair.x))
        t_hat[i] = mc_coefficient(model, pair, inner_reps, rng).value
    scale = outer_reps / (outer_reps - 1)
    d = t_hat - scale * (w - w.mean()) ** 2
    se = float(d.std(ddof=1) / np.sqrt(outer_reps))
    if se == 0.0:
        raise DegenerateSampleError("paired differences are constant")
    return MeanVarianceReport(
        mean_coefficient=float(t_hat.mean()),
        variance_w=float(w.var(ddof=1)),
        z_score=float(d.mean() / se),
        outer_reps=outer_reps,
        inner_reps=inner_reps,
    )


def conditional_coefficient_variance(
    model: CoordinateModel,
    outer_reps: int,
    inner_reps: int,
    rng: np.random.Generator,
) -> Estimate:
    """Nested Monte Carlo estimate of Var(E(T | X)).

    Outer loop draws X; inner loop draws fresh primed copies and single
    subset/index pairs, giving conditionally unbiased single-draw estimates
    of E(T | X).  The between-group variance is debiased by the within-group
    noise (floored at zero); the standard error is a leave-one-group-out
    jackknife of the debiased estimator.
    """
    if outer_reps < 3 or inner_reps < 2:
        raise DegenerateSampleError("need outer_reps >= 3 and inner_reps >= 2")
    n = model.n
    group_mean = np.empty(outer_reps)
    group_var = np.empty(outer_reps)
    batched = model.batch_statistic is not None
    for i in range(outer_reps):
        x = model.sample_x(rng)
        a_mask, j = _sample_subset_batch(n, inner_reps, rng)
        xp = np.asarray(
            [model.draw_coords(rng, n) for _ in range(inner_reps)]
        )
        if batched and x.ndim == 1:
            rows = np.arange(inner_reps)
            x0 = np.broadcast_to(x, (inner_reps, n)).copy()
            x0[rows, j] = xp[rows, j]
            f0 = float(model.statistic(x))
            d0 = f0 - np.asarray(model.batch_statistic(x0), dtype=float)
            xa = np.where(a_mask, xp, x)
            fa = np.asarray(model.batch_statistic(xa), dtype=float)
            xa[rows, j] = xp[rows, j]
            dd = fa - np.asarray(model.batch_statistic(xa), dtype=float)
        else:
            f0 = float(model.statistic(x))
            d0 = np.empty(inner_reps)
            dd = np.empty(inner_reps)
            for r in range(inner_reps):
                vec = x.copy()
                vec[j[r]] = xp[r][j[r]]
                d0[r] = f0 - float(model.statistic(vec))
                base = mix(x, xp[r], a_mask[r])
                fa = float(model.statistic(base))
                base[j[r]] = xp[r][j[r]]
                dd[r] = fa - float(model.statistic(base))
        vals = 0.5 * n * d0 * dd
        group_mean[i] = vals.mean()
        group_var[i] = vals.var(ddof=1)

    def debiased(means: np.ndarray, wvars: np.ndarray) -> float:
        return max(0.0, float(means.var(ddof=1)) - float(wvars.mean()) / inner_reps)

    estimate = debiased(group_mean, group_var)
    keep = np.ones(outer_reps, dtype=bool)
    loo = np.empty(outer_reps)
    for i in range(outer_reps):
        keep[i] = False
        loo[i] = debiased(group_mean[keep], group_var[keep])
        keep[i] = True
    jack = float(np.sqrt((outer_reps - 1) / outer_reps * np.sum((loo - loo.mean()) ** 2)))
    return Estimate(estimate, jack, outer_reps)


def normality_bound(
    var_cond_coefficient: float,
    sigma2: float,
    third_moment_sum: float,
    variance_level: str = "given_x",
) -> BoundReport:
    """Distance-to-Gaussian bound for W/sigma from the two ingredients:

    sqrt(Var(E(T|.))) / sigma^2  +  sum_j E|f(X) - f(X^j)|^3 / (2 sigma^3).

    Fully explicit (no unspecified constant).  Conditioning on W instead of X
    can only shrink the first term, so any level reported here is valid.
    """
    if sigma2 <= 0:
        raise DegenerateStatisticError(f"sigma2 must be positive, got {sigma2}")
    if var_cond_coefficient < 0 or third_moment_sum < 0:
        raise ValueError("variance and third-moment inputs must be nonnegative")
    variance_term = math.sqrt(var_cond_coefficient) / sigma2
    third_term = third_moment_sum / (2.0 * sigma2**1.5)
    return BoundReport(
        variance_term=variance_term,
        third_moment_term=third_term,
        total=variance_term + third_term,
        sigma2=sigma2,
        variance_level=variance_level,
    )


@dataclass(frozen=True)
class PairingReport:
    """Check that |E(phi(W) W) - E(phi'(W) T)| stays within the smoothness cap
    (sup|phi''| / 4) * sum_j E|Delta_j f|^3."""

    gap: float
    cap: float
    std_error: float
    passed: bool
    mode: str


def pairing_gap_check(
    model: CoordinateModel,
    phi,
    phi_prime,
    phi_second_sup: float,
    reps: int | None = None,
    inner_reps: int = 32,
    rng: np.random.Generator | None = None,
) -> PairingReport:
    """Verify the coefficient's defining pairing property for a smooth phi.

    Exact mode (reps None, finite model) compares enumerated expectations;
    Monte Carlo mode estimates the gap from paired draws and passes when it
    is below the cap plus three standard errors.
    """
    if reps is None:
        enum = _FiniteEnumeration(model)
        p = enum.probs
        w_tab = enum.f_table
        t_mat = _pair_coefficient_matrix(enum, w_tab, w_tab)
        lhs = float(p @ (np.vectorize(phi)(w_tab) * w_tab))
        rhs = float(p @ (np.vectorize(phi_prime)(w_tab)[:, None] * t_mat) @ p)
        cap = 0.25 * phi_second_sup * exact_third_moment_sum(model)
        gap = abs(lhs - rhs)
        return PairingReport(gap, cap, 0.0, gap <= cap + 1e-12, "exact")
    if rng is None:
        raise ValueError("Monte Carlo mode needs an rng")
    vals = np.empty(reps)
    thirds = np.empty(reps)
    for r in range(reps):
        pair = model.sample_pair(rng)
        w = float(model.statistic(pair.x))
        t_hat = mc_coefficient(model, pair, inner_reps, rng).value
        vals[r] = phi(w) * w - phi_prime(w) * t_hat
        thirds[r] = np.sum(np.abs(coordinate_deltas(model, pair)) ** 3)
    gap = abs(float(vals.mean()))
    gap_se = float(vals.std(ddof=1) / np.sqrt(reps))
    cap = 0.25 * phi_second_sup * float(thirds.mean())
    cap_se = 0.25 * phi_second_sup * float(thirds.std(ddof=1) / np.sqrt(reps))
    se = math.hypot(gap_se, cap_se)
    return PairingReport(gap, cap, se, gap <= cap + 3 * se, "monte_carlo")


@dataclass(frozen=True)
class EfronSteinReport:
    """Variance of g(X) against its resampling bound
    1/2 * sum_i E[(g(X) - g(X^i))^2]."""

    variance: float
    cap: float
    passed: bool
    mode: str
    std_error: float = 0.0


def efron_stein_check(
    model: CoordinateModel,
    g=None,
    reps: int | None = None,
    rng: np.random.Generator | None = None,
) -> EfronSteinReport:
    """Check Var(g) <= 1/2 * sum_i E[(g(X) - g(X^i))^2].

    Exact for finite models when reps is None, Monte Carlo otherwise (passes
    when the inequality holds with three standard errors of slack).
    """
    fn = g if g is not None else model.statistic
    if reps is None:
        enum = _FiniteEnumeration(model)
        enum.require_pairs()
        tab = enum.f_table if g is None else enum.table(fn)
        p = enum.probs
        mean = float(p @ tab)
        variance = float(p @ tab**2) - mean**2
        cap = 0.0
        for i in range(enum.n):
            d0 = enum.delta0_matrix(tab, i)
            cap += 0.5 * float(p @ d0**2 @ p)
        return EfronSteinReport(variance, cap, variance <= cap + 1e-12, "exact")
    if rng is None or reps < 2:
        raise DegenerateSampleError("Monte Carlo mode needs an rng and reps >= 2")
    gx = np.empty(reps)
    halves = np.empty(reps)
    for r in range(reps):
        x = model.sample_x(rng)
        xp = model.sample_x(rng)
        gx[r] = float(fn(x))
        acc = 0.0
        for i in range(model.n):
            vec = x.copy()
            vec[i] = xp[i]
            acc += (gx[r] - float(fn(vec))) ** 2
        halves[r] = 0.5 * acc
    variance = float(gx.var(ddof=1))
    cap = float(halves.mean())
    m4 = float(np.mean((gx - gx.mean()) ** 4))
    var_se = math.sqrt(max(m4 - variance**2 * (reps - 3) / (reps - 1), 0.0) / reps)
    cap_se = float(halves.std(ddof=1) / np.sqrt(reps))
    se = math.hypot(var_se, cap_se)
    return EfronSteinReport(
        variance, cap, variance <= cap + 3 * se, "monte_carlo", std_error=se
    )
