"""End-to-end acceptance checks at fixed tolerances and runtime budgets.

Each test prints one scoreboard line

    ACCEPTANCE <nn> <name>: PASS|FAIL - <detail> [<elapsed>s]

before asserting anything, so a ``pytest -s`` run yields one line per
criterion even when a later assertion trips.  The three experiment sweeps are
produced once by module-scoped fixtures and shared with the determinism check.

Two assertions are expected to stay red; each carries an inline note with the
measurements behind that expectation.  They are kept as explicit red markers
rather than loosened to fit the data:

* the quadratic-form sweep's monotone-decrease/slope clauses (the sweep's true
  distances sit below the small-sample floor of the quantile estimator at
  every swept size, so the estimate reads noise, not a decaying distance);
* the nearest-neighbor union cap of ``2*alpha(d)*k`` (the moved index belongs
  to both neighborhoods, so the sharp cap is one larger and random trials
  exceed the stated one in dimension 1).
"""

from __future__ import annotations

import dataclasses
import json
import math
import time

import mpmath
import numpy as np
import pytest

from steinlab.coefficient import (
    cov_identity_residual,
    coefficient_mean_and_variance,
    exact_coefficient,
    exhaustive_coefficient_moments,
    mc_coefficient,
)
from steinlab.gaussian import (
    TestFunction as LipschitzFunction,
    stein_constant_check,
    stein_solve,
    wasserstein1_to_gaussian,
)
from steinlab.harness import (
    BoundOptions,
    ExperimentConfig,
    fit_rate,
    records_to_csv,
    records_to_json,
    run_experiment,
)
from steinlab.interaction import (
    check_interaction_rule,
    degree_identity_check,
)
from steinlab.models.coverage import (
    CoverageModel,
    GridArea,
    ProbeArea,
    proximity_rule,
)
from steinlab.models.nearest import (
    NnModel,
    capped_scaled_distance,
    co_neighbor_rule,
    cone_cover_number,
    draw_tiefree,
    levina_bickel,
    neighbor_ranks,
    neighborhood_change,
)
from steinlab.models.occupancy import OccupancyModel, same_box_rule
from steinlab.models.quadratic import QuadraticFormModel
from steinlab.resample import PairedSample, iid_sum_model, rademacher_model
from steinlab.errors import TieError


def _report(num: int, name: str, ok: bool, detail: str, elapsed: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {num:02d} {name}: {status} - {detail} [{elapsed:.1f}s]")


def _table_statistic(table: np.ndarray):
    """Arbitrary function of sign coordinates, stored as a lookup table."""

    def statistic(x: np.ndarray) -> float:
        idx = 0
        for i, v in enumerate(x):
            if v > 0:
                idx |= 1 << i
        return float(table[idx])

    return statistic


def _random_zero_diagonal_symmetric(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((n, n))
    a = (a + a.T) / 2.0
    np.fill_diagonal(a, 0.0)
    return a


# ---------------------------------------------------------------------------
# shared experiment sweeps (built once, reused by the determinism check)


@pytest.fixture(scope="module")
def quadratic_sweep():
    config = ExperimentConfig(
        model_kind="quadratic_form",
        model_params={"matrix_seed": 0},
        n_grid=(32, 128, 512),
        replications=10_000,
        seed=1001,
    )
    t0 = time.perf_counter()
    records = run_experiment(config)
    return config, records, time.perf_counter() - t0


@pytest.fixture(scope="module")
def occupancy_sweep():
    config = ExperimentConfig(
        model_kind="occupancy",
        model_params={"alpha": 1.0, "variance_mode": "exact"},
        n_grid=(64, 256, 1024),
        replications=10_000,
        seed=2718,
        bound_options=BoundOptions(moment_reps=1000, third_reps=200),
    )
    t0 = time.perf_counter()
    records = run_experiment(config)
    return config, records, time.perf_counter() - t0


@pytest.fixture(scope="module")
def coverage_sweep():
    config = ExperimentConfig(
        model_kind="coverage",
        model_params={
            "dim": 2,
            "radius_coeff": 1.0,
            "radius_exp": -0.5,
            "estimator": "probe",
            "probes": 4096,
            "probe_seed": 20080901,
        },
        n_grid=(64, 256, 1024),
        replications=20_000,
        seed=31415,
        bound_options=BoundOptions(moment_reps=60, third_reps=30),
    )
    t0 = time.perf_counter()
    records = run_experiment(config)
    return config, records, time.perf_counter() - t0


# ---------------------------------------------------------------------------
# 01: covariance of two statistics equals the subset-averaged increment form


def test_01_covariance_identity_exhaustive():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for n in range(1, 6):
        states = 1 << n
        for _ in range(20):
            f_model = rademacher_model(n, _table_statistic(rng.standard_normal(states)))
            g_stat = _table_statistic(rng.standard_normal(states))
            worst = max(worst, cov_identity_residual(f_model, g_stat))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 60
    _report(1, "covariance identity", ok, f"max residual {worst:.2e}", elapsed)
    assert worst <= 1e-10
    assert elapsed < 60


# ---------------------------------------------------------------------------
# 02: the coefficient's mean recovers Var(W), exhaustively and by Monte Carlo


def test_02_coefficient_mean_recovers_variance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    worst = 0.0
    for n in range(1, 6):
        for _ in range(4):
            model = rademacher_model(n, _table_statistic(rng.standard_normal(1 << n)))
            moments = exhaustive_coefficient_moments(model)
            worst = max(worst, abs(moments.mean - moments.variance_w))
    mc_rng = np.random.default_rng(203)
    z_scores = {
        n: coefficient_mean_and_variance(iid_sum_model(n), 4000, 24, mc_rng).z_score
        for n in (16, 64)
    }
    z_max = max(abs(z) for z in z_scores.values())
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and z_max <= 4 and elapsed < 120
    _report(
        2,
        "coefficient mean equals variance",
        ok,
        f"exhaustive residual {worst:.2e}, MC z-scores "
        + ", ".join(f"n={n}: {z:+.2f}" for n, z in z_scores.items()),
        elapsed,
    )
    assert worst <= 1e-10
    assert z_max <= 4
    assert elapsed < 120


# ---------------------------------------------------------------------------
# 03: the single-draw Monte Carlo coefficient is unbiased for the exact value


def test_03_mc_coefficient_unbiased():
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    worst = 0.0
    checks = 0
    for n in (6, 8):
        models = [
            iid_sum_model(n),
            QuadraticFormModel(_random_zero_diagonal_symmetric(n, rng)).coordinate_model(),
        ]
        for model in models:
            for _ in range(10):
                pair = model.sample_pair(rng)
                exact = exact_coefficient(model, pair).value
                est = mc_coefficient(model, pair, 100_000, rng)
                # the 1e-12 floor covers pairs whose draws are all identical
                # (std error ~0 with both routes equal to machine precision)
                worst = max(
                    worst,
                    abs(est.value - exact) / (4 * est.std_error + 1e-12),
                )
                checks += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1 and elapsed < 120
    _report(
        3,
        "MC coefficient unbiased",
        ok,
        f"{checks} fixed pairs, worst deviation {worst:.2f}x the 4-sigma band "
        "at 1e5 draws",
        elapsed,
    )
    assert worst <= 1
    assert elapsed < 120


# ---------------------------------------------------------------------------
# 04: closed-form conditional coefficient for quadratic forms


def test_04_quadratic_conditional_closed_form():
    t0 = time.perf_counter()
    rng = np.random.default_rng(404)
    worst = 0.0
    variance_identity_ok = True
    for _ in range(20):
        n = int(rng.integers(3, 7))
        matrix = _random_zero_diagonal_symmetric(n, rng)
        qf = QuadraticFormModel(matrix)
        model = qf.coordinate_model()
        x = rng.integers(0, 2, size=n) * 2.0 - 1.0
        closed = qf.conditional_coefficient(x)
        # oracle: average the exact pair coefficient over every sign vector x'
        total = 0.0
        for bits in range(1 << n):
            xp = np.array([1.0 if bits >> i & 1 else -1.0 for i in range(n)])
            total += exact_coefficient(model, PairedSample(x, xp)).value
        worst = max(worst, abs(closed - total / (1 << n)))
        b = matrix @ matrix
        off_diagonal_sq = float((np.triu(b, 1) ** 2).sum())
        half_trace_fourth = 0.5 * float(np.trace(b @ b))
        if off_diagonal_sq > half_trace_fourth + 1e-12:
            variance_identity_ok = False
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and variance_identity_ok and elapsed < 60
    _report(
        4,
        "quadratic conditional closed form",
        ok,
        f"max residual {worst:.2e}, variance inequality "
        + ("held" if variance_identity_ok else "VIOLATED"),
        elapsed,
    )
    assert worst <= 1e-10
    assert variance_identity_ok
    assert elapsed < 60


# ---------------------------------------------------------------------------
# 05: quadratic-form sweep - explicit bound dominates the estimate; the
#     monotone-decrease/slope clauses encode an envelope the estimator cannot
#     see at this sample size (expected red, see below)


def test_05_quadratic_form_rate_sweep(quadratic_sweep):
    t0 = time.perf_counter()
    config, records, sweep_seconds = quadratic_sweep
    w1 = [r.empirical_delta.w1 for r in records]
    margins = [r.bound.total - (r.empirical_delta.w1 - 3 * r.delta_se_proxy) for r in records]
    bound_ok = all(m >= 0 for m in margins)
    decreasing = all(b < a for a, b in zip(w1, w1[1:]))
    fit = fit_rate(records)
    slope_ok = -0.8 <= fit.slope <= -0.2
    elapsed = sweep_seconds + (time.perf_counter() - t0)
    ok = bound_ok and decreasing and slope_ok and elapsed < 600
    _report(
        5,
        "quadratic-form rate sweep",
        ok,
        "w1 " + "/".join(f"{v:.4f}" for v in w1)
        + f", slope {fit.slope:+.3f}, decreasing {decreasing}, "
        f"min bound margin {min(margins):+.3f}",
        elapsed,
    )
    assert bound_ok
    assert elapsed < 600
    # The two clauses below are expected to fail.  Measured ground truth: at
    # 2e5 replications the sweep's true distances are ~0.0014/0.0031/0.0019
    # for n = 32/128/512 (at or below the estimator's own small-sample floor
    # of ~0.003 at that size), while at the 1e4 replications used here the
    # floor is ~0.011 at every n.  Sign-symmetric coordinates make the
    # statistic's skewness vanish, so its distance decays like 1/n, not
    # n^(-1/2), and is invisible under the floor for every swept size; the
    # estimates order themselves by noise.  The explicit bound (which does
    # decay like n^(-1/2); asserted above) remains the meaningful clause.
    assert decreasing
    assert slope_ok


# ---------------------------------------------------------------------------
# 06: occupancy sweep - n^(-1/2) envelope, interaction rule, degree identity


def test_06_occupancy_rate_and_identities(occupancy_sweep):
    t0 = time.perf_counter()
    config, records, sweep_seconds = occupancy_sweep
    scaled = [r.empirical_delta.w1 * math.sqrt(r.n) for r in records]
    ratio = max(scaled) / min(scaled)

    occ = OccupancyModel(n_balls=30, alpha=1.0)
    model = occ.coordinate_model()
    rule = same_box_rule(occ.m_boxes)
    interaction = check_interaction_rule(
        model.statistic,
        rule,
        lambda r: model.draw_coords(r, occ.n_balls),
        100_000,
        np.random.default_rng(606),
    )

    occ24 = OccupancyModel(n_balls=24, alpha=1.0)
    model24 = occ24.coordinate_model()
    rule24 = same_box_rule(occ24.m_boxes)
    id_rng = np.random.default_rng(607)
    z_scores = [
        degree_identity_check(
            rule24, lambda r: model24.draw_coords(r, occ24.n_balls), 0, others, 20_000, id_rng
        ).z_score
        for others in ([1], [1, 2])
    ]
    z_max = max(abs(z) for z in z_scores)
    elapsed = sweep_seconds + (time.perf_counter() - t0)
    ok = ratio <= 3 and interaction.violations == 0 and z_max <= 4 and elapsed < 600
    _report(
        6,
        "occupancy rate and identities",
        ok,
        f"w1*sqrt(n) spread {ratio:.2f}, interaction violations "
        f"{interaction.violations}/{interaction.tested} tested, degree z "
        + ", ".join(f"{z:+.2f}" for z in z_scores),
        elapsed,
    )
    assert ratio <= 3
    assert interaction.violations == 0
    assert z_max <= 4
    assert elapsed < 600


# ---------------------------------------------------------------------------
# 07: coverage sweep - rate, estimator agreement, bounded increments, rule


def test_07_coverage_rate_and_estimators(coverage_sweep):
    t0 = time.perf_counter()
    config, records, sweep_seconds = coverage_sweep
    fit = fit_rate(records)
    slope_ok = -0.8 <= fit.slope <= -0.2

    # grid and Monte Carlo area estimators agree within 1% on shared points
    area_rng = np.random.default_rng(707)
    grid_model = CoverageModel(n_points=64, radius=0.125, dim=2, estimator=GridArea(512))
    probe_model = CoverageModel(
        n_points=64, radius=0.125, dim=2, estimator=ProbeArea(131_072, 99)
    )
    worst_rel = 0.0
    for _ in range(100):
        pts = area_rng.random((64, 2))
        g = grid_model.statistic(pts)
        p = probe_model.statistic(pts)
        worst_rel = max(worst_rel, abs(g - p) / g)

    # no single-point move changes the estimate by more than one ball volume
    inc_model = CoverageModel(n_points=256, radius=1 / 16, dim=2, estimator=GridArea(128))
    inc_coord = inc_model.coordinate_model()
    inc_rng = np.random.default_rng(709)
    cap = inc_model.max_increment()
    worst_inc = 0.0
    for _ in range(100):
        pair = inc_coord.sample_pair(inc_rng)
        worst_inc = max(worst_inc, float(np.abs(inc_coord.all_deltas(pair.x, pair.x_prime)).max()))

    cov32 = CoverageModel(n_points=32, radius=0.125, dim=2, estimator=ProbeArea(1024, 555))
    interaction = check_interaction_rule(
        cov32.statistic,
        proximity_rule(2 * cov32.radius),
        lambda r: r.random((32, 2)),
        100_000,
        np.random.default_rng(708),
    )
    elapsed = sweep_seconds + (time.perf_counter() - t0)
    ok = (
        slope_ok
        and worst_rel <= 0.01
        and worst_inc <= cap + 1e-9
        and interaction.violations == 0
        and elapsed < 900
    )
    _report(
        7,
        "coverage rate and estimators",
        ok,
        f"slope {fit.slope:+.3f}, worst area disagreement {worst_rel:.4%}, "
        f"max increment {worst_inc:.4f} vs cap {cap:.4f}, interaction violations "
        f"{interaction.violations}/{interaction.tested} tested",
        elapsed,
    )
    assert slope_ok
    assert worst_rel <= 0.01
    assert worst_inc <= cap + 1e-9
    assert interaction.violations == 0
    assert elapsed < 900


# ---------------------------------------------------------------------------
# 08: nearest-neighbor rule - noninteraction, degree caps, exact tree ranks


def test_08_nearest_neighbor_rule():
    t0 = time.perf_counter()
    combos = [(d, k) for d in (1, 2) for k in (1, 2, 3)]
    interaction_trials = {(1, 3): 16_665}  # remaining combos get 16,667 each
    total_violations = 0
    total_tested = 0
    union_violations = 0
    union_trials = 0
    max_union_excess = -10
    degree_ok = True
    rng = np.random.default_rng(808)
    for d, k in combos:
        alpha = cone_cover_number(d)
        n = 20
        nn = NnModel(
            n_points=n, dim=d, k=k, functional=capped_scaled_distance(d, n), name="acc"
        )
        report = check_interaction_rule(
            nn.statistic,
            co_neighbor_rule(k),
            lambda r, d=d, n=n: draw_tiefree(r, n, d)[0],
            interaction_trials.get((d, k), 16_667),
            rng,
        )
        total_violations += report.violations
        total_tested += report.tested

        # union of the two reverse neighborhoods around a moved index
        for _ in range(4000):
            m = int(rng.integers(k + 2, 24))
            try:
                pts, _ = draw_tiefree(rng, m, d)
                moved, _ = draw_tiefree(rng, m, d)
                union = neighborhood_change(pts, moved, int(rng.integers(m)), k)
            except TieError:
                continue
            union_trials += 1
            max_union_excess = max(max_union_excess, union - 2 * alpha * k)
            if union > 2 * alpha * k:
                union_violations += 1

        # degree cap for the budget-(k+5) rule, at sizes where it can bind
        ext_rule = co_neighbor_rule(k, budget=k + 5)
        for _ in range(200):
            m = int(rng.integers(40, 80))
            pts, _ = draw_tiefree(rng, m, d)
            if int(ext_rule.build(pts).degrees().max()) > alpha * (k + 1) * (k + 5):
                degree_ok = False

    ranks_rng = np.random.default_rng(811)
    ranks_agree = True
    for trial in range(1000):
        d = 1 + trial % 2
        m = int(ranks_rng.integers(8, 257))
        pts, _ = draw_tiefree(ranks_rng, m, d)
        if not np.array_equal(
            neighbor_ranks(pts, method="brute"), neighbor_ranks(pts, method="tree")
        ):
            ranks_agree = False
    elapsed = time.perf_counter() - t0
    ok = (
        total_violations == 0
        and degree_ok
        and ranks_agree
        and union_violations == 0
        and elapsed < 600
    )
    _report(
        8,
        "nearest-neighbor rule",
        ok,
        f"interaction violations {total_violations}/{total_tested} tested, "
        f"union-cap excess {max_union_excess:+d} ({union_violations}/{union_trials} over), "
        f"degree cap {'held' if degree_ok else 'VIOLATED'}, tree ranks "
        + ("exact" if ranks_agree else "DIFFER"),
        elapsed,
    )
    assert total_violations == 0
    assert degree_ok
    assert ranks_agree
    assert elapsed < 600
    # Expected to fail: the union of the two reverse neighborhoods always
    # contains the moved index itself, so the sharp cap is 2*alpha(d)*k + 1,
    # not 2*alpha(d)*k.  The 1-D configuration (0, -1, 1.1, 9, 11.2) with the
    # first point moved to 10 and k = 1 realizes 5 > 4, and ~4% of random
    # d=1, k=1 trials do the same.  The sharp +1 cap is property-tested in
    # test_models_nearest.py; the assertion here keeps the stricter cap as an
    # explicit red marker.
    assert union_violations == 0


# ---------------------------------------------------------------------------
# 09: the ODE solver against an independent high-precision quadrature


def _lipschitz_family() -> list[LipschitzFunction]:
    """20 Lipschitz-1 test functions: kinks, hinges, and smoothed kinks."""
    family: list[LipschitzFunction] = []
    for c in (-2.35, -1.57, -0.73, 0.41, 1.13, 2.27, 3.01):
        family.append(
            LipschitzFunction(
                fn=lambda t, c=c: abs(t - c),
                deriv=lambda t, c=c: math.copysign(1.0, t - c) if t != c else 0.0,
                lipschitz=1.0,
            )
        )
    for c in (-2.9, -1.3, -0.51, 0.17, 0.89, 1.71, 2.53):
        family.append(
            LipschitzFunction(
                fn=lambda t, c=c: max(t - c, 0.0),
                deriv=lambda t, c=c: 1.0 if t > c else 0.0,
                lipschitz=1.0,
            )
        )
    for c in (-1.9, -0.9, -0.1, 0.7, 1.5, 2.3):
        # log cosh(t - c), written to avoid overflow for large |t - c|
        family.append(
            LipschitzFunction(
                fn=lambda t, c=c: abs(t - c)
                + math.log1p(math.exp(-2.0 * abs(t - c)))
                - math.log(2.0),
                deriv=lambda t, c=c: math.tanh(t - c),
                lipschitz=1.0,
            )
        )
    return family


def _reference_solution_value(fn, kink: float, x: float) -> float:
    """phi(x) by direct 22-digit quadrature of the defining integral."""
    with mpmath.workdps(22):
        weight = lambda t: mpmath.e ** (-t * t / 2)
        gauss_mass = mpmath.sqrt(2 * mpmath.pi)
        mean = mpmath.quad(
            lambda t: fn(float(t)) * weight(t), [-mpmath.inf, kink, mpmath.inf]
        ) / gauss_mass
        integrand = lambda t: (fn(float(t)) - mean) * weight(t)
        if x <= 0:
            points = [-mpmath.inf] + ([kink] if kink < x else []) + [x]
            value = mpmath.e ** (x * x / 2) * mpmath.quad(integrand, points)
        else:
            points = [x] + ([kink] if kink > x else []) + [mpmath.inf]
            value = -mpmath.e ** (x * x / 2) * mpmath.quad(integrand, points)
        return float(value)


def test_09_stein_solver_residual_and_constants():
    t0 = time.perf_counter()
    family = _lipschitz_family()
    kinks = [-2.35, -1.57, -0.73, 0.41, 1.13, 2.27, 3.01,
             -2.9, -1.3, -0.51, 0.17, 0.89, 1.71, 2.53,
             -1.9, -0.9, -0.1, 0.7, 1.5, 2.3]
    coarse = np.linspace(-8.0, 8.0, 41)
    worst = 0.0
    for tf, kink in zip(family, kinks):
        solution = stein_solve(tf.fn, tf.lipschitz)
        solved = solution.phi(coarse)
        for x, got in zip(coarse, solved):
            worst = max(worst, abs(got - _reference_solution_value(tf.fn, kink, float(x))))
    constants = stein_constant_check(family, np.linspace(-8.0, 8.0, 641))
    first_cap = math.sqrt(2 / math.pi) + 1e-3
    second_cap = 2 + 1e-3
    elapsed = time.perf_counter() - t0
    ok = (
        worst <= 1e-8
        and constants.max_first_ratio <= first_cap
        and constants.max_second_ratio <= second_cap
        and elapsed < 60
    )
    _report(
        9,
        "ODE solver residual and constants",
        ok,
        f"max residual {worst:.2e} on {coarse.size}-point grid, "
        f"|phi'| ratio {constants.max_first_ratio:.4f} <= {first_cap:.4f}, "
        f"|phi''| ratio {constants.max_second_ratio:.4f} <= {second_cap:.4f}",
        elapsed,
    )
    assert worst <= 1e-8
    assert constants.max_first_ratio <= first_cap
    assert constants.max_second_ratio <= second_cap
    assert elapsed < 60


# ---------------------------------------------------------------------------
# 10: distance estimator calibration at the null and at a point mass


def test_10_distance_estimator_calibration():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4242)
    at_null = wasserstein1_to_gaussian(rng.standard_normal(100_000), "known", 0.0, 1.0).w1
    # point mass at zero: the distance is the mean absolute normal quantile
    point_mass = wasserstein1_to_gaussian(np.zeros(100_000), "known", 0.0, 1.0).w1
    elapsed = time.perf_counter() - t0
    ok = at_null <= 0.02 and abs(point_mass - 0.798) <= 0.01 and elapsed < 30
    _report(
        10,
        "distance estimator calibration",
        ok,
        f"null floor {at_null:.4f} <= 0.02, point mass {point_mass:.4f} vs 0.798",
        elapsed,
    )
    assert at_null <= 0.02
    assert abs(point_mass - 0.798) <= 0.01
    assert elapsed < 30


# ---------------------------------------------------------------------------
# 11: intrinsic-dimension estimator - hand value, invariance, plane accuracy


def test_11_dimension_estimator():
    t0 = time.perf_counter()
    hand = levina_bickel(np.array([0.0, 1.0, 3.0]), 2)

    inv_rng = np.random.default_rng(1111)
    pts, _ = draw_tiefree(inv_rng, 30, 2)
    theta = 0.7
    rot = np.array(
        [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
    )
    base = levina_bickel(pts, 5)
    invariance_gap = max(
        abs(levina_bickel(7.3 * pts, 5) - base),
        abs(levina_bickel(pts @ rot.T, 5) - base),
    )

    estimates = [
        levina_bickel(np.random.default_rng(1000 + i).random((2000, 2)), 10)
        for i in range(50)
    ]
    square_mean = float(np.mean(estimates))
    elapsed = time.perf_counter() - t0
    ok = (
        abs(hand - 1.6064) <= 1e-3
        and invariance_gap <= 1e-12
        and 1.6 <= square_mean <= 2.4
        and elapsed < 120
    )
    _report(
        11,
        "dimension estimator",
        ok,
        f"hand value {hand:.4f} vs 1.6064, invariance gap {invariance_gap:.1e}, "
        f"unit-square mean {square_mean:.3f} over 50 runs",
        elapsed,
    )
    assert abs(hand - 1.6064) <= 1e-3
    assert invariance_gap <= 1e-12
    assert 1.6 <= square_mean <= 2.4
    assert elapsed < 120


# ---------------------------------------------------------------------------
# 12: identical emitted records at 1 and 8 threads for every sweep


def _masked_csv(records) -> str:
    # the wall-clock column is the one run-dependent field; drop it on both
    # sides so the comparison covers every reproducible byte
    lines = records_to_csv(records).splitlines()
    return "\n".join([lines[0]] + [line.rsplit(",", 1)[0] for line in lines[1:]])


def _masked_json(records) -> str:
    payload = json.loads(records_to_json(records))
    for record in payload["records"]:
        record["wall_ms"] = None
    return json.dumps(payload, sort_keys=True)


def test_12_deterministic_records_across_threads(
    quadratic_sweep, occupancy_sweep, coverage_sweep
):
    t0 = time.perf_counter()
    suites = [
        (config, records)
        for config, records, _ in (quadratic_sweep, occupancy_sweep, coverage_sweep)
    ]
    extras = [
        ExperimentConfig(
            model_kind="iid_sum",
            model_params={},
            n_grid=(8, 16, 32),
            replications=2000,
            seed=3,
            bound_options=BoundOptions(outer_reps=50, inner_reps=8, third_reps=50),
        ),
        ExperimentConfig(
            model_kind="nearest",
            model_params={"dim": 2, "k": 1},
            n_grid=(16, 32),
            replications=500,
            seed=5,
            bound_options=BoundOptions(moment_reps=100, third_reps=50),
        ),
    ]
    suites += [(config, run_experiment(config)) for config in extras]

    mismatches = []
    for config, records in suites:
        rerun = run_experiment(dataclasses.replace(config, threads=8))
        if _masked_csv(records) != _masked_csv(rerun) or _masked_json(
            records
        ) != _masked_json(rerun):
            mismatches.append(config.model_kind)
    elapsed = time.perf_counter() - t0
    ok = not mismatches
    _report(
        12,
        "deterministic records across threads",
        ok,
        f"{len(suites)} suites re-run at 8 threads: "
        + ("all byte-identical (timing column masked)" if ok else f"MISMATCH {mismatches}"),
        elapsed,
    )
    assert not mismatches
