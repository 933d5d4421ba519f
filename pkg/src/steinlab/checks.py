"""Named invariant suites behind ``steinlab check <suite>``.

Small, seeded, seconds-scale versions of the package's defining identities.
The pytest suite runs the full-size versions; these exist so a shipped
install can be smoke-checked without the test tree.
"""

from __future__ import annotations

import math
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import erfcx

from . import coefficient as co
from . import gaussian as ga
from . import harness as ha
from . import interaction as ia
from . import resample as rs
from .models import coverage as mc
from .models import nearest as mn
from .models import occupancy as mo
from .models import quadratic as mq


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name, bool(passed), detail)


def _product_model(n: int) -> rs.CoordinateModel:
    return rs.finite_model(
        n, [1.0, 2.0, 3.0], [0.5, 0.3, 0.2], lambda x: float(np.prod(x)), name="product"
    )


def _table_model(n: int, rng: np.random.Generator) -> rs.CoordinateModel:
    table = rng.standard_normal(2**n)

    def statistic(x: np.ndarray) -> float:
        idx = 0
        for v in x:
            idx = idx * 2 + (1 if v > 0 else 0)
        return float(table[idx])

    return rs.rademacher_model(n, statistic, name="table")


def _check_core(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []

    model = _product_model(4)
    pair = rs.PairedSample(np.array([2.0, 3.0, 1.0, 1.0]), np.array([5.0, 7.0, 1.0, 1.0]))
    d = rs.randomized_derivative(model, pair, [1], 0)
    out.append(_result("derivative.example", abs(d - (14.0 - 35.0)) < 1e-12, f"value {d}"))

    iid = rs.iid_sum_model(6)
    p6 = iid.sample_pair(rng)
    closed = float(np.sum((p6.x - p6.x_prime) ** 2)) / (2 * 6)
    exact = co.exact_coefficient(iid, p6).value
    out.append(_result("coefficient.closed_form", abs(exact - closed) < 1e-12, f"{exact} vs {closed}"))

    combos: dict[tuple, int] = {}
    for _ in range(4000):
        a, j = co.sample_subset_index_pair(2, rng)
        key = (tuple(a.tolist()), j)
        combos[key] = combos.get(key, 0) + 1
    worst = max(abs(v / 4000 - 0.25) for v in combos.values())
    out.append(_result("sampler.law_n2", len(combos) == 4 and worst < 0.033, f"max dev {worst:.4f}"))

    prod = _product_model(6)
    pp = prod.sample_pair(rng)
    ex = co.exact_coefficient(prod, pp).value
    mcd = co.mc_coefficient(prod, pp, 20000, rng)
    z = (mcd.value - ex) / mcd.std_error
    out.append(_result("coefficient.mc_unbiased", abs(z) < 4, f"z = {z:.2f}"))

    tbl = _table_model(4, rng)
    mom = co.exhaustive_coefficient_moments(tbl)
    out.append(
        _result(
            "coefficient.mean_is_variance",
            abs(mom.mean - mom.variance_w) < 1e-10,
            f"|E(T) - Var| = {abs(mom.mean - mom.variance_w):.2e}",
        )
    )
    chain = mom.var_given_w <= mom.var_given_x + 1e-12 <= mom.var_total + 2e-12
    out.append(
        _result(
            "coefficient.variance_chain",
            chain,
            f"{mom.var_given_w:.4f} <= {mom.var_given_x:.4f} <= {mom.var_total:.4f}",
        )
    )
    return out


def _check_identities(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    worst = 0.0
    for n in (2, 3, 4):
        model = _table_model(n, rng)
        g = _table_model(n, rng).statistic
        worst = max(worst, co.cov_identity_residual(model, g))
    out.append(_result("identities.covariance", worst < 1e-10, f"max residual {worst:.2e}"))

    model = _table_model(3, rng)
    rep = co.pairing_gap_check(model, math.sin, math.cos, 1.0)
    out.append(_result("identities.pairing_gap", rep.passed, f"gap {rep.gap:.3e} <= cap {rep.cap:.3e}"))

    es = co.efron_stein_check(_table_model(4, rng))
    out.append(_result("identities.efron_stein", es.passed, f"var {es.variance:.4f} <= {es.cap:.4f}"))
    return out


def _abs_solution(x: np.ndarray) -> np.ndarray:
    """Closed-form solution for h(t) = |t| via the scaled complementary erf."""
    mag = erfcx(np.abs(x) / math.sqrt(2.0)) - 1.0
    return np.where(x >= 0, mag, -mag)


def _check_gaussian(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    sol = ga.stein_solve(abs, 1.0)
    grid = np.linspace(-6, 6, 41)
    resid = float(np.max(np.abs(sol.phi(grid) - _abs_solution(grid))))
    out.append(_result("gaussian.solver_oracle", resid < 1e-9, f"max |phi - oracle| = {resid:.2e}"))

    fam = [
        ga.TestFunction(abs, lambda t: math.copysign(1.0, t), 1.0),
        ga.TestFunction(lambda t: t, lambda t: 1.0, 1.0),
        ga.TestFunction(lambda t: max(t, 0.0), lambda t: 1.0 if t > 0 else 0.0, 1.0),
    ]
    rep = ga.stein_constant_check(fam, np.linspace(-6, 6, 121))
    ok = rep.max_first_ratio <= math.sqrt(2 / math.pi) + 1e-3 and rep.max_second_ratio <= 2 + 1e-3
    out.append(
        _result(
            "gaussian.constants",
            ok,
            f"ratios {rep.max_first_ratio:.4f}, {rep.max_second_ratio:.4f}",
        )
    )

    point = ga.wasserstein1_to_gaussian(np.zeros(20000), "known", 0.0, 1.0)
    out.append(
        _result(
            "gaussian.point_mass",
            abs(point.w1 - math.sqrt(2 / math.pi)) < 0.01,
            f"w1 = {point.w1:.4f}",
        )
    )
    gauss = ga.wasserstein1_to_gaussian(rng.standard_normal(20000), "known", 0.0, 1.0)
    out.append(_result("gaussian.calibration", gauss.w1 < 0.03, f"w1 = {gauss.w1:.4f}"))
    return out


def _check_rules(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []

    occ = mo.OccupancyModel(8, 1.0)
    rule = mo.same_box_rule(occ.m_boxes)
    sampler = lambda r: r.integers(0, occ.m_boxes, size=8)
    sym = ia.check_symmetry(rule, sampler, 200, rng)
    out.append(_result("rules.occupancy_symmetry", sym.violations == 0, f"{sym.trials} trials"))
    inter = ia.check_interaction_rule(occ.statistic, rule, sampler, 2000, rng, tol=0.5)
    out.append(
        _result(
            "rules.occupancy_interaction",
            inter.violations == 0,
            f"{inter.tested} tested of {inter.trials}",
        )
    )
    ext = ia.check_extension(rule, rule, lambda r: r.integers(0, occ.m_boxes, size=12), 8, 200, rng)
    out.append(_result("rules.occupancy_extension", ext.violations == 0, f"{ext.trials} trials"))
    ident = ia.degree_identity_check(rule, lambda r: r.integers(0, 12, size=12), 0, [1, 2], 20000, rng)
    out.append(_result("rules.degree_identity", abs(ident.z_score) < 5, f"z = {ident.z_score:.2f}"))

    cov = mc.CoverageModel(8, 0.15, estimator=mc.ProbeArea(512, 11))
    prox = mc.proximity_rule(0.3)
    cov_sampler = lambda r: r.random((8, 2))
    ci = ia.check_interaction_rule(cov.statistic, prox, cov_sampler, 400, rng, tol=1e-12)
    out.append(
        _result(
            "rules.coverage_interaction",
            ci.violations == 0,
            f"{ci.tested} tested, max residual {ci.max_residual:.1e}",
        )
    )

    nn = mn.NnModel(10, 2, 1, mn.capped_scaled_distance(2, 10), name="demo")
    nn_rule = mn.co_neighbor_rule(1)
    viol = 0
    tested = 0
    for _ in range(300):
        x, _ = mn.draw_tiefree(rng, 10, 2)
        xp, _ = mn.draw_tiefree(rng, 10, 2)
        i, j = rng.choice(10, size=2, replace=False)
        xi, xj, xij = x.copy(), x.copy(), x.copy()
        xi[i], xj[j] = xp[i], xp[j]
        xij[i], xij[j] = xp[i], xp[j]
        if any(nn_rule.build(v).has_edge(i, j) for v in (x, xi, xj, xij)):
            continue
        tested += 1
        res = abs(
            nn.statistic(x) - nn.statistic(xi) - nn.statistic(xj) + nn.statistic(xij)
        )
        if res > 1e-9:
            viol += 1
    out.append(_result("rules.nn_interaction", viol == 0, f"{tested} tested"))

    agree = True
    for _ in range(50):
        pts, _ = mn.draw_tiefree(rng, 40, 2)
        if not np.array_equal(
            mn.neighbor_ranks(pts, "brute"), mn.neighbor_ranks(pts, "tree")
        ):
            agree = False
            break
    out.append(_result("rules.rank_routes_agree", agree, "50 configurations"))
    return out


def _check_models(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []

    qf = mq.QuadraticFormModel(np.array([[0.0, 1.0], [1.0, 0.0]]))
    b = mq.quadratic_bound(qf)
    ok = (
        abs(qf.statistic(np.array([1.0, 1.0])) - 1.0) < 1e-12
        and abs(qf.conditional_coefficient(np.array([1.0, -1.0])) - 1.0) < 1e-12
        and abs(b.total - 6.0) < 1e-12
    )
    out.append(_result("models.quadratic_closed_forms", ok, f"bound total {b.total}"))

    occ = mo.OccupancyModel(3, 1.0)
    states, probs = rs.enumerate_states(occ.coordinate_model())
    w = rs.statistic_table(occ.coordinate_model(), states)
    mean = float(probs @ w)
    var = float(probs @ w**2) - mean**2
    ok = abs(mean - 8.0 / 9.0) < 1e-12 and abs(mean - occ.mean()) < 1e-12 and abs(
        var - occ.variance("exact")
    ) < 1e-12
    out.append(_result("models.occupancy_enumeration", ok, f"mean {mean:.6f}, var {var:.6f}"))

    cov = mc.CoverageModel(1, 0.1, estimator=mc.GridArea(500))
    area = cov.statistic(np.array([[0.5, 0.5]]))
    ok = abs(area - math.pi * 0.01) < 2e-3
    out.append(_result("models.coverage_disc", ok, f"area {area:.5f} vs {math.pi * 0.01:.5f}"))

    ranks = mn.neighbor_ranks(np.array([0.0, 1.0, 3.0]))
    lb = mn.levina_bickel(np.array([0.0, 1.0, 3.0]), 2)
    ok = ranks[0, 1] == 1 and ranks[0, 2] == 2 and abs(lb - 1.6064) < 1e-3
    out.append(_result("models.nn_examples", ok, f"lb = {lb:.4f}"))
    return out


def _check_harness(seed: int) -> list[CheckResult]:
    out = []
    synthetic = []
    for n in (16, 64, 256, 1024):
        synthetic.append(
            ha.ExperimentRecord(
                model="synthetic",
                n=n,
                replications=100,
                seed=seed,
                empirical_delta=ga.EmpiricalDistance(n**-0.5, 100, "known", 0.0, 1.0),
                delta_se_proxy=0.0,
                bound=co.BoundReport(1.0, 1.0, 2.0, 1.0, "given_x"),
                sigma2=1.0,
                sigma2_provenance="exact",
                wall_ms=0.0,
                fingerprint="0" * 12,
            )
        )
    fit = ha.fit_rate(synthetic)
    ok = abs(fit.slope + 0.5) < 1e-12 and abs(fit.r_squared - 1.0) < 1e-12
    out.append(_result("harness.rate_fit", ok, f"slope {fit.slope:.6f}"))

    cfg = ha.parse_config_text(
        f"""
[experiment]
schema_version = 1
seed = {seed}
replications = 100
n_grid = 16 32
threads = 1

[model]
kind = occupancy
alpha = 1.0

[bounds]
moment_reps = 50
third_reps = 20
outer_reps = 10
inner_reps = 8
"""
    )
    records = ha.run_experiment(cfg)
    cfg8 = ha.ExperimentConfig(
        model_kind=cfg.model_kind,
        model_params=cfg.model_params,
        n_grid=cfg.n_grid,
        replications=cfg.replications,
        seed=cfg.seed,
        threads=4,
        bound_options=cfg.bound_options,
    )
    records8 = ha.run_experiment(cfg8)

    def mask(text: str) -> str:
        return "\n".join(
            ",".join(line.split(",")[:-1]) for line in text.splitlines()
        )

    same = mask(ha.records_to_csv(records)) == mask(ha.records_to_csv(records8))
    out.append(_result("harness.thread_determinism", same, "1 vs 4 threads, wall_ms masked"))

    with tempfile.TemporaryDirectory() as tmp:
        paths = ha.emit(records, Path(tmp) / "run", ("csv", "json"))
        loaded = ha.load_records(paths[1])
        same = [
            (r.n, r.empirical_delta.w1, r.bound.total) for r in loaded
        ] == [(r.n, r.empirical_delta.w1, r.bound.total) for r in records]
        out.append(_result("harness.round_trip", same, f"{len(loaded)} records"))
    return out


SUITES: dict[str, Callable[[int], list[CheckResult]]] = {
    "core": _check_core,
    "identities": _check_identities,
    "gaussian": _check_gaussian,
    "rules": _check_rules,
    "models": _check_models,
    "harness": _check_harness,
}


def run_suite(name: str, seed: int = 7) -> list[CheckResult]:
    """Run one named suite ("all" runs everything) and return its results."""
    if name == "all":
        results = []
        for suite in SUITES.values():
            results.extend(suite(seed))
        return results
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    return SUITES[name](seed)
