"""Experiment runner: sweep n, measure the empirical distance, report bounds.

A config file (INI grammar, documented in the README) names one model family,
a grid of sizes, a replication count and a seed.  For each size the runner
draws the statistic many times, standardizes using the best variance
available (exact formula > asymptotic formula > empirical), computes the
quantile-coupling Wasserstein distance to the standard normal, a bootstrap
standard-error proxy for it, and the applicable normality bound.

Determinism contract: every replication r of size n uses its own stream
seeded by (seed, n, 0, r); bound and bootstrap estimators use streams
(seed, n, 1) and (seed, n, 2).  Threads only partition replication indices,
and results are assembled by index, so records are identical for any thread
count.  Emitted CSV/JSON is byte-stable except for the wall_ms field, which
reports real elapsed time.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .coefficient import (
    BoundReport,
    conditional_coefficient_variance,
    normality_bound,
)
from .errors import (
    ConfigError,
    DegenerateStatisticError,
    InsufficientDataError,
)
from .gaussian import EmpiricalDistance, wasserstein1_to_gaussian
from .interaction import degree_and_change_stats, interaction_bound
from .models.coverage import CoverageModel, GridArea, ProbeArea, ball_volume, coverage_bound
from .models.nearest import NnModel, capped_scaled_distance, cone_cover_number, nn_bound
from .models.occupancy import OccupancyModel, same_box_rule
from .models.quadratic import QuadraticFormModel, goe_like_matrix, quadratic_bound
from .resample import CoordinateModel, delta_third_moment_sum, iid_sum_model

SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "model",
    "n",
    "replications",
    "seed",
    "delta_hat",
    "delta_se_proxy",
    "bound_total",
    "bound_variance_term",
    "bound_third_moment_term",
    "sigma2",
    "sigma2_provenance",
    "variance_level",
    "modulo_C",
    "wall_ms",
)
_CHUNK = 256
_STREAM_REPLICATION = 0
_STREAM_BOUND = 1
_STREAM_BOOTSTRAP = 2
_BOOTSTRAP_RESAMPLES = 200


@dataclass(frozen=True)
class BoundOptions:
    """Knobs for the Monte Carlo pieces of the reported bounds."""

    variance_level: str = "given_x"
    constant_c: float = 1.0
    outer_reps: int = 200
    inner_reps: int = 64
    moment_reps: int = 2000
    third_reps: int = 200
    moment_order: float = 8.0
    proximity_reps: int = 100_000


@dataclass(frozen=True)
class ExperimentConfig:
    model_kind: str
    model_params: dict
    n_grid: tuple[int, ...]
    replications: int
    seed: int
    threads: int = 1
    bound_options: BoundOptions = field(default_factory=BoundOptions)
    output_path: str | None = None
    output_formats: tuple[str, ...] = ("csv", "json")
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        if not self.n_grid:
            raise ConfigError("n_grid must be nonempty")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError("n_grid must be strictly increasing")
        if self.replications < 100:
            raise ConfigError("need at least 100 replications per size")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        for fmt in self.output_formats:
            if fmt not in ("csv", "json"):
                raise ConfigError(f"unknown output format {fmt!r}")
        if self.model_kind not in _MODEL_KINDS:
            raise ConfigError(
                f"unknown model kind {self.model_kind!r}; choose from {sorted(_MODEL_KINDS)}"
            )


@dataclass(frozen=True)
class ExperimentRecord:
    model: str
    n: int
    replications: int
    seed: int
    empirical_delta: EmpiricalDistance
    delta_se_proxy: float
    bound: BoundReport
    sigma2: float
    sigma2_provenance: str
    wall_ms: float
    fingerprint: str


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit of log(delta) against log(n)."""

    slope: float
    intercept: float
    r_squared: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError(f"r_squared must lie in [0, 1], got {self.r_squared}")


@dataclass(frozen=True)
class _ModelInstance:
    """One model family instantiated at one size n."""

    name: str
    coord_model: CoordinateModel
    exact_mean: float | None
    exact_sigma2: float | None
    sigma2_provenance: str
    make_bound: Callable[[float, np.random.Generator], BoundReport]


# ---------------------------------------------------------------------------
# model registry


def _instance_iid_sum(params: dict, n: int, opts: BoundOptions) -> _ModelInstance:
    law = params.get("law", "rademacher")
    cm = iid_sum_model(n, law=law)

    def make_bound(sigma2: float, rng: np.random.Generator) -> BoundReport:
        cv = conditional_coefficient_variance(cm, opts.outer_reps, opts.inner_reps, rng)
        third = delta_third_moment_sum(cm, opts.third_reps, rng)
        return normality_bound(cv.mean, sigma2, third.mean, opts.variance_level)

    return _ModelInstance(
        name="iid_sum",
        coord_model=cm,
        exact_mean=0.0,
        exact_sigma2=1.0,
        sigma2_provenance="exact",
        make_bound=make_bound,
    )


def _instance_quadratic(params: dict, n: int, opts: BoundOptions) -> _ModelInstance:
    matrix_seed = int(params.get("matrix_seed", 0))
    matrix = goe_like_matrix(n, np.random.default_rng(np.random.SeedSequence([matrix_seed, n])))
    qf = QuadraticFormModel(matrix)

    def make_bound(sigma2: float, rng: np.random.Generator) -> BoundReport:
        return quadratic_bound(qf)

    return _ModelInstance(
        name="quadratic_form",
        coord_model=qf.coordinate_model(),
        exact_mean=0.0,
        exact_sigma2=qf.sigma2,
        sigma2_provenance="exact",
        make_bound=make_bound,
    )


def _instance_occupancy(params: dict, n: int, opts: BoundOptions) -> _ModelInstance:
    alpha = float(params.get("alpha", 1.0))
    mode = params.get("variance_mode", "exact")
    occ = OccupancyModel(n_balls=n, alpha=alpha)
    cm = occ.coordinate_model()
    rule = same_box_rule(occ.m_boxes)
    if mode == "exact":
        sigma2, prov = occ.variance("exact"), "exact"
    elif mode == "asymptotic":
        sigma2, prov = occ.variance("asymptotic"), "asymptotic"
    elif mode == "empirical":
        sigma2, prov = None, "empirical"
    else:
        raise ConfigError(f"unknown occupancy variance_mode {mode!r}")

    def make_bound(sig2: float, rng: np.random.Generator) -> BoundReport:
        stats = degree_and_change_stats(cm, rule, opts.moment_reps, rng)
        third = delta_third_moment_sum(cm, opts.third_reps, rng)
        return interaction_bound(
            sig2, stats.mean_change8, stats.mean_degree4, third.mean, n,
            constant_c=opts.constant_c,
        )

    return _ModelInstance(
        name="occupancy",
        coord_model=cm,
        exact_mean=occ.mean() if mode == "exact" else None,
        exact_sigma2=sigma2,
        sigma2_provenance=prov,
        make_bound=make_bound,
    )


def _instance_coverage(params: dict, n: int, opts: BoundOptions) -> _ModelInstance:
    dim = int(params.get("dim", 2))
    coeff = float(params.get("radius_coeff", 1.0))
    expo = float(params.get("radius_exp", -0.5))
    radius = coeff * n**expo
    est_kind = params.get("estimator", "grid")
    if est_kind == "grid":
        estimator = GridArea(int(params.get("resolution", 128)))
    elif est_kind == "probe":
        estimator = ProbeArea(
            int(params.get("probes", 4096)), int(params.get("probe_seed", 20080901))
        )
    else:
        raise ConfigError(f"unknown coverage estimator {est_kind!r}")
    cov = CoverageModel(n_points=n, radius=radius, dim=dim, estimator=estimator)

    def make_bound(sigma2: float, rng: np.random.Generator) -> BoundReport:
        if dim == 1:
            p_eps = cov.pair_proximity_prob()
        else:
            p_eps = cov.pair_proximity_prob(opts.proximity_reps, rng)
        return coverage_bound(
            cov.max_increment(), p_eps, sigma2, n, constant_c=opts.constant_c
        )

    return _ModelInstance(
        name="coverage",
        coord_model=cov.coordinate_model(),
        exact_mean=None,
        exact_sigma2=None,
        sigma2_provenance="empirical",
        make_bound=make_bound,
    )


def _instance_nearest(params: dict, n: int, opts: BoundOptions) -> _ModelInstance:
    dim = int(params.get("dim", 2))
    k = int(params.get("k", 1))
    cap = float(params.get("cap", 1.0))
    alpha = float(params["alpha"]) if "alpha" in params else float(cone_cover_number(dim))
    p = opts.moment_order
    nn = NnModel(
        n_points=n,
        dim=dim,
        k=k,
        functional=capped_scaled_distance(dim, n, cap),
        name=f"capped_scaled_distance[{cap:g}]",
    )

    def make_bound(sigma2: float, rng: np.random.Generator) -> BoundReport:
        return nn_bound(alpha, k, cap**p, p, sigma2, n, constant_c=opts.constant_c)

    return _ModelInstance(
        name="nearest",
        coord_model=nn.coordinate_model(),
        exact_mean=None,
        exact_sigma2=None,
        sigma2_provenance="empirical",
        make_bound=make_bound,
    )


_MODEL_KINDS: dict[str, Callable[[dict, int, BoundOptions], _ModelInstance]] = {
    "iid_sum": _instance_iid_sum,
    "quadratic_form": _instance_quadratic,
    "occupancy": _instance_occupancy,
    "coverage": _instance_coverage,
    "nearest": _instance_nearest,
}


# ---------------------------------------------------------------------------
# replication engine


def _replication_stream(seed: int, n: int, stream: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, n, stream, index]))


def _sample_statistic(
    inst: _ModelInstance, n: int, reps: int, seed: int, threads: int
) -> np.ndarray:
    cm = inst.coord_model

    def run_chunk(lo: int) -> np.ndarray:
        hi = min(lo + _CHUNK, reps)
        rows = [
            np.asarray(cm.draw_coords(_replication_stream(seed, n, _STREAM_REPLICATION, r), n))
            for r in range(lo, hi)
        ]
        if cm.batch_statistic is not None and rows[0].ndim == 1:
            return np.asarray(cm.batch_statistic(np.asarray(rows)), dtype=float)
        return np.array([float(cm.statistic(row)) for row in rows])

    starts = range(0, reps, _CHUNK)
    if threads == 1:
        parts = [run_chunk(lo) for lo in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run_chunk, starts))
    return np.concatenate(parts)


def _bootstrap_se(
    w: np.ndarray,
    standardization: str,
    mean: float | None,
    std: float | None,
    rng: np.random.Generator,
) -> float:
    m = w.size
    vals = np.empty(_BOOTSTRAP_RESAMPLES)
    for b in range(_BOOTSTRAP_RESAMPLES):
        resampled = w[rng.integers(0, m, size=m)]
        vals[b] = wasserstein1_to_gaussian(resampled, standardization, mean, std).w1
    return float(vals.std(ddof=1))


def _fingerprint(config: ExperimentConfig) -> str:
    payload = json.dumps(
        {
            "schema_version": config.schema_version,
            "model_kind": config.model_kind,
            "model_params": config.model_params,
            "n_grid": list(config.n_grid),
            "replications": config.replications,
            "seed": config.seed,
            "bound_options": asdict(config.bound_options),
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def run_experiment(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Run the configured sweep and return one record per grid size."""
    fingerprint = _fingerprint(config)
    records = []
    for n in config.n_grid:
        t0 = time.perf_counter()
        inst = _MODEL_KINDS[config.model_kind](config.model_params, n, config.bound_options)
        w = _sample_statistic(inst, n, config.replications, config.seed, config.threads)
        if inst.exact_sigma2 is not None:
            sigma2, provenance = float(inst.exact_sigma2), inst.sigma2_provenance
        else:
            sigma2, provenance = float(w.var(ddof=1)), "empirical"
        if not np.isfinite(sigma2) or sigma2 <= 0:
            raise DegenerateStatisticError(
                f"{inst.name} at n={n}: variance {sigma2} cannot standardize"
            )
        if inst.exact_mean is not None and provenance != "empirical":
            standardization, mean, std = "known", float(inst.exact_mean), float(np.sqrt(sigma2))
        else:
            standardization, mean, std = "empirical", None, None
        delta = wasserstein1_to_gaussian(w, standardization, mean, std)
        se = _bootstrap_se(
            w, standardization, mean, std, _replication_stream(config.seed, n, _STREAM_BOOTSTRAP)
        )
        bound = inst.make_bound(sigma2, _replication_stream(config.seed, n, _STREAM_BOUND))
        wall_ms = (time.perf_counter() - t0) * 1e3
        records.append(
            ExperimentRecord(
                model=inst.name,
                n=n,
                replications=config.replications,
                seed=config.seed,
                empirical_delta=delta,
                delta_se_proxy=se,
                bound=bound,
                sigma2=sigma2,
                sigma2_provenance=provenance,
                wall_ms=wall_ms,
                fingerprint=fingerprint,
            )
        )
    return records


# ---------------------------------------------------------------------------
# rate fitting and persistence


def fit_rate(records: Sequence[ExperimentRecord]) -> RateFit:
    """Ordinary least squares of log(delta_hat) on log(n)."""
    pts = [(r.n, r.empirical_delta.w1) for r in records if r.empirical_delta.w1 > 0]
    if len(pts) < 3:
        raise InsufficientDataError(
            f"need >= 3 records with positive distance, got {len(pts)}"
        )
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RateFit(float(slope), float(intercept), r2)


def _record_row(r: ExperimentRecord) -> list[str]:
    return [
        r.model,
        str(r.n),
        str(r.replications),
        str(r.seed),
        repr(r.empirical_delta.w1),
        repr(r.delta_se_proxy),
        repr(r.bound.total),
        repr(r.bound.variance_term),
        repr(r.bound.third_moment_term),
        repr(r.sigma2),
        r.sigma2_provenance,
        r.bound.variance_level,
        "true" if r.bound.modulo_c else "false",
        repr(r.wall_ms),
    ]


def records_to_csv(records: Sequence[ExperimentRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(_record_row(r))
    return buf.getvalue()


def records_to_json(records: Sequence[ExperimentRecord]) -> str:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "records": [asdict(r) for r in records],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def emit(
    records: Sequence[ExperimentRecord],
    path_stem: str | Path,
    formats: Sequence[str] = ("csv", "json"),
) -> list[Path]:
    """Write records next to ``path_stem`` with .csv/.json suffixes."""
    stem = Path(path_stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "csv":
            path = stem.with_suffix(".csv")
            path.write_text(records_to_csv(records))
        elif fmt == "json":
            path = stem.with_suffix(".json")
            path.write_text(records_to_json(records))
        else:
            raise ConfigError(f"unknown output format {fmt!r}")
        written.append(path)
    return written


def load_records(path: str | Path) -> list[ExperimentRecord]:
    """Read records back from an emitted CSV or JSON file."""
    path = Path(path)
    if path.suffix == ".json":
        payload = json.loads(path.read_text())
        if payload.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(
                f"schema_version {payload.get('schema_version')} != {SCHEMA_VERSION}"
            )
        out = []
        for raw in payload["records"]:
            out.append(
                ExperimentRecord(
                    model=raw["model"],
                    n=int(raw["n"]),
                    replications=int(raw["replications"]),
                    seed=int(raw["seed"]),
                    empirical_delta=EmpiricalDistance(**raw["empirical_delta"]),
                    delta_se_proxy=float(raw["delta_se_proxy"]),
                    bound=BoundReport(**raw["bound"]),
                    sigma2=float(raw["sigma2"]),
                    sigma2_provenance=raw["sigma2_provenance"],
                    wall_ms=float(raw["wall_ms"]),
                    fingerprint=raw["fingerprint"],
                )
            )
        return out
    if path.suffix == ".csv":
        out = []
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != list(CSV_COLUMNS):
                raise ConfigError(f"unexpected CSV columns in {path}")
            for row in reader:
                total = float(row["bound_total"])
                var_term = float(row["bound_variance_term"])
                out.append(
                    ExperimentRecord(
                        model=row["model"],
                        n=int(row["n"]),
                        replications=int(row["replications"]),
                        seed=int(row["seed"]),
                        empirical_delta=EmpiricalDistance(
                            w1=float(row["delta_hat"]),
                            sample_size=int(row["replications"]),
                            standardization="unrecorded",
                            mean_used=float("nan"),
                            std_used=float("nan"),
                        ),
                        delta_se_proxy=float(row["delta_se_proxy"]),
                        bound=BoundReport(
                            variance_term=var_term,
                            third_moment_term=float(row["bound_third_moment_term"]),
                            total=total,
                            sigma2=float(row["sigma2"]),
                            variance_level=row["variance_level"],
                            modulo_c=row["modulo_C"] == "true",
                        ),
                        sigma2=float(row["sigma2"]),
                        sigma2_provenance=row["sigma2_provenance"],
                        wall_ms=float(row["wall_ms"]),
                        fingerprint="",
                    )
                )
        return out
    raise ConfigError(f"cannot load records from {path}: unknown extension")


# ---------------------------------------------------------------------------
# config files


_EXPERIMENT_KEYS = {"schema_version", "seed", "replications", "n_grid", "threads"}
_BOUND_KEYS = {
    "variance_level",
    "constant_c",
    "outer_reps",
    "inner_reps",
    "moment_reps",
    "third_reps",
    "moment_order",
    "proximity_reps",
}
_OUTPUT_KEYS = {"path", "format"}
_MODEL_KEYS = {
    "iid_sum": {"kind", "law"},
    "quadratic_form": {"kind", "matrix_seed"},
    "occupancy": {"kind", "alpha", "variance_mode"},
    "coverage": {
        "kind", "dim", "radius_coeff", "radius_exp", "estimator",
        "resolution", "probes", "probe_seed",
    },
    "nearest": {"kind", "dim", "k", "cap", "alpha"},
}


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse and validate the INI experiment grammar (see README)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    for section in ("experiment", "model"):
        if not parser.has_section(section):
            raise ConfigError(f"missing required [{section}] section")
    known_sections = {"experiment", "model", "bounds", "output"}
    unknown = set(parser.sections()) - known_sections
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")

    exp = parser["experiment"]
    _reject_unknown("experiment", exp, _EXPERIMENT_KEYS)
    try:
        schema = exp.getint("schema_version")
        seed = exp.getint("seed")
        replications = exp.getint("replications")
        threads = exp.getint("threads", fallback=1)
        n_grid = tuple(
            int(tok) for tok in exp.get("n_grid", "").replace(",", " ").split()
        )
    except ValueError as exc:
        raise ConfigError(f"bad [experiment] value: {exc}") from exc
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {schema}")

    model = dict(parser["model"])
    kind = model.get("kind")
    if kind not in _MODEL_KINDS:
        raise ConfigError(f"unknown model kind {kind!r}")
    _reject_unknown("model", model, _MODEL_KEYS[kind])
    params = {k: v for k, v in model.items() if k != "kind"}

    opts = BoundOptions()
    if parser.has_section("bounds"):
        b = parser["bounds"]
        _reject_unknown("bounds", b, _BOUND_KEYS)
        try:
            opts = BoundOptions(
                variance_level=b.get("variance_level", opts.variance_level),
                constant_c=b.getfloat("constant_c", opts.constant_c),
                outer_reps=b.getint("outer_reps", opts.outer_reps),
                inner_reps=b.getint("inner_reps", opts.inner_reps),
                moment_reps=b.getint("moment_reps", opts.moment_reps),
                third_reps=b.getint("third_reps", opts.third_reps),
                moment_order=b.getfloat("moment_order", opts.moment_order),
                proximity_reps=b.getint("proximity_reps", opts.proximity_reps),
            )
        except ValueError as exc:
            raise ConfigError(f"bad [bounds] value: {exc}") from exc

    output_path = None
    formats: tuple[str, ...] = ("csv", "json")
    if parser.has_section("output"):
        o = parser["output"]
        _reject_unknown("output", o, _OUTPUT_KEYS)
        output_path = o.get("path", fallback=None)
        if o.get("format", fallback=None):
            formats = tuple(o.get("format").replace(",", " ").split())

    return ExperimentConfig(
        model_kind=kind,
        model_params=params,
        n_grid=n_grid,
        replications=replications,
        seed=seed,
        threads=threads,
        bound_options=opts,
        output_path=output_path,
        output_formats=formats,
        schema_version=schema,
    )


def _reject_unknown(section: str, mapping, allowed: set) -> None:
    unknown = set(mapping.keys()) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")


def parse_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text())
