"""steinlab: normal approximation for statistics under coordinate resampling.

The package measures how close a function of independent coordinates is to
Gaussian, three ways at once:

* an exchangeable-pair coefficient whose mean recovers the variance and whose
  conditional fluctuation drives a fully explicit distance bound
  (:mod:`steinlab.coefficient`),
* graph-based locality rules that deliver the same kind of bound for
  statistics with sparse interactions (:mod:`steinlab.interaction`),
* empirical Wasserstein distance of simulated samples against the fitted
  normal, with a benchmark harness that sweeps problem sizes and fits
  convergence rates (:mod:`steinlab.harness`).

Model families with closed-form reference values live under
:mod:`steinlab.models`.
"""

from .coefficient import (
    BoundReport,
    CoefficientEstimate,
    Estimate,
    ExhaustiveMoments,
    MeanVarianceReport,
    coefficient_mean_and_variance,
    conditional_coefficient_variance,
    cov_identity_residual,
    efron_stein_check,
    exact_coefficient,
    exact_third_moment_sum,
    exhaustive_coefficient_moments,
    mc_coefficient,
    normality_bound,
    pairing_gap_check,
    sample_subset_index_pair,
    subset_weight,
)
from .errors import (
    ConfigError,
    DegenerateSampleError,
    DegenerateStatisticError,
    EnumerationLimitError,
    InsufficientDataError,
    InvalidCoordinateError,
    InvalidSubsetError,
    MomentOrderError,
    SolverAccuracyError,
    SteinLabError,
    TieError,
)
from .gaussian import (
    EmpiricalDistance,
    SteinSolution,
    TestFunction,
    gaussian_expectation,
    standardize,
    stein_constant_check,
    stein_solve,
    wasserstein1_to_gaussian,
)
from .harness import (
    BoundOptions,
    ExperimentConfig,
    ExperimentRecord,
    RateFit,
    emit,
    fit_rate,
    load_records,
    parse_config,
    parse_config_text,
    records_to_csv,
    records_to_json,
    run_experiment,
)
from .interaction import (
    GraphicalRule,
    IndexGraph,
    check_extension,
    check_interaction_rule,
    check_noninteraction,
    check_symmetry,
    degree_and_change_stats,
    degree_identity_check,
    interaction_bound,
)
from .resample import (
    CoordinateModel,
    PairedSample,
    coordinate_deltas,
    delta_third_moment,
    delta_third_moment_sum,
    enumerate_states,
    finite_model,
    iid_sum_model,
    mix,
    rademacher_model,
    randomized_derivative,
    recombine,
    statistic_table,
)

__version__ = "0.1.0"

__all__ = [
    "BoundOptions",
    "BoundReport",
    "CoefficientEstimate",
    "ConfigError",
    "CoordinateModel",
    "DegenerateSampleError",
    "DegenerateStatisticError",
    "EmpiricalDistance",
    "EnumerationLimitError",
    "Estimate",
    "ExhaustiveMoments",
    "ExperimentConfig",
    "ExperimentRecord",
    "GraphicalRule",
    "IndexGraph",
    "InsufficientDataError",
    "InvalidCoordinateError",
    "InvalidSubsetError",
    "MeanVarianceReport",
    "MomentOrderError",
    "PairedSample",
    "RateFit",
    "SolverAccuracyError",
    "SteinLabError",
    "SteinSolution",
    "TestFunction",
    "TieError",
    "__version__",
    "check_extension",
    "check_interaction_rule",
    "check_noninteraction",
    "check_symmetry",
    "coefficient_mean_and_variance",
    "conditional_coefficient_variance",
    "coordinate_deltas",
    "cov_identity_residual",
    "degree_and_change_stats",
    "degree_identity_check",
    "delta_third_moment",
    "delta_third_moment_sum",
    "efron_stein_check",
    "emit",
    "enumerate_states",
    "exact_coefficient",
    "exact_third_moment_sum",
    "exhaustive_coefficient_moments",
    "finite_model",
    "fit_rate",
    "gaussian_expectation",
    "iid_sum_model",
    "interaction_bound",
    "load_records",
    "mc_coefficient",
    "mix",
    "normality_bound",
    "pairing_gap_check",
    "parse_config",
    "parse_config_text",
    "rademacher_model",
    "randomized_derivative",
    "recombine",
    "records_to_csv",
    "records_to_json",
    "run_experiment",
    "sample_subset_index_pair",
    "standardize",
    "statistic_table",
    "stein_constant_check",
    "stein_solve",
    "subset_weight",
    "wasserstein1_to_gaussian",
]
