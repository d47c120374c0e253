"""Detailed-balance diagnostics for grid MCMC: the V_n occupancy statistic,
its normal null approximation, stopping rules, reversible samplers on uniform
grids, and a simulated-annealing driver built on the same machinery."""

__version__ = "0.1.0"

from .annealing import AnnealResult, CoolingSchedule, anneal, grid_search_minimum
from .chain import (
    ChainTrace,
    EmpiricalCounts,
    TransitionMatrix,
    accumulate,
    accumulate_marginal,
    autocorrelation,
    check_detailed_balance,
    stationary_distribution,
)
from .diagnostic import (
    DiagnosticSeries,
    NullApproximation,
    StationarityDecision,
    WeightFunctionState,
    abs_z2m1_cubed_moment,
    build_c_matrix,
    compute_vn,
    efficiency_measure,
    null_approximation,
    relative_difference_monitor,
    sigma_analytic_mb,
    sigma_full_analytic,
    sigma_iid,
    sigma_plugin,
    stationarity_test,
)
from .enumeration import one_step_kernel, sample_matrix_chain
from .errors import (
    ConfigError,
    DegenerateNullError,
    DegenerateVarianceError,
    EmptyTraceError,
    McbalanceError,
    NotConvergedError,
    NumericalConsistencyError,
    OutOfDomainError,
    ReversibilityError,
    ShapeError,
    ZeroProbabilityStateError,
)
from .grid import GridSpace
from .samplers import (
    MAX_CHAIN_ITERS,
    ProposalSpec,
    mh_step,
    random_state,
    run_chain,
    run_parallel_chains,
    slice_step_univariate,
    sweep,
)
from .targets import (
    ChangepointDataset,
    ChangepointTarget,
    EnergyTarget,
    FunnelSpec,
    FunnelTarget,
    TabulatedTarget,
    changepoint_energy,
    funnel_energy,
    simulate_changepoint,
    three_state_target,
    toy_targets,
    two_well_target,
    uniform_target,
)

__all__ = [
    "__version__",
    "AnnealResult",
    "CoolingSchedule",
    "anneal",
    "grid_search_minimum",
    "ChainTrace",
    "EmpiricalCounts",
    "TransitionMatrix",
    "accumulate",
    "accumulate_marginal",
    "autocorrelation",
    "check_detailed_balance",
    "stationary_distribution",
    "DiagnosticSeries",
    "NullApproximation",
    "StationarityDecision",
    "WeightFunctionState",
    "abs_z2m1_cubed_moment",
    "build_c_matrix",
    "compute_vn",
    "efficiency_measure",
    "null_approximation",
    "relative_difference_monitor",
    "sigma_analytic_mb",
    "sigma_full_analytic",
    "sigma_iid",
    "sigma_plugin",
    "stationarity_test",
    "one_step_kernel",
    "sample_matrix_chain",
    "ConfigError",
    "DegenerateNullError",
    "DegenerateVarianceError",
    "EmptyTraceError",
    "McbalanceError",
    "NotConvergedError",
    "NumericalConsistencyError",
    "OutOfDomainError",
    "ReversibilityError",
    "ShapeError",
    "ZeroProbabilityStateError",
    "GridSpace",
    "MAX_CHAIN_ITERS",
    "ProposalSpec",
    "mh_step",
    "random_state",
    "run_chain",
    "run_parallel_chains",
    "slice_step_univariate",
    "sweep",
    "ChangepointDataset",
    "ChangepointTarget",
    "EnergyTarget",
    "FunnelSpec",
    "FunnelTarget",
    "TabulatedTarget",
    "changepoint_energy",
    "funnel_energy",
    "simulate_changepoint",
    "three_state_target",
    "toy_targets",
    "two_well_target",
    "uniform_target",
]
