"""Solver and verification probes for heat equations with a nonlocal-in-time
reaction coefficient.

The unknown satisfies u_t - div(d grad u) + phi(ubar) u = f with homogeneous
Dirichlet conditions, where ubar(x) = integral_0^inf a(t, x) u(t, x) dt
averages the whole trajectory.  The solver finds ubar as a fixed point of the
map that freezes the potential, marches the mild solution, and re-averages.
"""

from .grid import (
    EIGEN_SIZE_LIMIT,
    GridFunction,
    SpatialGrid,
    SpatialOperator,
    assemble_diffusion,
    build_grid,
    norm,
    operator_norm_p_to_inf,
)
from .problem import (
    ForcingSpec,
    PotentialSpec,
    ProblemSpec,
    TimeProfile,
    WeightSpec,
    gaussian_bump,
    sine_mode,
)
from .semigroup import (
    Generator,
    TimeGrid,
    Trajectory,
    apply_semigroup,
    build_generator,
    mild_solution,
    semigroup_difference,
)
from .fixedpoint import (
    BoundCheck,
    FixedPointReport,
    SolverConfig,
    compute_R0,
    evaluate_phi,
    reconstruct_and_check,
    solve,
)
from .estimates import (
    CompactnessReport,
    EstimateFit,
    EstimateProbeConfig,
    measure_contraction,
    measure_difference_bound,
    measure_increment_bound,
    measure_smoothing,
    probe_image_compactness,
    smooth_ball_fields,
)
from .config import ConfigError, RunConfig, build_problem, load_run_config, \
    write_manifest
from .scenarios import scenario_names, scenario_path

__version__ = "0.1.0"

__all__ = [
    "EIGEN_SIZE_LIMIT",
    "GridFunction",
    "SpatialGrid",
    "SpatialOperator",
    "assemble_diffusion",
    "build_grid",
    "norm",
    "operator_norm_p_to_inf",
    "ForcingSpec",
    "PotentialSpec",
    "ProblemSpec",
    "TimeProfile",
    "WeightSpec",
    "gaussian_bump",
    "sine_mode",
    "Generator",
    "TimeGrid",
    "Trajectory",
    "apply_semigroup",
    "build_generator",
    "mild_solution",
    "semigroup_difference",
    "BoundCheck",
    "FixedPointReport",
    "SolverConfig",
    "compute_R0",
    "evaluate_phi",
    "reconstruct_and_check",
    "solve",
    "CompactnessReport",
    "EstimateFit",
    "EstimateProbeConfig",
    "measure_contraction",
    "measure_difference_bound",
    "measure_increment_bound",
    "measure_smoothing",
    "probe_image_compactness",
    "smooth_ball_fields",
    "ConfigError",
    "RunConfig",
    "build_problem",
    "load_run_config",
    "write_manifest",
    "scenario_names",
    "scenario_path",
    "__version__",
]
