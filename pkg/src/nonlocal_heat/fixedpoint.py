"""Fixed-point formulation: the map Phi and the damped Picard/Anderson solver.

Phi(ubar) integrates the mild solution of the frozen-coefficient problem
against the weight in time.  The march is sup-norm contractive step by step,
the quadrature weights never exceed the weight's total mass, and the horizon
is chosen so the truncated tail stays below the tail tolerance; together these
make Phi map the closed ball of radius R0 into itself up to that tolerance.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

from .grid import GridFunction
from .problem import ProblemSpec
from .semigroup import TimeGrid, Trajectory, build_generator, mild_solution

__all__ = [
    "SolverConfig",
    "FixedPointReport",
    "BoundCheck",
    "compute_R0",
    "evaluate_phi",
    "solve",
    "reconstruct_and_check",
]

DAMPING_FLOOR = 1.0 / 16.0
ANDERSON_DEPTH = 5
ANDERSON_COND_LIMIT = 1e12
STALL_PATIENCE = 5
STEP_LIMIT = 20_000_000


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls for the fixed-point solve."""

    tolerance: float = 1e-8
    max_iter: int = 50
    damping: float = 1.0
    accelerator: str = "anderson"
    tau: float = 1e-3
    tail_tolerance: float | None = None

    def __post_init__(self):
        if not (self.tolerance > 0 and math.isfinite(self.tolerance)):
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        if self.accelerator not in ("picard", "anderson"):
            raise ValueError(f"accelerator must be picard or anderson, got {self.accelerator!r}")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.tail_tolerance is not None and not self.tail_tolerance > 0:
            raise ValueError(f"tail_tolerance must be positive, got {self.tail_tolerance}")

    @property
    def tail_eps(self) -> float:
        """Truncation budget for the time horizon (defaults to tolerance/10)."""
        return self.tolerance / 10.0 if self.tail_tolerance is None else self.tail_tolerance


@dataclass
class BoundCheck:
    """Per-node record of the maximum-principle bound on the reconstruction."""

    times: np.ndarray
    sup_norms: np.ndarray
    bounds: np.ndarray
    slack: float
    max_excess: float
    passed: bool
    radius_value: float
    radius_limit: float
    radius_passed: bool


@dataclass
class FixedPointReport:
    """Everything the solver measured; non-convergence is reported, not raised."""

    verdict: str
    iterations: int
    residuals: np.ndarray
    omegas: np.ndarray
    ubar: GridFunction
    r0: float
    radius_max: float
    time_grid: TimeGrid
    tolerance: float
    tail_tolerance: float
    accelerator: str
    trajectory: Trajectory | None = None
    bound_check: BoundCheck | None = None

    @property
    def converged(self) -> bool:
        return self.verdict == "converged"

    @property
    def final_residual(self) -> float:
        return float(self.residuals[-1]) if self.residuals.size else 0.0


def compute_R0(problem: ProblemSpec) -> float:
    """Invariant-ball radius ||a||_L1Lsup * (||u0||_sup + ||f||_L1Lsup)."""
    u0_sup = float(np.max(np.abs(problem.u0.values))) if problem.u0.values.size else 0.0
    return problem.weight.l1_linf_norm * (u0_sup + problem.forcing.l1_linf_norm)


def _data_norm(problem: ProblemSpec) -> float:
    u0_sup = float(np.max(np.abs(problem.u0.values))) if problem.u0.values.size else 0.0
    return u0_sup + problem.forcing.l1_linf_norm


def _horizon(problem: ProblemSpec, config: SolverConfig) -> TimeGrid:
    """Shortest uniform grid whose truncated weight tail is below tail_eps."""
    factor = problem.weight.max_beta_abs * _data_norm(problem)
    steps = problem.weight.alpha.steps_for_tail(config.tau, factor, config.tail_eps)
    if steps > STEP_LIMIT:
        raise ValueError(
            f"horizon needs {steps} backward Euler steps at tau={config.tau}; "
            f"raise tau or the tail tolerance"
        )
    return TimeGrid(tau=config.tau, steps=steps)


class _PhiEvaluator:
    """Caches everything ubar-independent across repeated Phi evaluations."""

    def __init__(self, problem: ProblemSpec, config: SolverConfig):
        self.problem = problem
        self.config = config
        self.r0 = compute_R0(problem)
        self.time_grid = _horizon(problem, config)
        self.weights = problem.weight.alpha.cell_masses(
            config.tau, self.time_grid.steps
        )
        self.beta = problem.weight.beta_values(problem.grid)
        if problem.forcing.is_zero:
            self.g = self.gamma = None
        else:
            self.g = problem.forcing.g_values(problem.grid)
            self.gamma = np.asarray(
                problem.forcing.gamma(self.time_grid.times()), dtype=float
            )
        self._radius_slack = 1e-9 * (1.0 + self.r0)

    def __call__(self, ubar: np.ndarray) -> np.ndarray:
        sup = float(np.max(np.abs(ubar))) if ubar.size else 0.0
        if sup > self.r0 + self._radius_slack:
            warnings.warn(
                f"ubar sup norm {sup:.6g} exceeds the invariant-ball radius "
                f"R0 = {self.r0:.6g}",
                RuntimeWarning,
                stacklevel=3,
            )
        q = np.asarray(self.problem.potential(ubar), dtype=float)
        gen = build_generator(self.problem.operator, q)
        stepper = gen.stepper(self.config.tau)
        _, acc, _ = stepper.run(
            self.problem.u0.values,
            g=self.g,
            gamma=self.gamma,
            steps=self.time_grid.steps,
            weights=self.weights,
        )
        return self.beta * acc


def evaluate_phi(ubar: GridFunction, problem: ProblemSpec,
                 config: SolverConfig) -> GridFunction:
    """One application of the fixed-point map Phi.

    Marches the mild solution under the frozen potential phi(ubar) over the
    truncated horizon and integrates it against the weight with the cell-mass
    quadrature.  Warns (does not fail) when ubar lies outside the R0 ball.
    """
    if ubar.grid != problem.grid:
        raise ValueError("ubar sampled on a different grid")
    phi = _PhiEvaluator(problem, config)
    return GridFunction(problem.grid, phi(ubar.values))


class _Anderson:
    """Least-squares residual mixing over a sliding window."""

    def __init__(self, depth: int = ANDERSON_DEPTH,
                 cond_limit: float = ANDERSON_COND_LIMIT):
        self.depth = depth
        self.cond_limit = cond_limit
        self._x: deque[np.ndarray] = deque(maxlen=depth + 1)
        self._g: deque[np.ndarray] = deque(maxlen=depth + 1)

    def step(self, x: np.ndarray, gx: np.ndarray) -> np.ndarray:
        """Mixed update target; falls back to plain gx when ill-conditioned."""
        self._x.append(x.copy())
        self._g.append(gx.copy())
        m = len(self._x) - 1
        if m < 1:
            return gx
        res = [g - xx for xx, g in zip(self._x, self._g)]
        d_res = np.column_stack([res[i + 1] - res[i] for i in range(m)])
        d_g = np.column_stack(
            [self._g[i + 1] - self._g[i] for i in range(m)]
        )
        cond = np.linalg.cond(d_res)
        if not np.isfinite(cond) or cond > self.cond_limit:
            return gx
        gamma, *_ = np.linalg.lstsq(d_res, res[-1], rcond=None)
        return gx - d_g @ gamma


def solve(problem: ProblemSpec, config: SolverConfig | None = None,
          initial_guess: GridFunction | None = None) -> FixedPointReport:
    """Damped fixed-point iteration for ubar = Phi(ubar).

    Starts from zero (or ``initial_guess``), mixes through Anderson
    acceleration when configured, halves the damping factor whenever the
    sup-norm residual increases (floor 1/16), and stops on the tolerance, on
    ``max_iter``, or once the residual has refused to decrease at the damping
    floor for five consecutive iterations ("stalled").  The report embeds the
    reconstructed trajectory and its bound check.
    """
    config = config or SolverConfig()
    phi = _PhiEvaluator(problem, config)

    if initial_guess is None:
        ubar = np.zeros(problem.grid.node_count)
    else:
        if initial_guess.grid != problem.grid:
            raise ValueError("initial guess sampled on a different grid")
        ubar = initial_guess.values.copy()

    anderson = _Anderson() if config.accelerator == "anderson" else None
    omega = config.damping
    prev_res = math.inf
    residuals: list[float] = []
    omegas: list[float] = []
    radius_max = float(np.max(np.abs(ubar))) if ubar.size else 0.0
    stall = 0
    verdict = "max_iter"

    for _ in range(config.max_iter):
        image = phi(ubar)
        target = anderson.step(ubar, image) if anderson is not None else image
        while True:
            candidate = (1.0 - omega) * ubar + omega * target
            res = float(np.max(np.abs(candidate - ubar)))
            if res <= prev_res or omega <= DAMPING_FLOOR * (1.0 + 1e-12):
                break
            omega = max(DAMPING_FLOOR, 0.5 * omega)
        residuals.append(res)
        omegas.append(omega)
        ubar = candidate
        radius_max = max(radius_max, float(np.max(np.abs(ubar))))
        if res <= config.tolerance:
            verdict = "converged"
            break
        if res > prev_res:
            stall += 1
            if stall >= STALL_PATIENCE:
                verdict = "stalled"
                break
        else:
            stall = 0
        prev_res = res

    report = FixedPointReport(
        verdict=verdict,
        iterations=len(residuals),
        residuals=np.asarray(residuals),
        omegas=np.asarray(omegas),
        ubar=GridFunction(problem.grid, ubar),
        r0=phi.r0,
        radius_max=radius_max,
        time_grid=phi.time_grid,
        tolerance=config.tolerance,
        tail_tolerance=config.tail_eps,
        accelerator=config.accelerator,
    )
    trajectory, bound_check = reconstruct_and_check(report, problem, config)
    report.trajectory = trajectory
    report.bound_check = bound_check
    return report


def reconstruct_and_check(report: FixedPointReport, problem: ProblemSpec,
                          config: SolverConfig | None = None
                          ) -> tuple[Trajectory, BoundCheck]:
    """Re-march the state under phi(ubar*) and check the a priori sup bound.

    The backward Euler march satisfies
    ||u_k||_sup <= ||u0||_sup + sum_{j<=k} tau ||f(t_j)||_sup exactly, and the
    right-endpoint sum never exceeds the closed-form integral for the
    (non-increasing) forcing families, so each node is checked against
    ||u0||_sup + integral_0^{t_k} ||f||_sup + 1e-12 * data scale.
    """
    config = config or SolverConfig()
    q = np.asarray(problem.potential(report.ubar.values), dtype=float)
    gen = build_generator(problem.operator, q)
    trajectory = mild_solution(gen, problem.u0, problem.forcing, report.time_grid)

    times = report.time_grid.times()
    sup_norms = trajectory.sup_norms()
    u0_sup = float(np.max(np.abs(problem.u0.values)))
    bounds = u0_sup + np.asarray(
        [problem.forcing.partial_l1_linf(t) for t in times]
    )
    data = _data_norm(problem)
    slack = 1e-12 * data
    max_excess = float(np.max(sup_norms - bounds))
    passed = max_excess <= slack

    radius_value = float(np.max(np.abs(report.ubar.values)))
    radius_limit = report.r0 + report.tail_tolerance + 1e-10 * max(1.0, report.r0)
    bound_check = BoundCheck(
        times=times,
        sup_norms=sup_norms,
        bounds=bounds,
        slack=slack,
        max_excess=max_excess,
        passed=passed,
        radius_value=radius_value,
        radius_limit=radius_limit,
        radius_passed=radius_value <= radius_limit,
    )
    return trajectory, bound_check
