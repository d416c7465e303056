"""Numerical probes of the semigroup estimates behind the fixed-point argument.

Each probe measures norms of the actual discrete objects (no modeled
constants): contraction of e^{tA} on Lq, the L2 -> H2theta smoothing rate, the
Lp -> sup difference bound between two frozen potentials, the short-time
increment bound, and the low-rank (precompact) structure of the image of Phi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .fixedpoint import SolverConfig, _PhiEvaluator, compute_R0
from .grid import GridFunction, SpatialGrid, operator_norm_p_to_inf
from .problem import ProblemSpec
from .semigroup import Generator, build_generator, semigroup_difference

__all__ = [
    "EstimateProbeConfig",
    "EstimateFit",
    "CompactnessReport",
    "measure_contraction",
    "measure_smoothing",
    "measure_difference_bound",
    "measure_increment_bound",
    "probe_image_compactness",
    "smooth_ball_fields",
]

CONTRACTION_SLACK = 1e-10
SMOOTHING_SLOPE_TOL = 0.1
INCREMENT_H_SLOPE_TOL = 0.05
INCREMENT_DELTA_SLOPE_TOL = 0.1
DIFFERENCE_STABILITY_TOL = 0.25
SIGMA_RATIO_LIMIT = 0.05


@dataclass(frozen=True)
class EstimateProbeConfig:
    """Probe grids and ensemble controls for the verification suite.

    ``thetas`` are the smoothing exponents swept by the verify command; the
    first entry is the primary theta used by the difference and increment
    probes.  All grids are log-spaced.
    """

    thetas: tuple[float, ...] = (0.5, 0.75)
    time_min: float = 1e-4
    time_max: float = 1e-2
    time_count: int = 12
    delta_min: float = 3e-4
    delta_max: float = 3e-2
    delta_count: int = 8
    h_min: float = 3e-7
    h_max: float = 3e-5
    h_count: int = 6
    lambda_grid: tuple[float, ...] = (1e-1, 1e-2, 1e-3)
    ensemble_size: int = 50
    seed: int = 1234

    def __post_init__(self):
        for name in ("time", "delta", "h"):
            lo = getattr(self, f"{name}_min")
            hi = getattr(self, f"{name}_max")
            count = getattr(self, f"{name}_count")
            if not (0 < lo < hi) or count < 5:
                raise ValueError(
                    f"{name} grid needs 0 < min < max and count >= 5, "
                    f"got ({lo}, {hi}, {count})"
                )
        if not self.thetas or any(not 0.0 < t < 1.0 for t in self.thetas):
            raise ValueError(f"thetas must lie in (0, 1), got {self.thetas!r}")
        if self.ensemble_size < 10:
            raise ValueError(f"ensemble_size must be >= 10, got {self.ensemble_size}")

    @property
    def theta(self) -> float:
        return self.thetas[0]

    def times(self) -> np.ndarray:
        return np.geomspace(self.time_min, self.time_max, self.time_count)

    def deltas(self) -> np.ndarray:
        return np.geomspace(self.delta_min, self.delta_max, self.delta_count)

    def hs(self) -> np.ndarray:
        return np.geomspace(self.h_min, self.h_max, self.h_count)

    def validate_for(self, problem: ProblemSpec):
        """Check theta against the admissible window (dim/(2p), 1)."""
        lo = problem.grid.dimension / (2.0 * problem.p)
        for theta in self.thetas:
            if not lo < theta < 1.0:
                raise ValueError(
                    f"theta={theta} outside the admissible window ({lo:g}, 1) "
                    f"for dimension {problem.grid.dimension} and p={problem.p}"
                )


@dataclass(eq=False)
class EstimateFit:
    """Raw probe table plus an optional log-log slope fit."""

    name: str
    probe: np.ndarray
    measured: np.ndarray
    passed: bool
    slope: float | None = None
    intercept: float | None = None
    target_slope: float | None = None
    slope_tol: float | None = None
    fit_residual: float | None = None
    info: dict = field(default_factory=dict)

    @property
    def constant(self) -> float | None:
        """Multiplicative constant exp(intercept) of the fitted power law."""
        return None if self.intercept is None else float(math.exp(self.intercept))


def _loglog_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares slope/intercept of log y against log x, with RMS residual."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 5:
        raise ValueError(f"slope fits need at least 5 points, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs strictly positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return float(slope), float(intercept), resid


def measure_contraction(gen: Generator, times, q: float) -> EstimateFit:
    """Measured ||e^{tA}||_{Lq -> Lq} per probe time; passes iff all <= 1 + 1e-10.

    Supports q = 2 (spectral norm; the uniform quadrature weights cancel) and
    q = inf (maximum absolute row sum).
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("probe times must be non-negative")
    q = float(q)
    norms = np.empty(times.size)
    for i, t in enumerate(times):
        e = gen.dense_semigroup(t)
        if q == 2.0:
            norms[i] = np.linalg.norm(e, 2)
        elif math.isinf(q):
            norms[i] = np.max(np.sum(np.abs(e), axis=1))
        else:
            raise ValueError(f"contraction probe supports q in {{2, inf}}, got {q}")
    passed = bool(np.all(norms <= 1.0 + CONTRACTION_SLACK))
    return EstimateFit(
        name="contraction",
        probe=times,
        measured=norms,
        passed=passed,
        info={"q": q, "max_norm": float(np.max(norms))},
    )


def default_smoothing_times(gen: Generator, theta: float,
                            count: int = 12) -> np.ndarray:
    """Probe window where the discrete spectrum can resolve the t^-theta law.

    The sup over modes of (1+|l|)^theta e^{tl} is attained near |l| ~ theta/t,
    so t must stay above 2 theta / |l_max| and below 0.1/|s0|.
    """
    lam, _ = gen.eigendecomposition()
    t_min = 2.0 * theta / abs(lam[0])
    t_max = 0.1 / abs(gen.spectral_bound)
    if t_max <= t_min:
        raise ValueError("spectrum too narrow to resolve the smoothing law; refine the grid")
    return np.geomspace(t_min, t_max, count)


def measure_smoothing(gen: Generator, theta: float,
                      times=None) -> EstimateFit:
    """Fit of log ||e^{tA}||_{L2 -> H2theta proxy} against log t; target slope -theta.

    The proxy norm weights eigencomponents of the bare diffusion operator by
    (1+|l_k|)^theta, so the measured operator norm is the spectral norm of
    (I+|Lambda|)^theta V^T e^{tA}.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if times is None:
        times = default_smoothing_times(gen, theta)
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0):
        raise ValueError("smoothing probe times must be positive")

    lam_l, vec_l = gen.operator.eigendecomposition()
    scale = (1.0 + np.abs(lam_l)) ** theta
    norms = np.empty(times.size)
    for i, t in enumerate(times):
        e = gen.dense_semigroup(t)
        norms[i] = np.linalg.norm(scale[:, None] * (vec_l.T @ e), 2)
    slope, intercept, resid = _loglog_fit(times, norms)
    passed = abs(slope + theta) <= SMOOTHING_SLOPE_TOL
    return EstimateFit(
        name="smoothing",
        probe=times,
        measured=norms,
        passed=passed,
        slope=slope,
        intercept=intercept,
        target_slope=-theta,
        slope_tol=SMOOTHING_SLOPE_TOL,
        fit_residual=resid,
        info={"theta": theta},
    )


def measure_difference_bound(problem: ProblemSpec, ubar: GridFunction,
                             vbar: GridFunction, times,
                             theta: float = 0.5) -> EstimateFit:
    """Ratios of ||e^{tA(u)} - e^{tA(v)}||_{Lp -> sup} to e^{-nu t} t^{1-theta} dphi.

    dphi = sup |phi(ubar) - phi(vbar)| and nu = |s0| of the bare diffusion
    operator.  Passes iff the sup ratio is finite; stability under grid
    refinement is the caller's cross-grid comparison.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0):
        raise ValueError("difference probe times must be positive")
    qu = np.asarray(problem.potential(ubar.values), dtype=float)
    qv = np.asarray(problem.potential(vbar.values), dtype=float)
    gen_u = build_generator(problem.operator, qu)
    gen_v = build_generator(problem.operator, qv)
    delta_phi = float(np.max(np.abs(qu - qv)))
    nu = abs(problem.operator.spectral_bound)

    measured = np.array(
        [semigroup_difference(gen_u, gen_v, t, problem.p) for t in times]
    )
    if delta_phi == 0.0:
        ratios = np.zeros_like(measured)
    else:
        ratios = measured / (np.exp(-nu * times) * times ** (1.0 - theta) * delta_phi)
    sup_ratio = float(np.max(ratios))
    return EstimateFit(
        name="difference_bound",
        probe=times,
        measured=measured,
        passed=bool(np.isfinite(sup_ratio)),
        info={
            "theta": theta,
            "nu": nu,
            "delta_phi": delta_phi,
            "ratios": ratios,
            "sup_ratio": sup_ratio,
        },
    )


def measure_increment_bound(gen: Generator, delta_grid, h_grid, theta: float,
                            p: float) -> tuple[EstimateFit, EstimateFit]:
    """Short-time increment ||e^{(delta+h)A} - e^{delta A}||_{Lp -> sup}.

    Returns two fits: the h sweep at the median delta (target slope 1, tol
    0.05) and the delta sweep at the smallest h, whose slope must not fall
    below -(1+theta) - 0.1 (the bound allows faster decay, never slower
    blowup).
    """
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    delta_grid = np.sort(np.asarray(delta_grid, dtype=float))
    h_grid = np.sort(np.asarray(h_grid, dtype=float))
    if np.any(delta_grid <= 0) or np.any(h_grid < 0):
        raise ValueError("delta grid must be positive and h grid non-negative")
    if np.max(h_grid) > np.min(delta_grid):
        warnings.warn(
            f"largest h {np.max(h_grid):g} exceeds smallest delta "
            f"{np.min(delta_grid):g}: outside the increment regime",
            RuntimeWarning,
            stacklevel=2,
        )

    lam, vec = gen.eigendecomposition()
    grid = gen.grid

    def increment(delta: float, h: float) -> float:
        diff = (vec * (np.exp((delta + h) * lam) - np.exp(delta * lam))) @ vec.T
        return operator_norm_p_to_inf(diff, grid, p)

    delta_mid = float(delta_grid[delta_grid.size // 2])
    h_pos = h_grid[h_grid > 0]
    h_measured = np.array([increment(delta_mid, h) for h in h_pos])
    h_slope, h_int, h_resid = _loglog_fit(h_pos, h_measured)
    h_fit = EstimateFit(
        name="increment_h",
        probe=h_pos,
        measured=h_measured,
        passed=abs(h_slope - 1.0) <= INCREMENT_H_SLOPE_TOL,
        slope=h_slope,
        intercept=h_int,
        target_slope=1.0,
        slope_tol=INCREMENT_H_SLOPE_TOL,
        fit_residual=h_resid,
        info={"theta": theta, "delta": delta_mid, "p": p},
    )

    h_small = float(h_pos[0])
    d_measured = np.array([increment(d, h_small) for d in delta_grid])
    d_slope, d_int, d_resid = _loglog_fit(delta_grid, d_measured)
    floor = -(1.0 + theta) - INCREMENT_DELTA_SLOPE_TOL
    d_fit = EstimateFit(
        name="increment_delta",
        probe=delta_grid,
        measured=d_measured,
        passed=d_slope >= floor,
        slope=d_slope,
        intercept=d_int,
        target_slope=-(1.0 + theta),
        slope_tol=INCREMENT_DELTA_SLOPE_TOL,
        fit_residual=d_resid,
        info={"theta": theta, "h": h_small, "p": p, "slope_floor": floor},
    )
    return h_fit, d_fit


@dataclass(eq=False)
class CompactnessReport:
    """Normalized singular-value decay of a Phi image ensemble."""

    singular_values: np.ndarray
    sigma_ratio: float
    passed: bool
    trivially_compact: bool
    r0: float
    ensemble_size: int
    seed: int
    shift_decay: dict = field(default_factory=dict)


def probe_image_compactness(problem: ProblemSpec,
                            config: SolverConfig | None = None,
                            ensemble_size: int = 50, seed: int = 0,
                            lambda_grid=()) -> CompactnessReport:
    """SVD decay of [Phi(u_1), ..., Phi(u_m)] for i.i.d. uniform ball draws.

    Passes iff sigma_10/sigma_1 <= 0.05; a zero ensemble (for instance a zero
    weight or zero data) is trivially compact.  When ``lambda_grid`` is given,
    the report also carries the informational vanishing-shift table
    max_j ||e^{lambda A(u_j)} Phi(u_j) - Phi(u_j)||_sup.
    """
    if ensemble_size < 10:
        raise ValueError(f"need at least 10 draws, got {ensemble_size}")
    config = config or SolverConfig()
    phi = _PhiEvaluator(problem, config)
    r0 = phi.r0
    rng = np.random.default_rng(seed)
    n = problem.grid.node_count
    draws = rng.uniform(-r0, r0, size=(ensemble_size, n))

    images = np.empty((n, ensemble_size))
    for j in range(ensemble_size):
        images[:, j] = phi(draws[j])

    sigma = np.linalg.svd(images, compute_uv=False)
    trivial = sigma[0] <= 1e-300
    ratio = 0.0 if trivial else float(sigma[min(9, sigma.size - 1)] / sigma[0])

    shift_decay: dict[float, float] = {}
    if lambda_grid and not trivial and n <= 4096:
        probe_count = min(ensemble_size, 8)
        for lam in lambda_grid:
            worst = 0.0
            for j in range(probe_count):
                q = np.asarray(problem.potential(draws[j]), dtype=float)
                gen = build_generator(problem.operator, q)
                w, v = gen.eigendecomposition()
                img = images[:, j]
                shifted = (v * np.exp(lam * w)) @ (v.T @ img)
                worst = max(worst, float(np.max(np.abs(shifted - img))))
            shift_decay[float(lam)] = worst

    return CompactnessReport(
        singular_values=sigma,
        sigma_ratio=ratio,
        passed=bool(trivial or ratio <= SIGMA_RATIO_LIMIT),
        trivially_compact=bool(trivial),
        r0=r0,
        ensemble_size=ensemble_size,
        seed=seed,
        shift_decay=shift_decay,
    )


def smooth_ball_fields(grid: SpatialGrid, r0: float, seed: int,
                       count: int = 2, modes: int = 6,
                       fill: float = 0.9) -> list[GridFunction]:
    """Seeded smooth random fields with sup norm fill*r0, comparable across grids.

    Draws fixed Fourier-sine coefficients (independent of the grid) and samples
    the resulting continuum function on the given grid, so refinement studies
    see the same underlying field at every resolution.
    """
    rng = np.random.default_rng(seed)
    fields = []
    for _ in range(count):
        if grid.dimension == 1:
            coeff = rng.normal(size=modes)
        else:
            coeff = rng.normal(size=(modes, modes))
        values = np.zeros(grid.node_count)
        for idx, c in np.ndenumerate(coeff):
            term = np.full(grid.node_count, float(c))
            for axis, k in enumerate(idx):
                a, b = grid.endpoints[axis]
                term = term * np.sin(
                    (k + 1) * math.pi * (grid.nodes[:, axis] - a) / (b - a)
                )
            values += term
        sup = np.max(np.abs(values))
        if sup > 0 and r0 > 0:
            values *= fill * r0 / sup
        else:
            values[:] = 0.0
        fields.append(GridFunction(grid, values))
    return fields
