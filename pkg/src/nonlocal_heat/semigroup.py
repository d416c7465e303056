"""Frozen-coefficient generators A = L - diag(q) and their semigroups.

The backward Euler resolvent (I - tau A)^-1 of such a generator is entrywise
non-negative with row sums at most one, so the implicit march below is exactly
sup-norm contractive and positivity preserving, step by step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._march import Stepper
from .grid import (
    EIGEN_SIZE_LIMIT,
    GridFunction,
    SpatialGrid,
    SpatialOperator,
    operator_norm_p_to_inf,
)
from .problem import ForcingSpec

__all__ = [
    "Generator",
    "TimeGrid",
    "Trajectory",
    "build_generator",
    "apply_semigroup",
    "mild_solution",
    "semigroup_difference",
]


class Generator:
    """Diffusion operator shifted by a non-negative potential: A = L - diag(q)."""

    def __init__(self, operator: SpatialOperator, q: np.ndarray):
        self.operator = operator
        self.grid = operator.grid
        self.q = np.asarray(q, dtype=float)
        self.matrix = sp.csr_matrix(
            operator.matrix - sp.diags(self.q, 0, format="csr")
        )
        self._eig: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def node_count(self) -> int:
        return self.grid.node_count

    def eigendecomposition(self) -> tuple[np.ndarray, np.ndarray]:
        if self._eig is None:
            n = self.node_count
            if n > EIGEN_SIZE_LIMIT:
                raise ValueError(
                    f"eigen_exact size limit: {n} unknowns exceeds {EIGEN_SIZE_LIMIT}"
                )
            w, v = np.linalg.eigh(self.matrix.toarray())
            self._eig = (w, v)
        return self._eig

    @property
    def spectral_bound(self) -> float:
        """Largest eigenvalue; at most the bound of the bare diffusion operator."""
        if self.node_count <= EIGEN_SIZE_LIMIT:
            return float(self.eigendecomposition()[0][-1])
        return self.operator.spectral_bound  # adding -diag(q) only shifts down

    def dense_semigroup(self, t: float) -> np.ndarray:
        """Dense e^{tA} through the eigendecomposition (size-guarded)."""
        if t < 0:
            raise ValueError(f"time must be non-negative, got {t}")
        w, v = self.eigendecomposition()
        return (v * np.exp(t * w)) @ v.T

    def stepper(self, tau: float) -> Stepper:
        return Stepper(self.matrix, tau, tridiagonal=self.grid.dimension == 1)


def build_generator(operator: SpatialOperator, q) -> Generator:
    """Attach potential samples q = phi(ubar) >= 0 to a diffusion operator."""
    if isinstance(q, GridFunction):
        q = q.values
    q = np.asarray(q, dtype=float)
    if q.shape != (operator.grid.node_count,):
        raise ValueError(
            f"potential samples have shape {q.shape}, expected "
            f"({operator.grid.node_count},)"
        )
    if not np.all(np.isfinite(q)):
        raise ValueError("potential samples must be finite")
    if np.any(q < 0):
        i = int(np.argmin(q))
        raise ValueError(f"potential samples must be non-negative, got {q[i]:g}")
    return Generator(operator, q)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time nodes t_k = k tau, k = 0..steps."""

    tau: float
    steps: int

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")

    @classmethod
    def from_horizon(cls, tau: float, t_max: float) -> "TimeGrid":
        """Build from a horizon that must be an integer multiple of tau."""
        steps = round(t_max / tau)
        if steps < 1 or abs(steps * tau - t_max) > 1e-12 * max(1.0, abs(t_max)):
            raise ValueError(f"t_max={t_max} is not a positive multiple of tau={tau}")
        return cls(tau=tau, steps=steps)

    @property
    def t_max(self) -> float:
        return self.steps * self.tau

    def times(self) -> np.ndarray:
        return self.tau * np.arange(self.steps + 1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """State values on the nodes of a time grid; row k is u(t_k)."""

    grid: SpatialGrid
    time_grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        expect = (self.time_grid.steps + 1, self.grid.node_count)
        if self.values.shape != expect:
            raise ValueError(f"trajectory shape {self.values.shape}, expected {expect}")

    def sup_norms(self) -> np.ndarray:
        """Sup norm per time node."""
        return np.max(np.abs(self.values), axis=1)


def apply_semigroup(gen: Generator, t: float, v, method: str = "implicit_march",
                    tau: float | None = None):
    """Apply e^{tA} to a state vector.

    ``implicit_march`` runs ceil(t / tau) backward Euler steps, the last one
    shortened to land exactly on ``t``.  ``eigen_exact`` evaluates
    V e^{t Lambda} V^T v and is refused above the dense-eigensolver limit.
    Returns the same kind of object it was given (array or GridFunction).
    """
    wrap = isinstance(v, GridFunction)
    vec = v.values if wrap else np.asarray(v, dtype=float)
    if vec.shape != (gen.node_count,):
        raise ValueError(f"state has shape {vec.shape}, expected ({gen.node_count},)")
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")

    if t == 0:
        out = vec.copy()
    elif method == "eigen_exact":
        w, vecs = gen.eigendecomposition()
        out = (vecs * np.exp(t * w)) @ (vecs.T @ vec)
    elif method == "implicit_march":
        if tau is None or tau <= 0:
            raise ValueError("implicit_march needs a positive tau")
        stepper = gen.stepper(tau)
        k = math.ceil(t / tau - 1e-12)
        last = t - (k - 1) * tau
        out = vec
        if k > 1:
            out, _, _ = stepper.run(out, steps=k - 1)
        out = stepper.single_step(out, last)
    else:
        raise ValueError(f"unknown method {method!r}")

    return GridFunction(v.grid, out) if wrap else out


def mild_solution(gen: Generator, u0: GridFunction, forcing: ForcingSpec | None,
                  time_grid: TimeGrid) -> Trajectory:
    """March u_{k+1} = (I - tau A)^-1 (u_k + tau f(t_{k+1})) over the grid."""
    if u0.grid != gen.grid:
        raise ValueError("initial datum sampled on a different grid")
    stepper = gen.stepper(time_grid.tau)
    g = gamma = None
    if forcing is not None and not forcing.is_zero:
        g = forcing.g_values(gen.grid)
        gamma = np.asarray(forcing.gamma(time_grid.times()), dtype=float)
    _, _, traj = stepper.run(u0.values, g=g, gamma=gamma,
                             steps=time_grid.steps, collect=True)
    return Trajectory(grid=gen.grid, time_grid=time_grid, values=traj)


def semigroup_difference(gen1: Generator, gen2: Generator, t: float,
                         p: float) -> float:
    """Operator norm ||e^{tA1} - e^{tA2}|| from weighted Lp to sup norm."""
    if gen1.grid != gen2.grid:
        raise ValueError("generators live on different grids")
    diff = gen1.dense_semigroup(t) - gen2.dense_semigroup(t)
    return operator_norm_p_to_inf(diff, gen1.grid, p)
