"""Problem data: potential, weight, and forcing families, and the problem record.

The weight and forcing are separable, ``a(t, x) = alpha(t) beta(x)`` and
``f(t, x) = gamma(t) g(x)``, with the time profiles drawn from closed-form
families so that masses, tails, and partial integrals are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridFunction, SpatialGrid, SpatialOperator, assemble_diffusion

__all__ = [
    "PotentialSpec",
    "TimeProfile",
    "WeightSpec",
    "ForcingSpec",
    "ProblemSpec",
    "sine_mode",
    "gaussian_bump",
]


@dataclass(frozen=True)
class PotentialSpec:
    """Non-negative reaction potential phi applied to the time-averaged state.

    Kinds: ``power`` |r|^exponent, ``quadratic`` coefficient*r^2, ``sigmoid``
    coefficient*r^2/(1+r^2), ``constant`` coefficient.  ``scale`` multiplies
    any kind (hook for parameter sweeps).
    """

    kind: str
    exponent: float = 2.0
    coefficient: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("power", "quadratic", "sigmoid", "constant"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "power" and self.exponent <= 0:
            raise ValueError(f"power potential needs exponent > 0, got {self.exponent}")
        if self.coefficient < 0:
            raise ValueError(f"potential coefficient must be >= 0, got {self.coefficient}")
        if self.scale < 0:
            raise ValueError(f"potential scale must be >= 0, got {self.scale}")

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind == "power":
            out = np.abs(r) ** self.exponent
        elif self.kind == "quadratic":
            out = self.coefficient * r * r
        elif self.kind == "sigmoid":
            out = self.coefficient * r * r / (1.0 + r * r)
        else:
            out = np.full_like(r, self.coefficient)
        return self.scale * out

    def rescaled(self, factor: float) -> "PotentialSpec":
        return PotentialSpec(self.kind, self.exponent, self.coefficient,
                             self.scale * factor)


@dataclass(frozen=True)
class TimeProfile:
    """Scalar time profile on [0, inf) with closed-form integrals.

    Kinds:

    * ``exponential``: density ``scale * rate * exp(-rate t)`` (total mass
      ``scale``);
    * ``indicator``: ``height`` on [0, t_end], zero after;
    * ``tabulated``: piecewise linear through (times, values) with
      ``times[0] == 0`` and ``values[-1] == 0``, zero after the last knot;
    * ``zero``.
    """

    kind: str
    scale: float = 1.0
    rate: float = 1.0
    height: float = 1.0
    t_end: float = 1.0
    times: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "exponential":
            if not (self.rate > 0 and math.isfinite(self.rate)):
                raise ValueError(f"exponential profile needs rate > 0, got {self.rate}")
            if not math.isfinite(self.scale):
                raise ValueError("exponential profile scale must be finite")
        elif self.kind == "indicator":
            if not (self.t_end > 0 and math.isfinite(self.t_end)):
                raise ValueError(f"indicator profile needs t_end > 0, got {self.t_end}")
            if not math.isfinite(self.height):
                raise ValueError("indicator profile height must be finite")
        elif self.kind == "tabulated":
            t = np.asarray(self.times, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if t.size < 2 or t.size != v.size:
                raise ValueError("tabulated profile needs matching times/values, >= 2 knots")
            if t[0] != 0.0 or np.any(np.diff(t) <= 0):
                raise ValueError("tabulated times must start at 0 and strictly increase")
            if not np.all(np.isfinite(v)):
                raise ValueError("tabulated values must be finite")
            if v[-1] != 0.0:
                raise ValueError("tabulated profile must end at zero (zero tail)")
            object.__setattr__(self, "times", tuple(float(x) for x in t))
            object.__setattr__(self, "values", tuple(float(x) for x in v))
        elif self.kind != "zero":
            raise ValueError(f"unknown time profile kind {self.kind!r}")

    # -- pointwise evaluation -------------------------------------------------

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "exponential":
            return self.scale * self.rate * np.exp(-self.rate * t)
        if self.kind == "indicator":
            return np.where(t <= self.t_end, self.height, 0.0) * (t >= 0)
        if self.kind == "tabulated":
            return np.interp(t, self.times, self.values, left=0.0, right=0.0)
        return np.zeros_like(t)

    @property
    def support_end(self) -> float:
        """Right end of the support (inf for the exponential family)."""
        if self.kind == "exponential":
            return math.inf if self.scale != 0.0 else 0.0
        if self.kind == "indicator":
            return self.t_end if self.height != 0.0 else 0.0
        if self.kind == "tabulated":
            return self.times[-1]
        return 0.0

    # -- closed-form integrals ------------------------------------------------

    @property
    def mass_abs(self) -> float:
        """Integral of |profile| over (0, inf)."""
        if self.kind == "exponential":
            return abs(self.scale)
        if self.kind == "indicator":
            return abs(self.height) * self.t_end
        if self.kind == "tabulated":
            return _pl_abs_integral(self.times, self.values, 0.0, self.times[-1])
        return 0.0

    @property
    def sup_abs(self) -> float:
        if self.kind == "exponential":
            return abs(self.scale) * self.rate
        if self.kind == "indicator":
            return abs(self.height)
        if self.kind == "tabulated":
            return float(np.max(np.abs(self.values)))
        return 0.0

    def partial_abs(self, t: float) -> float:
        """Integral of |profile| over (0, t)."""
        t = max(0.0, float(t))
        if self.kind == "exponential":
            return abs(self.scale) * (1.0 - math.exp(-self.rate * t))
        if self.kind == "indicator":
            return abs(self.height) * min(t, self.t_end)
        if self.kind == "tabulated":
            return _pl_abs_integral(self.times, self.values, 0.0, min(t, self.times[-1]))
        return 0.0

    def tail_abs(self, t: float) -> float:
        """Integral of |profile| over (t, inf)."""
        return max(0.0, self.mass_abs - self.partial_abs(t))

    # -- quadrature paired with the backward Euler march ----------------------

    def cell_masses(self, tau: float, steps: int) -> np.ndarray:
        """Signed quadrature weights w_k for sum_k w_k u(t_k), t_k = k tau.

        Each node owns a cell of [0, steps*tau] (half cells at the ends) and
        w_k is the exact mass of the profile over that cell, except that the
        exponential family is discretized geometrically,
        ``w_k = scale rate tau (1 - rate tau)^(k-1)`` (for rate*tau < 1):
        paired with the backward Euler resolvent R = (I - tau A)^-1 this turns
        sum_k w_k R^k into an exact geometric series equal to
        ``scale rate (rate I - A)^-1``, the resolvent the continuum integral
        produces, and sum_k |w_k| <= mass_abs always, so the discrete map
        inherits the continuous bounds with no quadrature overshoot.  For
        rate*tau >= 1 (decay below the step resolution) the positive variant
        ``scale ((1+rate tau)^-(k-1) - (1+rate tau)^-k)`` is used instead.
        """
        if tau <= 0 or steps < 1:
            raise ValueError("cell_masses needs tau > 0 and steps >= 1")
        w = np.zeros(steps + 1)
        if self.kind == "zero":
            return w
        if self.kind == "exponential":
            lt = self.rate * tau
            k = np.arange(1, steps + 1, dtype=float)
            if lt < 1.0:
                w[1:] = self.scale * lt * (1.0 - lt) ** (k - 1.0)
            else:
                r = 1.0 / (1.0 + lt)
                w[1:] = self.scale * (r ** (k - 1.0) - r**k)
            return w
        edges = np.minimum((np.arange(steps + 1) + 0.5) * tau, steps * tau)
        lo = np.concatenate([[0.0], edges[:-1]])
        if self.kind == "indicator":
            overlap = np.clip(np.minimum(edges, self.t_end) - lo, 0.0, None)
            return self.height * overlap
        for k in range(steps + 1):
            w[k] = _pl_integral(self.times, self.values, lo[k], edges[k])
        return w

    def steps_for_tail(self, tau: float, factor: float, eps: float) -> int:
        """Fewest march steps K with (quadrature tail beyond K tau) * factor <= eps."""
        if tau <= 0:
            raise ValueError("steps_for_tail needs tau > 0")
        if self.kind == "exponential" and self.scale != 0.0:
            budget = abs(self.scale) * factor
            if budget <= eps:
                return 1
            lt = self.rate * tau
            # geometric tail: budget * q^K <= eps with q the per-step decay
            q = 1.0 - lt if lt < 1.0 else 1.0 / (1.0 + lt)
            if q <= 0.0:
                return 1
            k = math.log(budget / eps) / (-math.log(q))
            return max(1, math.ceil(k - 1e-12))
        end = self.support_end
        if end == 0.0:
            return 1
        return max(1, math.ceil(end / tau - 1e-12))


_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def _pl_breakpoints(times, values, lo, hi):
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    pts = [lo, hi]
    pts.extend(t[(t > lo) & (t < hi)])
    # sign crossings make |profile| piecewise linear again
    for i in range(t.size - 1):
        va, vb = v[i], v[i + 1]
        if va * vb < 0:
            cross = t[i] + (t[i + 1] - t[i]) * va / (va - vb)
            if lo < cross < hi:
                pts.append(cross)
    return np.unique(np.asarray(pts))


def _pl_integral(times, values, lo, hi) -> float:
    if hi <= lo:
        return 0.0
    pts = _pl_breakpoints(times, values, lo, hi)
    vals = np.interp(pts, times, values, left=0.0, right=0.0)
    return float(_trapezoid(vals, pts))


def _pl_abs_integral(times, values, lo, hi) -> float:
    if hi <= lo:
        return 0.0
    pts = _pl_breakpoints(times, values, lo, hi)
    vals = np.abs(np.interp(pts, times, values, left=0.0, right=0.0))
    return float(_trapezoid(vals, pts))


@dataclass(frozen=True)
class WeightSpec:
    """Separable averaging weight a(t, x) = alpha(t) beta(x)."""

    alpha: TimeProfile
    beta: GridFunction | float = 1.0

    def __post_init__(self):
        if self.alpha.kind == "zero":
            raise ValueError("weight alpha must be exponential, indicator, or tabulated")
        if np.isscalar(self.beta) and not math.isfinite(self.beta):
            raise ValueError("weight beta must be finite")

    @property
    def max_beta_abs(self) -> float:
        if isinstance(self.beta, GridFunction):
            v = self.beta.values
            return float(np.max(np.abs(v))) if v.size else 0.0
        return abs(float(self.beta))

    @property
    def l1_linf_norm(self) -> float:
        """Closed-form ||a||_{L1((0,inf), Lsup)} = mass(|alpha|) * max|beta|."""
        return self.alpha.mass_abs * self.max_beta_abs

    def tail_bound(self, t: float) -> float:
        """T -> integral_T^inf |alpha| * max|beta|, bounds the truncation error."""
        return self.alpha.tail_abs(t) * self.max_beta_abs

    def beta_values(self, grid: SpatialGrid) -> np.ndarray:
        if isinstance(self.beta, GridFunction):
            if self.beta.grid is not grid and self.beta.grid != grid:
                raise ValueError("weight beta sampled on a different grid")
            return self.beta.values
        return np.full(grid.node_count, float(self.beta))

    def rescaled(self, factor: float) -> "WeightSpec":
        a = self.alpha
        if a.kind == "exponential":
            a = TimeProfile("exponential", scale=a.scale * factor, rate=a.rate)
        elif a.kind == "indicator":
            a = TimeProfile("indicator", height=a.height * factor, t_end=a.t_end)
        else:
            a = TimeProfile("tabulated", times=a.times,
                            values=tuple(v * factor for v in a.values))
        return WeightSpec(a, self.beta)


@dataclass(frozen=True)
class ForcingSpec:
    """Separable forcing f(t, x) = gamma(t) g(x); gamma has finite mass."""

    gamma: TimeProfile = field(default_factory=lambda: TimeProfile("zero"))
    g: GridFunction | float = 1.0

    def __post_init__(self):
        if self.gamma.kind == "tabulated":
            raise ValueError("forcing gamma must be exponential, indicator, or zero")
        if np.isscalar(self.g) and not math.isfinite(self.g):
            raise ValueError("forcing g must be finite")

    @property
    def is_zero(self) -> bool:
        if self.gamma.kind == "zero":
            return True
        if isinstance(self.g, GridFunction):
            return not np.any(self.g.values)
        return float(self.g) == 0.0

    @property
    def max_g_abs(self) -> float:
        if isinstance(self.g, GridFunction):
            v = self.g.values
            return float(np.max(np.abs(v))) if v.size else 0.0
        return abs(float(self.g))

    @property
    def l1_linf_norm(self) -> float:
        return self.gamma.mass_abs * self.max_g_abs

    def partial_l1_linf(self, t: float) -> float:
        """integral_0^t ||f(s)||_sup ds, closed form."""
        return self.gamma.partial_abs(t) * self.max_g_abs

    def g_values(self, grid: SpatialGrid) -> np.ndarray:
        if isinstance(self.g, GridFunction):
            if self.g.grid is not grid and self.g.grid != grid:
                raise ValueError("forcing g sampled on a different grid")
            return self.g.values
        return np.full(grid.node_count, float(self.g))


@dataclass
class ProblemSpec:
    """Full problem record: geometry, coefficients, data, and the norm index p."""

    grid: SpatialGrid
    diffusion: object  # positive scalar or callable on (m, dim) points
    potential: PotentialSpec
    weight: WeightSpec
    forcing: ForcingSpec
    u0: GridFunction
    p: float = 2.0

    def __post_init__(self):
        if self.u0.grid is not self.grid and self.u0.grid != self.grid:
            raise ValueError("initial datum sampled on a different grid")
        if not self.p > max(1.0, self.grid.dimension / 2.0):
            raise ValueError(
                f"p must exceed max(1, dim/2) = {max(1.0, self.grid.dimension / 2.0)}, "
                f"got {self.p}"
            )
        self._operator: SpatialOperator | None = None

    @property
    def operator(self) -> SpatialOperator:
        """Assembled diffusion operator (built once, reused across evaluations)."""
        if self._operator is None:
            self._operator = assemble_diffusion(self.grid, self.diffusion)
        return self._operator


def sine_mode(grid: SpatialGrid, modes, amplitude: float = 1.0) -> GridFunction:
    """Product of Dirichlet sine modes, mode index per axis."""
    if np.isscalar(modes):
        modes = (int(modes),) * grid.dimension
    modes = tuple(int(m) for m in modes)
    if len(modes) != grid.dimension or any(m < 1 for m in modes):
        raise ValueError(f"need one positive mode index per axis, got {modes!r}")
    values = np.full(grid.node_count, float(amplitude))
    for axis, (k, (a, b)) in enumerate(zip(modes, grid.endpoints)):
        values = values * np.sin(k * math.pi * (grid.nodes[:, axis] - a) / (b - a))
    return GridFunction(grid, values)


def gaussian_bump(grid: SpatialGrid, center, width: float,
                  amplitude: float = 1.0) -> GridFunction:
    """Gaussian profile exp(-|x-c|^2 / (2 width^2)), not forced to zero on the boundary."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.shape != (grid.dimension,):
        raise ValueError(f"center {center!r} does not match dimension {grid.dimension}")
    if not width > 0:
        raise ValueError(f"width must be positive, got {width}")
    d2 = np.sum((grid.nodes - center) ** 2, axis=1)
    return GridFunction(grid, amplitude * np.exp(-d2 / (2.0 * width * width)))
