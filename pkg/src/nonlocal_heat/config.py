"""TOML run configuration: strict schema, defaults, and manifest round-trip.

Every key is validated against a closed per-section table; unknown sections or
keys are rejected with best-effort line numbers from the raw text.  Parsing
produces both the built objects and a fully resolved dictionary (defaults
filled in, overrides applied) that the manifest writer emits and that parses
back to an identical run.
"""

from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .estimates import EstimateProbeConfig
from .fixedpoint import SolverConfig
from .grid import GridFunction, SpatialGrid, build_grid
from .problem import (
    ForcingSpec,
    PotentialSpec,
    ProblemSpec,
    TimeProfile,
    WeightSpec,
    gaussian_bump,
    sine_mode,
)

__all__ = ["ConfigError", "RunConfig", "load_run_config", "build_problem",
           "write_manifest"]


class ConfigError(Exception):
    """Schema violation(s); one line-numbered diagnostic per message."""

    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("\n".join(self.messages))


_SECTIONS = ("domain", "diffusion", "potential", "weight", "forcing",
             "initial", "solver", "probes", "output")
_REQUIRED = ("domain", "potential", "weight", "initial")

_KEYS = {
    "domain": {"dimension", "endpoints", "n", "p"},
    "diffusion": {"kind", "value", "base", "slopes"},
    "potential": {"kind", "exponent", "coefficient", "scale"},
    "weight": {"kind", "scale", "rate", "height", "t_end", "times", "values",
               "beta", "beta_csv"},
    "forcing": {"kind", "amplitude", "rate", "height", "t_end", "g_kind",
                "g_value", "g_modes", "g_amplitude", "g_center", "g_width",
                "g_csv"},
    "initial": {"kind", "value", "modes", "amplitude", "center", "width",
                "path"},
    "solver": {"tolerance", "max_iter", "damping", "accelerator", "tau",
               "tail_tolerance"},
    "probes": {"thetas", "time_min", "time_max", "time_count", "delta_min",
               "delta_max", "delta_count", "h_min", "h_max", "h_count",
               "lambda_grid", "ensemble_size", "seed"},
    "output": {"time_stride", "probe_nodes"},
}


def _find_line(text: str, section: str, key: str | None = None) -> int:
    """Best-effort 1-based line of a section header or of a key inside it."""
    lines = text.splitlines()
    in_section = False
    for i, line in enumerate(lines, start=1):
        stripped = line.strip()
        if stripped.startswith("["):
            if key is None and stripped.startswith(f"[{section}]"):
                return i
            in_section = stripped.startswith(f"[{section}]")
        elif key is not None and in_section:
            if stripped.startswith(f"{key} ") or stripped.startswith(f"{key}="):
                return i
    return 0


class _Checker:
    """Accumulates diagnostics; validation never stops at the first problem."""

    def __init__(self, path: str, text: str, data: dict):
        self.path = path
        self.text = text
        self.data = data
        self.errors: list[str] = []

    def fail(self, section: str, message: str, key: str | None = None):
        line = _find_line(self.text, section, key)
        self.errors.append(f"{self.path}:{line}: [{section}] {message}")

    def section(self, name: str) -> dict:
        return self.data.get(name, {})

    def check_layout(self):
        for name in self.data:
            if name not in _SECTIONS:
                line = _find_line(self.text, name)
                self.errors.append(f"{self.path}:{line}: unknown section [{name}]")
        for name in _REQUIRED:
            if name not in self.data:
                self.errors.append(f"{self.path}:0: missing required section [{name}]")
        for name, table in self.data.items():
            if name not in _KEYS:
                continue
            if not isinstance(table, dict):
                self.fail(name, "must be a table")
                continue
            for key in table:
                if key not in _KEYS[name]:
                    self.fail(name, f"unknown key {key!r}", key)

    def value(self, section: str, key: str, types, default=None,
              required: bool = False, pred=None, describe: str = ""):
        table = self.section(section)
        if key not in table:
            if required:
                self.fail(section, f"missing required key {key!r}")
            return default
        val = table[key]
        if types is float and isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        if types is int and isinstance(val, bool):
            self.fail(section, f"{key} must be an integer", key)
            return default
        if not isinstance(val, types if isinstance(types, tuple) else (types,)):
            self.fail(section, f"{key} has wrong type {type(val).__name__}", key)
            return default
        if pred is not None and not pred(val):
            self.fail(section, f"{key}={val!r} invalid: {describe}", key)
            return default
        return val


def _read_field_csv(path: Path, grid: SpatialGrid) -> np.ndarray:
    """Single-column CSV of node values in grid enumeration order."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            rows.append(float(row[-1]))
    values = np.asarray(rows, dtype=float)
    if values.size != grid.node_count:
        raise ValueError(
            f"{path}: {values.size} values for a grid with {grid.node_count} nodes"
        )
    return values


def _build_grid_section(ck: _Checker, n_override=None) -> SpatialGrid | None:
    dim = ck.value("domain", "dimension", int, required=True,
                   pred=lambda v: v in (1, 2), describe="must be 1 or 2")
    endpoints = ck.value("domain", "endpoints", list, required=True)
    n = ck.value("domain", "n", (int, list), required=True)
    if dim is None or endpoints is None or n is None:
        return None
    if n_override is not None:
        n = n_override
    try:
        return build_grid(dim, endpoints, n)
    except (ValueError, TypeError) as exc:
        ck.fail("domain", str(exc))
        return None


def _build_diffusion(ck: _Checker, dim: int):
    sec = ck.section("diffusion")
    kind = ck.value("diffusion", "kind", str, default="constant",
                    pred=lambda v: v in ("constant", "affine"),
                    describe="must be constant or affine")
    if kind == "constant" or kind is None:
        value = ck.value("diffusion", "value", float, default=1.0,
                         pred=lambda v: v > 0, describe="must be positive")
        return float(value if value is not None else 1.0), {
            "kind": "constant", "value": float(value if value is not None else 1.0)}
    base = ck.value("diffusion", "base", float, default=1.0)
    slopes = ck.value("diffusion", "slopes", list, default=[0.0] * dim,
                      pred=lambda v: len(v) == dim,
                      describe=f"needs {dim} entries")
    if base is None or slopes is None:
        return 1.0, {"kind": "constant", "value": 1.0}
    slopes = [float(s) for s in slopes]
    base = float(base)

    def affine(points, _b=base, _s=np.asarray(slopes)):
        return _b + points @ _s

    return affine, {"kind": "affine", "base": base, "slopes": slopes}


def _build_potential(ck: _Checker) -> tuple[PotentialSpec | None, dict]:
    kind = ck.value("potential", "kind", str, required=True,
                    pred=lambda v: v in ("power", "quadratic", "sigmoid", "constant"),
                    describe="must be power, quadratic, sigmoid, or constant")
    exponent = ck.value("potential", "exponent", float, default=2.0)
    coefficient = ck.value("potential", "coefficient", float, default=1.0)
    scale = ck.value("potential", "scale", float, default=1.0)
    if kind is None:
        return None, {}
    resolved = {"kind": kind, "coefficient": float(coefficient),
                "scale": float(scale)}
    if kind == "power":
        resolved["exponent"] = float(exponent)
    try:
        spec = PotentialSpec(kind, exponent=float(exponent),
                             coefficient=float(coefficient), scale=float(scale))
    except ValueError as exc:
        ck.fail("potential", str(exc))
        return None, resolved
    return spec, resolved


def _time_profile(ck: _Checker, section: str, kind: str,
                  amplitude_convention: bool) -> tuple[TimeProfile | None, dict]:
    """Shared builder for weight alpha / forcing gamma profiles."""
    resolved: dict = {"kind": kind}
    try:
        if kind == "exponential":
            rate = ck.value(section, "rate", float, default=1.0,
                            pred=lambda v: v > 0, describe="must be positive")
            if amplitude_convention:
                amplitude = ck.value(section, "amplitude", float, required=True)
                if rate is None or amplitude is None:
                    return None, resolved
                resolved.update(amplitude=float(amplitude), rate=float(rate))
                return TimeProfile("exponential", scale=amplitude / rate,
                                   rate=rate), resolved
            scale = ck.value(section, "scale", float, default=1.0)
            if rate is None or scale is None:
                return None, resolved
            resolved.update(scale=float(scale), rate=float(rate))
            return TimeProfile("exponential", scale=scale, rate=rate), resolved
        if kind == "indicator":
            height = ck.value(section, "height", float, default=1.0)
            t_end = ck.value(section, "t_end", float, required=True,
                             pred=lambda v: v > 0, describe="must be positive")
            if height is None or t_end is None:
                return None, resolved
            resolved.update(height=float(height), t_end=float(t_end))
            return TimeProfile("indicator", height=height, t_end=t_end), resolved
        if kind == "tabulated":
            times = ck.value(section, "times", list, required=True)
            values = ck.value(section, "values", list, required=True)
            if times is None or values is None:
                return None, resolved
            times = [float(t) for t in times]
            values = [float(v) for v in values]
            resolved.update(times=times, values=values)
            return TimeProfile("tabulated", times=tuple(times),
                               values=tuple(values)), resolved
        if kind == "zero":
            return TimeProfile("zero"), resolved
    except ValueError as exc:
        ck.fail(section, str(exc))
        return None, resolved
    ck.fail(section, f"unknown kind {kind!r}", "kind")
    return None, resolved


def _sample_family(ck: _Checker, section: str, grid: SpatialGrid | None,
                   prefix: str = "") -> tuple[GridFunction | None, dict]:
    """Initial-datum style spatial family: constant, sine, gaussian, or csv."""

    def key(name):
        return f"{prefix}{name}"

    kind = ck.value(section, key("kind") if prefix else "kind", str,
                    required=True,
                    pred=lambda v: v in ("constant", "sine", "gaussian", "csv"),
                    describe="must be constant, sine, gaussian, or csv")
    if kind is None or grid is None:
        return None, {}
    resolved: dict = {}
    resolved[key("kind") if prefix else "kind"] = kind
    try:
        if kind == "constant":
            value = ck.value(section, key("value"), float, default=1.0)
            resolved[key("value")] = float(value)
            return GridFunction.constant(grid, value), resolved
        if kind == "sine":
            modes = ck.value(section, key("modes"), (int, list), default=1)
            amplitude = ck.value(section, key("amplitude"), float, default=1.0)
            resolved[key("modes")] = modes if isinstance(modes, list) else int(modes)
            resolved[key("amplitude")] = float(amplitude)
            return sine_mode(grid, modes, amplitude), resolved
        if kind == "gaussian":
            center = ck.value(section, key("center"), (float, list),
                              required=True)
            width = ck.value(section, key("width"), float, required=True,
                             pred=lambda v: v > 0, describe="must be positive")
            amplitude = ck.value(section, key("amplitude"), float, default=1.0)
            if center is None or width is None:
                return None, resolved
            center_list = center if isinstance(center, list) else [center]
            resolved[key("center")] = [float(c) for c in center_list]
            resolved[key("width")] = float(width)
            resolved[key("amplitude")] = float(amplitude)
            return gaussian_bump(grid, center_list, width, amplitude), resolved
        # csv sidecar, single column of node values
        path_key = "path" if not prefix else f"{prefix}csv"
        path = ck.value(section, path_key, str, required=True)
        if path is None:
            return None, resolved
        full = (Path(ck.path).parent / path).resolve() if not Path(path).is_absolute() else Path(path)
        resolved[path_key] = str(full)
        return GridFunction(grid, _read_field_csv(full, grid)), resolved
    except (ValueError, OSError) as exc:
        ck.fail(section, str(exc))
        return None, resolved


def _build_weight(ck: _Checker, grid: SpatialGrid | None
                  ) -> tuple[WeightSpec | None, dict]:
    kind = ck.value("weight", "kind", str, required=True,
                    pred=lambda v: v in ("exponential", "indicator", "tabulated"),
                    describe="must be exponential, indicator, or tabulated")
    if kind is None:
        return None, {}
    alpha, resolved = _time_profile(ck, "weight", kind, amplitude_convention=False)
    table = ck.section("weight")
    if "beta" in table and "beta_csv" in table:
        ck.fail("weight", "give beta or beta_csv, not both", "beta")
        return None, resolved
    beta: GridFunction | float | None
    if "beta_csv" in table:
        path = ck.value("weight", "beta_csv", str, required=True)
        if path is None or grid is None:
            return None, resolved
        try:
            full = (Path(ck.path).parent / path).resolve() if not Path(path).is_absolute() else Path(path)
            beta = GridFunction(grid, _read_field_csv(full, grid))
            resolved["beta_csv"] = str(full)
        except (ValueError, OSError) as exc:
            ck.fail("weight", str(exc), "beta_csv")
            return None, resolved
    else:
        beta = ck.value("weight", "beta", float, default=1.0)
        resolved["beta"] = float(beta)
    if alpha is None:
        return None, resolved
    try:
        return WeightSpec(alpha, beta), resolved
    except ValueError as exc:
        ck.fail("weight", str(exc))
        return None, resolved


def _build_forcing(ck: _Checker, grid: SpatialGrid | None
                   ) -> tuple[ForcingSpec | None, dict]:
    kind = ck.value("forcing", "kind", str, default="zero",
                    pred=lambda v: v in ("zero", "exponential", "indicator"),
                    describe="must be zero, exponential, or indicator")
    if kind is None or kind == "zero":
        return ForcingSpec(), {"kind": "zero"}
    gamma, resolved = _time_profile(ck, "forcing", kind, amplitude_convention=True)
    g_kind = ck.value("forcing", "g_kind", str, default="constant",
                      pred=lambda v: v in ("constant", "sine", "gaussian", "csv"),
                      describe="must be constant, sine, gaussian, or csv")
    g: GridFunction | float | None = 1.0
    if g_kind is not None and grid is not None:
        if g_kind == "constant":
            g_val = ck.value("forcing", "g_value", float, default=1.0)
            g = float(g_val)
            resolved.update(g_kind="constant", g_value=float(g_val))
        elif g_kind == "sine":
            modes = ck.value("forcing", "g_modes", (int, list), default=1)
            amp = ck.value("forcing", "g_amplitude", float, default=1.0)
            try:
                g = sine_mode(grid, modes, amp)
            except ValueError as exc:
                ck.fail("forcing", str(exc))
                g = None
            resolved.update(
                g_kind="sine",
                g_modes=modes if isinstance(modes, list) else int(modes),
                g_amplitude=float(amp),
            )
        elif g_kind == "gaussian":
            center = ck.value("forcing", "g_center", (float, list), required=True)
            width = ck.value("forcing", "g_width", float, required=True,
                             pred=lambda v: v > 0, describe="must be positive")
            amp = ck.value("forcing", "g_amplitude", float, default=1.0)
            if center is None or width is None:
                g = None
            else:
                center_list = center if isinstance(center, list) else [center]
                try:
                    g = gaussian_bump(grid, center_list, width, amp)
                    resolved.update(g_kind="gaussian",
                                    g_center=[float(c) for c in center_list],
                                    g_width=float(width), g_amplitude=float(amp))
                except ValueError as exc:
                    ck.fail("forcing", str(exc))
                    g = None
        else:
            path = ck.value("forcing", "g_csv", str, required=True)
            if path is None:
                g = None
            else:
                try:
                    full = (Path(ck.path).parent / path).resolve() if not Path(path).is_absolute() else Path(path)
                    g = GridFunction(grid, _read_field_csv(full, grid))
                    resolved.update(g_kind="csv", g_csv=str(full))
                except (ValueError, OSError) as exc:
                    ck.fail("forcing", str(exc), "g_csv")
                    g = None
    if gamma is None or g is None:
        return None, resolved
    try:
        return ForcingSpec(gamma, g), resolved
    except ValueError as exc:
        ck.fail("forcing", str(exc))
        return None, resolved


def _build_solver(ck: _Checker, overrides: dict) -> tuple[SolverConfig | None, dict]:
    tol = ck.value("solver", "tolerance", float, default=1e-8)
    max_iter = ck.value("solver", "max_iter", int, default=50)
    damping = ck.value("solver", "damping", float, default=1.0)
    accelerator = ck.value("solver", "accelerator", str, default="anderson")
    tau = ck.value("solver", "tau", float, default=1e-3)
    tail = ck.value("solver", "tail_tolerance", float, default=None)

    if overrides.get("tolerance") is not None:
        tol = overrides["tolerance"]
    if overrides.get("max_iter") is not None:
        max_iter = overrides["max_iter"]
    if overrides.get("accelerator") is not None:
        accelerator = overrides["accelerator"]

    resolved = {"tolerance": float(tol), "max_iter": int(max_iter),
                "damping": float(damping), "accelerator": str(accelerator),
                "tau": float(tau)}
    if tail is not None:
        resolved["tail_tolerance"] = float(tail)
    try:
        cfg = SolverConfig(tolerance=tol, max_iter=max_iter, damping=damping,
                           accelerator=accelerator, tau=tau, tail_tolerance=tail)
    except ValueError as exc:
        ck.fail("solver", str(exc))
        return None, resolved
    return cfg, resolved


def _build_probes(ck: _Checker, overrides: dict
                  ) -> tuple[EstimateProbeConfig | None, dict]:
    defaults = EstimateProbeConfig()
    kwargs = {}
    for name, typ in [
        ("time_min", float), ("time_max", float), ("time_count", int),
        ("delta_min", float), ("delta_max", float), ("delta_count", int),
        ("h_min", float), ("h_max", float), ("h_count", int),
        ("ensemble_size", int), ("seed", int),
    ]:
        kwargs[name] = ck.value("probes", name, typ,
                                default=getattr(defaults, name))
    thetas = ck.value("probes", "thetas", list,
                      default=list(defaults.thetas))
    lam = ck.value("probes", "lambda_grid", list,
                   default=list(defaults.lambda_grid))
    if overrides.get("seed") is not None:
        kwargs["seed"] = overrides["seed"]
    resolved = dict(kwargs)
    resolved["thetas"] = [float(t) for t in thetas]
    resolved["lambda_grid"] = [float(x) for x in lam]
    try:
        cfg = EstimateProbeConfig(
            thetas=tuple(float(t) for t in thetas),
            lambda_grid=tuple(float(x) for x in lam),
            **kwargs,
        )
    except ValueError as exc:
        ck.fail("probes", str(exc))
        return None, resolved
    return cfg, resolved


@dataclass
class RunConfig:
    """Parsed run: built objects plus the fully resolved config dictionary."""

    path: str
    problem: ProblemSpec
    solver: SolverConfig
    probes: EstimateProbeConfig
    time_stride: int
    probe_nodes: list[int] | None
    resolved: dict
    command: str | None = None

    def rebuild_problem(self, n_override=None, tau=None) -> "tuple[ProblemSpec, SolverConfig]":
        """Re-sample the problem (optionally at another resolution or step)."""
        problem = build_problem(self.resolved, self.path, n_override=n_override)
        solver = self.solver if tau is None else SolverConfig(
            tolerance=self.solver.tolerance, max_iter=self.solver.max_iter,
            damping=self.solver.damping, accelerator=self.solver.accelerator,
            tau=tau, tail_tolerance=self.solver.tail_tolerance,
        )
        return problem, solver


def build_problem(resolved: dict, path: str = "<resolved>",
                  n_override=None) -> ProblemSpec:
    """Build a ProblemSpec from a resolved config dictionary.

    Used for refinement and sweeps; csv-sampled fields cannot be resampled at
    a different resolution.
    """
    if n_override is not None:
        for section in ("initial", "weight", "forcing"):
            table = resolved.get(section, {})
            if any(str(k).endswith(("csv", "path")) for k in table):
                raise ValueError(
                    "csv-sampled fields cannot be resampled at a new resolution"
                )
    text = ""
    ck = _Checker(path, text, resolved)
    grid = _build_grid_section(ck, n_override=n_override)
    p = ck.value("domain", "p", float, default=2.0)
    diffusion, _ = _build_diffusion(ck, grid.dimension if grid else 1)
    potential, _ = _build_potential(ck)
    weight, _ = _build_weight(ck, grid)
    forcing, _ = _build_forcing(ck, grid)
    u0, _ = _sample_family(ck, "initial", grid)
    if ck.errors or grid is None or potential is None or weight is None \
            or forcing is None or u0 is None:
        raise ConfigError(ck.errors or ["incomplete problem specification"])
    try:
        return ProblemSpec(grid=grid, diffusion=diffusion, potential=potential,
                           weight=weight, forcing=forcing, u0=u0, p=float(p))
    except ValueError as exc:
        raise ConfigError([f"{path}:0: {exc}"]) from exc


def load_run_config(path, overrides: dict | None = None) -> RunConfig:
    """Parse and validate a TOML run configuration.

    ``overrides`` may carry tolerance, max_iter, accelerator, and seed from
    the command line; they are folded into the resolved dictionary so the
    manifest reproduces the run without the flags.
    """
    overrides = overrides or {}
    path = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"{path}:0: cannot read config: {exc}"]) from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"{path}:0: TOML parse error: {exc}"]) from exc

    ck = _Checker(path, text, data)
    ck.check_layout()

    grid = _build_grid_section(ck)
    p = ck.value("domain", "p", float, default=2.0,
                 pred=lambda v: v > 1, describe="must exceed 1")
    dim = grid.dimension if grid is not None else 1

    diffusion, diffusion_resolved = _build_diffusion(ck, dim)
    potential, potential_resolved = _build_potential(ck)
    weight, weight_resolved = _build_weight(ck, grid)
    forcing, forcing_resolved = _build_forcing(ck, grid)
    u0, initial_resolved = _sample_family(ck, "initial", grid)
    solver, solver_resolved = _build_solver(ck, overrides)
    probes, probes_resolved = _build_probes(ck, overrides)

    time_stride = ck.value("output", "time_stride", int, default=1,
                           pred=lambda v: v >= 1, describe="must be >= 1")
    probe_nodes = ck.value("output", "probe_nodes", list, default=None)

    if ck.errors:
        raise ConfigError(ck.errors)
    assert grid is not None

    resolved = {
        "domain": {
            "dimension": grid.dimension,
            "endpoints": [[float(a), float(b)] for a, b in grid.endpoints],
            "n": list(grid.shape),
            "p": float(p),
        },
        "diffusion": diffusion_resolved,
        "potential": potential_resolved,
        "weight": weight_resolved,
        "forcing": forcing_resolved,
        "initial": initial_resolved,
        "solver": solver_resolved,
        "probes": probes_resolved,
        "output": {"time_stride": int(time_stride)},
    }
    if probe_nodes is not None:
        probe_nodes = [int(i) for i in probe_nodes]
        if any(i < 0 or i >= grid.node_count for i in probe_nodes):
            raise ConfigError(
                [f"{path}:{_find_line(text, 'output', 'probe_nodes')}: "
                 f"[output] probe_nodes out of range 0..{grid.node_count - 1}"]
            )
        resolved["output"]["probe_nodes"] = probe_nodes

    try:
        problem = ProblemSpec(grid=grid, diffusion=diffusion,
                              potential=potential, weight=weight,
                              forcing=forcing, u0=u0, p=float(p))
    except ValueError as exc:
        raise ConfigError([f"{path}:0: {exc}"]) from exc

    return RunConfig(
        path=path,
        problem=problem,
        solver=solver,
        probes=probes,
        time_stride=int(time_stride),
        probe_nodes=probe_nodes,
        resolved=resolved,
    )


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            raise ValueError(f"cannot serialize {value} to TOML")
        text = repr(value)
        return text if any(c in text for c in ".eE") else text + ".0"
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ValueError(f"cannot serialize {type(value).__name__} to TOML")


def write_manifest(resolved: dict, path) -> None:
    """Emit the resolved config as TOML; the output parses back identically."""
    lines = []
    for section in _SECTIONS:
        if section not in resolved:
            continue
        lines.append(f"[{section}]")
        for key, value in resolved[section].items():
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    Path(path).write_text("\n".join(lines))
