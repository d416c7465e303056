"""Command-line front end: solve, verify, and sweep over TOML-defined problems.

Artifacts are plain CSV (header row, '.' decimal, 17 significant digits) plus
a manifest.toml that echoes the fully resolved configuration; identical config
and seed give byte-identical outputs.  Exit codes: 0 ok, 1 invalid input,
2 non-converged run or failed estimate check.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, build_problem, load_run_config, \
    write_manifest
from .estimates import (
    CONTRACTION_SLACK,
    measure_contraction,
    measure_difference_bound,
    measure_increment_bound,
    measure_smoothing,
    probe_image_compactness,
    smooth_ball_fields,
)
from .fixedpoint import FixedPointReport, SolverConfig, compute_R0, solve
from .grid import GridFunction
from .problem import ProblemSpec
from .semigroup import build_generator
from .scenarios import scenario_names, scenario_path

__all__ = ["main", "cmd_solve", "cmd_verify", "cmd_sweep"]

_AXIS_NAMES = ("x", "y")


def _fmt(value) -> str:
    """17-significant-digit decimal form; integers and flags stay integral."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _resolve_config_arg(raw: str) -> Path:
    """A --config value is a path, or the name of a bundled scenario."""
    p = Path(raw)
    if p.exists():
        return p
    if raw in scenario_names():
        return scenario_path(raw)
    raise ConfigError(
        [f"{raw}:0: no such config file or bundled scenario "
         f"(available: {', '.join(scenario_names())})"]
    )


def _out_dir(args) -> Path:
    env = os.environ.get("NONLOCAL_HEAT_OUT")
    out = Path(env) if env else Path(args.out) if args.out else Path("out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _overrides(args) -> dict:
    return {
        "tolerance": args.tol,
        "max_iter": args.max_iter,
        "accelerator": args.accelerator,
        "seed": args.seed,
    }


def _write_solution(out: Path, problem: ProblemSpec, report: FixedPointReport,
                    run: RunConfig) -> None:
    grid = problem.grid
    coords = _AXIS_NAMES[: grid.dimension]

    _write_csv(
        out / "ubar.csv",
        [*coords, "ubar"],
        (tuple(grid.nodes[i]) + (report.ubar.values[i],)
         for i in range(grid.node_count)),
    )

    nodes = [i for i in run.probe_nodes if i < grid.node_count] \
        if run.probe_nodes is not None else list(range(grid.node_count))
    trajectory = report.trajectory
    assert trajectory is not None
    times = trajectory.time_grid.times()
    stride = run.time_stride
    ks = list(range(0, times.size, stride))
    if ks[-1] != times.size - 1:
        ks.append(times.size - 1)
    _write_csv(
        out / "trajectory.csv",
        ["t"] + [f"u_{i}" for i in nodes],
        ((times[k], *trajectory.values[k, nodes]) for k in ks),
    )

    _write_csv(
        out / "history.csv",
        ["iteration", "residual", "omega"],
        ((i + 1, r, w) for i, (r, w) in
         enumerate(zip(report.residuals, report.omegas))),
    )

    check = report.bound_check
    assert check is not None
    lines = [
        f"verdict: {report.verdict}",
        f"iterations: {report.iterations}",
        f"final_residual: {_fmt(report.final_residual)}",
        f"r0: {_fmt(report.r0)}",
        f"tolerance: {_fmt(report.tolerance)}",
        f"tail_tolerance: {_fmt(report.tail_tolerance)}",
        f"accelerator: {report.accelerator}",
        f"tau: {_fmt(report.time_grid.tau)}",
        f"steps: {report.time_grid.steps}",
        f"t_max: {_fmt(report.time_grid.t_max)}",
        f"sup_bound_max_excess: {_fmt(check.max_excess)}",
        f"sup_bound_slack: {_fmt(check.slack)}",
        f"sup_bound_passed: {'yes' if check.passed else 'no'}",
        f"radius_value: {_fmt(check.radius_value)}",
        f"radius_limit: {_fmt(check.radius_limit)}",
        f"radius_passed: {'yes' if check.radius_passed else 'no'}",
    ]
    (out / "report.txt").write_text("\n".join(lines) + "\n")


def cmd_solve(args) -> int:
    run = load_run_config(_resolve_config_arg(args.config), _overrides(args))
    out = _out_dir(args)
    report = solve(run.problem, run.solver)
    _write_solution(out, run.problem, report, run)
    write_manifest(run.resolved, out / "manifest.toml")
    print(f"{report.verdict}: {report.iterations} iterations, "
          f"final residual {_fmt(report.final_residual)}, r0 {_fmt(report.r0)}")
    return 0 if report.converged else 2


def _verify_contraction(problem: ProblemSpec, run: RunConfig, rows: list):
    r0 = compute_R0(problem)
    rng = np.random.default_rng(run.probes.seed)
    draws = [np.zeros(problem.grid.node_count)]
    draws.extend(rng.uniform(-r0, r0, size=(3, problem.grid.node_count)))
    times = np.unique(np.concatenate([run.probes.times(), [0.1, 1.0]]))
    worst = 0.0
    for j, ubar in enumerate(draws):
        q = np.asarray(problem.potential(ubar), dtype=float)
        gen = build_generator(problem.operator, q)
        for qnorm in (2.0, np.inf):
            fit = measure_contraction(gen, times, qnorm)
            worst = max(worst, fit.info["max_norm"])
            rows.extend(
                (j, qnorm, t, m, 1.0, m)
                for t, m in zip(fit.probe, fit.measured)
            )
    passed = worst <= 1.0 + CONTRACTION_SLACK
    return passed, f"max norm {_fmt(worst)} (limit {_fmt(1.0 + CONTRACTION_SLACK)})"


def _verify_smoothing(problem: ProblemSpec, run: RunConfig, rows: list):
    q0 = np.asarray(problem.potential(np.zeros(problem.grid.node_count)),
                    dtype=float)
    gen = build_generator(problem.operator, q0)
    passed = True
    details = []
    for theta in run.probes.thetas:
        fit = measure_smoothing(gen, theta)
        shape = fit.constant * fit.probe ** fit.target_slope
        rows.extend(
            (theta, t, m, s, m / s)
            for t, m, s in zip(fit.probe, fit.measured, shape)
        )
        passed = passed and fit.passed
        details.append(f"theta={_fmt(theta)} slope {_fmt(fit.slope)}")
    return passed, "; ".join(details)


def _verify_difference(problem: ProblemSpec, run: RunConfig, rows: list):
    r0 = compute_R0(problem)
    theta = run.probes.theta
    times = run.probes.times()
    sups = []
    for prob in _refinement_pair(problem, run):
        ubar, vbar = smooth_ball_fields(prob.grid, r0, run.probes.seed, count=2)
        fit = measure_difference_bound(prob, ubar, vbar, times, theta)
        shape = (np.exp(-fit.info["nu"] * fit.probe)
                 * fit.probe ** (1.0 - theta) * fit.info["delta_phi"])
        rows.extend(
            (prob.grid.node_count, t, m, s, r)
            for t, m, s, r in zip(fit.probe, fit.measured, shape,
                                  fit.info["ratios"])
        )
        sups.append(fit.info["sup_ratio"])
    coarse, fine = sups
    if coarse == 0.0 and fine == 0.0:
        return True, "zero difference (trivially stable)"
    change = abs(fine - coarse) / max(coarse, fine)
    passed = np.isfinite(coarse) and np.isfinite(fine) and change <= 0.25
    return passed, (f"sup ratio {_fmt(coarse)} -> {_fmt(fine)} under refinement "
                    f"(change {_fmt(change)}, limit 0.25)")


def _refinement_pair(problem: ProblemSpec, run: RunConfig):
    doubled = [2 * n for n in problem.grid.shape]
    return problem, build_problem(run.resolved, run.path, n_override=doubled)


def _verify_increment(problem: ProblemSpec, run: RunConfig, rows: list):
    q0 = np.asarray(problem.potential(np.zeros(problem.grid.node_count)),
                    dtype=float)
    gen = build_generator(problem.operator, q0)
    h_fit, d_fit = measure_increment_bound(
        gen, run.probes.deltas(), run.probes.hs(), run.probes.theta, problem.p
    )
    for fit, sweep in ((h_fit, "h"), (d_fit, "delta")):
        shape = fit.constant * fit.probe ** fit.target_slope
        rows.extend(
            (sweep, x, m, s, m / s)
            for x, m, s in zip(fit.probe, fit.measured, shape)
        )
    passed = h_fit.passed and d_fit.passed
    return passed, (f"h slope {_fmt(h_fit.slope)} (target 1), "
                    f"delta slope {_fmt(d_fit.slope)} "
                    f"(floor {_fmt(d_fit.info['slope_floor'])})")


def _verify_compactness(problem: ProblemSpec, run: RunConfig, rows: list):
    report = probe_image_compactness(
        problem,
        SolverConfig(tau=run.solver.tau, tolerance=run.solver.tolerance),
        ensemble_size=run.probes.ensemble_size,
        seed=run.probes.seed,
        lambda_grid=run.probes.lambda_grid,
    )
    sigma = report.singular_values
    top = sigma[0] if sigma[0] > 0 else 1.0
    rows.extend((k + 1, s, s / top) for k, s in enumerate(sigma))
    detail = f"sigma10/sigma1 {_fmt(report.sigma_ratio)} (limit 0.05)"
    if report.trivially_compact:
        detail = "zero ensemble (trivially compact)"
    if report.shift_decay:
        shifts = ", ".join(
            f"lambda={_fmt(lam)}: {_fmt(val)}"
            for lam, val in report.shift_decay.items()
        )
        detail += f"; shift decay {shifts}"
    return report.passed, detail


def cmd_verify(args) -> int:
    run = load_run_config(_resolve_config_arg(args.config), _overrides(args))
    out = _out_dir(args)
    problem = run.problem
    run.probes.validate_for(problem)
    problem.operator.eigendecomposition()  # fail fast on the size guard

    checks = [
        ("contraction", ["draw", "q", "t", "measured", "bound", "ratio"],
         _verify_contraction),
        ("smoothing", ["theta", "t", "measured", "shape", "ratio"],
         _verify_smoothing),
        ("difference", ["n", "t", "measured", "shape", "ratio"],
         _verify_difference),
        ("increment", ["sweep", "probe", "measured", "shape", "ratio"],
         _verify_increment),
        ("compactness", ["k", "sigma", "sigma_normalized"],
         _verify_compactness),
    ]
    summary = []
    all_passed = True
    for name, header, runner in checks:
        rows: list = []
        passed, detail = runner(problem, run, rows)
        _write_csv(out / f"{name}.csv", header, rows)
        summary.append(f"{name}: {'PASS' if passed else 'FAIL'} ({detail})")
        all_passed = all_passed and passed
        print(summary[-1])
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    write_manifest(run.resolved, out / "manifest.toml")
    return 0 if all_passed else 2


_SWEEP_PARAMETERS = ("u0_scale", "weight_scale", "potential_scale", "tau", "n")


def _sweep_case(run: RunConfig, parameter: str, value: float
                ) -> tuple[ProblemSpec, SolverConfig, dict]:
    """Problem, solver, and resolved-config dict for one sweep value."""
    resolved = {k: dict(v) for k, v in run.resolved.items()}
    base = run.problem
    if parameter == "tau":
        if not value > 0:
            raise ConfigError([f"sweep:0: tau value must be positive, got {value}"])
        resolved["solver"]["tau"] = float(value)
        problem, solver = base, dataclasses.replace(run.solver, tau=float(value))
        return problem, solver, resolved
    if parameter == "n":
        n = int(value)
        if n != value or n < 1:
            raise ConfigError([f"sweep:0: n value must be a positive integer, got {value}"])
        resolved["domain"]["n"] = [n] * base.grid.dimension
        return build_problem(resolved, run.path, n_override=n), run.solver, resolved
    if parameter == "u0_scale":
        table = resolved["initial"]
        for key in ("amplitude", "value"):
            if key in table:
                table[key] = float(table[key]) * value
                break
        else:
            raise ConfigError(
                ["sweep:0: u0_scale needs a family initial datum (not csv)"]
            )
        problem = dataclasses.replace(
            base, u0=GridFunction(base.grid, base.u0.values * value)
        )
        return problem, run.solver, resolved
    if parameter == "weight_scale":
        table = resolved["weight"]
        if table["kind"] == "exponential":
            table["scale"] = float(table["scale"]) * value
        elif table["kind"] == "indicator":
            table["height"] = float(table["height"]) * value
        else:
            table["values"] = [v * value for v in table["values"]]
        problem = dataclasses.replace(base, weight=base.weight.rescaled(value))
        return problem, run.solver, resolved
    # potential_scale
    table = resolved["potential"]
    table["scale"] = float(table["scale"]) * value
    problem = dataclasses.replace(base, potential=base.potential.rescaled(value))
    return problem, run.solver, resolved


def _contraction_ratio(residuals: np.ndarray) -> float:
    """Median successive residual ratio; nan when fewer than two iterations."""
    if residuals.size < 2 or np.any(residuals[:-1] == 0.0):
        return float("nan")
    return float(np.median(residuals[1:] / residuals[:-1]))


def cmd_sweep(args) -> int:
    if args.parameter not in _SWEEP_PARAMETERS:
        raise ConfigError(
            [f"sweep:0: unknown parameter {args.parameter!r} "
             f"(choose from {', '.join(_SWEEP_PARAMETERS)})"]
        )
    values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    if not values:
        raise ConfigError(["sweep:0: empty value list"])
    run = load_run_config(_resolve_config_arg(args.config), _overrides(args))
    out = _out_dir(args)

    rows = []
    worst = 0
    for i, value in enumerate(values):
        problem, solver, resolved = _sweep_case(run, args.parameter, value)
        report = solve(problem, solver)
        subdir = out / f"run_{i:03d}"
        subdir.mkdir(parents=True, exist_ok=True)
        sub_run = dataclasses.replace(run, problem=problem, solver=solver,
                                      resolved=resolved)
        _write_solution(subdir, problem, report, sub_run)
        write_manifest(resolved, subdir / "manifest.toml")
        rows.append((
            args.parameter, value, report.r0, report.iterations,
            report.converged, _contraction_ratio(report.residuals),
            report.final_residual,
        ))
        if not report.converged:
            worst = 2
        print(f"{args.parameter}={_fmt(value)}: {report.verdict} in "
              f"{report.iterations} iterations, r0 {_fmt(report.r0)}")

    _write_csv(
        out / "sweep.csv",
        ["parameter", "value", "r0", "iterations", "converged",
         "contraction_ratio", "final_residual"],
        rows,
    )
    write_manifest(run.resolved, out / "manifest.toml")
    return worst


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonlocal-heat",
        description="Solve and verify the nonlocal-in-time semilinear heat "
                    "equation via its fixed-point map.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in (("solve", cmd_solve), ("verify", cmd_verify),
                       ("sweep", cmd_sweep)):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True,
                         help="TOML config path or bundled scenario name")
        cmd.add_argument("--out", default=None,
                         help="output directory (default ./out; "
                              "NONLOCAL_HEAT_OUT overrides)")
        cmd.add_argument("--tol", type=float, default=None)
        cmd.add_argument("--max-iter", type=int, default=None)
        cmd.add_argument("--accelerator", choices=("picard", "anderson"),
                         default=None)
        cmd.add_argument("--seed", type=int, default=None)
        cmd.set_defaults(func=func)
    sweep = sub.choices["sweep"]
    sweep.add_argument("--parameter", required=True)
    sweep.add_argument("--values", required=True,
                       help="comma-separated list of values")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for message in exc.messages:
            print(f"error: {message}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
