import numpy as np
import pytest

from nonlocal_heat.cli import main

FAST = """\
[domain]
dimension = 1
endpoints = [[0.0, 1.0]]
n = [24]

[potential]
kind = "quadratic"
scale = 1.0

[weight]
kind = "exponential"
scale = 1.0
rate = 1.0

[initial]
kind = "sine"
amplitude = 1.0

[solver]
tau = 0.002
tolerance = 1e-10

[probes]
time_count = 12
delta_count = 6
h_count = 6
ensemble_size = 16
"""


def run(*argv):
    return main([str(a) for a in argv])


def read_rows(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


def test_solve_writes_artifacts_and_converges(tmp_path):
    out = tmp_path / "run"
    assert run("solve", "--config", "resolvent_exp_weight", "--out", out) == 0
    for name in ("ubar.csv", "trajectory.csv", "history.csv",
                 "report.txt", "manifest.toml"):
        assert (out / name).exists()
    report = (out / "report.txt").read_text()
    assert "verdict: converged" in report
    assert "sup_bound_passed: yes" in report
    assert "radius_passed: yes" in report
    residual = float(report.split("final_residual: ")[1].splitlines()[0])
    assert residual <= 1e-8

    header, rows = read_rows(out / "ubar.csv")
    assert header == ["x", "ubar"]
    assert len(rows) == 64
    values = np.array([float(r[1]) for r in rows])
    assert np.all(np.abs(values) <= 0.6366 + 1e-6)  # within the a priori ball


def test_solve_is_byte_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run("solve", "--config", "small_data_quadratic", "--out", out1) == 0
    assert run("solve", "--config", "small_data_quadratic", "--out", out2) == 0
    for name in ("ubar.csv", "trajectory.csv", "history.csv", "manifest.toml"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_manifest_reproduces_run(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run("solve", "--config", "bump_indicator_forcing", "--out", out1) == 0
    assert run("solve", "--config", out1 / "manifest.toml", "--out", out2) == 0
    assert (out1 / "ubar.csv").read_bytes() == (out2 / "ubar.csv").read_bytes()
    assert (out1 / "manifest.toml").read_bytes() == \
        (out2 / "manifest.toml").read_bytes()


def test_cli_overrides_land_in_manifest(tmp_path):
    out = tmp_path / "run"
    assert run("solve", "--config", "small_data_quadratic", "--out", out,
               "--accelerator", "anderson", "--tol", "1e-7",
               "--max-iter", "11", "--seed", "99") == 0
    manifest = (out / "manifest.toml").read_text()
    assert 'accelerator = "anderson"' in manifest
    assert "tolerance = 1e-07" in manifest
    assert "max_iter = 11" in manifest
    assert "seed = 99" in manifest


def test_trajectory_respects_probe_nodes_and_stride(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(FAST + "\n[output]\ntime_stride = 50\n"
                             "probe_nodes = [0, 11, 23]\n")
    out = tmp_path / "out"
    assert run("solve", "--config", config, "--out", out) == 0
    header, rows = read_rows(out / "trajectory.csv")
    assert header == ["t", "u_0", "u_11", "u_23"]
    times = [float(r[0]) for r in rows]
    assert times[0] == 0.0
    assert times[1] == pytest.approx(0.1)       # stride 50 at tau = 2e-3
    assert times[-1] > times[-2]                # final step always written
    # Dirichlet wall: the boundary-adjacent probe stays small
    assert all(abs(float(r[1])) < abs(float(r[2])) + 1e-12 for r in rows[1:])


def test_zero_weight_solves_in_one_iteration(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(FAST.replace("scale = 1.0\nrate = 1.0",
                                   "scale = 0.0\nrate = 1.0"))
    out = tmp_path / "out"
    assert run("solve", "--config", config, "--out", out) == 0
    assert "iterations: 1" in (out / "report.txt").read_text()
    _, rows = read_rows(out / "ubar.csv")
    assert all(float(r[1]) == 0.0 for r in rows)


def test_invalid_config_exit_code_and_message(tmp_path, capsys):
    config = tmp_path / "negd.toml"
    config.write_text(FAST + "\n[diffusion]\nkind = \"constant\"\n"
                             "value = -2.0\n")
    assert run("solve", "--config", config, "--out", tmp_path / "o") == 1
    err = capsys.readouterr().err
    assert "[diffusion]" in err and "must be positive" in err
    assert f"{config}:" in err


def test_missing_config_exit_code(tmp_path, capsys):
    assert run("solve", "--config", tmp_path / "nope.toml",
               "--out", tmp_path / "o") == 1
    assert "no such config" in capsys.readouterr().err


def test_non_convergence_exit_code(tmp_path):
    out = tmp_path / "out"
    config = tmp_path / "run.toml"
    config.write_text(FAST)
    assert run("solve", "--config", config, "--out", out,
               "--max-iter", "1", "--tol", "1e-14") == 2
    assert "verdict: max_iter" in (out / "report.txt").read_text()


def test_env_var_overrides_out_flag(tmp_path, monkeypatch):
    env_dir = tmp_path / "env_out"
    monkeypatch.setenv("NONLOCAL_HEAT_OUT", str(env_dir))
    assert run("solve", "--config", "small_data_quadratic",
               "--out", tmp_path / "ignored") == 0
    assert (env_dir / "ubar.csv").exists()
    assert not (tmp_path / "ignored").exists()


def test_verify_passes_on_fast_config(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(FAST)
    out = tmp_path / "out"
    assert run("verify", "--config", config, "--out", out) == 0
    summary = (out / "summary.txt").read_text().splitlines()
    assert len(summary) == 5
    assert all(": PASS" in line for line in summary)
    for name in ("contraction", "smoothing", "difference", "increment",
                 "compactness"):
        header, rows = read_rows(out / f"{name}.csv")
        assert rows, name
    header, rows = read_rows(out / "contraction.csv")
    assert header == ["draw", "q", "t", "measured", "bound", "ratio"]
    assert all(float(r[-1]) <= 1.0 + 1e-10 for r in rows)


def test_verify_rejects_oversized_grid(tmp_path, capsys):
    config = tmp_path / "run.toml"
    config.write_text(FAST.replace("n = [24]", "n = [8192]"))
    assert run("verify", "--config", config, "--out", tmp_path / "o") == 1
    assert "eigen_exact size limit" in capsys.readouterr().err


def test_sweep_u0_scale_monotone_iterations(tmp_path):
    out = tmp_path / "out"
    assert run("sweep", "--config", "small_data_quadratic", "--out", out,
               "--parameter", "u0_scale", "--values", "0.1,1,10") == 0
    header, rows = read_rows(out / "sweep.csv")
    assert header == ["parameter", "value", "r0", "iterations", "converged",
                      "contraction_ratio", "final_residual"]
    assert [r[0] for r in rows] == ["u0_scale"] * 3
    r0 = [float(r[2]) for r in rows]
    iters = [int(r[3]) for r in rows]
    assert r0 == sorted(r0)
    assert iters == sorted(iters)
    assert all(r[4] == "1" for r in rows)
    for i in range(3):
        assert (out / f"run_{i:03d}" / "ubar.csv").exists()
        assert (out / f"run_{i:03d}" / "manifest.toml").exists()
    # scaling the datum scales the a priori radius linearly
    assert r0[1] / r0[0] == pytest.approx(10.0)


def sweep_tau_fields(tmp_path, scenario):
    out = tmp_path / scenario
    assert run("sweep", "--config", scenario, "--out", out,
               "--parameter", "tau", "--values", "0.004,0.002,0.001") == 0
    fields = []
    for i in range(3):
        _, rows = read_rows(out / f"run_{i:03d}" / "ubar.csv")
        fields.append(np.array([float(r[1]) for r in rows]))
    return fields


def test_sweep_tau_exponential_weight_is_exact(tmp_path):
    # Geometric quadrature telescopes to the exact resolvent, so ubar
    # carries no time-discretization error for exponential weights.
    fields = sweep_tau_fields(tmp_path, "small_data_quadratic")
    assert np.max(np.abs(fields[0] - fields[2])) <= 1e-13


def test_sweep_tau_indicator_weight_is_first_order(tmp_path):
    # Indicator weights integrate marched samples, so ubar inherits the
    # O(tau) error of backward Euler; halving tau halves the difference.
    fields = sweep_tau_fields(tmp_path, "bump_indicator_forcing")
    d1 = np.max(np.abs(fields[0] - fields[1]))
    d2 = np.max(np.abs(fields[1] - fields[2]))
    assert 1.5 <= d1 / d2 <= 2.5


def test_sweep_rejects_bad_input(tmp_path, capsys):
    assert run("sweep", "--config", "small_data_quadratic",
               "--out", tmp_path / "o", "--parameter", "viscosity",
               "--values", "1,2") == 1
    assert "unknown parameter" in capsys.readouterr().err
    assert run("sweep", "--config", "small_data_quadratic",
               "--out", tmp_path / "o", "--parameter", "tau",
               "--values", ",") == 1
    assert "empty value list" in capsys.readouterr().err


def test_sweep_n_refines_grid(tmp_path):
    out = tmp_path / "out"
    assert run("sweep", "--config", "small_data_quadratic", "--out", out,
               "--parameter", "n", "--values", "16,32") == 0
    _, coarse = read_rows(out / "run_000" / "ubar.csv")
    _, fine = read_rows(out / "run_001" / "ubar.csv")
    assert len(coarse) == 16 and len(fine) == 32
    manifest = (out / "run_001" / "manifest.toml").read_text()
    assert "n = [32]" in manifest
