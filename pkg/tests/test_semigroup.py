import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from _oracles import dense_march
from nonlocal_heat import (
    ForcingSpec,
    GridFunction,
    TimeGrid,
    TimeProfile,
    apply_semigroup,
    assemble_diffusion,
    build_generator,
    build_grid,
    mild_solution,
    operator_norm_p_to_inf,
    semigroup_difference,
    sine_mode,
)


@pytest.fixture
def gen16():
    grid = build_grid(1, (0.0, 1.0), 16)
    op = assemble_diffusion(grid, 1.0)
    rng = np.random.default_rng(11)
    return build_generator(op, rng.uniform(0.0, 2.0, 16))


def test_build_generator_validation():
    grid = build_grid(1, (0.0, 1.0), 8)
    op = assemble_diffusion(grid, 1.0)
    with pytest.raises(ValueError, match="non-negative"):
        build_generator(op, -np.ones(8))
    with pytest.raises(ValueError, match="shape"):
        build_generator(op, np.zeros(9))
    with pytest.raises(ValueError, match="finite"):
        build_generator(op, np.full(8, np.nan))
    gen = build_generator(op, GridFunction.zeros(grid))
    assert gen.node_count == 8
    assert gen.spectral_bound < 0


def test_time_grid_construction():
    tg = TimeGrid(tau=0.1, steps=5)
    np.testing.assert_allclose(tg.times(), [0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
    assert tg.t_max == pytest.approx(0.5)
    assert TimeGrid.from_horizon(0.1, 0.5).steps == 5
    with pytest.raises(ValueError, match="multiple"):
        TimeGrid.from_horizon(0.3, 1.0)
    with pytest.raises(ValueError):
        TimeGrid(tau=0.0, steps=5)
    with pytest.raises(ValueError):
        TimeGrid(tau=0.1, steps=0)


def test_march_converges_to_eigen_exact_at_rate_tau(gen16):
    grid = gen16.grid
    v = sine_mode(grid, 1)
    t = 0.05
    exact = apply_semigroup(gen16, t, v, method="eigen_exact").values
    errs = []
    for tau in (1e-3, 5e-4):
        got = apply_semigroup(gen16, t, v, tau=tau).values
        errs.append(np.max(np.abs(got - exact)))
    assert errs[0] <= 0.05 * np.max(np.abs(exact))
    # halving tau halves the error (first-order march)
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.15)


def test_apply_semigroup_interface(gen16):
    grid = gen16.grid
    v = sine_mode(grid, 1)
    out = apply_semigroup(gen16, 0.0, v, tau=0.1)
    assert isinstance(out, GridFunction)
    np.testing.assert_array_equal(out.values, v.values)
    raw = apply_semigroup(gen16, 0.0, v.values, tau=0.1)
    assert isinstance(raw, np.ndarray)
    with pytest.raises(ValueError):
        apply_semigroup(gen16, -1.0, v, tau=0.1)
    with pytest.raises(ValueError):
        apply_semigroup(gen16, 1.0, v)  # march needs tau
    with pytest.raises(ValueError):
        apply_semigroup(gen16, 1.0, v, method="chebyshev", tau=0.1)
    with pytest.raises(ValueError):
        apply_semigroup(gen16, 1.0, np.zeros(7), tau=0.1)


def test_shortened_last_step_lands_exactly(gen16):
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    v = sine_mode(gen16.grid, 2).values
    tau = 0.02
    t = 2.5 * tau
    got = apply_semigroup(gen16, t, v, tau=tau)
    n = gen16.node_count
    eye = sp.identity(n, format="csc")
    full = spla.splu(sp.csc_matrix(eye - tau * gen16.matrix))
    part = spla.splu(sp.csc_matrix(eye - 0.5 * tau * gen16.matrix))
    expect = part.solve(full.solve(full.solve(v)))
    np.testing.assert_allclose(got, expect, atol=1e-13)


@given(values=st.lists(st.floats(min_value=-5, max_value=5),
                       min_size=12, max_size=12))
def test_march_is_sup_contractive_and_positive(values):
    grid = build_grid(1, (0.0, 1.0), 12)
    op = assemble_diffusion(grid, 1.0)
    gen = build_generator(op, np.linspace(0.0, 1.0, 12))
    u0 = GridFunction(grid, np.asarray(values))
    traj = mild_solution(gen, u0, None, TimeGrid(tau=0.01, steps=20))
    sups = traj.sup_norms()
    assert np.all(np.diff(sups) <= 1e-14 * (1.0 + sups[:-1]))
    if np.all(np.asarray(values) >= 0.0):
        assert np.min(traj.values) >= 0.0


def test_mild_solution_matches_dense_eigen_march():
    # independent mode-by-mode recursion, forcing included
    grid = build_grid(1, (0.0, 1.0), 16)
    op = assemble_diffusion(grid, lambda pts: 1.0 + 0.3 * pts[:, 0])
    gen = build_generator(op, np.linspace(0.5, 1.5, 16))
    forcing = ForcingSpec(
        TimeProfile("exponential", scale=0.5, rate=2.0), sine_mode(grid, 2)
    )
    tg = TimeGrid(tau=5e-3, steps=120)
    traj = mild_solution(gen, sine_mode(grid, 1), forcing, tg)
    gamma = forcing.gamma(tg.times())
    oracle = dense_march(gen.matrix, sine_mode(grid, 1).values, tg.tau,
                         tg.steps, g=sine_mode(grid, 2).values, gamma=gamma)
    np.testing.assert_allclose(traj.values, oracle, atol=1e-11)


def test_mild_solution_sup_bound_with_forcing():
    grid = build_grid(1, (0.0, 1.0), 20)
    gen = build_generator(assemble_diffusion(grid, 1.0), np.zeros(20))
    forcing = ForcingSpec(TimeProfile("indicator", height=2.0, t_end=0.2), 1.0)
    tg = TimeGrid(tau=1e-2, steps=50)
    traj = mild_solution(gen, sine_mode(grid, 1), forcing, tg)
    gamma = np.asarray(forcing.gamma(tg.times()))
    # discrete a priori bound: ||u_k|| <= ||u0|| + sum_{j<=k} tau ||f(t_j)||
    bound = 1.0 + np.cumsum(np.concatenate([[0.0], tg.tau * np.abs(gamma[1:])]))
    assert np.all(traj.sup_norms() <= bound + 1e-12)


def test_trajectory_shape_guard():
    from nonlocal_heat import Trajectory

    grid = build_grid(1, (0.0, 1.0), 4)
    with pytest.raises(ValueError, match="shape"):
        Trajectory(grid=grid, time_grid=TimeGrid(tau=0.1, steps=3),
                   values=np.zeros((3, 4)))


def test_semigroup_difference_oracle_and_symmetry(gen16):
    grid = gen16.grid
    other = build_generator(gen16.operator, gen16.q + 0.5)
    t = 0.03
    got = semigroup_difference(gen16, other, t, 2.0)
    manual = operator_norm_p_to_inf(
        gen16.dense_semigroup(t) - other.dense_semigroup(t), grid, 2.0
    )
    assert got == pytest.approx(manual, rel=1e-14)
    assert semigroup_difference(other, gen16, t, 2.0) == pytest.approx(got, rel=1e-12)
    assert semigroup_difference(gen16, gen16, t, 2.0) == 0.0
    foreign = build_generator(
        assemble_diffusion(build_grid(1, (0.0, 1.0), 8), 1.0), np.zeros(8)
    )
    with pytest.raises(ValueError, match="different grids"):
        semigroup_difference(gen16, foreign, t, 2.0)


def test_dense_semigroup_decays_like_principal_mode():
    grid = build_grid(1, (0.0, 1.0), 24)
    op = assemble_diffusion(grid, 1.0)
    gen = build_generator(op, np.zeros(24))
    h = grid.spacing[0]
    mu1 = (4.0 / h**2) * math.sin(math.pi * h / 2.0) ** 2
    v = sine_mode(grid, 1).values
    for t in (0.01, 0.1, 0.5):
        got = gen.dense_semigroup(t) @ v
        np.testing.assert_allclose(got, math.exp(-mu1 * t) * v, atol=1e-12)
