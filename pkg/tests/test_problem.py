import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from nonlocal_heat import (
    ForcingSpec,
    GridFunction,
    PotentialSpec,
    ProblemSpec,
    TimeProfile,
    WeightSpec,
    build_grid,
    gaussian_bump,
    sine_mode,
)

finite = st.floats(allow_nan=False, allow_infinity=False)


# -- time profiles -------------------------------------------------------


def test_exponential_profile_closed_forms():
    prof = TimeProfile("exponential", scale=2.0, rate=3.0)
    assert prof.mass_abs == 2.0
    assert prof.sup_abs == 6.0
    assert prof(0.0) == pytest.approx(6.0)
    assert prof.support_end == math.inf
    assert prof.partial_abs(0.5) == pytest.approx(2.0 * (1 - math.exp(-1.5)))


@given(
    scale=st.floats(min_value=-5, max_value=5),
    rate=st.floats(min_value=0.1, max_value=10),
    t=st.floats(min_value=0, max_value=50),
)
def test_partial_plus_tail_is_mass(scale, rate, t):
    prof = TimeProfile("exponential", scale=scale, rate=rate)
    assert prof.partial_abs(t) + prof.tail_abs(t) == pytest.approx(
        prof.mass_abs, abs=1e-12 * (1 + abs(scale))
    )


def test_indicator_profile_closed_forms():
    prof = TimeProfile("indicator", height=1.5, t_end=2.0)
    assert prof.mass_abs == 3.0
    assert prof.sup_abs == 1.5
    assert prof(1.9) == 1.5 and prof(2.1) == 0.0
    assert prof.partial_abs(5.0) == 3.0  # saturates past the support
    assert prof.support_end == 2.0


def test_tabulated_profile_mass_matches_trapezoid_oracle():
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    times = (0.0, 1.0, 2.0, 3.0)
    values = (1.0, -1.0, 0.5, 0.0)
    prof = TimeProfile("tabulated", times=times, values=values)
    # dense trapezoid on |interp| as an independent quadrature oracle
    tt = np.linspace(0.0, 3.0, 300001)
    oracle = trapezoid(np.abs(np.interp(tt, times, values)), tt)
    assert prof.mass_abs == pytest.approx(oracle, abs=1e-7)
    assert prof.sup_abs == 1.0
    # signed cell masses integrate the profile exactly
    w = prof.cell_masses(tau=0.25, steps=12)
    signed = trapezoid(np.asarray(values), np.asarray(times))
    assert np.sum(w) == pytest.approx(signed, abs=1e-13)


def test_tabulated_profile_validation():
    with pytest.raises(ValueError, match="start at 0"):
        TimeProfile("tabulated", times=(0.5, 1.0), values=(1.0, 0.0))
    with pytest.raises(ValueError, match="strictly increase"):
        TimeProfile("tabulated", times=(0.0, 1.0, 1.0), values=(1.0, 0.5, 0.0))
    with pytest.raises(ValueError, match="end at zero"):
        TimeProfile("tabulated", times=(0.0, 1.0), values=(1.0, 0.5))
    with pytest.raises(ValueError):
        TimeProfile("exponential", rate=0.0)
    with pytest.raises(ValueError):
        TimeProfile("indicator", t_end=-1.0)
    with pytest.raises(ValueError):
        TimeProfile("sawtooth")


def test_exponential_cell_masses_telescope_to_resolvent():
    # sum_k w_k (1+mu*tau)^-k must equal the partial geometric series of
    # scale*rate/(rate+mu); this is the identity pairing the quadrature with
    # the backward Euler resolvent
    scale, lam, tau, mu, steps = 1.7, 2.0, 1e-3, 40.0, 4000
    prof = TimeProfile("exponential", scale=scale, rate=lam)
    w = prof.cell_masses(tau, steps)
    k = np.arange(1, steps + 1)
    lhs = np.sum(w[1:] / (1.0 + mu * tau) ** k)
    ratio = (1.0 - lam * tau) / (1.0 + mu * tau)
    expect = (scale * lam * tau / (1.0 + mu * tau)
              * (1.0 - ratio**steps) / (1.0 - ratio))
    assert lhs == pytest.approx(expect, rel=1e-13)
    # and the infinite-horizon limit is the continuum resolvent weight
    assert expect == pytest.approx(scale * lam / (lam + mu), rel=1e-10)


@given(
    scale=st.floats(min_value=-3, max_value=3),
    rate=st.floats(min_value=0.05, max_value=50),
    tau=st.floats(min_value=1e-4, max_value=0.5),
    steps=st.integers(min_value=1, max_value=500),
)
def test_cell_masses_never_overshoot_mass(scale, rate, tau, steps):
    prof = TimeProfile("exponential", scale=scale, rate=rate)
    w = prof.cell_masses(tau, steps)
    assert w.shape == (steps + 1,)
    assert np.sum(np.abs(w)) <= prof.mass_abs * (1.0 + 1e-12)


@given(
    rate=st.floats(min_value=0.1, max_value=20),
    tau=st.floats(min_value=1e-4, max_value=0.2),
    eps=st.floats(min_value=1e-12, max_value=1e-2),
)
def test_steps_for_tail_is_sufficient_and_minimal(rate, tau, eps):
    prof = TimeProfile("exponential", scale=1.0, rate=rate)
    factor = 1.0
    steps = prof.steps_for_tail(tau, factor, eps)
    lt = rate * tau
    q = 1.0 - lt if lt < 1.0 else 1.0 / (1.0 + lt)
    assume(q > 0.0)
    tail = factor * prof.mass_abs * q**steps
    assert tail <= eps * (1.0 + 1e-9)
    if steps > 1:
        assert factor * prof.mass_abs * q ** (steps - 1) > eps * (1.0 - 1e-9)


def test_steps_for_tail_finite_support():
    prof = TimeProfile("indicator", height=2.0, t_end=0.5)
    assert prof.steps_for_tail(0.1, 10.0, 1e-12) == 5
    zero = TimeProfile("exponential", scale=0.0, rate=1.0)
    assert zero.steps_for_tail(0.1, 10.0, 1e-12) == 1


# -- potentials -----------------------------------------------------------


def test_potential_kind_values():
    r = np.array([-2.0, 0.0, 1.0])
    power = PotentialSpec("power", exponent=1.5)
    np.testing.assert_allclose(power(r), [2.0**1.5, 0.0, 1.0])
    quad = PotentialSpec("quadratic", coefficient=3.0)
    np.testing.assert_allclose(quad(r), [12.0, 0.0, 3.0])
    sig = PotentialSpec("sigmoid", coefficient=2.0)
    np.testing.assert_allclose(sig(r), [2.0 * 4 / 5, 0.0, 1.0])
    const = PotentialSpec("constant", coefficient=0.7)
    np.testing.assert_allclose(const(r), 0.7)


@given(
    kind=st.sampled_from(["power", "quadratic", "sigmoid", "constant"]),
    r=st.floats(min_value=-100, max_value=100),
    coeff=st.floats(min_value=0, max_value=10),
)
def test_potential_is_nonnegative(kind, r, coeff):
    spec = PotentialSpec(kind, exponent=2.0, coefficient=coeff)
    assert spec(r) >= 0.0


def test_potential_validation_and_rescale():
    with pytest.raises(ValueError):
        PotentialSpec("cubic")
    with pytest.raises(ValueError):
        PotentialSpec("power", exponent=0.0)
    with pytest.raises(ValueError):
        PotentialSpec("quadratic", coefficient=-1.0)
    with pytest.raises(ValueError):
        PotentialSpec("quadratic", scale=-0.5)
    spec = PotentialSpec("quadratic", coefficient=2.0).rescaled(3.0)
    assert spec(1.0) == pytest.approx(6.0)


# -- weight and forcing ----------------------------------------------------


def test_weight_norm_combines_mass_and_beta_sup():
    grid = build_grid(1, (0.0, 1.0), 8)
    beta = GridFunction(grid, np.linspace(-0.5, 2.0, 8))
    w = WeightSpec(TimeProfile("exponential", scale=3.0, rate=1.0), beta)
    assert w.max_beta_abs == 2.0
    assert w.l1_linf_norm == pytest.approx(6.0)
    assert w.tail_bound(0.0) == pytest.approx(6.0)
    assert w.tail_bound(10.0) < w.tail_bound(1.0)
    np.testing.assert_allclose(w.beta_values(grid), beta.values)


def test_weight_rejects_zero_alpha_and_foreign_grid():
    with pytest.raises(ValueError):
        WeightSpec(TimeProfile("zero"))
    grid = build_grid(1, (0.0, 1.0), 8)
    other = build_grid(1, (0.0, 1.0), 9)
    w = WeightSpec(
        TimeProfile("exponential"), GridFunction.constant(grid, 1.0)
    )
    with pytest.raises(ValueError, match="different grid"):
        w.beta_values(other)


def test_weight_rescaled_scales_every_kind():
    exp = WeightSpec(TimeProfile("exponential", scale=2.0, rate=1.0)).rescaled(0.5)
    assert exp.alpha.scale == 1.0
    ind = WeightSpec(TimeProfile("indicator", height=2.0, t_end=1.0)).rescaled(2.0)
    assert ind.alpha.height == 4.0
    tab = WeightSpec(
        TimeProfile("tabulated", times=(0.0, 1.0), values=(3.0, 0.0))
    ).rescaled(2.0)
    assert tab.alpha.values == (6.0, 0.0)


def test_forcing_closed_forms_and_flags():
    grid = build_grid(1, (0.0, 1.0), 9)  # 0.5 is a node, so sup g = amplitude
    g = gaussian_bump(grid, 0.5, 0.2, amplitude=2.0)
    f = ForcingSpec(TimeProfile("exponential", scale=0.5, rate=2.0), g)
    assert not f.is_zero
    assert f.max_g_abs == pytest.approx(2.0, rel=1e-12)
    assert f.l1_linf_norm == pytest.approx(0.5 * f.max_g_abs)
    assert f.partial_l1_linf(1e9) == pytest.approx(f.l1_linf_norm)
    assert ForcingSpec().is_zero
    assert ForcingSpec(TimeProfile("indicator"), 0.0).is_zero
    with pytest.raises(ValueError, match="exponential, indicator, or zero"):
        ForcingSpec(TimeProfile("tabulated", times=(0.0, 1.0), values=(1.0, 0.0)))


# -- sampled families and the problem record -------------------------------


def test_sine_mode_samples():
    grid = build_grid(1, (0.0, 1.0), 3)
    v = sine_mode(grid, 1, amplitude=2.0).values
    np.testing.assert_allclose(
        v, 2.0 * np.sin(np.pi * np.array([0.25, 0.5, 0.75])), rtol=1e-14
    )
    grid2 = build_grid(2, ((0.0, 1.0), (0.0, 1.0)), 3)
    v2 = sine_mode(grid2, (1, 2)).values
    x, y = grid2.nodes[:, 0], grid2.nodes[:, 1]
    np.testing.assert_allclose(v2, np.sin(np.pi * x) * np.sin(2 * np.pi * y),
                               atol=1e-14)
    with pytest.raises(ValueError):
        sine_mode(grid, (1, 1))
    with pytest.raises(ValueError):
        sine_mode(grid, 0)


def test_gaussian_bump_peak_and_validation():
    grid = build_grid(1, (0.0, 1.0), 31)
    v = gaussian_bump(grid, 0.5, 0.1, amplitude=3.0).values
    assert np.max(v) == pytest.approx(3.0)  # 0.5 is a node for n = 31
    with pytest.raises(ValueError):
        gaussian_bump(grid, (0.5, 0.5), 0.1)
    with pytest.raises(ValueError):
        gaussian_bump(grid, 0.5, 0.0)


def test_problem_spec_validation_and_operator_cache(make_problem):
    problem = make_problem(n=8)
    assert problem.operator is problem.operator  # assembled once
    grid = build_grid(1, (0.0, 1.0), 8)
    other = build_grid(1, (0.0, 1.0), 9)
    with pytest.raises(ValueError, match="different grid"):
        ProblemSpec(
            grid=grid,
            diffusion=1.0,
            potential=PotentialSpec("quadratic"),
            weight=WeightSpec(TimeProfile("exponential")),
            forcing=ForcingSpec(),
            u0=sine_mode(other, 1),
        )
    with pytest.raises(ValueError, match="p must exceed"):
        make_problem(n=8, p=1.0)
