import pytest
from hypothesis import HealthCheck, settings

from nonlocal_heat import (
    ForcingSpec,
    PotentialSpec,
    ProblemSpec,
    TimeProfile,
    WeightSpec,
    build_grid,
    sine_mode,
)

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def make_problem():
    """Factory for small 1D/2D problems with an exponential weight."""

    def build(n=32, dim=1, amplitude=1.0, rate=1.0, weight_scale=1.0,
              potential=None, forcing=None, beta=1.0, p=None, endpoints=None,
              diffusion=1.0):
        if endpoints is None:
            endpoints = (0.0, 1.0) if dim == 1 else ((0.0, 1.0), (0.0, 1.0))
        grid = build_grid(dim, endpoints, n)
        return ProblemSpec(
            grid=grid,
            diffusion=diffusion,
            potential=potential if potential is not None
            else PotentialSpec("quadratic"),
            weight=WeightSpec(
                TimeProfile("exponential", scale=weight_scale, rate=rate), beta
            ),
            forcing=forcing if forcing is not None else ForcingSpec(),
            u0=sine_mode(grid, (1,) * (2 if dim == 2 else 1), amplitude),
            p=p if p is not None else (2.0 if dim == 1 else 3.0),
        )

    return build
