import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "coaglab", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("coaglab")


@pytest.fixture(scope="session")
def grid():
    from coaglab.density import default_grid
    return default_grid()


@pytest.fixture(scope="session")
def exp_sampled(grid):
    """``e^{-x}`` as plain samples (no analytic law or extension)."""
    from coaglab.density import GriddedDensity
    return GriddedDensity(grid, np.exp(-grid))


@pytest.fixture(scope="session")
def gamma22_sampled(grid):
    from coaglab.density import GriddedDensity
    return GriddedDensity(grid, 4.0 * grid * np.exp(-2.0 * grid))
