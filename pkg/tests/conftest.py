import numpy as np
import pytest
from hypothesis import settings

from ehdsolitary import BaseParams, NewtonConfig, init_small, make_grid, newton_solve

settings.register_profile("numeric", deadline=None, max_examples=25)
settings.load_profile("numeric")


@pytest.fixture(scope="session")
def small_wave():
    """Converged small-amplitude wave at eps = 0.01, gamma = 0, eps1 = 0.5."""
    base = BaseParams(0.0, 0.5)
    g = make_grid(256.0, 512)
    t0, p = init_small(0.01, base, g)
    return newton_solve(t0, p, g, NewtonConfig())


@pytest.fixture(scope="session")
def rotational_wave():
    """Converged wave with nonzero vorticity, eps = 0.02, gamma = 0.4."""
    base = BaseParams(0.4, 0.5)
    g = make_grid(224.0, 512)
    t0, p = init_small(0.02, base, g)
    return newton_solve(t0, p, g, NewtonConfig())
