import numpy as np
import pytest

from fracscatter import PhysicsParams, WaveField, build_wavepacket, make_grid
from fracscatter.grid import POSITION


@pytest.fixture
def grid():
    return make_grid(1, 256, 40.0)


@pytest.fixture
def params():
    return PhysicsParams(rho=0.75, gamma=1.0, lam=1.0, epsilon=0.5)


@pytest.fixture
def packet(grid, params):
    return build_wavepacket(grid, params, 1.0, 0.1)


def random_field(grid, seed=0, representation=POSITION):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return WaveField(grid, vals, representation)
