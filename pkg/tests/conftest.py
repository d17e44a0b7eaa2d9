import numpy as np
import pytest

from pulsetube import (GasParams, build_grid, init_layer, make_params,
                       builtin_forcing)


@pytest.fixture(scope="session")
def gp14():
    """Default gas at gamma=1.4 with the stock band scale."""
    return make_params(1.4, 8.0)


@pytest.fixture(scope="session")
def gp53():
    return make_params(5.0 / 3.0, 8.0)


@pytest.fixture(scope="session")
def handmade_gp():
    # hand-picked offsets so the zeta/V/g pins below stay independent of
    # the parameter-coupling formulas
    return GasParams(gamma=1.4, theta=0.2, eps=0.01, band_scale=2.0,
                     zeta_offset=2.2, alpha_zeta=3.7, rho_bar=1.0,
                     energy0=0.0)


@pytest.fixture(scope="session")
def grid25(gp14):
    return build_grid(25, gp14)


@pytest.fixture(scope="session")
def grid4(gp14):
    return build_grid(4, gp14)


@pytest.fixture()
def flat_layer(grid4, gp14):
    def u0(x):
        x = np.asarray(x)
        return np.full_like(x, 1.0), np.zeros_like(x)
    return init_layer(u0, grid4, gp14)


@pytest.fixture(scope="session")
def zero_forcing():
    return builtin_forcing("zero")
