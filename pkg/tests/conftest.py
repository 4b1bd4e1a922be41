import numpy as np
import pytest

from specfuse import HsCube, SpectralResponse


@pytest.fixture(scope="session")
def cave_response():
    return SpectralResponse.cave_rgb()


@pytest.fixture
def rng():
    return np.random.default_rng(20260818)


def random_cube(rng, bands, height, width, offset=0.0):
    return HsCube(offset + rng.standard_normal((bands, height, width)))
