import numpy as np
import pytest

from esst.design import DesignParams, designed_pulses, polynomial_schedule
from esst.model import Chirality

TAU = 0.5  # microseconds
ETA = 0.02


@pytest.fixture(scope="session")
def params():
    return DesignParams(TAU, ETA)


@pytest.fixture(scope="session")
def pulses(params):
    """Shared field of the headline scenario (left design, eta = 0.02)."""
    return designed_pulses(params, Chirality.LEFT)


@pytest.fixture(scope="session")
def schedules():
    return {
        Chirality.LEFT: polynomial_schedule(DesignParams(TAU, ETA), Chirality.LEFT),
        Chirality.RIGHT: polynomial_schedule(DesignParams(TAU, -ETA), Chirality.RIGHT),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_hermitian(rng, scale=1.0):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    return scale * (a + a.conj().T) / 2
