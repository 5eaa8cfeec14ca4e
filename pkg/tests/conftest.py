import numpy as np
import pytest

from superkron import EllipticContext, default_generators


@pytest.fixture(scope="session")
def gens():
    return default_generators()


@pytest.fixture(scope="session")
def ctx():
    return EllipticContext(0.3 + 1.1j)


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)
