import numpy as np
import pytest

from s3fields.harmonics import build_basis, hopf_grid


@pytest.fixture(scope="session")
def basis6():
    return build_basis(6)


@pytest.fixture(scope="session")
def grid():
    return hopf_grid((8, 16, 16))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
