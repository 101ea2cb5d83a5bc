import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from epochsa import make_least_squares, make_logistic


@pytest.fixture(scope="session")
def ls_realizable():
    """Isotropic least squares, zero noise: F* = 0, kappa = 4."""
    return make_least_squares(4, [1.0, 1.0, 1.0, 1.0], 2.0, 0.0, seed=7)


@pytest.fixture(scope="session")
def ls_noisy():
    """Same problem with bounded label noise: F* = 0.03 exactly."""
    return make_least_squares(4, [1.0, 1.0, 1.0, 1.0], 2.0, 0.3, seed=7)


@pytest.fixture(scope="session")
def logistic_small():
    """Ridge logistic on the unit circle; optimum and F* estimated numerically."""
    return make_logistic(2, 2.0, 0.05, seed=11)
