import numpy as np
import pytest

from experiments.spin_quench import two_level_quench

P_GROUND = 0.7
Q_MAX = np.sqrt(0.21)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def quench():
    """Factory for the spin quench with eps_i = 1, eps_f = 2."""
    def build(q: complex = 0j, p: float = P_GROUND):
        return two_level_quench(p, complex(q), 1.0, 2.0)
    return build
