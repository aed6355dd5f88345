import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def z_agree(a, b, se_a, se_b, z=3.0):
    """Two-estimate agreement at z combined standard errors."""
    return abs(a - b) <= z * np.hypot(se_a, se_b)
