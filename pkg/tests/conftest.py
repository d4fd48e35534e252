import math

import numpy as np
import pytest
from hypothesis import strategies as st

from quatlie import HMatrix, Quaternion

SQRT2 = math.sqrt(2.0)

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
quaternions = st.builds(Quaternion, finite, finite, finite, finite)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def a_star() -> HMatrix:
    """E12 (1 + j) + E21 (i + k)."""
    return HMatrix.zeros(2).with_entry(0, 1, [1, 0, 1, 0]).with_entry(1, 0, [0, 1, 0, 1])


def b_star() -> HMatrix:
    """diag(1 + i, -1 + i sqrt 2)."""
    return HMatrix.diag([Quaternion(1, 1), Quaternion(-1, SQRT2)])


@pytest.fixture
def star_pair():
    return a_star(), b_star()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
