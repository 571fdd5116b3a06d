"""Shared hypothesis strategies."""
import math

import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mildeig.lattice import GridFunction, Trajectory

L = math.pi
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
nonneg = st.floats(0.0, 1e3, allow_nan=False, allow_infinity=False)
scalars = st.floats(0.0, 1e2, allow_nan=False, allow_infinity=False)


def grid_functions(n, elements=finite):
    return arrays(np.float64, n, elements=elements).map(lambda a: GridFunction(L, a))


def cone_trajectories(m, n, hi=1.0):
    return arrays(np.float64, (m + 1, n), elements=st.floats(0.0, hi)).map(
        lambda a: Trajectory(L, a))
