import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from mildeig.errors import DimensionMismatch, NegativeTime
from mildeig.lattice import GridFunction, grid_points
from mildeig.semigroup import (SemigroupHandle, check_axioms, dirichlet_laplacian, dst_matrix,
                               estimate_D, expm_pade13, mode_amplification,
                               point_mass_negativity)

L = math.pi


def test_dst_orthonormal():
    S = dst_matrix(17)
    assert np.allclose(S @ S.T, np.eye(17), atol=1e-14)


@pytest.mark.parametrize("n", [5, 20])
def test_expm_matches_scipy(n):
    A = dirichlet_laplacian(L, n, 8) * 0.3
    assert np.allclose(expm_pade13(A), scipy.linalg.expm(A), rtol=1e-12, atol=1e-14)


def test_sine_mode_decays_exactly():
    U = SemigroupHandle.spectral(L, 31)
    v = np.sin(3 * grid_points(L, 31))
    out = U.propagate(0.4, v)
    assert np.allclose(out, math.exp(-9 * 0.4) * v, atol=1e-14)


def test_identity_and_negative_time():
    U = SemigroupHandle.spectral(L, 7)
    v = GridFunction(L, np.arange(7.0))
    assert U.apply(0.0, v) is v
    with pytest.raises(NegativeTime):
        U.apply(-0.1, v)
    with pytest.raises(DimensionMismatch):
        U.apply(0.1, GridFunction(L, np.ones(6)))


@pytest.mark.parametrize("factory", [SemigroupHandle.spectral, SemigroupHandle.matrix_exp])
def test_axioms(factory):
    rep = check_axioms(factory(L, 31), samples=50, tol=1e-10)
    assert rep.passed, rep


def test_growth_bound_is_one():
    U = SemigroupHandle.spectral(L, 31)
    assert estimate_D(U) == pytest.approx(1.0, abs=1e-12)
    assert U.bound_D >= 1.0


def test_mode_factors_decrease():
    f = mode_amplification(SemigroupHandle.spectral(L, 15), 1.0)
    assert np.all(np.diff(f) < 0) and f[0] < 1


@pytest.mark.parametrize("order,tol", [(2, 1e-2), (4, 1e-4), (8, 1e-7)])
def test_fd_order_accuracy(order, tol):
    n = 64
    a = SemigroupHandle.spectral(L, n)
    b = SemigroupHandle.matrix_exp(L, n, fd_order=order)
    v = np.sin(3 * grid_points(L, n)) + 0.5 * np.sin(grid_points(L, n))
    for t in (0.1, 0.5, 1.0):
        ref = a.propagate(t, v)
        assert np.max(np.abs(b.propagate(t, v) - ref)) <= tol * np.max(np.abs(ref))


U15 = SemigroupHandle.spectral(L, 15)


def test_point_mass_side_lobes():
    # short-time lobes are real; they vanish once t exceeds about 2.5 h^2
    U = SemigroupHandle.spectral(L, 63)
    h2 = (L / 64) ** 2
    assert point_mass_negativity(U, 0.1 * h2) > 1e-4
    assert point_mass_negativity(U, 2.5 * h2) < 1e-12
    assert point_mass_negativity(SemigroupHandle.matrix_exp(L, 63, fd_order=2), 0.1 * h2) == 0.0


@given(st.floats(2.5 * (L / 16) ** 2, 2), st.lists(st.floats(0, 5), min_size=15, max_size=15))
def test_positivity_property(t, v):
    out = U15.propagate(t, np.array(v))
    assert np.min(out) >= -1e-12 * max(1.0, max(v))


@given(st.floats(0, 1), st.floats(0, 1),
       st.lists(st.floats(-5, 5), min_size=15, max_size=15))
def test_composition_property(t, s, v):
    v = np.array(v)
    lhs = U15.propagate(t + s, v)
    rhs = U15.propagate(t, U15.propagate(s, v))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(v)))
