"""The solution operator ``T = H + G`` on discretised trajectories.

``H y(t) = U(t) B(y)`` and ``G y(t) = int_0^t U(t - s) f(s, y(s)) ds``. Both
are evaluated on the trajectory's own time grid (collocation). The Duhamel
integral uses a composite Newton-Cotes rule in ``s`` while the semigroup
factor ``U(t_j - t_i)`` is applied exactly; all weights are positive, so the
discrete integral is monotone and maps the cone into itself.

Two rules are available:

* trapezoid -- second order;
* simpson -- composite Simpson on even nodes, with a closing 3/8 panel on odd
  nodes (trapezoid on the first step); fourth order. This is the default.

Each rule comes in a recurrence form (``O(m)`` applications of ``U(dt)``
through the semigroup law) and a direct form (``O(m^2)`` sum over lags), which
agree up to rounding and cross-check each other.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import DimensionMismatch, QuadratureMismatch
from .lattice import (ConeTolerance, GridFunction, Trajectory, clamp_to_cone,
                      norm_C)
from .semigroup import SemigroupHandle


class Quadrature(enum.Enum):
    TRAPEZOID_RECURRENCE = "trapezoid-recurrence"
    TRAPEZOID_DIRECT = "trapezoid-direct"
    SIMPSON_RECURRENCE = "simpson-recurrence"
    SIMPSON_DIRECT = "simpson-direct"

    @property
    def rule(self) -> str:
        return self.value.split("-")[0]

    @property
    def is_direct(self) -> bool:
        return self.value.endswith("direct")

    def counterpart(self) -> "Quadrature":
        """Same rule, other evaluation scheme."""
        scheme = "recurrence" if self.is_direct else "direct"
        return Quadrature(f"{self.rule}-{scheme}")


@dataclass(frozen=True)
class MildConfig:
    """``m`` is inherited from the trajectory when left as None."""

    quadrature: Quadrature = Quadrature.SIMPSON_RECURRENCE
    m: Union[int, None] = None

    def __post_init__(self):
        object.__setattr__(self, "quadrature", Quadrature(self.quadrature))
        if self.m is not None and self.m < 2:
            raise ValueError(f"need m >= 2 time steps, got {self.m}")


NonlocalMap = Callable[[Trajectory], GridFunction]
Nonlinearity = Callable[[float, GridFunction], GridFunction]


def quadrature_weights(m: int, rule: str) -> np.ndarray:
    """Lower-triangular ``W`` with ``int_0^{t_j} phi ~ sum_i W[j, i] phi(t_i)``."""
    dt = 1.0 / m
    W = np.zeros((m + 1, m + 1))
    for j in range(1, m + 1):
        if rule == "trapezoid" or j == 1:
            W[j, :j + 1] = dt
            W[j, 0] = W[j, j] = dt / 2
            continue
        if rule != "simpson":
            raise ValueError(f"unknown quadrature rule {rule!r}")
        even_end = j if j % 2 == 0 else j - 3
        if even_end > 0:
            w = np.full(even_end + 1, 2.0)
            w[1::2] = 4.0
            w[0] = w[-1] = 1.0
            W[j, :even_end + 1] = w * dt / 3
        if j % 2 == 1:
            W[j, even_end:j + 1] += np.array([1.0, 3.0, 3.0, 1.0]) * 3 * dt / 8
    return W


def _check_dims(U: SemigroupHandle, y: Trajectory, cfg: Union[MildConfig, None] = None):
    if cfg is not None and cfg.m is not None and cfg.m != y.m:
        raise DimensionMismatch(f"config expects m={cfg.m}, trajectory has m={y.m}")
    if y.n != U.n or y.L != U.L:
        raise DimensionMismatch(
            f"trajectory on (L={y.L}, n={y.n}) vs semigroup on (L={U.L}, n={U.n})")


def integrand_values(f, y: Trajectory) -> np.ndarray:
    """``f(t_j, y(t_j))`` stacked row-wise; uses ``f.on_trajectory`` when present."""
    fast = getattr(f, "on_trajectory", None)
    if fast is not None:
        return np.asarray(fast(y), dtype=float)
    times = y.times
    return np.stack([f(float(times[j]), y.node(j)).values for j in range(y.m + 1)])


def duhamel(U: SemigroupHandle, F: np.ndarray, quadrature: Quadrature,
            dt: Union[float, None] = None) -> np.ndarray:
    """``G_j ~ int_0^{t_j} U(t_j - s) F(s) ds`` for integrand rows ``F[j]``.

    Rows sit at ``t_j = j dt``; ``dt`` defaults to a grid ending at 1.
    """
    quadrature = Quadrature(quadrature)
    F = np.asarray(F, dtype=float)
    m = F.shape[0] - 1
    if m < 1:
        raise DimensionMismatch("need at least two time nodes")
    if dt is None:
        dt = 1.0 / m
    G = np.zeros_like(F)
    if quadrature.is_direct:
        W = quadrature_weights(m, quadrature.rule) * (dt * m)
        for lag in range(m + 1):
            # every pair (j, i = j - lag) shares the propagator U(lag dt)
            j = np.arange(lag, m + 1)
            w = W[j, j - lag]
            if not np.any(w):
                continue
            G[j] += U.propagate(lag * dt, F[j - lag] * w[:, None])
        return G

    def step(v):
        return U.propagate(dt, v)

    G[1] = step(F[0] * (dt / 2)) + F[1] * (dt / 2)
    if quadrature.rule == "trapezoid":
        for j in range(1, m):
            G[j + 1] = step(G[j] + F[j] * (dt / 2)) + F[j + 1] * (dt / 2)
        return G
    for j in range(2, m + 1):
        if j % 2 == 0:
            acc = step(G[j - 2] + F[j - 2] * (dt / 3)) + F[j - 1] * (4 * dt / 3)
            G[j] = step(acc) + F[j] * (dt / 3)
        elif j >= 3:
            acc = step(G[j - 3] + F[j - 3] * (3 * dt / 8)) + F[j - 2] * (9 * dt / 8)
            acc = step(acc) + F[j - 1] * (9 * dt / 8)
            G[j] = step(acc) + F[j] * (3 * dt / 8)
    return G


def apply_H(U: SemigroupHandle, B: NonlocalMap, y: Trajectory) -> Trajectory:
    """``t_j -> U(t_j) B(y)``; node 0 is ``B(y)`` itself."""
    _check_dims(U, y)
    b = B(y)
    return Trajectory(y.L, U.propagate_times(y.times, b.values))


def apply_G(U: SemigroupHandle, f: Nonlinearity, y: Trajectory,
            cfg: MildConfig = MildConfig(), cross_check_tol: Union[float, None] = None) -> Trajectory:
    """Duhamel term of ``T``; node 0 is zero.

    With ``cross_check_tol`` the counterpart scheme is evaluated as well and
    :class:`QuadratureMismatch` is raised if the two differ by more than that
    (relative to the larger C-norm).
    """
    _check_dims(U, y, cfg)
    F = integrand_values(f, y)
    G = duhamel(U, F, cfg.quadrature)
    if cross_check_tol is not None:
        other = duhamel(U, F, cfg.quadrature.counterpart())
        scale = max(np.max(np.abs(G)), np.max(np.abs(other)), np.finfo(float).tiny)
        gap = np.max(np.abs(G - other)) / scale
        if gap > cross_check_tol:
            raise QuadratureMismatch(
                f"{cfg.quadrature.value} vs {cfg.quadrature.counterpart().value}: "
                f"relative gap {gap:.3e} > {cross_check_tol:.3e}")
    return Trajectory(y.L, G)


def apply_T(U: SemigroupHandle, B: NonlocalMap, f: Nonlinearity, y: Trajectory,
            cfg: MildConfig = MildConfig(), tol: ConeTolerance = ConeTolerance(),
            clamp: bool = True) -> Trajectory:
    """``T y = H y + G y``, repaired onto the cone unless ``clamp`` is off."""
    H = apply_H(U, B, y)
    G = apply_G(U, f, y, cfg)
    out = Trajectory(y.L, H.values + G.values)
    if clamp:
        out = clamp_to_cone(out, tol, where="T(y)")
    return out


def residual(U: SemigroupHandle, B: NonlocalMap, f: Nonlinearity, y: Trajectory,
             lam: float, cfg: MildConfig = MildConfig(),
             tol: ConeTolerance = ConeTolerance()) -> float:
    """``||y - lam T(y)||_C``, the defect of the mild eigen-equation."""
    if lam == 0:
        return norm_C(y)
    Ty = apply_T(U, B, f, y, cfg, tol)
    return norm_C(Trajectory(y.L, y.values - lam * Ty.values))
