"""Grid stand-ins for C0 functions on [0, L] and for continuous trajectories.

A :class:`GridFunction` stores the values of a function vanishing at both
ends of [0, L] on the ``n`` interior points ``x_i = (i + 1) L / (n + 1)``.
A :class:`Trajectory` stores ``m + 1`` such profiles at ``t_j = j / m``.
The positive cone is the set of entrywise nonnegative arrays; the sup norm
is the max of absolute values (normal cone with constant 1).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConeViolation, DimensionMismatch


def _frozen_array(values, ndim):
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionMismatch("empty grid")
    if not np.all(np.isfinite(arr)):
        raise ValueError("grid values must be finite")
    arr.setflags(write=False)
    return arr


def grid_points(L: float, n: int) -> np.ndarray:
    return L * np.arange(1, n + 1) / (n + 1)


def time_points(m: int) -> np.ndarray:
    return np.arange(m + 1) / m


@dataclass(frozen=True, eq=False)
class GridFunction:
    L: float
    values: np.ndarray

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"domain length must be positive, got {self.L}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "values", _frozen_array(self.values, 1))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def x(self) -> np.ndarray:
        return grid_points(self.L, self.n)

    @classmethod
    def zeros(cls, L, n):
        return cls(L, np.zeros(n))

    @classmethod
    def from_function(cls, L, n, func):
        """Sample a vectorised ``func(x)`` on the interior grid."""
        x = grid_points(L, n)
        return cls(L, np.broadcast_to(np.asarray(func(x), dtype=float), x.shape))

    def check_compatible(self, other: "GridFunction"):
        if self.n != other.n or self.L != other.L:
            raise DimensionMismatch(
                f"grid (L={self.L}, n={self.n}) vs (L={other.L}, n={other.n})")

    def __add__(self, other):
        self.check_compatible(other)
        return GridFunction(self.L, self.values + other.values)

    def __sub__(self, other):
        self.check_compatible(other)
        return GridFunction(self.L, self.values - other.values)

    def __mul__(self, alpha):
        return GridFunction(self.L, float(alpha) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.L, -self.values)

    def __repr__(self):
        return f"GridFunction(L={self.L!r}, n={self.n}, max={np.max(np.abs(self.values)):.6g})"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Profiles on a uniform time grid of [0, 1]; ``values[j]`` sits at ``t_j = j/m``."""

    L: float
    values: np.ndarray

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"domain length must be positive, got {self.L}")
        object.__setattr__(self, "L", float(self.L))
        arr = _frozen_array(self.values, 2)
        if arr.shape[0] < 2:
            raise DimensionMismatch("a trajectory needs at least two time nodes")
        object.__setattr__(self, "values", arr)

    @property
    def m(self) -> int:
        return self.values.shape[0] - 1

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return time_points(self.m)

    @property
    def x(self) -> np.ndarray:
        return grid_points(self.L, self.n)

    def node(self, j: int) -> GridFunction:
        return GridFunction(self.L, self.values[j])

    def nodes(self):
        return [self.node(j) for j in range(self.m + 1)]

    @classmethod
    def from_nodes(cls, nodes: Sequence[GridFunction]):
        first = nodes[0]
        for v in nodes[1:]:
            first.check_compatible(v)
        return cls(first.L, np.stack([v.values for v in nodes]))

    @classmethod
    def constant(cls, v: GridFunction, m: int):
        return cls(v.L, np.tile(v.values, (m + 1, 1)))

    @classmethod
    def zeros(cls, L, n, m):
        return cls(L, np.zeros((m + 1, n)))

    def check_compatible(self, other: "Trajectory"):
        if self.values.shape != other.values.shape or self.L != other.L:
            raise DimensionMismatch(
                f"trajectory (L={self.L}, m={self.m}, n={self.n}) vs "
                f"(L={other.L}, m={other.m}, n={other.n})")

    def __add__(self, other):
        self.check_compatible(other)
        return Trajectory(self.L, self.values + other.values)

    def __sub__(self, other):
        self.check_compatible(other)
        return Trajectory(self.L, self.values - other.values)

    def __mul__(self, alpha):
        return Trajectory(self.L, float(alpha) * self.values)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Trajectory(L={self.L!r}, m={self.m}, n={self.n})"


@dataclass(frozen=True)
class ConeTolerance:
    """Two-tier tolerance: silently clamp tiny negatives, reject real ones."""

    clamp_eps: float = 1e-10
    violation_eps: float = 1e-8

    def __post_init__(self):
        if self.clamp_eps < 0 or self.violation_eps < 0:
            raise ValueError("cone tolerances must be nonnegative")
        if self.clamp_eps > self.violation_eps:
            raise ValueError("clamp_eps must not exceed violation_eps")


EXACT = ConeTolerance(0.0, 0.0)


class ConeMembership(enum.Enum):
    INSIDE = "inside"
    CLAMPED_INSIDE = "clamped-inside"
    OUTSIDE = "outside"


class ConeStatus(NamedTuple):
    kind: ConeMembership
    violation: float

    @property
    def feasible(self) -> bool:
        return self.kind is not ConeMembership.OUTSIDE


def norm_sup(v: GridFunction) -> float:
    return float(np.max(np.abs(v.values)))


def norm_C(y: Trajectory) -> float:
    return float(np.max(np.abs(y.values)))


def _cone_status(values: np.ndarray, tol: ConeTolerance) -> ConeStatus:
    lowest = float(np.min(values))
    if lowest >= 0.0:
        return ConeStatus(ConeMembership.INSIDE, 0.0)
    violation = -lowest
    if violation > tol.violation_eps:
        return ConeStatus(ConeMembership.OUTSIDE, violation)
    return ConeStatus(ConeMembership.CLAMPED_INSIDE, violation)


def is_in_cone(v, tol: ConeTolerance = ConeTolerance()) -> ConeStatus:
    """Classify ``v`` (a GridFunction or a Trajectory, checked at every node)."""
    return _cone_status(v.values, tol)


def clamp_to_cone(v, tol: ConeTolerance = ConeTolerance(), where: str = ""):
    """Replace roundoff negatives by zero; raise :class:`ConeViolation` otherwise."""
    status = _cone_status(v.values, tol)
    if status.kind is ConeMembership.OUTSIDE:
        raise ConeViolation(status.violation, where)
    if status.kind is ConeMembership.INSIDE:
        return v
    return type(v)(v.L, np.maximum(v.values, 0.0))


def order_leq(u: GridFunction, v: GridFunction, tol: ConeTolerance = ConeTolerance()) -> bool:
    """``u <= v`` in the cone order, i.e. ``v - u`` is (up to tolerance) nonnegative."""
    u.check_compatible(v)
    return _cone_status(v.values - u.values, tol).feasible


def rescale_to_norm(y: Trajectory, rho: float) -> Trajectory:
    """Scale a nonzero trajectory so that its C-norm equals ``rho``."""
    nrm = norm_C(y)
    if nrm == 0.0:
        raise ValueError("cannot rescale the zero trajectory")
    out = y.values * (rho / nrm)
    # pin the maximal entry so norm_C(out) == rho holds without rounding drift
    idx = np.unravel_index(np.argmax(np.abs(out)), out.shape)
    out[idx] = np.copysign(rho, out[idx])
    return Trajectory(y.L, np.clip(out, -rho, rho))
