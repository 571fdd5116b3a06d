"""Problem instances ``u_t = u_xx + lam g(t, x, u)``, ``u(0) = lam B(u)`` on [0, L].

A :class:`ProblemInstance` bundles the semigroup, the reaction term
``f(t, v)(x) = g(t, x, v(x))``, the nonlocal initial operator ``B`` and the
lower-bound data ``(delta_rho, eta_rho, t0)``. :func:`check_hypotheses`
tests the positivity and lower-bound conditions on random trajectories of
sup norm ``rho``; sampling can falsify them but never prove them.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ConeViolation, DimensionMismatch, DomainExceeded, ValidationError
from .expr import Expression
from .lattice import (ConeTolerance, GridFunction, Trajectory, clamp_to_cone,
                      grid_points, is_in_cone, norm_sup, rescale_to_norm,
                      time_points)
from .mild import MildConfig, apply_T, duhamel, residual
from .semigroup import SemigroupHandle, SemigroupKind, point_mass_negativity

DOMAIN_SLACK = 1e-12


def _trapezoid(values, m, axis=0):
    return np.trapezoid(values, dx=1.0 / m, axis=axis)


def _snap(t, m):
    """Nearest time-grid index of ``t`` and the snapping distance."""
    j = int(round(t * m))
    j = min(max(j, 0), m)
    return j, abs(t - j / m)


# --------------------------------------------------------------------------
# reaction term


class Nonlinearity:
    """``g(t, x, u)`` lifted to ``f(t, v) = g(t, x_i, v_i)`` on the grid.

    ``g`` must be vectorised and nonnegative for ``u >= 0``.
    """

    def __init__(self, g: Callable, name: str = "custom", params=None, linear=False):
        self.g = g
        self.name = name
        self.params = dict(params or {})
        self.linear = linear

    @classmethod
    def power_law(cls, c: float, p: float, L: float):
        if c < 0:
            raise ValidationError("power-law coefficient must be nonnegative")
        if p <= 0:
            raise ValidationError("power-law exponent must be positive")

        def g(t, x, u):
            return c * t * x * (L - x) * np.power(u, p)

        return cls(g, "power-law", {"c": c, "p": p}, linear=(p == 1))

    @classmethod
    def linear_preset(cls):
        return cls(lambda t, x, u: u + 0.0 * (t + x), "linear", linear=True)

    @classmethod
    def zero(cls):
        return cls(lambda t, x, u: 0.0 * (t + x + u), "zero", linear=True)

    @classmethod
    def from_expression(cls, expr: Expression):
        extra = expr.variables - {"t", "x", "u"}
        if extra:
            raise ValidationError(f"g may only use t, x, u; found {sorted(extra)}")
        return cls(lambda t, x, u: expr(t=t, x=x, u=u), "expression", {"expression": str(expr)})

    def values(self, t, x, u) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.g(t, x, u), dtype=float),
                               np.broadcast_shapes(np.shape(t), np.shape(x), np.shape(u)))

    def validate(self, L: float, rho: float, points: int = 20):
        """Reject ``g`` that is negative on [0,1] x [0,L] x [0,rho] or nonzero
        at a boundary point for ``u = 0``."""
        t, x, u = np.meshgrid(np.linspace(0, 1, points), np.linspace(0, L, points),
                              np.linspace(0, rho, points), indexing="ij")
        vals = self.values(t, x, u)
        if not np.all(np.isfinite(vals)):
            raise ValidationError(f"g ({self.name}) is not finite on its domain")
        if np.min(vals) < 0:
            raise ValidationError(f"g ({self.name}) takes the negative value {np.min(vals):.3e}")
        ts = np.linspace(0, 1, points)
        edge = self.values(ts[:, None], np.array([0.0, L])[None, :], 0.0)
        if np.max(np.abs(edge)) > 1e-9 * (1.0 + np.max(np.abs(vals))):
            raise ValidationError(f"g ({self.name}) must vanish at the boundary for u = 0")

    def describe(self):
        return {"name": self.name, **self.params}


# --------------------------------------------------------------------------
# nonlocal initial operators


class Beta:
    """Scalar functional of the sensor history ``phi(t_j) = y(t_j)(x*)``."""

    linear = True

    def __call__(self, phi: np.ndarray) -> float:
        raise NotImplementedError


class ExpIntegral(Beta):
    linear = False

    def __call__(self, phi):
        return float(_trapezoid(np.exp(phi), len(phi) - 1))

    def describe(self):
        return {"kind": "exp-integral"}


@dataclass
class PointEval(Beta):
    t1: float

    def __post_init__(self):
        if not 0.0 <= self.t1 <= 1.0:
            raise ValidationError(f"point-eval time {self.t1} outside [0, 1]")

    def __call__(self, phi):
        j, _ = _snap(self.t1, len(phi) - 1)
        return float(phi[j])

    def describe(self):
        return {"kind": "point-eval", "t1": self.t1}


class WeightedIntegral(Beta):
    def __init__(self, weight: Callable):
        self.weight = weight

    def __call__(self, phi):
        m = len(phi) - 1
        return float(_trapezoid(self.weight(time_points(m)) * phi, m))

    def describe(self):
        return {"kind": "weighted-integral"}


def _check_weight(weight, what):
    w = np.asarray(weight(np.linspace(0, 1, 201)), dtype=float)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValidationError(f"{what} must be finite and nonnegative on [0, 1]")


class NonlocalOperator:
    linear = True

    def __call__(self, y: Trajectory) -> GridFunction:
        raise NotImplementedError


class Pointwise(NonlocalOperator):
    """``B(y)(x) = alpha(x) beta(y(.)(x*))`` with ``x*`` a grid point."""

    def __init__(self, alpha: GridFunction, beta: Beta, sensor: float, tol: float = 1e-9):
        if np.any(alpha.values < 0):
            raise ValidationError("alpha must be nonnegative")
        x = alpha.x
        idx = int(np.argmin(np.abs(x - sensor)))
        if abs(x[idx] - sensor) > tol * alpha.L:
            raise ValidationError(
                f"sensor x*={sensor!r} is not a grid point (nearest {float(x[idx]):.17g}); "
                f"choose n so that x* = k L/(n+1)")
        if isinstance(beta, WeightedIntegral):
            _check_weight(beta.weight, "beta weight")
        self.alpha = alpha
        self.beta = beta
        self.sensor = float(sensor)
        self.sensor_index = idx
        self.linear = beta.linear

    def __call__(self, y):
        phi = y.values[:, self.sensor_index]
        return GridFunction(y.L, self.alpha.values * self.beta(phi))

    def describe(self):
        return {"form": "pointwise", "sensor": self.sensor, "beta": self.beta.describe()}


class Multipoint(NonlocalOperator):
    """``B(y) = sum_i c_i y(t_i)``, each ``t_i`` snapped to the time grid."""

    def __init__(self, times: Sequence[float], coeffs: Sequence[float]):
        if len(times) != len(coeffs):
            raise ValidationError("multipoint needs as many coefficients as times")
        if any(c < 0 for c in coeffs):
            raise ValidationError("multipoint coefficients must be nonnegative")
        if any(not 0.0 <= t <= 1.0 for t in times):
            raise ValidationError("multipoint times must lie in [0, 1]")
        self.times = [float(t) for t in times]
        self.coeffs = [float(c) for c in coeffs]

    def snap_distances(self, m: int):
        return [_snap(t, m)[1] for t in self.times]

    def __call__(self, y):
        out = np.zeros(y.n)
        for t, c in zip(self.times, self.coeffs):
            out += c * y.values[_snap(t, y.m)[0]]
        return GridFunction(y.L, out)

    def describe(self):
        return {"form": "multipoint", "times": self.times, "coeffs": self.coeffs}


class Periodic(NonlocalOperator):
    def __call__(self, y):
        return y.node(y.m)

    def describe(self):
        return {"form": "periodic"}


class IntegralAverage(NonlocalOperator):
    """``B(y) = int_0^1 w(s) y(s) ds`` by the trapezoid rule."""

    def __init__(self, weight: Union[Callable, None] = None):
        self.weight = weight if weight is not None else (lambda s: np.ones_like(s))
        _check_weight(self.weight, "integral-average weight")

    def __call__(self, y):
        w = np.asarray(self.weight(y.times), dtype=float)
        return GridFunction(y.L, _trapezoid(w[:, None] * y.values, y.m))

    def describe(self):
        return {"form": "integral-average"}


class ZeroOperator(NonlocalOperator):
    def __call__(self, y):
        return GridFunction.zeros(y.L, y.n)

    def describe(self):
        return {"form": "zero"}


# --------------------------------------------------------------------------
# instance


@dataclass
class CertificateData:
    """Lower bounds ``f(t, y(t)) >= delta_rho(t)`` and ``B(y) >= eta_rho`` on
    the sphere of radius ``rho``, and the time ``t0`` probed by the H4 quantity."""

    delta_rho: Trajectory
    eta_rho: GridFunction
    t0: float
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValidationError("rho must be positive")
        if not 0.0 < self.t0 <= 1.0:
            raise ValidationError(f"t0 must lie in (0, 1], got {self.t0}")
        _, dist = _snap(self.t0, self.delta_rho.m)
        if dist > 1e-9:
            raise ValidationError(f"t0={self.t0} is not on the time grid (m={self.delta_rho.m})")
        for what, v in (("delta_rho", self.delta_rho), ("eta_rho", self.eta_rho)):
            status = is_in_cone(v, ConeTolerance())
            if not status.feasible:
                raise ValidationError(f"{what} leaves the cone by {status.violation:.3e}")

    @property
    def t0_index(self):
        return _snap(self.t0, self.delta_rho.m)[0]

    @classmethod
    def trivial(cls, L, n, m, rho, eta: Union[GridFunction, None] = None, t0=1.0):
        return cls(Trajectory.zeros(L, n, m), eta if eta is not None else GridFunction.zeros(L, n),
                   t0, rho)


class _FMap:
    """``f`` as seen by the mild operator, with or without domain checks."""

    def __init__(self, problem, check):
        self.problem = problem
        self.check = check

    def __call__(self, t, v):
        if self.check:
            return self.problem.eval_f(t, v)
        return GridFunction(v.L, self.problem.nonlinearity.values(t, v.x, v.values))

    def on_trajectory(self, y):
        return self.problem.f_values(y, check=self.check)


class _BMap:
    def __init__(self, problem, check):
        self.problem = problem
        self.check = check

    def __call__(self, y):
        if self.check:
            return self.problem.eval_B(y)
        return self.problem.nonlocal_op(y)


@dataclass
class ProblemInstance:
    L: float
    n: int
    m: int
    semigroup: SemigroupHandle
    nonlinearity: Nonlinearity
    nonlocal_op: NonlocalOperator
    certificate: CertificateData
    cone_tol: ConeTolerance = field(default_factory=ConeTolerance)
    mild: MildConfig = field(default_factory=MildConfig)
    name: str = "custom"
    validate_g: bool = True

    def __post_init__(self):
        if self.semigroup.n != self.n or self.semigroup.L != self.L:
            raise DimensionMismatch("semigroup grid does not match the instance")
        c = self.certificate
        if c.delta_rho.n != self.n or c.delta_rho.m != self.m or c.eta_rho.n != self.n:
            raise DimensionMismatch("certificate data grid does not match the instance")
        if self.mild.m not in (None, self.m):
            raise DimensionMismatch("mild config m does not match the instance")
        if self.validate_g:
            self.nonlinearity.validate(self.L, self.rho)

    @property
    def rho(self) -> float:
        return self.certificate.rho

    @property
    def x(self):
        return grid_points(self.L, self.n)

    @property
    def times(self):
        return time_points(self.m)

    def with_rho(self, rho: float) -> "ProblemInstance":
        if rho == self.rho:
            return self
        return replace(self, certificate=replace(self.certificate, rho=float(rho)))

    def with_semigroup(self, semigroup: SemigroupHandle, mild: Union[MildConfig, None] = None):
        return replace(self, semigroup=semigroup, mild=mild or self.mild, validate_g=False)

    # -- f --------------------------------------------------------------

    def _check_domain(self, values, what):
        limit = self.rho * (1 + DOMAIN_SLACK)
        top = float(np.max(np.abs(values)))
        if top > limit:
            raise DomainExceeded(f"{what}: sup norm {top!r} exceeds rho={self.rho!r}")
        status = is_in_cone(GridFunction(self.L, np.ravel(values)), self.cone_tol)
        if not status.feasible:
            raise ConeViolation(status.violation, what)

    def eval_f(self, t: float, v: GridFunction) -> GridFunction:
        self._check_domain(v.values, "f argument")
        u = np.maximum(v.values, 0.0)
        out = GridFunction(self.L, self.nonlinearity.values(t, self.x, u))
        return clamp_to_cone(out, self.cone_tol, where="f(t, v)")

    def f_values(self, y: Trajectory, check: bool = True) -> np.ndarray:
        u = y.values
        if check:
            self._check_domain(u, "f argument")
            u = np.maximum(u, 0.0)
        out = self.nonlinearity.values(self.times[:, None], self.x[None, :], u)
        if check:
            out = clamp_to_cone(Trajectory(self.L, out), self.cone_tol, where="f(t, y)").values
        return out

    # -- B --------------------------------------------------------------

    def eval_B(self, y: Trajectory) -> GridFunction:
        if y.n != self.n or y.m != self.m:
            raise DimensionMismatch("trajectory grid does not match the instance")
        self._check_domain(y.values, "B argument")
        return clamp_to_cone(self.nonlocal_op(y), self.cone_tol, where="B(y)")

    # -- T --------------------------------------------------------------

    def f_map(self, check=True):
        return _FMap(self, check)

    def B_map(self, check=True):
        return _BMap(self, check)

    def T(self, y: Trajectory, check: bool = True, clamp: bool = True) -> Trajectory:
        return apply_T(self.semigroup, self.B_map(check), self.f_map(check), y,
                       self.mild, self.cone_tol, clamp=clamp)

    def residual(self, y: Trajectory, lam: float) -> float:
        return residual(self.semigroup, self.B_map(), self.f_map(), y, lam,
                        self.mild, self.cone_tol)

    def describe(self):
        return {
            "name": self.name, "L": self.L, "n": self.n, "m": self.m, "rho": self.rho,
            "semigroup": self.semigroup.kind.value,
            "quadrature": self.mild.quadrature.value,
            "nonlinearity": self.nonlinearity.describe(),
            "nonlocal": self.nonlocal_op.describe(),
            "t0": self.certificate.t0,
        }


def eval_f(p: ProblemInstance, t: float, v: GridFunction) -> GridFunction:
    return p.eval_f(t, v)


def eval_B(p: ProblemInstance, y: Trajectory) -> GridFunction:
    return p.eval_B(y)


def h4_quantity(semigroup: SemigroupHandle, eta: GridFunction, delta: Trajectory,
                t0_index: int, mild: MildConfig) -> GridFunction:
    """``U(t0) eta + int_0^{t0} U(t0 - s) delta(s) ds`` on the instance's quadrature."""
    m = delta.m
    dt = 1.0 / m
    t0 = t0_index / m
    head = semigroup.propagate(t0, eta.values)
    if t0_index == 0:
        return GridFunction(eta.L, head)
    G = duhamel(semigroup, delta.values[:t0_index + 1], mild.quadrature, dt=dt)
    return GridFunction(eta.L, head + G[t0_index])


def compute_H4(p: ProblemInstance) -> float:
    c = p.certificate
    return norm_sup(h4_quantity(p.semigroup, c.eta_rho, c.delta_rho, c.t0_index, p.mild))


# --------------------------------------------------------------------------
# hypothesis checker


@dataclass
class HypothesisReport:
    M_rho: float
    N_rho: float
    h2_margin: float
    h3_margin: float
    h4_value: float
    pass_H1: bool
    pass_H2: bool
    pass_H3: bool
    pass_H4: bool
    samples: int
    rho: float
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.pass_H1 and self.pass_H2 and self.pass_H3 and self.pass_H4

    def to_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return out

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d.pop("passed", None)
        return cls(**d)


def sample_sphere(L, n, m, rho, rng, count) -> list:
    """Random nonnegative trajectories with ``norm_C == rho`` exactly."""
    out = []
    for _ in range(count):
        raw = rng.uniform(0.0, 1.0, size=(m + 1, n)) ** rng.uniform(0.5, 4.0)
        out.append(rescale_to_norm(Trajectory(L, raw), rho))
    return out


def _structured_samples(p):
    """Extreme points of the sphere that random draws rarely reach."""
    L, n, m, rho = p.L, p.n, p.m, p.rho
    full = Trajectory(L, np.full((m + 1, n), rho))
    mode = Trajectory.constant(GridFunction(L, rho * np.sin(np.pi * p.x / L)), m)
    mode = rescale_to_norm(mode, rho)
    ramp = Trajectory(L, np.outer(time_points(m), np.full(n, rho)))
    return [full, mode, ramp]


def _h1_proxy(U: SemigroupHandle, dt: float, tol: ConeTolerance, rng, notes) -> bool:
    """Positivity at the times the scheme uses plus decay of the mode factors.

    Point masses are propagated over the shortest step ``dt``; below about
    2.5 h^2 the discrete semigroups develop negative side lobes.
    """
    probes = rng.uniform(0.0, 1.0, size=(64, U.n))
    worst = 0.0
    for t in (0.01, 0.1, 1.0):
        worst = max(worst, float(-min(0.0, np.min(U.propagate(t, probes)))))
    lobes = point_mass_negativity(U, dt)
    factors = np.exp(-U.mode_rates() * 1.0)
    decays = bool(np.all(factors < 1.0) and factors[-1] < factors[0])
    notes.append(f"H1 proxy: positivity defect {worst:.2e} on random cone vectors, "
                 f"{lobes:.2e} on point masses at t = {dt:g}; mode factors at t=1 decay "
                 f"from {factors[0]:.3e} to {factors[-1]:.3e} (compactness proxy only)")
    return worst <= 1e-10 and lobes <= tol.violation_eps and decays


def check_hypotheses(p: ProblemInstance, samples: int = 64, seed: int = 0) -> HypothesisReport:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    notes = []
    trajs = _structured_samples(p) + sample_sphere(p.L, p.n, p.m, p.rho, rng, samples)
    delta = p.certificate.delta_rho.values
    eta = p.certificate.eta_rho.values

    M_rho = N_rho = 0.0
    h2 = h3 = math.inf
    cone_ok = True
    for y in trajs:
        F = p.nonlinearity.values(p.times[:, None], p.x[None, :], y.values)
        b = p.nonlocal_op(y).values
        if np.min(F) < -p.cone_tol.clamp_eps or np.min(b) < -p.cone_tol.clamp_eps:
            cone_ok = False
        M_rho = max(M_rho, float(np.max(np.abs(F))))
        N_rho = max(N_rho, float(np.max(np.abs(b))))
        h2 = min(h2, float(np.min(F - delta)))
        h3 = min(h3, float(np.min(b - eta)))
    if not cone_ok:
        notes.append("f or B produced values outside the cone on a sample")

    h4 = compute_H4(p)
    eps = p.cone_tol.clamp_eps
    pass_H2 = cone_ok and math.isfinite(M_rho) and h2 >= -eps
    pass_H3 = cone_ok and math.isfinite(N_rho) and h3 >= -eps
    notes.append(f"{len(trajs)} trajectories on the sphere of radius {p.rho} "
                 f"(sampling can falsify, not prove)")
    return HypothesisReport(
        M_rho=M_rho, N_rho=N_rho, h2_margin=h2, h3_margin=h3, h4_value=h4,
        pass_H1=_h1_proxy(p.semigroup, 1.0 / p.m, p.cone_tol, rng, notes), pass_H2=pass_H2, pass_H3=pass_H3,
        pass_H4=h4 > 0.0, samples=len(trajs), rho=p.rho, notes=notes)


# --------------------------------------------------------------------------
# presets


def sine_profile(L, n) -> GridFunction:
    return GridFunction.from_function(L, n, lambda x: np.sin(np.pi * x / L))


def paper_example(n: int = 63, m: int = 64, rho: float = 1.0,
                  kind: SemigroupKind = SemigroupKind.SPECTRAL_HEAT,
                  mild: Union[MildConfig, None] = None) -> ProblemInstance:
    """``u_t = u_xx + lam t x (pi - x) u^2`` on (0, pi) with
    ``u(0, x) = lam sin(x) int_0^1 exp(u(t, pi/2)) dt``.

    Lower-bound data: ``mu = 0`` (so ``delta_rho = 0``), ``nu = 1`` (so
    ``eta_rho = sin``) and ``t0 = 1``.
    """
    L = math.pi
    if n % 2 == 0:
        raise ValidationError("the sensor x* = pi/2 is a grid point only for odd n")
    alpha = GridFunction.from_function(L, n, np.sin)
    return ProblemInstance(
        L=L, n=n, m=m,
        semigroup=SemigroupHandle(SemigroupKind(kind), L, n),
        nonlinearity=Nonlinearity.power_law(1.0, 2.0, L),
        nonlocal_op=Pointwise(alpha, ExpIntegral(), L / 2),
        certificate=CertificateData(Trajectory.zeros(L, n, m), alpha, 1.0, rho),
        mild=mild or MildConfig(),
        name="paper-example",
    )


def linear_instance(n: int = 15, m: int = 16, rho: float = 1.0, L: float = math.pi,
                    mild: Union[MildConfig, None] = None) -> ProblemInstance:
    """``f(t, v) = v`` with ``B(y) = int_0^1 y(s) ds``."""
    return ProblemInstance(
        L=L, n=n, m=m,
        semigroup=SemigroupHandle.spectral(L, n),
        nonlinearity=Nonlinearity.linear_preset(),
        nonlocal_op=IntegralAverage(),
        certificate=CertificateData.trivial(L, n, m, rho),
        mild=mild or MildConfig(),
        name="linear",
    )


def zero_instance(n: int = 15, m: int = 16, rho: float = 1.0, L: float = math.pi) -> ProblemInstance:
    return ProblemInstance(
        L=L, n=n, m=m,
        semigroup=SemigroupHandle.spectral(L, n),
        nonlinearity=Nonlinearity.zero(),
        nonlocal_op=ZeroOperator(),
        certificate=CertificateData.trivial(L, n, m, rho),
        name="zero",
    )
