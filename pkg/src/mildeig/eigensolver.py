"""Positive eigenpairs ``y = lam T(y)`` with ``||y||_C = rho``.

The search is a normalised Picard (cone power) iteration

    w = T(z_k),   z' = rho w / ||w||_C,   z_{k+1} = rescale((1 - theta) z_k + theta z'),

which keeps every iterate nonnegative with C-norm exactly ``rho``; at a fixed
point ``z = lam T(z)`` with ``lam = rho / ||T(z)||_C``. In the linear case it
is the power method. Convergence is not guaranteed; a run that stalls is
reported with ``converged = False`` rather than raised. The certificate of
record is the residual ``||y - lam T(y)||_C / rho``, recomputed after the loop.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from .errors import ConeViolation, MildEigError, NoMass
from .lattice import Trajectory, is_in_cone, norm_C, rescale_to_norm
from .mild import MildConfig, Quadrature, residual
from .problem import HypothesisReport, ProblemInstance, check_hypotheses, sine_profile
from .semigroup import SemigroupHandle, SemigroupKind

log = logging.getLogger(__name__)

NO_MASS_RATIO = 1e-14


@dataclass
class SolverConfig:
    rho: float = 1.0
    max_iters: int = 500
    tol_rel: float = 1e-8
    damping: float = 1.0
    initial_guess: Union[str, Trajectory] = "sine"
    seed: int = 0
    hypothesis_samples: int = 32

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iters < 1 or not self.tol_rel > 0:
            raise ValueError("need max_iters >= 1 and tol_rel > 0")
        if isinstance(self.initial_guess, str) and self.initial_guess not in ("sine", "random"):
            raise ValueError(f"unknown initial guess {self.initial_guess!r}")


@dataclass
class EigenpairCertificate:
    lam: float
    rho: float
    y: Optional[Trajectory]
    residual_rel: float
    iterations: int
    converged: bool
    history: List[tuple] = field(default_factory=list)
    hypothesis_report: Optional[HypothesisReport] = None
    error: Optional[str] = None

    def summary(self):
        return {"rho": self.rho, "lambda": self.lam, "residual_rel": self.residual_rel,
                "iterations": self.iterations, "converged": self.converged}


def initial_trajectory(p: ProblemInstance, cfg: SolverConfig) -> Trajectory:
    guess = cfg.initial_guess
    if isinstance(guess, Trajectory):
        if guess.values.shape != (p.m + 1, p.n):
            raise ValueError("initial guess does not match the instance grid")
        z = Trajectory(p.L, np.maximum(guess.values, 0.0))
    elif guess == "random":
        rng = np.random.default_rng(cfg.seed)
        z = Trajectory(p.L, rng.uniform(0.0, 1.0, size=(p.m + 1, p.n)))
    else:
        z = Trajectory.constant(sine_profile(p.L, p.n), p.m)
    return rescale_to_norm(z, cfg.rho)


def solve(p: ProblemInstance, cfg: SolverConfig = SolverConfig(),
          report: Union[HypothesisReport, None, bool] = None,
          callback: Optional[Callable[[int, Trajectory], None]] = None) -> EigenpairCertificate:
    """Run the normalised iteration on ``p`` at radius ``cfg.rho``.

    Raises :class:`NoMass` if ``T`` vanishes on an iterate and propagates
    :class:`ConeViolation`. Pass ``report=False`` to skip the hypothesis check.
    ``callback(k, z)`` sees every iterate, starting with ``k = 0``.
    """
    p = p.with_rho(cfg.rho)
    rho = cfg.rho
    if report is None:
        report = check_hypotheses(p, samples=cfg.hypothesis_samples, seed=cfg.seed)
    elif report is False:
        report = None

    z = initial_trajectory(p, cfg)
    if callback is not None:
        callback(0, z)
    theta = cfg.damping
    history = []
    converged = False
    k = 0
    for k in range(1, cfg.max_iters + 1):
        w = p.T(z)
        nu = norm_C(w)
        if nu <= NO_MASS_RATIO * rho:
            raise NoMass(f"||T(z)||_C = {nu:.3e} at iteration {k} (rho={rho})")
        target = w.values * (rho / nu)
        if theta < 1.0:
            target = (1.0 - theta) * z.values + theta * target
        z_next = rescale_to_norm(Trajectory(p.L, target), rho)
        step = norm_C(z_next - z)
        history.append((step, nu))
        z = z_next
        if callback is not None:
            callback(k, z)
        if step <= cfg.tol_rel * rho:
            converged = True
            break
    log.debug("rho=%g: %d iterations, last step %.3e", rho, k, history[-1][0])

    Tz = p.T(z)
    nu = norm_C(Tz)
    if nu <= NO_MASS_RATIO * rho:
        raise NoMass(f"||T(y)||_C = {nu:.3e} at the final iterate")
    lam = rho / nu
    residual_rel = p.residual(z, lam) / rho
    if converged and residual_rel > 10 * cfg.tol_rel:
        log.warning("rho=%g: step test passed but residual %.3e > 10 tol", rho, residual_rel)
        converged = False
    return EigenpairCertificate(lam, rho, z, residual_rel, k, converged, history, report)


def sweep(p: ProblemInstance, rhos: Sequence[float], cfg: SolverConfig = SolverConfig(),
          warm_start: bool = False, check: bool = True) -> List[EigenpairCertificate]:
    """One certificate per radius; failures are recorded, never raised."""
    rhos = list(rhos)
    if not rhos or any(not r > 0 for r in rhos):
        raise ValueError("rhos must be a nonempty list of positive numbers")
    out = []
    prev = None
    for rho in rhos:
        cfg_rho = replace(cfg, rho=float(rho))
        if warm_start and prev is not None and prev.y is not None:
            cfg_rho = replace(cfg_rho, initial_guess=prev.y)
        try:
            cert = solve(p, cfg_rho, report=None if check else False)
        except MildEigError as exc:
            cert = EigenpairCertificate(math.nan, float(rho), None, math.nan, 0, False,
                                        error=f"{type(exc).__name__}: {exc}")
        out.append(cert)
        prev = cert
    return out


def independent_path(p: ProblemInstance, fd_order: int = 8) -> ProblemInstance:
    """The same instance evaluated through the matrix-exponential semigroup and
    the direct (lag-sum) form of its quadrature rule."""
    U = SemigroupHandle(SemigroupKind.MATRIX_EXP_ORACLE, p.L, p.n, fd_order=fd_order)
    rule = p.mild.quadrature.rule
    return p.with_semigroup(U, MildConfig(Quadrature(f"{rule}-direct"), p.mild.m))


def verify_certificate(p: ProblemInstance, cert: EigenpairCertificate,
                       strict_tol: float = 1e-4, fd_order: int = 8) -> bool:
    """Recheck ``cert`` along a fully independent evaluation path."""
    y = cert.y
    if y is None or not (math.isfinite(cert.lam) and cert.lam > 0):
        return False
    if y.values.shape != (p.m + 1, p.n):
        return False
    rho = cert.rho
    if abs(norm_C(y) - rho) > 1e-12 * rho:
        return False
    if not is_in_cone(y, p.cone_tol).feasible:
        return False
    q = independent_path(p.with_rho(rho), fd_order)
    try:
        res = residual(q.semigroup, q.B_map(), q.f_map(), y, cert.lam, q.mild, q.cone_tol)
    except (ConeViolation, MildEigError) as exc:
        log.info("verification failed: %s", exc)
        return False
    return res <= strict_tol * rho
