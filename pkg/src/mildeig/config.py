"""JSON configuration documents and their translation into problem instances.

A document may name a ``preset``; its own sections are then merged over the
preset's. A section carrying a discriminator (``form``, ``kind``, ``preset``
or ``expression``) replaces the preset's section instead of merging into it.
Numbers may be written as closed expressions such as ``"pi/2"``.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import jsonschema
import numpy as np

from .errors import ConfigError, ExpressionError, SchemaError, ValidationError
from .expr import constant_value, parse_expression
from .lattice import ConeTolerance, GridFunction, Trajectory, grid_points, time_points
from .mild import MildConfig, Quadrature
from .problem import (CertificateData, ExpIntegral, IntegralAverage, Multipoint,
                      Nonlinearity, NonlocalOperator, Periodic, PointEval, Pointwise,
                      ProblemInstance, WeightedIntegral, ZeroOperator)
from .semigroup import SemigroupHandle, SemigroupKind
from .eigensolver import SolverConfig

_NUMBER = {"type": ["number", "string"]}
_EXPR = {"type": "string", "minLength": 1}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_BETA = {"oneOf": [
    _obj({"kind": {"const": "exp-integral"}}, ["kind"]),
    _obj({"kind": {"const": "point-eval"}, "t1": _NUMBER}, ["kind", "t1"]),
    _obj({"kind": {"const": "weighted-integral"}, "weight": _EXPR}, ["kind", "weight"]),
]}

SCHEMA = _obj({
    "preset": {"enum": ["paper-example", "linear", "zero"]},
    "domain": _obj({"L": _NUMBER, "n": {"type": "integer", "minimum": 1}}, ["L", "n"]),
    "time": _obj({"m": {"type": "integer", "minimum": 2},
                  "quadrature": {"enum": [q.value for q in Quadrature]}}, ["m"]),
    "semigroup": _obj({"kind": {"enum": [k.value for k in SemigroupKind]},
                       "fd_order": {"enum": [2, 4, 6, 8]}}),
    "nonlinearity": {"oneOf": [
        _obj({"preset": {"const": "power-law"}, "c": {"type": "number"},
              "p": {"type": "number"}}, ["preset"]),
        _obj({"preset": {"enum": ["linear", "zero"]}}, ["preset"]),
        _obj({"expression": _EXPR}, ["expression"]),
    ]},
    "nonlocal": {"oneOf": [
        _obj({"form": {"const": "pointwise"}, "alpha": _EXPR, "beta": _BETA,
              "sensor": _NUMBER}, ["form", "alpha", "beta", "sensor"]),
        _obj({"form": {"const": "multipoint"},
              "times": {"type": "array", "items": _NUMBER},
              "coeffs": {"type": "array", "items": {"type": "number"}}},
             ["form", "times", "coeffs"]),
        _obj({"form": {"const": "periodic"}}, ["form"]),
        _obj({"form": {"const": "integral-average"}, "weight": _EXPR}, ["form"]),
        _obj({"form": {"const": "zero"}}, ["form"]),
    ]},
    "certificate": _obj({"delta_rho": _EXPR, "eta_rho": _EXPR, "nu_rho": _EXPR, "t0": _NUMBER}),
    "solver": _obj({
        "rho": {"type": "number", "exclusiveMinimum": 0},
        "rho_list": {"type": "array", "minItems": 1,
                     "items": {"type": "number", "exclusiveMinimum": 0}},
        "max_iters": {"type": "integer", "minimum": 1},
        "tol_rel": {"type": "number", "exclusiveMinimum": 0},
        "damping": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "initial_guess": {"enum": ["sine", "random"]},
        "seed": {"type": "integer"},
        "hypothesis_samples": {"type": "integer", "minimum": 1},
        "warm_start": {"type": "boolean"},
    }),
    "cone": _obj({"clamp_eps": {"type": "number", "minimum": 0},
                  "violation_eps": {"type": "number", "minimum": 0}}),
    "output": _obj({"dir": {"type": "string"}}),
}, ["domain", "time", "nonlinearity", "nonlocal"])


PRESETS = {
    "paper-example": {
        "domain": {"L": "pi", "n": 63},
        "time": {"m": 64},
        "semigroup": {"kind": "spectral-heat"},
        "nonlinearity": {"expression": "t*x*(pi-x)*u^2"},
        "nonlocal": {"form": "pointwise", "alpha": "sin(x)",
                     "beta": {"kind": "exp-integral"}, "sensor": "pi/2"},
        "certificate": {"delta_rho": "zero", "eta_rho": "auto-from-alpha", "nu_rho": "1", "t0": 1},
        "solver": {"rho": 1.0},
    },
    "linear": {
        "domain": {"L": "pi", "n": 15},
        "time": {"m": 16},
        "nonlinearity": {"preset": "linear"},
        "nonlocal": {"form": "integral-average", "weight": "1"},
    },
    "zero": {
        "domain": {"L": "pi", "n": 15},
        "time": {"m": 16},
        "nonlinearity": {"preset": "zero"},
        "nonlocal": {"form": "zero"},
    },
}

_DISCRIMINATORS = ("form", "kind", "preset", "expression")


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if (isinstance(value, dict) and isinstance(out.get(key), dict)
                and not any(d in value for d in _DISCRIMINATORS)):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def expand_preset(raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise SchemaError("config root must be a JSON object")
    name = raw.get("preset")
    if name is None:
        return copy.deepcopy(raw)
    if name not in PRESETS:
        raise SchemaError(f"preset: unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return _merge(PRESETS[name], raw)


def validate_document(doc: dict):
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {err.message}")


@dataclass
class ConfigDocument:
    data: dict
    source: Optional[str] = None

    def section(self, name):
        return self.data.get(name, {})


def parse_config(raw: dict, source=None) -> ConfigDocument:
    doc = expand_preset(raw)
    validate_document(doc)
    return ConfigDocument(doc, source)


def load_raw(path) -> dict:
    """Read a config file as plain JSON, before preset expansion and validation."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: config root must be a JSON object")
    return raw


def load_config(path) -> ConfigDocument:
    return parse_config(load_raw(path), str(path))


@dataclass
class RunSettings:
    rhos: List[float]
    warm_start: bool = False
    output_dir: str = "out"


def _number(value, where):
    try:
        return constant_value(value)
    except (ExpressionError, TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _expr(src, allowed, where):
    try:
        return parse_expression(src, allowed)
    except ExpressionError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _profile(src, L, n, where) -> GridFunction:
    e = _expr(src, ("x",), where)
    x = grid_points(L, n)
    try:
        vals = e(x=x)
        edge = e(x=np.array([0.0, L]))
    except ExpressionError as exc:
        raise ValidationError(f"{where}: {exc}") from exc
    return GridFunction(L, vals), edge


def _time_weight(src, where):
    e = _expr(src, ("t",), where)
    return lambda s: e(t=np.asarray(s, dtype=float))


def _build_nonlinearity(sec, L):
    if "expression" in sec:
        return Nonlinearity.from_expression(_expr(sec["expression"], ("t", "x", "u"),
                                                  "nonlinearity/expression"))
    kind = sec["preset"]
    if kind == "linear":
        return Nonlinearity.linear_preset()
    if kind == "zero":
        return Nonlinearity.zero()
    return Nonlinearity.power_law(float(sec.get("c", 1.0)), float(sec.get("p", 2.0)), L)


def _build_nonlocal(sec, L, n) -> NonlocalOperator:
    form = sec["form"]
    if form == "pointwise":
        alpha, edge = _profile(sec["alpha"], L, n, "nonlocal/alpha")
        scale = 1.0 + float(np.max(np.abs(alpha.values)))
        if np.max(np.abs(edge)) > 1e-9 * scale:
            raise ValidationError("nonlocal/alpha: must vanish at x = 0 and x = L")
        if np.min(alpha.values) < 0:
            raise ValidationError("nonlocal/alpha: must be nonnegative")
        b = sec["beta"]
        if b["kind"] == "exp-integral":
            beta = ExpIntegral()
        elif b["kind"] == "point-eval":
            beta = PointEval(_number(b["t1"], "nonlocal/beta/t1"))
        else:
            beta = WeightedIntegral(_time_weight(b["weight"], "nonlocal/beta/weight"))
        return Pointwise(alpha, beta, _number(sec["sensor"], "nonlocal/sensor"))
    if form == "multipoint":
        times = [_number(t, "nonlocal/times") for t in sec["times"]]
        return Multipoint(times, sec["coeffs"])
    if form == "periodic":
        return Periodic()
    if form == "integral-average":
        return IntegralAverage(_time_weight(sec.get("weight", "1"), "nonlocal/weight"))
    return ZeroOperator()


def _build_certificate(sec, nonlocal_op, L, n, m, rho) -> CertificateData:
    delta_src = sec.get("delta_rho", "zero")
    if delta_src == "zero":
        delta = Trajectory.zeros(L, n, m)
    else:
        e = _expr(delta_src, ("t", "x"), "certificate/delta_rho")
        t, x = np.meshgrid(time_points(m), grid_points(L, n), indexing="ij")
        delta = Trajectory(L, e(t=t, x=x))
    eta_src = sec.get("eta_rho", "auto-from-alpha" if isinstance(nonlocal_op, Pointwise) else "zero")
    if eta_src == "zero":
        eta = GridFunction.zeros(L, n)
    elif eta_src == "auto-from-alpha":
        if not isinstance(nonlocal_op, Pointwise):
            raise ValidationError("certificate/eta_rho: auto-from-alpha needs a pointwise operator")
        nu, _ = _profile(sec.get("nu_rho", "1"), L, n, "certificate/nu_rho")
        eta = GridFunction(L, nonlocal_op.alpha.values * nu.values)
    else:
        eta, _ = _profile(eta_src, L, n, "certificate/eta_rho")
    t0 = _number(sec.get("t0", 1.0), "certificate/t0")
    return CertificateData(delta, eta, t0, rho)


def build_instance(doc: ConfigDocument):
    """Translate a validated document into ``(instance, solver config, run settings)``."""
    d = doc.data
    L = _number(d["domain"]["L"], "domain/L")
    if not L > 0:
        raise ValidationError("domain/L: must be positive")
    n = int(d["domain"]["n"])
    m = int(d["time"]["m"])
    quad = d["time"].get("quadrature", Quadrature.SIMPSON_RECURRENCE.value)
    sg = doc.section("semigroup")
    semigroup = SemigroupHandle(SemigroupKind(sg.get("kind", "spectral-heat")), L, n,
                                fd_order=sg.get("fd_order", 8))
    solver = doc.section("solver")
    rhos = solver.get("rho_list") or [solver.get("rho", 1.0)]
    rho = float(solver.get("rho", rhos[0]))
    cone = doc.section("cone")
    try:
        tol = ConeTolerance(cone.get("clamp_eps", 1e-10), cone.get("violation_eps", 1e-8))
    except ValueError as exc:
        raise ValidationError(f"cone: {exc}") from exc
    nonlinearity = _build_nonlinearity(d["nonlinearity"], L)
    nonlocal_op = _build_nonlocal(d["nonlocal"], L, n)
    cert = _build_certificate(doc.section("certificate"), nonlocal_op, L, n, m, max(rhos + [rho]))
    cert.rho = rho
    instance = ProblemInstance(L=L, n=n, m=m, semigroup=semigroup, nonlinearity=nonlinearity,
                               nonlocal_op=nonlocal_op, certificate=cert, cone_tol=tol,
                               mild=MildConfig(Quadrature(quad), m),
                               name=d.get("preset", "custom"), validate_g=False)
    # g must be admissible on the largest radius that will be solved for
    instance.nonlinearity.validate(L, max(rhos + [rho]))
    cfg = SolverConfig(
        rho=rho,
        max_iters=solver.get("max_iters", 500),
        tol_rel=solver.get("tol_rel", 1e-8),
        damping=solver.get("damping", 1.0),
        initial_guess=solver.get("initial_guess", "sine"),
        seed=solver.get("seed", 0),
        hypothesis_samples=solver.get("hypothesis_samples", 32),
    )
    out = doc.section("output")
    settings = RunSettings([float(r) for r in rhos], bool(solver.get("warm_start", False)),
                           out.get("dir", "out"))
    return instance, cfg, settings
