"""Command-line entry point: ``mildeig <command> --config file.json``.

Exit status 1 marks a reported failure (the solver did not converge, or a
hypothesis or certificate check failed) and 2 a configuration error.
Diagnostics go to standard error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import results
from .config import ConfigDocument, build_instance, load_config, load_raw, parse_config
from .eigensolver import independent_path, solve, sweep, verify_certificate
from .errors import ConfigError, MildEigError, NoMass
from .lattice import Trajectory
from .mild import duhamel
from .problem import check_hypotheses, sine_profile
from .semigroup import SemigroupHandle

log = logging.getLogger("mildeig")

COMMANDS = ("solve", "sweep", "check", "verify", "oracle-compare")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _outdir(args, settings):
    out = Path(args.out or settings.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(p, cfg, settings, args):
    try:
        cert = solve(p, cfg)
    except NoMass as exc:
        log.error("NoMass: %s", exc)
        return EXIT_FAIL
    out = _outdir(args, settings)
    results.write_trajectory_csv(out / "trajectory.csv", cert.y)
    results.write_certificate_json(out / "certificate.json", cert, "trajectory.csv",
                                   p.with_rho(cfg.rho).describe())
    log.info("lambda=%.12g residual_rel=%.3e iterations=%d converged=%s",
             cert.lam, cert.residual_rel, cert.iterations, cert.converged)
    print(json.dumps(cert.summary()))
    return EXIT_OK if cert.converged else EXIT_FAIL


def cmd_sweep(p, cfg, settings, args):
    rhos = settings.rhos
    if args.rhos:
        rhos = [float(r) for r in args.rhos.split(",")]
    certs = sweep(p, rhos, cfg, warm_start=settings.warm_start)
    out = _outdir(args, settings)
    for i, cert in enumerate(certs):
        traj = None
        if cert.y is not None:
            traj = f"trajectory_rho_{i}.csv"
            results.write_trajectory_csv(out / traj, cert.y)
        results.write_certificate_json(out / f"certificate_rho_{i}.json", cert, traj,
                                       p.with_rho(cert.rho).describe())
        if cert.error:
            log.error("rho=%g: %s", cert.rho, cert.error)
        else:
            log.info("rho=%g lambda=%.12g residual_rel=%.3e converged=%s",
                     cert.rho, cert.lam, cert.residual_rel, cert.converged)
    results.write_summary_csv(out / "summary.csv", certs)
    return EXIT_OK if all(c.converged for c in certs) else EXIT_FAIL


def cmd_check(p, cfg, settings, args):
    report = check_hypotheses(p, samples=cfg.hypothesis_samples, seed=cfg.seed)
    out = _outdir(args, settings)
    results.write_report_json(out / "hypothesis_report.json", report)
    print(json.dumps(report.to_dict(), indent=2))
    for name in ("H1", "H2", "H3", "H4"):
        if not getattr(report, f"pass_{name}"):
            log.error("%s fails on the sampled data", name)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(p, cfg, settings, args):
    if not args.certificate:
        log.error("verify needs --certificate")
        return EXIT_CONFIG
    cert = results.read_certificate_json(args.certificate, p.L)
    ok = verify_certificate(p, cert, strict_tol=args.strict_tol)
    print(json.dumps({"certificate": str(args.certificate), "verified": ok}))
    if not ok:
        log.error("certificate does not verify at strict_tol=%g", args.strict_tol)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle_compare(p, cfg, settings, args):
    rng = np.random.default_rng(cfg.seed)
    spectral = SemigroupHandle.spectral(p.L, p.n)
    oracle = SemigroupHandle.matrix_exp(p.L, p.n)
    modes = np.arange(1, max(2, p.n // 4) + 1)
    profile = np.sin(np.pi * np.outer(p.x, modes) / p.L) @ rng.uniform(-1, 1, modes.size)
    rows = []
    for t in (0.1, 0.5, 1.0):
        a, b = spectral.propagate(t, profile), oracle.propagate(t, profile)
        rows.append(("semigroup_spectral_vs_matrix_exp", t,
                     float(np.max(np.abs(a - b)) / np.max(np.abs(a)))))
    q = p.with_rho(cfg.rho)
    z = Trajectory.constant(sine_profile(p.L, p.n), p.m) * cfg.rho
    F = q.f_values(z, check=False)
    rec = duhamel(q.semigroup, F, q.mild.quadrature)
    direct = duhamel(q.semigroup, F, q.mild.quadrature.counterpart())
    scale = max(float(np.max(np.abs(rec))), np.finfo(float).tiny)
    rows.append(("quadrature_recurrence_vs_direct", 1.0, float(np.max(np.abs(rec - direct)) / scale)))
    indep = independent_path(q)
    Ta = q.T(z, check=False, clamp=False).values
    Tb = indep.T(z, check=False, clamp=False).values
    rows.append(("T_primary_vs_independent_path", 1.0,
                 float(np.max(np.abs(Ta - Tb)) / np.max(np.abs(Ta)))))
    out = _outdir(args, settings)
    with open(out / "oracle_compare.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("quantity", "t", "delta"))
        for name, t, delta in rows:
            writer.writerow((name, format(t, ".17g"), format(delta, ".17g")))
            log.info("%s t=%g delta=%.3e", name, t, delta)
    return EXIT_OK


_HANDLERS = {"solve": cmd_solve, "sweep": cmd_sweep, "check": cmd_check,
             "verify": cmd_verify, "oracle-compare": cmd_oracle_compare}


def run_command(cmd: str, doc: ConfigDocument, args=None) -> int:
    """Dispatch ``cmd`` on a parsed document; returns the exit status."""
    if args is None:
        args = build_parser().parse_args([cmd])
    try:
        p, cfg, settings = build_instance(doc)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.rho is not None:
            cfg = replace(cfg, rho=args.rho)
        return _HANDLERS[cmd](p, cfg, settings, args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except MildEigError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="mildeig", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--preset", help="use a named preset instead of (or under) --config")
    parser.add_argument("--out", help="output directory (default: output.dir or ./out)")
    parser.add_argument("--seed", type=int, help="seed for every random draw")
    parser.add_argument("--rho", type=float, help="override solver.rho")
    parser.add_argument("--rhos", help="comma-separated radii for sweep")
    parser.add_argument("--certificate", help="certificate JSON for verify")
    parser.add_argument("--strict-tol", type=float, default=1e-4, dest="strict_tol")
    parser.add_argument("--quiet", action="store_true", help="suppress progress messages")
    return parser


def _configure_logging(quiet: bool):
    root = logging.getLogger("mildeig")
    for h in list(root.handlers):
        if getattr(h, "_mildeig_cli", False):
            root.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    handler._mildeig_cli = True
    root.addHandler(handler)
    root.setLevel(logging.WARNING if quiet else logging.INFO)
    root.propagate = False


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.quiet)
    try:
        if args.config and args.preset:
            doc = parse_config({**load_raw(args.config), "preset": args.preset}, args.config)
        elif args.config:
            doc = load_config(args.config)
        elif args.preset:
            doc = parse_config({"preset": args.preset})
        else:
            log.error("give --config or --preset")
            return EXIT_CONFIG
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    return run_command(args.command, doc, args)


if __name__ == "__main__":
    sys.exit(main())
