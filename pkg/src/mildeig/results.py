"""CSV and JSON emission of trajectories, certificates and sweep summaries."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .eigensolver import EigenpairCertificate
from .lattice import Trajectory
from .problem import HypothesisReport

TRAJECTORY_HEADER = ("t", "x", "value")
SUMMARY_HEADER = ("rho", "lambda", "residual_rel", "iterations", "converged")


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_trajectory_csv(path, y: Trajectory):
    """Rows ordered by time node, then space node; 17 significant digits."""
    t, x = y.times, y.x
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_HEADER)
        for j in range(y.m + 1):
            tj = _fmt(t[j])
            for i in range(y.n):
                writer.writerow((tj, _fmt(x[i]), _fmt(y.values[j, i])))


def read_trajectory_csv(path, L: float) -> Trajectory:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRAJECTORY_HEADER:
            raise ValueError(f"unexpected trajectory header {header}")
        rows = [(float(a), float(b), float(c)) for a, b, c in reader]
    if not rows:
        raise ValueError("empty trajectory file")
    t0 = rows[0][0]
    n = sum(1 for r in rows if r[0] == t0)
    if len(rows) % n:
        raise ValueError("trajectory file is not a full (time x space) grid")
    values = np.array([r[2] for r in rows]).reshape(len(rows) // n, n)
    return Trajectory(L, values)


def _json_float(v):
    v = float(v)
    return v if math.isfinite(v) else None


def certificate_to_dict(cert: EigenpairCertificate, trajectory_csv=None, instance=None):
    return {
        "lambda": _json_float(cert.lam),
        "rho": cert.rho,
        "residual_rel": _json_float(cert.residual_rel),
        "iterations": cert.iterations,
        "converged": cert.converged,
        "history": [{"step": _json_float(s), "norm_T": _json_float(v)} for s, v in cert.history],
        "hypothesis_report": cert.hypothesis_report.to_dict() if cert.hypothesis_report else None,
        "error": cert.error,
        "trajectory_csv": trajectory_csv,
        "instance": instance,
    }


def write_certificate_json(path, cert: EigenpairCertificate, trajectory_csv=None, instance=None):
    Path(path).write_text(
        json.dumps(certificate_to_dict(cert, trajectory_csv, instance), indent=2) + "\n",
        encoding="utf-8")


def read_certificate_json(path, L: float) -> EigenpairCertificate:
    """Load a certificate; its trajectory is read from the CSV it names, if any."""
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    y = None
    if doc.get("trajectory_csv"):
        y = read_trajectory_csv(path.parent / doc["trajectory_csv"], L)
    report = doc.get("hypothesis_report")
    lam = doc.get("lambda")
    res = doc.get("residual_rel")
    return EigenpairCertificate(
        lam=math.nan if lam is None else float(lam),
        rho=float(doc["rho"]),
        y=y,
        residual_rel=math.nan if res is None else float(res),
        iterations=int(doc["iterations"]),
        converged=bool(doc["converged"]),
        history=[(h["step"], h["norm_T"]) for h in doc.get("history", [])],
        hypothesis_report=HypothesisReport.from_dict(report) if report else None,
        error=doc.get("error"),
    )


def write_summary_csv(path, certs):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_HEADER)
        for c in certs:
            writer.writerow((_fmt(c.rho), _fmt(c.lam), _fmt(c.residual_rel), c.iterations,
                             "true" if c.converged else "false"))


def write_report_json(path, report: HypothesisReport):
    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
