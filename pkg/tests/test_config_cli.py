import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mildeig import results
from mildeig.cli import main
from mildeig.config import build_instance, load_config, parse_config
from mildeig.errors import SchemaError, ValidationError
from mildeig.lattice import Trajectory
from mildeig.problem import compute_H4


def build(raw):
    return build_instance(parse_config(raw))


def test_preset_expands_to_example():
    p, cfg, settings = build({"preset": "paper-example"})
    assert (p.L, p.n, p.m) == (math.pi, 63, 64)
    assert compute_H4(p) == pytest.approx(math.exp(-1), abs=1e-12)
    assert np.allclose(p.certificate.eta_rho.values, np.sin(p.x))
    assert p.nonlocal_op.sensor == math.pi / 2 and cfg.rho == 1.0


def test_overrides_merge():
    p, _, _ = build({"preset": "paper-example", "domain": {"n": 31}, "time": {"m": 32}})
    assert (p.n, p.m) == (31, 32)


def test_full_document_without_preset(tmp_path):
    doc = {
        "domain": {"L": 2.0, "n": 9}, "time": {"m": 8, "quadrature": "trapezoid-direct"},
        "semigroup": {"kind": "matrix-exp-oracle", "fd_order": 4},
        "nonlinearity": {"preset": "power-law", "c": 0.5, "p": 3},
        "nonlocal": {"form": "multipoint", "times": ["1/2", 1], "coeffs": [0.5, 0.5]},
        "solver": {"rho_list": [0.5, 1.0], "seed": 3},
    }
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    p, cfg, settings = build_instance(load_config(path))
    assert p.semigroup.fd_order == 4 and settings.rhos == [0.5, 1.0] and cfg.seed == 3


@pytest.mark.parametrize("raw", [
    {"preset": "paper-example", "bogus": 1},
    {"preset": "nope"},
    {"preset": "paper-example", "domain": {"n": "many"}},
    {"domain": {"L": 1, "n": 3}, "time": {"m": 4}},
])
def test_schema_errors(raw):
    with pytest.raises(SchemaError):
        parse_config(raw)


@pytest.mark.parametrize("raw", [
    {"preset": "paper-example", "nonlocal": {"form": "multipoint", "times": [0.5], "coeffs": [-1]}},
    {"preset": "paper-example", "nonlocal": {"sensor": 1.0}},
    {"preset": "paper-example", "nonlocal": {"alpha": "1 + x"}},
    {"preset": "paper-example", "nonlinearity": {"expression": "u - 1"}},
    {"preset": "paper-example", "nonlinearity": {"expression": "y"}},
    {"preset": "paper-example", "certificate": {"t0": 0.3}},
])
def test_validation_errors(raw):
    with pytest.raises(ValidationError):
        build(raw)


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path), "--quiet"])


def test_cli_solve_and_verify(tmp_path):
    assert run(tmp_path, "solve", "--preset", "paper-example", "--seed", "7") == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    for key in ("lambda", "rho", "residual_rel", "iterations", "converged", "history",
                "hypothesis_report"):
        assert key in cert
    assert run(tmp_path, "verify", "--preset", "paper-example",
               "--certificate", str(tmp_path / "certificate.json")) == 0


def test_cli_sweep_summary(tmp_path):
    assert run(tmp_path, "sweep", "--preset", "paper-example", "--rhos", "0.1,0.5,1.0") == 0
    with open(tmp_path / "summary.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["rho", "lambda", "residual_rel", "iterations", "converged"]
    assert [r[-1] for r in rows[1:]] == ["true"] * 3


def test_cli_check_exit_codes(tmp_path, capsys):
    assert run(tmp_path, "check", "--preset", "paper-example") == 0
    assert json.loads(capsys.readouterr().out)["h4_value"] == pytest.approx(0.3678794, abs=1e-7)
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"preset": "paper-example", "certificate": {"delta_rho": "10"}}))
    assert run(tmp_path, "check", "--config", str(cfg)) == 1


def test_cli_no_mass_and_config_errors(tmp_path, capsys):
    assert run(tmp_path, "solve", "--preset", "zero") == 1
    assert "NoMass" in capsys.readouterr().err
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert run(tmp_path, "solve", "--config", str(cfg)) == 2
    assert run(tmp_path, "solve") == 2


def test_cli_oracle_compare(tmp_path):
    assert run(tmp_path, "oracle-compare", "--preset", "paper-example") == 0
    with open(tmp_path / "oracle_compare.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert all(float(r["delta"]) < 1e-6 for r in rows)


def test_certificate_json_roundtrip(tmp_path):
    from mildeig.eigensolver import solve
    from mildeig.problem import paper_example
    p = paper_example(15, 16)
    cert = solve(p)
    results.write_trajectory_csv(tmp_path / "y.csv", cert.y)
    results.write_certificate_json(tmp_path / "c.json", cert, "y.csv")
    back = results.read_certificate_json(tmp_path / "c.json", p.L)
    assert back.lam == cert.lam and back.hypothesis_report == cert.hypothesis_report
    assert np.array_equal(back.y.values, cert.y.values)


@given(arrays(np.float64, (5, 4), elements=st.floats(-1e300, 1e300, allow_subnormal=True)))
def test_trajectory_csv_roundtrip_bitwise(tmp_path_factory, vals):
    path = tmp_path_factory.mktemp("csv") / "y.csv"
    y = Trajectory(math.pi, vals)
    results.write_trajectory_csv(path, y)
    back = results.read_trajectory_csv(path, math.pi)
    assert back.values.tobytes() == y.values.tobytes()


def test_cli_partial_config_over_preset(tmp_path):
    cfg = tmp_path / "partial.json"
    cfg.write_text(json.dumps({"domain": {"n": 31}, "time": {"m": 32}}))
    assert run(tmp_path, "solve", "--config", str(cfg), "--preset", "paper-example") == 0
    assert json.loads((tmp_path / "certificate.json").read_text())["instance"]["n"] == 31
