
import pytest
from hypothesis import given, strategies as st

from mildeig.eigensolver import (SolverConfig, independent_path, solve, sweep,
                                 verify_certificate)
from mildeig.errors import NoMass
from mildeig.lattice import EXACT, is_in_cone, norm_C
from mildeig.problem import paper_example, zero_instance


def test_solve_example(example):
    cert = solve(example, SolverConfig(rho=1.0))
    assert cert.converged and cert.residual_rel <= 1e-8
    assert norm_C(cert.y) == 1.0
    assert cert.lam == pytest.approx(0.49447612, rel=1e-7)
    assert cert.hypothesis_report.passed
    assert verify_certificate(example, cert)


def test_verify_rejects_tampered(example):
    cert = solve(example, SolverConfig(rho=1.0), report=False)
    cert.lam *= 1.01
    assert not verify_certificate(example, cert)


def test_no_mass():
    with pytest.raises(NoMass):
        solve(zero_instance(), SolverConfig(), report=False)


def test_sweep_records_failures(small_example):
    certs = sweep(small_example, [0.5, 1.0], SolverConfig(), check=False)
    assert [c.converged for c in certs] == [True, True]
    failing = sweep(zero_instance(), [1.0], SolverConfig(), check=False)
    assert failing[0].error.startswith("NoMass") and not failing[0].converged


def test_warm_start_matches_cold(small_example):
    cold = sweep(small_example, [0.5, 1.0], check=False)
    warm = sweep(small_example, [0.5, 1.0], check=False, warm_start=True)
    assert warm[1].lam == pytest.approx(cold[1].lam, rel=1e-7)
    assert warm[1].iterations <= cold[1].iterations


def test_damping_and_random_start_agree(small_example):
    a = solve(small_example, SolverConfig(rho=1.0), report=False)
    b = solve(small_example, SolverConfig(rho=1.0, damping=0.5, initial_guess="random",
                                          max_iters=2000), report=False)
    assert b.converged and b.lam == pytest.approx(a.lam, rel=1e-6)


def test_independent_path_uses_other_semigroup(small_example):
    q = independent_path(small_example)
    assert q.semigroup.kind.value == "matrix-exp-oracle"
    assert q.mild.quadrature.is_direct


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(rho=0.0)
    with pytest.raises(ValueError):
        SolverConfig(damping=1.5)


SMALL = paper_example(15, 16)


@given(st.floats(0.05, 3.0), st.floats(0.2, 1.0), st.sampled_from(["sine", "random"]),
       st.integers(0, 2 ** 31))
def test_iterates_pinned_to_sphere(rho, damping, guess, seed):
    seen = []

    def watch(k, z):
        assert abs(norm_C(z) - rho) <= 1e-12 * rho
        assert is_in_cone(z, EXACT).feasible
        seen.append(k)

    cfg = SolverConfig(rho=rho, damping=damping, initial_guess=guess, seed=seed, max_iters=12)
    cert = solve(SMALL, cfg, report=False, callback=watch)
    assert seen == list(range(cert.iterations + 1))
