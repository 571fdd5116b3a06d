import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mildeig.problem import linear_instance, paper_example

settings.register_profile(
    "suite", max_examples=200, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("suite")


@pytest.fixture(scope="session")
def example():
    return paper_example()


@pytest.fixture(scope="session")
def small_example():
    return paper_example(n=15, m=16)


@pytest.fixture(scope="session")
def linear():
    return linear_instance()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        ok, detail = RESULTS[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
