import numpy as np
import pytest

from glvortex.numerics import build_grid
from glvortex.profile import PhysParams, solve_profile

REF = PhysParams(2.0, 1.0, -0.5, 1.0, 1.0)


@pytest.fixture(scope="session")
def ref_params():
    return REF


@pytest.fixture(scope="session")
def ref_profile():
    return solve_profile(REF, grid=build_grid(60.0, 4000))


@pytest.fixture(scope="session")
def small_profile():
    """Cheaper profile for structural tests that do not depend on resolution."""
    return solve_profile(REF, grid=build_grid(30.0, 800))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
