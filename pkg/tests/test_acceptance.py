"""Every acceptance criterion at its stated tolerance, on the reference configuration.

One pass/fail line per criterion is printed in the terminal summary.  Failing
criteria are left failing; their analysis lives outside the package.
"""

import pytest

from glvortex.acceptance import CRITERIA, Suite
from glvortex.config import RunConfig

ACCEPTANCE_LINES = {}


@pytest.fixture(scope="module")
def suite():
    return Suite(RunConfig.from_dict({}))


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=[f"{n}-{CRITERIA[n]}" for n in sorted(CRITERIA)])
def test_criterion(suite, number):
    result = getattr(suite, f"criterion_{number}")()
    ACCEPTANCE_LINES[number] = result.line()
    print(result.line())
    bad = {k: v for k, v in result.checks.items() if not v["passed"]}
    assert result.passed, f"{result.line()}\n{bad}"
