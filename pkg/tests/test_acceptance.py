"""Release criteria, run end to end at their stated tolerances.

One test per criterion; the shared fixture runs the whole suite once and
prints a pass/fail line for each criterion.
"""

import pytest

from twinproto.verify import format_result, run_all


@pytest.fixture(scope="module")
def results():
    checks = run_all()
    print()
    for check in checks:
        print(format_result(check))
    return {check.number: check for check in checks}


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(results, number):
    check = results[number]
    assert check.ok, f"criterion {number} failed: {check.name} ({check.detail})"
