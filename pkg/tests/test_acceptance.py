"""Acceptance criteria at their stated scale and tolerance.

Each test runs one criterion, prints a single PASS/FAIL line and asserts
the verdict, which includes the runtime limit.
"""

import pytest

from jumpmart.acceptance import CRITERIA

pytestmark = pytest.mark.slow


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = CRITERIA[number]()
    with capsys.disabled():
        print("\n" + result.line(), flush=True)
    assert result.passed, result.to_dict()
