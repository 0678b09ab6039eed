"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import pytest

from hypercross.suites import SUITES, run_suite

NAMES = list(SUITES)


def test_twelve_criteria():
    assert len(NAMES) == 12


@pytest.mark.parametrize("name", NAMES)
def test_criterion(name):
    (res,) = run_suite(name)
    print(res.line(), res.metrics)
    assert res.criterion == NAMES.index(name) + 1
    assert res.passed, res.metrics
