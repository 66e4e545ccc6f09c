"""The ten acceptance criteria, each at its stated tolerance.

One pass/fail line per criterion is printed in the terminal summary
(see conftest.py); ``-s`` shows them inline as well.
"""
import pytest

from hdpreduce.verify import CHECKS, run_suite

pytestmark = pytest.mark.slow

LINES = []


@pytest.fixture(scope="module")
def results():
    return {c.number: c for c in run_suite()}


@pytest.mark.parametrize("number,name", [(c[0], c[1]) for c in CHECKS],
                         ids=[f"{c[0]:02d}-{c[1].replace(' ', '_')}" for c in CHECKS])
def test_criterion(results, number, name):
    c = results[number]
    LINES.append(c.line())
    print(c.line())
    assert not c.skipped
    assert c.name == name
    assert c.passed, c.line()


def test_scenario_filter_skips_unrelated():
    checks = run_suite("ball_dalembert", numbers={3, 7, 10})
    assert [c.skipped for c in checks] == [True, False, True]
    assert checks[1].passed
