import pytest

from matreg.verify import SUITES, Check, run_suite


@pytest.mark.parametrize("suite", SUITES)
def test_suites_pass(suite):
    checks = run_suite(suite, ns=list(range(2, 7)), max_n=6, trials=20)
    assert checks and all(isinstance(c, Check) for c in checks)
    failed = [c for c in checks if not c.passed]
    assert not failed, failed


def test_all_combines_suites():
    names = {c.suite for c in run_suite("all", ns=[2, 3], max_n=3, trials=5)}
    assert names == set(SUITES)


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope")


def test_printed_ratio_is_reported_not_asserted():
    report = [c for c in run_suite("gamma", ns=[2, 3, 4]) if c.relation == "report"]
    assert len(report) == 1 and report[0].value == pytest.approx(2**-0.5)
