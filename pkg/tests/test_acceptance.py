"""The eleven acceptance criteria, each at its stated tolerance and time limit."""
import pytest

from artifact.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA],
                         ids=[f"{c[0]:02d}-{c[1].lower().replace(' ', '-')}" for c in CRITERIA])
def test_criterion(number, acceptance_log):
    res = run_criterion(number)
    acceptance_log.append(res)
    print(res.line())
    assert res.passed, res.detail
    assert res.in_time, f"{res.seconds:.1f}s exceeds {res.limit:.0f}s"
