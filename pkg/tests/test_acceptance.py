"""The eleven acceptance criteria on the reference configuration (L = 4, ell = 1).

Each criterion is one test; the PASS/FAIL line for every criterion is also
printed in the terminal summary.  Run directly (``python tests/test_acceptance.py``)
to print the lines without pytest.
"""

import sys
import time

import pytest

from modcyl.verify import CRITERIA, desk, run_acceptance

LINES: dict = {}


@pytest.fixture(scope="module")
def results():
    t0 = time.perf_counter()
    out = {r.number: r for r in run_acceptance(d=desk())}
    for n, r in out.items():
        LINES[n] = r.line()
    LINES["elapsed"] = f"acceptance suite: {time.perf_counter() - t0:.0f} s"
    return out


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=[f"c{n:02d}_{CRITERIA[n].__name__}" for n in sorted(CRITERIA)])
def test_criterion(results, number):
    r = results[number]
    print(r.line())
    if not r.passed:
        pytest.fail(r.line(), pytrace=False)


if __name__ == "__main__":
    rs = run_acceptance(d=desk())
    for r in rs:
        print(r.line())
    sys.exit(0 if all(r.passed for r in rs) else 1)
