"""Acceptance criteria 1-13 at their stated tolerances.

Each test prints one ``[PASS]``/``[FAIL]`` line. Run directly with
``python tests/test_acceptance.py`` for just those lines.
"""

import sys

import pytest

from stamlab import repro


def _run(number):
    return repro.run_criteria([number], seed=0)[0]


@pytest.mark.parametrize("number", sorted(repro.CRITERIA))
def test_criterion(number, capsys):
    res = _run(number)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, f"criterion {number} failed: {res.data}"
    assert res.within_budget, f"criterion {number} took {res.runtime:.2f}s (budget {res.budget:g}s)"


def main() -> int:
    results = repro.run_criteria(sorted(repro.CRITERIA), seed=0)
    for res in results:
        print(res.line())
    return 0 if all(r.passed and r.within_budget for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
