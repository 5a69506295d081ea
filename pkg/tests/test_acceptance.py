"""Acceptance battery: one test and one PASS/FAIL line per criterion.

Run directly (``python tests/test_acceptance.py``) to print the lines
without pytest.
"""

import pytest

from zeromach.acceptance import ALL

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # executed as a script from another directory
    ACCEPTANCE_LINES = []


def _run(number):
    result = ALL[number]()
    line = result.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    return result


@pytest.mark.slow
@pytest.mark.parametrize(
    "number",
    [
        pytest.param(1, id="riemann_correctness"),
        pytest.param(2, id="oracle_agreement_g1"),
        pytest.param(3, id="conservation_and_potential_c1"),
        pytest.param(4, id="liquid_tv_scaling"),
        pytest.param(5, id="limit_self_consistency_l1"),
        pytest.param(6, id="compressible_to_limit_rate_c1"),
        pytest.param(7, id="stacked_eigenstructure"),
    ],
)
def test_criterion(number):
    result = _run(number)
    assert result.passed, result.line()


if __name__ == "__main__":
    failed = sum(not _run(n).passed for n in ALL)
    raise SystemExit(1 if failed else 0)
