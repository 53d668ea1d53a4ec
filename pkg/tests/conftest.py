from fractions import Fraction as F
from itertools import product

import pytest

from semistatic.blocks import BlockParams, build_block

EPSILONS = (F(1, 2), F(1, 4), F(1, 16), F(1, 2**9))
MS = (F(1), F(2), F(16))
LEVELS = ((F(2), F(3)), (F(9, 4), F(11, 4)), (F(17, 8), F(23, 8)))

SWEEP = tuple(BlockParams(e, m, a, b) for e, m, (a, b) in product(EPSILONS, MS, LEVELS))


@pytest.fixture(scope="session")
def reference_block():
    return build_block(BlockParams(F(1, 2), F(2), F(2), F(3)))


@pytest.fixture(scope="session")
def sweep_blocks():
    return [build_block(p) for p in SWEEP]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
