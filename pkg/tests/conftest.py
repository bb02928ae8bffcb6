from fractions import Fraction

import numpy as np
import pytest

from movingtargets.adversary import TRIPWIRE
from movingtargets.chain import biased_cycle, lazy_cycle, random_chain

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def small_chains():
    """A handful of exact chains reused by property tests."""
    gen = np.random.default_rng(7)
    chains = [lazy_cycle(5), lazy_cycle(6), biased_cycle(5, Fraction(2, 3))]
    chains += [random_chain(int(gen.integers(3, 7)), gen, density=0.4) for _ in range(4)]
    return chains


@pytest.fixture
def criterion():
    """``criterion(k, title, passed, detail)`` prints one acceptance line and returns ``passed``."""
    def record(k, title, passed, detail=""):
        line = f"[criterion {k:>2}] {'PASS' if passed else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def _tripwire_line():
    status = "PASS" if not TRIPWIRE.violations else "FAIL"
    return (f"[criterion  7] {status}  upper-bound tripwire over the whole run "
            f"(checks={TRIPWIRE.checks}, skipped periodic={TRIPWIRE.skipped}, violations={len(TRIPWIRE.violations)})")


def pytest_terminal_summary(terminalreporter):
    lines = ACCEPTANCE_LINES + [_tripwire_line()]
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)


def pytest_sessionfinish(session, exitstatus):
    # the tripwire is fed by every search and gadget evaluated anywhere in the run
    if TRIPWIRE.violations and session.exitstatus == 0:
        session.exitstatus = 1
