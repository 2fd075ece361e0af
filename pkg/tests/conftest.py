import numpy as np
import pytest

from signfv.core import RngStream


@pytest.fixture
def rng():
    return RngStream(1234, "tests")


def binomial_3sigma(p, n):
    return 3.0 * np.sqrt(p * (1.0 - p) / n)


# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
