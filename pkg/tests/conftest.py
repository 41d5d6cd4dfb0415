import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rauzy.spectral import base_eigenvectors, power_spectral  # noqa: E402
from rauzy.substitution import Substitution, power  # noqa: E402

_acceptance_lines = []


@pytest.fixture(scope="session")
def sigma():
    """1->21, 2->31, 3->1"""
    return Substitution.from_strings("21", "31", "1")


@pytest.fixture(scope="session")
def tribonacci():
    return Substitution.from_strings("12", "13", "1")


@pytest.fixture(scope="session")
def quadribonacci():
    return Substitution.from_strings("21", "31", "41", "1")


@pytest.fixture(scope="session")
def sigma3(sigma):
    return power(sigma, 3)


@pytest.fixture(scope="session")
def sd_sigma(sigma):
    return base_eigenvectors(sigma)


@pytest.fixture(scope="session")
def sd_sigma3(sd_sigma):
    return power_spectral(sd_sigma, 3)


@pytest.fixture(scope="session")
def sd_tribonacci(tribonacci):
    return base_eigenvectors(tribonacci)


def pytest_runtest_logreport(report):
    if report.when == "call":
        _acceptance_lines.extend(v for k, v in report.user_properties if k == "acceptance")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
