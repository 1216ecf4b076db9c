from __future__ import annotations

import functools

import pytest

from artifact.classpoly import JobConfig, compare, expected_polynomial, run
from artifact.cmfield import CMField

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def field(a, b):
    return CMField(a, b)


@pytest.fixture(scope="session")
def K71():
    return field(57, 661)


@pytest.fixture(scope="session")
def K72():
    return field(18, 68)


@pytest.fixture(scope="session")
def K73():
    return field(53, 601)


@functools.lru_cache(maxsize=None)
def run_example(name, start=None, system=None):
    """Run a bundled configuration; returns (job, polynomial, report, (monic match, literal match))."""
    job = JobConfig.load(name + ".json")
    if system is not None:
        job.system = system
    if start is not None:
        job.precision = dict(job.precision, start=start)
    P, report = run(job)
    Q = expected_polynomial(P.ring.K, P.ring.cmtype, job.expected)
    return job, P, report, compare(P, Q)


def acceptance_line(line):
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
