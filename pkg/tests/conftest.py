from __future__ import annotations

import pytest

from darkmeter.bayes import McmcConfig, analyze
from darkmeter.protocol import SeriesSummary

# published black-shutter difference statistics
PUB_MEAN = -4.14e-3
PUB_VAR = 445.21
PUB_N = 997920


@pytest.fixture(scope="session")
def published_summary() -> SeriesSummary:
    return SeriesSummary.from_stats(PUB_MEAN, PUB_VAR, PUB_N)


@pytest.fixture(scope="session")
def published_analysis(published_summary):
    return analyze(published_summary, 10.0, McmcConfig(seed=0))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
