import numpy as np
import pytest

from saledi.events import Event, EventCatalog
from saledi.ingest import MINUTES_PER_YEAR, SystemProfile

SPAN_START = 23_667_840  # 2015-01-01T00:00 in epoch minutes


def make_catalog(magnitudes, years=1.0, starts=None, n_customer=1000):
    """Catalog of single-outage events with the given CMIp, spread over the span."""
    span = int(round(years * MINUTES_PER_YEAR))
    n = len(magnitudes)
    if starts is None:
        starts = [SPAN_START + (i * span) // max(n, 1) for i in range(n)]
    events = [Event(i + 1, (f"o{i}",), (int(s),), (float(m),), int(s), int(s) + 60)
              for i, (s, m) in enumerate(zip(starts, magnitudes))]
    return EventCatalog(events, SystemProfile(n_customer, SPAN_START, SPAN_START + span))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
