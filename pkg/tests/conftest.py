import pytest

from elastic_kh.state import BackgroundState

ACCEPTANCE_LINES = []


@pytest.fixture
def euler_state():
    return BackgroundState.from_km(0.0, 1.0)


@pytest.fixture
def elastic_state():
    # K = 1 split over both deformation entries, M = 1.5
    return BackgroundState(1.0, 1.5, 0.6, 0.8, 1.0)


def in_window_states():
    return [
        BackgroundState.from_km(0.0, 1.0),
        BackgroundState(1.0, 1.2, 0.3, 0.4, 1.0),
        BackgroundState(2.0, -2.25, 0.9, -1.2, 1.5),
    ]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
