import pytest

from qdotmod.model import SystemParams

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion_report():
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(label: str, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def fig1_params():
    # g/2pi = kappa/2pi = 20 GHz, gamma = kappa/80, no pure dephasing
    return SystemParams(20.0, 20.0, 0.25, 0.0, 1.0)


@pytest.fixture
def fig2_params():
    return SystemParams(20.0, 20.0, 0.1, 0.1, 1.0)
