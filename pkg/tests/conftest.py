import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from clothoid_arm.beam import BeamParams  # noqa: E402
from clothoid_arm.dataset import GridConfig, extract_records, simulate_grid  # noqa: E402


@pytest.fixture(scope="session")
def beam_params():
    return BeamParams()


@pytest.fixture(scope="session")
def grid_observations(beam_params):
    """Noise-free marker observations for the full default grid."""
    return simulate_grid(beam_params, GridConfig())


@pytest.fixture(scope="session")
def full_dataset(beam_params, grid_observations):
    return extract_records(grid_observations, beam_params, GridConfig())


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def verdict():
    """Record one acceptance line, echo it, then assert the outcome."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title} | {detail}"
        ACCEPTANCE[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
