from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

REPO = Path(__file__).resolve().parents[1]
CONFIGS = REPO / "configs"

# verdict lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def configs_dir() -> Path:
    return CONFIGS


@pytest.fixture
def output_root(tmp_path, monkeypatch):
    """Route run outputs to a temporary directory through the environment variable."""
    root = tmp_path / "out"
    monkeypatch.setenv("CAPWAVE_OUTPUT_ROOT", str(root))
    return root


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
