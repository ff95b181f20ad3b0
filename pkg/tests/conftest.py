import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pereport.synth import fixture_specs  # noqa: E402

FIXTURE_DIR = Path(__file__).parent / "data" / "fixtures"
GOLDEN_DIR = Path(__file__).parent / "data" / "golden"

# Wall-clock override for report generation so "timestamp in the future"
# never flips on committed goldens: 2024-01-01T00:00:00Z.
REPORT_CLOCK = 1704067200.0


@pytest.fixture(scope="session")
def fixture_bytes() -> dict[str, bytes]:
    """Committed fixture binaries, keyed by name."""
    return {
        path.stem: path.read_bytes() for path in sorted(FIXTURE_DIR.glob("*.bin"))
    }


@pytest.fixture(scope="session")
def built_specs():
    return fixture_specs()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance" in getattr(report, "nodeid", ""):
                name = report.nodeid.split("::")[-1]
                lines.append((name, status.upper()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status:6s} {name}")
