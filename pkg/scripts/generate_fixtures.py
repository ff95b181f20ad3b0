#!/usr/bin/env python3
"""Regenerate the committed test fixtures and their golden reports.

Run from the repository root after changing the synthetic builder or the
report schema, then review the diff before committing:

    python scripts/generate_fixtures.py
"""

from pathlib import Path

from pereport.pipeline import analyze
from pereport.report import serialize_report
from pereport.synth import write_fixtures

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "data" / "fixtures"
GOLDEN = ROOT / "tests" / "data" / "golden"


def main() -> None:
    written = write_fixtures(FIXTURES)
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name, path in sorted(written.items()):
        result = analyze(path.read_bytes(), f"{name}.bin")
        golden = GOLDEN / f"{name}.report.json"
        golden.write_bytes(serialize_report(result.report))
        print(f"{name:10s} -> {golden.relative_to(ROOT)}"
              f" ({len(result.warnings)} warnings)")


if __name__ == "__main__":
    main()
