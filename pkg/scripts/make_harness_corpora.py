#!/usr/bin/env python3
"""Regenerate the report corpora committed under harness/tests/data/.

The harness consumes the primary toolchain only through report files,
manifests and the documented schemas, so its test corpora are generated
here (on the primary side) and committed as plain data:

  fixture40/     8 classes x 5 reports + manifest.csv
  separable200/  8 classes x 25 reports + manifest.csv
  expected_split_fixture40_seed7.json   primary split assignment to replicate
  approx_tokens_fixture40.json          primary token approximation per report
"""

import json
from pathlib import Path

from pereport.classify import load_manifest, stratified_split
from pereport.report import tokenize_text
from pereport.synth import generate_corpus

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "harness" / "tests" / "data"

SPLIT_SEED = 7
SPLIT_RATIO = 0.8


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)

    fixture_dir = DATA / "fixture40"
    manifest_path = generate_corpus(fixture_dir, per_class=5, seed=40)
    manifest = load_manifest(manifest_path.read_text("utf-8"))
    print(f"fixture40: {len(manifest)} reports")

    separable_dir = DATA / "separable200"
    sep_manifest = generate_corpus(separable_dir, per_class=25, seed=200)
    print(f"separable200: {len(load_manifest(sep_manifest.read_text('utf-8')))} reports")

    train, test = stratified_split(manifest, SPLIT_RATIO, SPLIT_SEED)
    split_payload = {
        "seed": SPLIT_SEED,
        "ratio": SPLIT_RATIO,
        "train": [e.sha256 for e in train],
        "test": [e.sha256 for e in test],
    }
    (DATA / "expected_split_fixture40_seed7.json").write_text(
        json.dumps(split_payload, indent=2) + "\n", "utf-8"
    )
    print(f"split: {len(train)} train / {len(test)} test")

    counts = {
        path.stem: len(tokenize_text(path.read_text("utf-8")))
        for path in sorted(fixture_dir.glob("*.json"))
    }
    values = sorted(counts.values())
    mid = len(values) // 2
    stats = {
        "per_report": counts,
        "mean": sum(values) / len(values),
        "median": (
            values[mid] if len(values) % 2 else (values[mid - 1] + values[mid]) / 2
        ),
        "over_512": sum(v > 512 for v in values) / len(values),
        "over_1024": sum(v > 1024 for v in values) / len(values),
    }
    (DATA / "approx_tokens_fixture40.json").write_text(
        json.dumps(stats, indent=2) + "\n", "utf-8"
    )
    print(f"approx tokens: mean {stats['mean']:.1f}, median {stats['median']}")


if __name__ == "__main__":
    main()
