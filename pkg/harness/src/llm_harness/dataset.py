"""Report-corpus loading: manifest, split, tokenization, token statistics.

The harness consumes only the documented interchange formats: report files
named <sha256>.json, the "sha256,category" manifest CSV, and the split
algorithm spelled out in the toolchain's format docs.  The split here must
assign exactly the same hashes to train/test as the report generator's own
baseline does for a given seed, so the algorithm is replicated verbatim
from that contract (grouping in manifest order, categories in class-index
order, one shared random.Random(seed), floor(ratio*n + 1e-9) clamped to
[1, n-1]).
"""

from __future__ import annotations

import csv
import io
import logging
import math
import random
import re
import statistics
from dataclasses import dataclass
from pathlib import Path

logger = logging.getLogger(__name__)

CLASSES = (
    "trojan",
    "worm",
    "ransomware",
    "backdoor",
    "infostealer",
    "downloader",
    "dropper",
    "virus",
)

_SHA256_RE = re.compile(r"^[0-9a-f]{64}$")


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    sha256: str
    category: str


@dataclass
class EncodedSplit:
    input_ids: list[list[int]]
    attention_mask: list[list[int]]
    labels: list[int]
    sha256s: list[str]

    def __len__(self) -> int:
        return len(self.labels)


@dataclass
class DatasetBundle:
    train: EncodedSplit
    test: EncodedSplit
    token_stats: dict
    truncated: int  # reports whose full token count exceeded max_tokens
    skipped: int  # manifest entries without a report file


def load_manifest(text: str) -> list[ManifestEntry]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ManifestError("empty manifest") from None
    if [h.strip() for h in header] != ["sha256", "category"]:
        raise ManifestError('manifest header must be "sha256,category"')
    entries = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ManifestError(f"line {lineno}: expected 2 fields")
        sha256, category = row[0].strip().lower(), row[1].strip()
        if not _SHA256_RE.match(sha256):
            raise ManifestError(f"line {lineno}: malformed sha256")
        if category not in CLASSES:
            raise ManifestError(f"line {lineno}: unknown category {category!r}")
        entries.append(ManifestEntry(sha256, category))
    return entries


def stratified_split(
    entries: list[ManifestEntry], ratio: float, seed: int
) -> tuple[list[ManifestEntry], list[ManifestEntry]]:
    groups: dict[str, list[ManifestEntry]] = {name: [] for name in CLASSES}
    for entry in entries:
        groups[entry.category].append(entry)
    rng = random.Random(seed)
    train: list[ManifestEntry] = []
    test: list[ManifestEntry] = []
    for name in CLASSES:
        group = groups[name]
        if not group:
            continue
        if len(group) < 2:
            raise ManifestError(f"class {name} has fewer than 2 entries")
        shuffled = list(group)
        rng.shuffle(shuffled)
        n_train = min(max(int(math.floor(ratio * len(group) + 1e-9)), 1),
                      len(group) - 1)
        train.extend(shuffled[:n_train])
        test.extend(shuffled[n_train:])
    return train, test


def token_statistics(counts: list[int]) -> dict:
    if not counts:
        return {"count": 0, "mean": 0.0, "median": 0.0,
                "over_512": 0.0, "over_1024": 0.0}
    return {
        "count": len(counts),
        "mean": statistics.mean(counts),
        "median": statistics.median(counts),
        "over_512": sum(c > 512 for c in counts) / len(counts),
        "over_1024": sum(c > 1024 for c in counts) / len(counts),
    }


def prepare_dataset(
    report_dir: str | Path,
    manifest_path: str | Path,
    config,
    tokenizer,
) -> DatasetBundle:
    """Split the manifest, tokenize every report, collect token statistics.

    Full (untruncated) token counts feed the statistics; sequences are then
    truncated to config.max_tokens for training.  Manifest entries without
    a report file are logged and skipped.
    """
    report_dir = Path(report_dir)
    manifest = load_manifest(Path(manifest_path).read_text("utf-8"))

    texts: dict[str, str] = {}
    skipped = 0
    present: list[ManifestEntry] = []
    for entry in manifest:
        path = report_dir / f"{entry.sha256}.json"
        if not path.is_file():
            logger.warning("missing report for %s, skipped", entry.sha256)
            skipped += 1
            continue
        texts[entry.sha256] = path.read_text("utf-8")
        present.append(entry)

    full_counts = {
        sha: len(tokenizer(text, truncation=False, verbose=False)["input_ids"])
        for sha, text in texts.items()
    }
    truncated = sum(c > config.max_tokens for c in full_counts.values())

    train_entries, test_entries = stratified_split(
        present, config.split_ratio, config.seed
    )

    def encode(entries: list[ManifestEntry]) -> EncodedSplit:
        encoded = tokenizer(
            [texts[e.sha256] for e in entries],
            truncation=True,
            max_length=config.max_tokens,
            padding=False,
        )
        return EncodedSplit(
            input_ids=encoded["input_ids"],
            attention_mask=encoded["attention_mask"],
            labels=[CLASSES.index(e.category) for e in entries],
            sha256s=[e.sha256 for e in entries],
        )

    return DatasetBundle(
        train=encode(train_entries),
        test=encode(test_entries),
        token_stats=token_statistics(sorted(full_counts.values())),
        truncated=truncated,
        skipped=skipped,
    )
