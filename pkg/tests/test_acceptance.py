"""Acceptance suite: one test per release criterion.

Each test pins the tolerances and sample counts the toolchain ships with;
the conftest terminal-summary hook prints one PASS/FAIL line per criterion.
"""

import json
import math
import random
import time
from collections import Counter

from pereport.classify import (
    classification_metrics,
    featurize_text,
    load_manifest,
    predict_many,
    stratified_split,
    train_classifier,
)
from pereport.cli import main as cli_main
from pereport.globalinfo import shannon_entropy
from pereport.imports import compute_imphash
from pereport.packing import DetectorVerdict, aggregate_packing_label
from pereport.pipeline import analyze
from pereport.report import TokenBudget, approximate_tokens, fit_to_budget, serialize_report
from pereport.rules import load_default_rule_pack
from pereport.synth import generate_corpus

from conftest import FIXTURE_DIR, GOLDEN_DIR
from oracle_pe_dumper import dump_headers
from test_imports import reference_imphash, table
from test_report import make_oversized, parts_present, reference_token_count
from test_rules import check_monotonicity


def test_entropy_oracle_equivalence():
    """1,000 random buffers up to 64 KiB vs a direct histogram oracle."""
    started = time.monotonic()
    rng = random.Random(2024)
    for _ in range(1000):
        data = rng.randbytes(rng.randrange(0, 65536 + 1))
        if not data:
            expected = 0.0
        else:
            counts = Counter(data)
            n = len(data)
            expected = -sum((c / n) * math.log2(c / n) for c in counts.values())
        assert abs(shannon_entropy(data) - expected) <= 1e-9
    assert shannon_entropy(b"\x5a" * 4096) == 0.0
    assert shannon_entropy(bytes(range(256))) == 8.0
    assert time.monotonic() - started < 10.0


def _ensemble(labels, weights):
    return [
        DetectorVerdict(f"d{i}", label, weight, (), "")
        for i, (label, weight) in enumerate(zip(labels, weights))
    ]


def test_packing_label_properties():
    """10,000 random ensembles: bounds, iff-extremes, monotone flips,
    weight-scale invariance; the worked examples reproduce exactly."""
    rng = random.Random(31337)
    for _ in range(10_000):
        n = rng.randrange(1, 9)
        labels = [rng.randrange(2) for _ in range(n)]
        weights = [rng.uniform(1e-3, 100.0) for _ in range(n)]
        value = aggregate_packing_label(_ensemble(labels, weights))
        assert 0.0 <= value <= 1.0
        assert (value == 0.0) == all(l == 0 for l in labels)
        assert (value == 1.0) == all(l == 1 for l in labels)

        if not all(labels):
            flip = rng.choice([i for i, l in enumerate(labels) if l == 0])
            flipped = list(labels)
            flipped[flip] = 1
            assert aggregate_packing_label(_ensemble(flipped, weights)) > value

        c = rng.uniform(1e-3, 1e3)
        scaled = aggregate_packing_label(_ensemble(labels, [w * c for w in weights]))
        assert abs(scaled - value) <= 1e-12

    assert aggregate_packing_label(_ensemble([1, 0, 1, 0], [1, 1, 1, 1])) == 0.5
    assert aggregate_packing_label(_ensemble([1, 0, 1], [2, 1, 1])) == 0.75


def test_golden_fixtures():
    """>= 6 committed fixtures produce byte-identical reports; headers are
    cross-checked against the independent dumper."""
    names = sorted(p.stem for p in FIXTURE_DIR.glob("*.bin"))
    assert len(names) >= 6
    for kind in ("plain", "libsample", "upxish", "rsrcx", "ordimp", "noimp"):
        assert kind in names
    for name in names:
        data = (FIXTURE_DIR / f"{name}.bin").read_bytes()
        result = analyze(data, f"{name}.bin")
        golden = (GOLDEN_DIR / f"{name}.report.json").read_bytes()
        assert serialize_report(result.report) == golden, name

        oracle = dump_headers(data)
        payload = json.loads(golden)
        assert len(payload["sections"]) == oracle["num_sections"]
        assert payload["global"]["file_type"] == (
            "dll" if oracle["characteristics"] & 0x2000 else "exe"
        )
        for got, want in zip(payload["sections"], oracle["sections"]):
            assert got["name"] == want["name"]
            assert got["raw_size"] == want["raw_size"]
            assert got["virtual_size"] == want["virtual_size"]


def test_imphash_convention():
    assert compute_imphash(table()) == "d41d8cd98f00b204e9800998ecf8427e"

    # Fixture import lists vs the independent reference implementation.
    from pereport.pe import parse_pe

    for name in ("plain", "ordimp", "injector", "upxish"):
        data = (FIXTURE_DIR / f"{name}.bin").read_bytes()
        pe = parse_pe(data)
        pairs = []
        for lib in pe.imports.libraries:
            for entry in lib.entries:
                if entry.is_ordinal:
                    from pereport.imports import resolve_ordinal

                    resolved = resolve_ordinal(lib.dll_name, entry.ordinal)
                    pairs.append(
                        (lib.dll_name, resolved if resolved else f"ord{entry.ordinal}")
                    )
                else:
                    pairs.append((lib.dll_name, entry.name))
        assert compute_imphash(pe.imports) == reference_imphash(pairs), name

    rng = random.Random(404)
    apis = ["CreateFileA", "ReadFile", "VirtualAlloc", "Sleep", "ExitProcess"]
    for _ in range(250):
        pairs = [(rng.choice(["a.dll", "B.DLL", "c.ocx"]), rng.choice(apis))
                 for _ in range(rng.randrange(1, 10))]
        base = table(*[(dll, [api]) for dll, api in pairs])
        assert compute_imphash(base) == reference_imphash(pairs)

        # case/extension invariance
        recased = table(*[
            (dll.upper().replace(".DLL", ".dll"), [api.swapcase()])
            for dll, api in pairs
        ])
        assert compute_imphash(recased) == compute_imphash(base)

        # order sensitivity
        if len(pairs) >= 2 and pairs[0] != pairs[1]:
            swapped = [pairs[1], pairs[0]] + pairs[2:]
            reordered = table(*[(dll, [api]) for dll, api in swapped])
            assert compute_imphash(reordered) != compute_imphash(base)


def test_metrics_engine():
    labels = ["a"] * 10 + ["b"] * 10
    predictions = (["a"] * 8 + ["b"] * 2) + (["a"] * 1 + ["b"] * 9)
    report = classification_metrics(predictions, labels, ("a", "b"))
    assert report.confusion == ((8, 2), (1, 9))
    assert abs(report.precision[0] - 8 / 9) <= 1e-12
    assert abs(report.recall[0] - 0.8) <= 1e-12
    expected_f1 = 2 * (8 / 9) * 0.8 / (8 / 9 + 0.8)
    assert abs(report.f1[0] - expected_f1) <= 1e-12

    # Support-weighted recombination of published per-class test F1 scores.
    per_class_f1 = (0.94, 0.95, 0.91, 0.95, 0.83, 0.86, 0.43, 0.99)
    supports = (5793, 3392, 150, 1471, 100, 183, 153, 35)
    assert sum(supports) == 11277
    weighted = sum(f * s for f, s in zip(per_class_f1, supports)) / sum(supports)
    assert 0.93 <= weighted <= 0.94


def test_desk_scale_classification(tmp_path):
    """8 classes x 200 reports through the real pipeline: train weighted F1
    >= 0.95, test >= 0.90, deterministic per seed, under two minutes."""
    started = time.monotonic()

    def build_and_score(out_dir):
        manifest_path = generate_corpus(out_dir, per_class=200, seed=1701)
        manifest = load_manifest(manifest_path.read_text("utf-8"))
        train_entries, test_entries = stratified_split(manifest, 0.8, seed=1701)

        def vectors(entries):
            xs, ys = [], []
            for entry in entries:
                text = (out_dir / f"{entry.sha256}.json").read_text("utf-8")
                xs.append(featurize_text(text))
                ys.append(entry.category)
            return xs, ys

        train_x, train_y = vectors(train_entries)
        test_x, test_y = vectors(test_entries)
        model = train_classifier(list(zip(train_x, train_y)))
        train_report = classification_metrics(predict_many(model, train_x), train_y)
        test_report = classification_metrics(predict_many(model, test_x), test_y)
        return train_report, test_report

    train_report, test_report = build_and_score(tmp_path / "run_a")
    assert len(train_report.classes) == 8
    assert sum(train_report.support) == 8 * 200 * 0.8
    assert train_report.weighted_avg[2] >= 0.95
    assert test_report.weighted_avg[2] >= 0.90

    train_again, test_again = build_and_score(tmp_path / "run_b")
    assert train_again == train_report
    assert test_again == test_report

    assert time.monotonic() - started < 120.0


def test_token_budget(tmp_path, capsys):
    fixtures = {p.stem: p.read_bytes() for p in FIXTURE_DIR.glob("*.bin")}
    oversized = make_oversized(fixtures)

    priority = list(TokenBudget(limit=1).priority)
    floor = approximate_tokens(fit_to_budget(oversized, TokenBudget(limit=1)))
    for limit in [floor, 300, 512, 700, 1024, 2048, 8192]:
        budget = TokenBudget(limit=limit)
        fitted = fit_to_budget(oversized, budget)
        present = parts_present(fitted)
        for i, part in enumerate(priority):
            if not present[part]:
                for lower in priority[i + 1 :]:
                    assert not present[lower]
        again = fit_to_budget(fitted, budget)
        assert again == fitted
        assert serialize_report(again) == serialize_report(fitted)
        if limit >= floor:
            assert approximate_tokens(fitted) <= limit

    # Corpus statistics via the CLI match an independent recomputation.
    reports = tmp_path / "reports"
    reports.mkdir()
    for path in GOLDEN_DIR.glob("*.report.json"):
        (reports / path.name.replace(".report", "")).write_bytes(path.read_bytes())
    code = cli_main(["tokens", str(reports), "--json"])
    stats = json.loads(capsys.readouterr().out)
    assert code == 0

    counts = sorted(
        reference_token_count(p.read_text("utf-8")) for p in reports.glob("*.json")
    )
    assert stats["count"] == len(counts)
    assert stats["mean"] == sum(counts) / len(counts)
    mid = len(counts) // 2
    median = counts[mid] if len(counts) % 2 else (counts[mid - 1] + counts[mid]) / 2
    assert stats["median"] == median
    assert stats["over_512"] == sum(c > 512 for c in counts) / len(counts)
    assert stats["over_1024"] == sum(c > 1024 for c in counts) / len(counts)


def test_rule_engine():
    pack = load_default_rule_pack()
    assert len(pack.rules) >= 12

    fixtures = {p.stem: p.read_bytes() for p in FIXTURE_DIR.glob("*.bin")}
    injector = analyze(fixtures["injector"], "injector.bin")
    plain = analyze(fixtures["plain"], "plain.bin")
    injector_rules = {m.rule_id for m in injector.matches}
    plain_rules = {m.rule_id for m in plain.matches}
    assert "process-injection-api-pair" in injector_rules
    assert "process-injection-api-pair" not in plain_rules

    check_monotonicity(1000, seed=90210)
