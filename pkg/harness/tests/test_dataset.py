import json
import shutil

import pytest

from llm_harness import (
    ManifestError,
    TrainConfig,
    load_manifest,
    prepare_dataset,
    stratified_split,
    token_statistics,
)

from conftest import DATA, FIXTURE40


def test_manifest_loads():
    entries = load_manifest((FIXTURE40 / "manifest.csv").read_text("utf-8"))
    assert len(entries) == 40
    assert {e.category for e in entries} == {
        "trojan", "worm", "ransomware", "backdoor",
        "infostealer", "downloader", "dropper", "virus",
    }


def test_manifest_rejects_bad_header():
    with pytest.raises(ManifestError):
        load_manifest("hash,kind\n" + "a" * 64 + ",trojan\n")


def test_manifest_rejects_unknown_category():
    with pytest.raises(ManifestError):
        load_manifest("sha256,category\n" + "a" * 64 + ",pup\n")


def test_split_is_80_20_on_fixture_corpus():
    entries = load_manifest((FIXTURE40 / "manifest.csv").read_text("utf-8"))
    train, test = stratified_split(entries, 0.8, seed=7)
    assert len(train) == 32 and len(test) == 8
    per_class = {c: 0 for c in set(e.category for e in test)}
    for e in test:
        per_class[e.category] += 1
    assert all(v == 1 for v in per_class.values())


def test_split_matches_report_generator_assignment():
    """Same seed must reproduce the generator's own train/test hashes."""
    expected = json.loads(
        (DATA / "expected_split_fixture40_seed7.json").read_text("utf-8")
    )
    entries = load_manifest((FIXTURE40 / "manifest.csv").read_text("utf-8"))
    train, test = stratified_split(entries, expected["ratio"], expected["seed"])
    assert [e.sha256 for e in train] == expected["train"]
    assert [e.sha256 for e in test] == expected["test"]


def test_token_statistics_helper():
    stats = token_statistics([100, 600, 600, 2000])
    assert stats["mean"] == 825
    assert stats["median"] == 600
    assert stats["over_512"] == 0.75
    assert stats["over_1024"] == 0.25


def test_prepare_dataset_shapes(tokenizer, tiny_checkpoint):
    config = TrainConfig(model_name=str(tiny_checkpoint), max_tokens=512,
                         epochs=1, seed=7)
    bundle = prepare_dataset(FIXTURE40, FIXTURE40 / "manifest.csv", config,
                             tokenizer)
    assert len(bundle.train) == 32 and len(bundle.test) == 8
    assert bundle.skipped == 0
    assert all(len(ids) <= 512 for ids in bundle.train.input_ids)
    assert bundle.truncated == 40  # every fixture report is longer than 512
    assert bundle.token_stats["count"] == 40
    assert set(bundle.train.labels) <= set(range(8))


def test_token_stats_match_recount_oracle(tokenizer, tiny_checkpoint):
    """Stats emitted by prepare_dataset equal a direct recount with the
    same tokenizer and hand-rolled statistics."""
    config = TrainConfig(model_name=str(tiny_checkpoint), max_tokens=512,
                         epochs=1, seed=7)
    bundle = prepare_dataset(FIXTURE40, FIXTURE40 / "manifest.csv", config,
                             tokenizer)
    counts = sorted(
        len(tokenizer(path.read_text("utf-8"), truncation=False,
                      verbose=False)["input_ids"])
        for path in FIXTURE40.glob("[0-9a-f]*.json")
    )
    assert bundle.token_stats["count"] == len(counts)
    assert bundle.token_stats["mean"] == sum(counts) / len(counts)
    mid = len(counts) // 2
    median = counts[mid] if len(counts) % 2 else (counts[mid - 1] + counts[mid]) / 2
    assert bundle.token_stats["median"] == median
    assert bundle.token_stats["over_512"] == sum(c > 512 for c in counts) / len(counts)
    assert bundle.token_stats["over_1024"] == sum(c > 1024 for c in counts) / len(counts)


def test_prepare_dataset_skips_missing_reports(tokenizer, tiny_checkpoint,
                                               tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for path in FIXTURE40.glob("*"):
        shutil.copy(path, corpus / path.name)
    victims = sorted(corpus.glob("[0-9a-f]*.json"))[:2]
    for victim in victims:
        victim.unlink()
    config = TrainConfig(model_name=str(tiny_checkpoint), max_tokens=512,
                         epochs=1, seed=7)
    bundle = prepare_dataset(corpus, corpus / "manifest.csv", config, tokenizer)
    assert bundle.skipped == 2
    assert len(bundle.train) + len(bundle.test) == 38


def test_config_validation(tiny_checkpoint):
    with pytest.raises(ValueError):
        TrainConfig(model_name=str(tiny_checkpoint), max_tokens=256)
    with pytest.raises(ValueError):
        TrainConfig(model_name=str(tiny_checkpoint), split_ratio=1.5)
    defaults = TrainConfig(model_name=str(tiny_checkpoint))
    assert (defaults.max_tokens, defaults.epochs, defaults.batch_size,
            defaults.split_ratio) == (512, 10, 16, 0.8)
