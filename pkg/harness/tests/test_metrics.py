import json

import jsonschema
import pytest

from llm_harness import classification_metrics, render_table

from conftest import SCHEMAS

METRICS_SCHEMA = json.loads((SCHEMAS / "metrics.schema.json").read_text("utf-8"))


def test_hand_computed_two_class():
    labels = [0] * 10 + [1] * 10
    predictions = ([0] * 8 + [1] * 2) + ([0] * 1 + [1] * 9)
    metrics = classification_metrics(predictions, labels, ("a", "b"))
    assert metrics["confusion_matrix"] == [[8, 2], [1, 9]]
    assert metrics["classes"]["a"]["precision"] == pytest.approx(8 / 9, abs=1e-12)
    assert metrics["classes"]["a"]["recall"] == pytest.approx(0.8, abs=1e-12)
    expected_f1 = 2 * (8 / 9) * 0.8 / (8 / 9 + 0.8)
    assert metrics["classes"]["a"]["f1"] == pytest.approx(expected_f1, abs=1e-12)
    assert metrics["accuracy"] == pytest.approx(0.85, abs=1e-15)


def test_invariants_on_random_data():
    import random

    rng = random.Random(3)
    labels = [rng.randrange(8) for _ in range(400)]
    predictions = [rng.randrange(8) for _ in range(400)]
    metrics = classification_metrics(predictions, labels)

    confusion = metrics["confusion_matrix"]
    total = metrics["total"]
    assert sum(confusion[i][i] for i in range(8)) / total == pytest.approx(
        metrics["accuracy"], abs=1e-15
    )
    for i, name in enumerate(metrics["labels"]):
        row = metrics["classes"][name]
        assert sum(confusion[i]) == row["support"]
        p, r = row["precision"], row["recall"]
        expected = 0.0 if p + r == 0 else 2 * p * r / (p + r)
        assert row["f1"] == pytest.approx(expected, abs=1e-12)
    for key, index in (("precision", 0), ("recall", 1), ("f1", 2)):
        weighted = sum(
            metrics["classes"][n][key] * metrics["classes"][n]["support"]
            for n in metrics["labels"]
        ) / total
        assert metrics["weighted_avg"][key] == pytest.approx(weighted, abs=1e-12)


def test_schema_validity():
    labels = [0, 1, 2, 3, 4, 5, 6, 7] * 4
    predictions = [0, 1, 2, 3, 4, 5, 6, 0] * 4
    metrics = classification_metrics(predictions, labels)
    jsonschema.validate(metrics, METRICS_SCHEMA)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        classification_metrics([0], [0, 1])


def test_table_layout():
    labels = [0] * 5 + [1] * 5
    metrics = classification_metrics(labels, labels, ("trojan", "worm"))
    table = render_table(metrics)
    lines = table.splitlines()
    assert lines[0].split() == ["Class", "Precision", "Recall", "F1-score", "Support"]
    assert "Accuracy" in table and "Macro avg" in table and "Weighted avg" in table
