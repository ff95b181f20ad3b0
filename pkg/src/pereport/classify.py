"""Desk-scale proof that the reports carry class signal.

Hashed bag-of-tokens featurization of serialized reports, a multinomial
logistic-regression classifier trained by full-batch gradient descent, a
stratified train/test split, and classification-report tables in the
familiar per-class precision/recall/F1/support layout.

The split algorithm is part of the toolchain's external contract (other
harnesses must reproduce it): entries are grouped by category in manifest
order, classes are visited in vocabulary order, each group is shuffled with
a single shared random.Random(seed), and the first floor(ratio*n + 1e-9)
entries (clamped to [1, n-1]) go to train.
"""

from __future__ import annotations

import csv
import io
import math
import random
import re
from dataclasses import dataclass
from pathlib import Path
from zlib import crc32

import numpy as np
from scipy import sparse

from .report import Report, serialize_report, tokenize_text

# Category vocabulary; indices 0-7 in this order are the class labels.
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

HASH_DIM = 2**18

DEFAULT_HYPER = {"learning_rate": 0.1, "epochs": 50, "l2": 1e-4}

_SHA256_RE = re.compile(r"^[0-9a-f]{64}$")


class ManifestError(ValueError):
    """Malformed manifest file."""


class ClassTooSmallError(ValueError):
    """A class has fewer than 2 entries and cannot be split."""


class DegenerateDataError(ValueError):
    """Training data covers fewer than 2 classes."""


class LengthMismatchError(ValueError):
    """Predictions and labels differ in length."""


@dataclass(frozen=True)
class ManifestEntry:
    sha256: str
    category: str


@dataclass(frozen=True)
class Model:
    weights: np.ndarray  # (HASH_DIM, n_classes)
    biases: np.ndarray  # (n_classes,)
    classes: tuple[str, ...]
    loss_history: tuple[float, ...]


@dataclass(frozen=True)
class ClassificationReport:
    classes: tuple[str, ...]
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    support: tuple[int, ...]
    accuracy: float
    macro_avg: tuple[float, float, float]  # precision, recall, f1
    weighted_avg: tuple[float, float, float]
    confusion: tuple[tuple[int, ...], ...]  # rows = true class, cols = predicted

    @property
    def total(self) -> int:
        return sum(self.support)


def load_manifest(text: str) -> list[ManifestEntry]:
    """Parse the canonical manifest CSV ("sha256,category" header)."""
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
            raise ManifestError(f"line {lineno}: expected 2 fields, got {len(row)}")
        sha256, category = row[0].strip().lower(), row[1].strip()
        if not _SHA256_RE.match(sha256):
            raise ManifestError(f"line {lineno}: malformed sha256 {row[0]!r}")
        if category not in CLASSES:
            raise ManifestError(f"line {lineno}: unknown category {category!r}")
        entries.append(ManifestEntry(sha256=sha256, category=category))
    return entries


def stratified_split(
    manifest: list[ManifestEntry], ratio: float, seed: int
) -> tuple[list[ManifestEntry], list[ManifestEntry]]:
    """Deterministic per-class split; see the module docstring for the
    exact algorithm, which other implementations must replicate."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must be in (0, 1)")
    groups: dict[str, list[ManifestEntry]] = {name: [] for name in CLASSES}
    for entry in manifest:
        groups[entry.category].append(entry)
    rng = random.Random(seed)
    train: list[ManifestEntry] = []
    test: list[ManifestEntry] = []
    for name in CLASSES:
        group = groups[name]
        if not group:
            continue
        if len(group) < 2:
            raise ClassTooSmallError(f"class {name} has {len(group)} entry")
        shuffled = list(group)
        rng.shuffle(shuffled)
        n_train = min(max(int(math.floor(ratio * len(group) + 1e-9)), 1), len(group) - 1)
        train.extend(shuffled[:n_train])
        test.extend(shuffled[n_train:])
    return train, test


def featurize_text(text: str) -> dict[int, int]:
    """Hash a serialized report's tokens into 2**18 count buckets."""
    vector: dict[int, int] = {}
    for token in tokenize_text(text):
        index = crc32(token.encode("utf-8")) % HASH_DIM
        vector[index] = vector.get(index, 0) + 1
    return vector


def featurize(report: Report) -> dict[int, int]:
    """Feature vector of a report; total mass equals its approximate tokens."""
    return featurize_text(serialize_report(report).decode("utf-8"))


def _stack(vectors: list[dict[int, int]]) -> sparse.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    for vector in vectors:
        for index in sorted(vector):
            indices.append(index)
            data.append(vector[index])
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), indices, indptr),
        shape=(len(vectors), HASH_DIM),
    )


def _normalize_rows(matrix: sparse.csr_matrix) -> sparse.csr_matrix:
    norms = np.sqrt(np.asarray(matrix.multiply(matrix).sum(axis=1)).ravel())
    norms[norms == 0] = 1.0
    scaler = sparse.diags(1.0 / norms)
    return scaler @ matrix


def train_classifier(
    examples: list[tuple[dict[int, int], str]],
    hyper: dict | None = None,
) -> Model:
    """Multinomial logistic regression by full-batch gradient descent.

    Count vectors are scaled to unit L2 norm internally (predict applies
    the same scaling); L2 regularization acts on the weights only.  The
    procedure is deterministic for a fixed example order.
    """
    hyper = {**DEFAULT_HYPER, **(hyper or {})}
    lr = float(hyper["learning_rate"])
    epochs = int(hyper["epochs"])
    l2 = float(hyper["l2"])

    present = sorted({cat for _, cat in examples}, key=CLASSES.index)
    if len(present) < 2:
        raise DegenerateDataError(f"need >= 2 classes, got {present}")
    class_index = {name: i for i, name in enumerate(present)}

    x = _normalize_rows(_stack([vec for vec, _ in examples]))
    y = np.zeros((len(examples), len(present)))
    for row, (_, cat) in enumerate(examples):
        y[row, class_index[cat]] = 1.0

    n = x.shape[0]
    w = np.zeros((HASH_DIM, len(present)))
    b = np.zeros(len(present))
    losses = []
    for _ in range(epochs):
        logits = x @ w + b
        logits -= logits.max(axis=1, keepdims=True)
        exp = np.exp(logits)
        probs = exp / exp.sum(axis=1, keepdims=True)
        loss = -np.mean(np.log(np.maximum((probs * y).sum(axis=1), 1e-300)))
        loss += 0.5 * l2 * float((w * w).sum())
        losses.append(float(loss))
        grad_logits = (probs - y) / n
        grad_w = (x.T @ grad_logits) + l2 * w
        grad_b = grad_logits.sum(axis=0)
        w -= lr * grad_w
        b -= lr * grad_b
    return Model(
        weights=w, biases=b, classes=tuple(present), loss_history=tuple(losses)
    )


def predict(model: Model, vector: dict[int, int]) -> str:
    """Argmax class; exact ties resolve to the lowest class index."""
    x = _normalize_rows(_stack([vector]))
    scores = (x @ model.weights + model.biases).ravel()
    return model.classes[int(np.argmax(scores))]


def predict_many(model: Model, vectors: list[dict[int, int]]) -> list[str]:
    x = _normalize_rows(_stack(vectors))
    scores = x @ model.weights + model.biases
    return [model.classes[i] for i in np.argmax(scores, axis=1)]


def classification_metrics(
    predictions: list[str],
    labels: list[str],
    classes: tuple[str, ...] = CLASSES,
) -> ClassificationReport:
    """Per-class precision/recall/F1/support, accuracy, macro and weighted
    averages and the confusion matrix, per the standard definitions."""
    if len(predictions) != len(labels):
        raise LengthMismatchError(
            f"{len(predictions)} predictions vs {len(labels)} labels"
        )
    index = {name: i for i, name in enumerate(classes)}
    for value in labels:
        if value not in index:
            raise ValueError(f"label {value!r} outside vocabulary")
    k = len(classes)
    confusion = np.zeros((k, k), dtype=np.int64)
    for pred, true in zip(predictions, labels):
        confusion[index[true], index[pred]] += 1

    support = confusion.sum(axis=1)
    predicted = confusion.sum(axis=0)
    diag = np.diag(confusion)
    total = int(confusion.sum())

    precision = np.divide(diag, predicted, out=np.zeros(k), where=predicted > 0)
    recall = np.divide(diag, support, out=np.zeros(k), where=support > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros(k), where=denom > 0)

    accuracy = float(diag.sum() / total) if total else 0.0
    macro = (float(precision.mean()), float(recall.mean()), float(f1.mean()))
    if total:
        weighted = (
            float((precision * support).sum() / total),
            float((recall * support).sum() / total),
            float((f1 * support).sum() / total),
        )
    else:
        weighted = (0.0, 0.0, 0.0)

    return ClassificationReport(
        classes=tuple(classes),
        precision=tuple(float(v) for v in precision),
        recall=tuple(float(v) for v in recall),
        f1=tuple(float(v) for v in f1),
        support=tuple(int(v) for v in support),
        accuracy=accuracy,
        macro_avg=macro,
        weighted_avg=weighted,
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
    )


def render_table(report: ClassificationReport) -> str:
    """Classification report as a text table."""
    width = max(len("Weighted avg"), max(len(c) for c in report.classes)) + 2
    lines = [
        f"{'Class':<{width}}{'Precision':>10}{'Recall':>10}{'F1-score':>10}{'Support':>10}"
    ]
    for i, name in enumerate(report.classes):
        lines.append(
            f"{name:<{width}}{report.precision[i]:>10.2f}{report.recall[i]:>10.2f}"
            f"{report.f1[i]:>10.2f}{report.support[i]:>10d}"
        )
    lines.append("")
    lines.append(f"{'Accuracy':<{width}}{'':>10}{'':>10}{report.accuracy:>10.2f}{report.total:>10d}")
    mp, mr, mf = report.macro_avg
    lines.append(f"{'Macro avg':<{width}}{mp:>10.2f}{mr:>10.2f}{mf:>10.2f}{report.total:>10d}")
    wp, wr, wf = report.weighted_avg
    lines.append(f"{'Weighted avg':<{width}}{wp:>10.2f}{wr:>10.2f}{wf:>10.2f}{report.total:>10d}")
    return "\n".join(lines)


def metrics_to_dict(report: ClassificationReport) -> dict:
    """Machine-readable metrics carrying the same numbers as the table."""
    return {
        "classes": {
            name: {
                "precision": report.precision[i],
                "recall": report.recall[i],
                "f1": report.f1[i],
                "support": report.support[i],
            }
            for i, name in enumerate(report.classes)
        },
        "accuracy": report.accuracy,
        "macro_avg": {
            "precision": report.macro_avg[0],
            "recall": report.macro_avg[1],
            "f1": report.macro_avg[2],
        },
        "weighted_avg": {
            "precision": report.weighted_avg[0],
            "recall": report.weighted_avg[1],
            "f1": report.weighted_avg[2],
        },
        "total": report.total,
        "labels": list(report.classes),
        "confusion_matrix": [list(row) for row in report.confusion],
    }


def save_model(model: Model, path: str | Path) -> None:
    np.savez_compressed(
        path,
        weights=model.weights,
        biases=model.biases,
        classes=np.asarray(model.classes),
        loss_history=np.asarray(model.loss_history),
    )


def load_model(path: str | Path) -> Model:
    with np.load(path, allow_pickle=False) as bundle:
        return Model(
            weights=bundle["weights"],
            biases=bundle["biases"],
            classes=tuple(str(c) for c in bundle["classes"]),
            loss_history=tuple(float(v) for v in bundle["loss_history"]),
        )
