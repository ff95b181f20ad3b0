"""Classification metrics in the toolchain's interchange shape.

Same JSON layout as the report toolchain's baseline emits (see
docs/schemas/metrics.schema.json there), so encoder results and baseline
results are directly comparable.
"""

from __future__ import annotations

import numpy as np

from .dataset import CLASSES


def classification_metrics(
    predictions: list[int], labels: list[int], classes: tuple[str, ...] = CLASSES
) -> dict:
    if len(predictions) != len(labels):
        raise ValueError("predictions and labels differ in length")
    k = len(classes)
    confusion = np.zeros((k, k), dtype=np.int64)
    for pred, true in zip(predictions, labels):
        confusion[true, pred] += 1

    support = confusion.sum(axis=1)
    predicted = confusion.sum(axis=0)
    diag = np.diag(confusion)
    total = int(confusion.sum())

    precision = np.divide(diag, predicted, out=np.zeros(k), where=predicted > 0)
    recall = np.divide(diag, support, out=np.zeros(k), where=support > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros(k), where=denom > 0)

    weighted = (
        (
            float((precision * support).sum() / total),
            float((recall * support).sum() / total),
            float((f1 * support).sum() / total),
        )
        if total
        else (0.0, 0.0, 0.0)
    )
    return {
        "classes": {
            name: {
                "precision": float(precision[i]),
                "recall": float(recall[i]),
                "f1": float(f1[i]),
                "support": int(support[i]),
            }
            for i, name in enumerate(classes)
        },
        "accuracy": float(diag.sum() / total) if total else 0.0,
        "macro_avg": {
            "precision": float(precision.mean()),
            "recall": float(recall.mean()),
            "f1": float(f1.mean()),
        },
        "weighted_avg": {
            "precision": weighted[0],
            "recall": weighted[1],
            "f1": weighted[2],
        },
        "total": total,
        "labels": list(classes),
        "confusion_matrix": confusion.tolist(),
    }


def render_table(metrics: dict) -> str:
    classes = metrics["labels"]
    width = max(len("Weighted avg"), max(len(c) for c in classes)) + 2
    lines = [
        f"{'Class':<{width}}{'Precision':>10}{'Recall':>10}{'F1-score':>10}{'Support':>10}"
    ]
    for name in classes:
        row = metrics["classes"][name]
        lines.append(
            f"{name:<{width}}{row['precision']:>10.2f}{row['recall']:>10.2f}"
            f"{row['f1']:>10.2f}{row['support']:>10d}"
        )
    lines.append("")
    lines.append(
        f"{'Accuracy':<{width}}{'':>10}{'':>10}"
        f"{metrics['accuracy']:>10.2f}{metrics['total']:>10d}"
    )
    macro = metrics["macro_avg"]
    lines.append(
        f"{'Macro avg':<{width}}{macro['precision']:>10.2f}{macro['recall']:>10.2f}"
        f"{macro['f1']:>10.2f}{metrics['total']:>10d}"
    )
    weighted = metrics["weighted_avg"]
    lines.append(
        f"{'Weighted avg':<{width}}{weighted['precision']:>10.2f}"
        f"{weighted['recall']:>10.2f}{weighted['f1']:>10.2f}{metrics['total']:>10d}"
    )
    return "\n".join(lines)
