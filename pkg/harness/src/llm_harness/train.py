"""Encoder fine-tuning over tokenized report datasets.

A plain torch loop (AdamW, cross-entropy, shuffled mini-batches of
config.batch_size for config.epochs) keeps the whole procedure visible and
deterministic: the same seed reproduces identical metrics on CPU.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import torch
from torch.utils.data import DataLoader, Dataset
from transformers import AutoModelForSequenceClassification

from .dataset import CLASSES, DatasetBundle, EncodedSplit
from .metrics import classification_metrics

logger = logging.getLogger(__name__)


class _ReportDataset(Dataset):
    def __init__(self, split: EncodedSplit):
        self.split = split

    def __len__(self) -> int:
        return len(self.split)

    def __getitem__(self, index: int):
        return (
            self.split.input_ids[index],
            self.split.attention_mask[index],
            self.split.labels[index],
        )


def _collate(batch, pad_id: int):
    width = max(len(ids) for ids, _, _ in batch)
    input_ids = torch.full((len(batch), width), pad_id, dtype=torch.long)
    attention = torch.zeros((len(batch), width), dtype=torch.long)
    labels = torch.empty(len(batch), dtype=torch.long)
    for row, (ids, mask, label) in enumerate(batch):
        input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        attention[row, : len(mask)] = torch.tensor(mask, dtype=torch.long)
        labels[row] = label
    return input_ids, attention, labels


@dataclass
class FinetuneResult:
    model: torch.nn.Module
    train_metrics: dict
    test_metrics: dict
    epoch_losses: list[float]


def _evaluate(model, split: EncodedSplit, pad_id: int, batch_size: int) -> dict:
    loader = DataLoader(
        _ReportDataset(split),
        batch_size=batch_size,
        shuffle=False,
        collate_fn=lambda b: _collate(b, pad_id),
    )
    predictions: list[int] = []
    model.eval()
    with torch.no_grad():
        for input_ids, attention, _ in loader:
            logits = model(input_ids=input_ids, attention_mask=attention).logits
            predictions.extend(logits.argmax(dim=-1).tolist())
    return classification_metrics(predictions, split.labels)


def finetune(config, bundle: DatasetBundle, pad_token_id: int = 0) -> FinetuneResult:
    """Run the fine-tuning protocol and score both splits.

    Configuration problems (bad checkpoint, label-space mismatch) surface
    before the first optimizer step.
    """
    if config.deterministic:
        torch.use_deterministic_algorithms(True)
    torch.manual_seed(config.seed)

    model = AutoModelForSequenceClassification.from_pretrained(
        config.model_name, num_labels=len(CLASSES)
    )
    max_positions = getattr(model.config, "max_position_embeddings", None)
    if max_positions is not None and max_positions < config.max_tokens:
        raise ValueError(
            f"checkpoint supports {max_positions} positions,"
            f" config asks for {config.max_tokens}"
        )

    generator = torch.Generator().manual_seed(config.seed)
    loader = DataLoader(
        _ReportDataset(bundle.train),
        batch_size=config.batch_size,
        shuffle=True,
        generator=generator,
        collate_fn=lambda b: _collate(b, pad_token_id),
    )
    optimizer = torch.optim.AdamW(
        model.parameters(),
        lr=config.learning_rate,
        weight_decay=config.weight_decay,
    )

    epoch_losses: list[float] = []
    model.train()
    for epoch in range(config.epochs):
        total = 0.0
        batches = 0
        for input_ids, attention, labels in loader:
            optimizer.zero_grad()
            out = model(input_ids=input_ids, attention_mask=attention, labels=labels)
            out.loss.backward()
            optimizer.step()
            total += out.loss.item()
            batches += 1
        epoch_losses.append(total / max(batches, 1))
        logger.info("epoch %d/%d loss %.4f", epoch + 1, config.epochs,
                    epoch_losses[-1])
        model.train()

    train_metrics = _evaluate(model, bundle.train, pad_token_id, config.batch_size)
    test_metrics = _evaluate(model, bundle.test, pad_token_id, config.batch_size)
    return FinetuneResult(
        model=model,
        train_metrics=train_metrics,
        test_metrics=test_metrics,
        epoch_losses=epoch_losses,
    )
