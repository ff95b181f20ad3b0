"""Training configuration.

Defaults follow the classification protocol the report corpus was designed
for: 10 epochs, batch size 16, an 80/20 stratified split, and a sequence
budget of 512 tokens (1024 for longer-context encoders).  Optimizer
settings are not pinned by that protocol; the AdamW defaults below are
standard for BERT-class fine-tuning and live here so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TrainConfig:
    model_name: str  # local checkpoint directory or hub identifier
    max_tokens: int = 512
    epochs: int = 10
    batch_size: int = 16
    split_ratio: float = 0.8
    seed: int = 0
    learning_rate: float = 5e-5
    weight_decay: float = 0.01
    deterministic: bool = True

    def __post_init__(self) -> None:
        if self.max_tokens not in (512, 1024):
            raise ValueError("max_tokens must be 512 or 1024")
        if not 0 < self.split_ratio < 1:
            raise ValueError("split_ratio must be in (0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
