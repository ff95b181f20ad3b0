"""Fine-tuning harness for classifying PE analysis reports with
transformer encoders.

Consumes the report toolchain's interchange formats only: <sha256>.json
report files, the sha256,category manifest CSV, and the shared metrics
JSON shape. No code is shared with the report generator.
"""

from .config import TrainConfig
from .dataset import (
    CLASSES,
    DatasetBundle,
    ManifestEntry,
    ManifestError,
    load_manifest,
    prepare_dataset,
    stratified_split,
    token_statistics,
)
from .metrics import classification_metrics, render_table
from .tiny import build_tiny_checkpoint
from .train import FinetuneResult, finetune

__version__ = "0.1.0"

__all__ = [
    "CLASSES",
    "DatasetBundle",
    "FinetuneResult",
    "ManifestEntry",
    "ManifestError",
    "TrainConfig",
    "build_tiny_checkpoint",
    "classification_metrics",
    "finetune",
    "load_manifest",
    "prepare_dataset",
    "render_table",
    "stratified_split",
    "token_statistics",
]
