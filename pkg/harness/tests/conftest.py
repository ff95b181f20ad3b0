from pathlib import Path

import pytest
import transformers

transformers.logging.set_verbosity_error()
transformers.logging.disable_progress_bar()

from llm_harness import build_tiny_checkpoint  # noqa: E402

DATA = Path(__file__).parent / "data"
FIXTURE40 = DATA / "fixture40"
SEPARABLE200 = DATA / "separable200"
SCHEMAS = Path(__file__).resolve().parent.parent.parent / "docs" / "schemas"


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory) -> Path:
    """Small BERT-architecture checkpoint + WordPiece tokenizer trained on
    the committed report corpora; built once per test session."""
    texts = [p.read_text("utf-8") for p in sorted(FIXTURE40.glob("*.json"))]
    texts += [p.read_text("utf-8") for p in sorted(SEPARABLE200.glob("*.json"))]
    out = tmp_path_factory.mktemp("checkpoint") / "tiny-bert"
    return build_tiny_checkpoint(texts, out, vocab_size=6000, seed=0)


@pytest.fixture(scope="session")
def tokenizer(tiny_checkpoint):
    from transformers import AutoTokenizer

    return AutoTokenizer.from_pretrained(tiny_checkpoint)
