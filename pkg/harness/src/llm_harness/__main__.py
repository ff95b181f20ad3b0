"""Command-line entry: fine-tune an encoder on a report corpus.

    python -m llm_harness --reports DIR --manifest CSV --model-name NAME \
        [--max-tokens 512|1024] [--epochs N] [--batch-size N] [--seed N] \
        [--metrics-out FILE]
"""

import argparse
import json
import sys

from transformers import AutoTokenizer

from .config import TrainConfig
from .dataset import prepare_dataset
from .metrics import render_table
from .train import finetune


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="llm_harness", description=__doc__)
    parser.add_argument("--reports", required=True)
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--model-name", required=True)
    parser.add_argument("--max-tokens", type=int, default=512)
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--split", type=float, default=0.8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--learning-rate", type=float, default=5e-5)
    parser.add_argument("--metrics-out")
    args = parser.parse_args(argv)

    config = TrainConfig(
        model_name=args.model_name,
        max_tokens=args.max_tokens,
        epochs=args.epochs,
        batch_size=args.batch_size,
        split_ratio=args.split,
        seed=args.seed,
        learning_rate=args.learning_rate,
    )
    tokenizer = AutoTokenizer.from_pretrained(config.model_name)
    bundle = prepare_dataset(args.reports, args.manifest, config, tokenizer)
    stats = bundle.token_stats
    print(
        f"tokens: mean {stats['mean']:.1f}, median {stats['median']:.1f}, "
        f"{stats['over_512']:.2%} over 512, {stats['over_1024']:.2%} over 1024; "
        f"{bundle.truncated} truncated to {config.max_tokens}, "
        f"{bundle.skipped} manifest entries skipped"
    )

    result = finetune(config, bundle, pad_token_id=tokenizer.pad_token_id)
    print("\nTraining classification report")
    print(render_table(result.train_metrics))
    print("\nTesting classification report")
    print(render_table(result.test_metrics))
    if args.metrics_out:
        with open(args.metrics_out, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "train": result.train_metrics,
                    "test": result.test_metrics,
                    "token_stats": stats,
                },
                fh,
                indent=2,
            )
            fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
