"""Batch-oriented command-line front end.

Subcommands: analyze, batch, rules validate, tokens, train, eval.
Exit codes: 0 success, 1 usage error, 2 input not found/unreadable,
3 parse failure (single-file analyze), 4 schema/validation failure.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from pathlib import Path

from .classify import (
    ClassTooSmallError,
    DegenerateDataError,
    ManifestError,
    classification_metrics,
    featurize_text,
    load_manifest,
    load_model,
    metrics_to_dict,
    predict_many,
    render_table,
    save_model,
    stratified_split,
    train_classifier,
)
from .packing import DEFAULT_LIKELY_PACKED_THRESHOLD
from .pe import PeError
from .pipeline import AnalysisConfig, analyze
from .report import TokenBudget, serialize_report, tokenize_text
from .rules import RulePackError, load_rule_pack

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_PARSE = 3
EXIT_SCHEMA = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit2(f"{self.prog}: error: {message}")


class SystemExit2(Exception):
    pass


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(path)
    return json.loads(p.read_text("utf-8"))


def _analysis_config(args, file_config: dict) -> AnalysisConfig:
    weights = dict(file_config.get("detector_weights", {}))
    for item in args.detector_weight or []:
        key, _, value = item.partition("=")
        if not key or not value:
            raise ValueError(f"bad --detector-weight {item!r}, expected id=value")
        weights[key] = float(value)
    threshold = (
        args.packed_threshold
        if args.packed_threshold is not None
        else file_config.get("packed_threshold", DEFAULT_LIKELY_PACKED_THRESHOLD)
    )
    budget_limit = (
        args.budget if args.budget is not None else file_config.get("token_budget")
    )
    rule_pack = None
    pack_path = args.rule_pack or file_config.get("rule_pack")
    if pack_path:
        pack_file = Path(pack_path)
        if not pack_file.is_file():
            raise FileNotFoundError(pack_path)
        rule_pack = load_rule_pack(pack_file.read_text("utf-8"))
    return AnalysisConfig(
        rule_pack=rule_pack,
        detector_weights={k: float(v) for k, v in weights.items()},
        likely_packed_threshold=float(threshold),
        token_budget=TokenBudget(limit=int(budget_limit)) if budget_limit else None,
    )


def _cmd_analyze(args) -> int:
    source = Path(args.file)
    if not source.is_file():
        print(f"error: no such file: {source}", file=sys.stderr)
        return EXIT_INPUT
    config = _analysis_config(args, _load_config_file(args.config))
    try:
        result = analyze(source.read_bytes(), source.name, config)
    except PeError as exc:
        print(f"error: cannot parse {source}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    payload = serialize_report(result.report)
    if args.output:
        Path(args.output).write_bytes(payload)
    else:
        sys.stdout.write(payload.decode("utf-8"))
    return EXIT_OK


def _cmd_batch(args) -> int:
    source = Path(args.dir)
    if not source.is_dir():
        print(f"error: no such directory: {source}", file=sys.stderr)
        return EXIT_INPUT
    config = _analysis_config(args, _load_config_file(args.config))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ok = failed = 0
    for path in sorted(p for p in source.iterdir() if p.is_file()):
        try:
            result = analyze(path.read_bytes(), path.name, config)
        except (PeError, OSError) as exc:
            failed += 1
            print(f"FAIL {path}: {exc}", file=sys.stderr)
            continue
        sha256 = result.report.global_info.sha256
        (out / f"{sha256}.json").write_bytes(serialize_report(result.report))
        ok += 1
    print(f"processed={ok + failed} reports={ok} failures={failed}")
    return EXIT_OK


def _cmd_rules_validate(args) -> int:
    path = Path(args.pack)
    if not path.is_file():
        print(f"error: no such file: {path}", file=sys.stderr)
        return EXIT_INPUT
    try:
        pack = load_rule_pack(path.read_text("utf-8"))
    except RulePackError as exc:
        print(f"invalid rule pack: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    print(f"ok: version {pack.version}, {len(pack.rules)} rules")
    return EXIT_OK


def token_statistics(counts: list[int], budget: int | None = None) -> dict:
    stats = {
        "count": len(counts),
        "mean": statistics.mean(counts) if counts else 0.0,
        "median": statistics.median(counts) if counts else 0.0,
        "over_512": sum(c > 512 for c in counts) / len(counts) if counts else 0.0,
        "over_1024": sum(c > 1024 for c in counts) / len(counts) if counts else 0.0,
    }
    if budget is not None:
        stats["over_budget"] = (
            sum(c > budget for c in counts) / len(counts) if counts else 0.0
        )
        stats["budget"] = budget
    return stats


def _cmd_tokens(args) -> int:
    source = Path(args.report_dir)
    if not source.is_dir():
        print(f"error: no such directory: {source}", file=sys.stderr)
        return EXIT_INPUT
    counts = [
        len(tokenize_text(path.read_text("utf-8")))
        for path in sorted(source.glob("*.json"))
    ]
    if not counts:
        print(f"error: no reports in {source}", file=sys.stderr)
        return EXIT_INPUT
    stats = token_statistics(counts, args.budget)
    if args.json:
        print(json.dumps(stats, indent=2))
    else:
        print(f"count     {stats['count']}")
        print(f"mean      {stats['mean']:.2f}")
        print(f"median    {stats['median']:.2f}")
        print(f"over_512  {stats['over_512']:.2%}")
        print(f"over_1024 {stats['over_1024']:.2%}")
        if args.budget is not None:
            print(f"over_{args.budget}  {stats['over_budget']:.2%}")
    return EXIT_OK


def _load_labeled_vectors(
    report_dir: Path, entries, *, sink=sys.stderr
) -> tuple[list[dict[int, int]], list[str], int]:
    vectors = []
    labels = []
    missing = 0
    for entry in entries:
        path = report_dir / f"{entry.sha256}.json"
        if not path.is_file():
            missing += 1
            print(f"missing report for {entry.sha256}, skipped", file=sink)
            continue
        vectors.append(featurize_text(path.read_text("utf-8")))
        labels.append(entry.category)
    return vectors, labels, missing


def _cmd_train(args) -> int:
    report_dir = Path(args.reports)
    manifest_path = Path(args.manifest)
    if not report_dir.is_dir() or not manifest_path.is_file():
        print("error: reports dir or manifest not found", file=sys.stderr)
        return EXIT_INPUT
    try:
        manifest = load_manifest(manifest_path.read_text("utf-8"))
        train_entries, test_entries = stratified_split(
            manifest, args.split, args.seed
        )
    except (ManifestError, ClassTooSmallError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA

    hyper = {
        "learning_rate": args.learning_rate,
        "epochs": args.epochs,
        "l2": args.l2,
    }
    train_x, train_y, skipped_train = _load_labeled_vectors(report_dir, train_entries)
    test_x, test_y, skipped_test = _load_labeled_vectors(report_dir, test_entries)
    if skipped_train or skipped_test:
        print(
            f"skipped {skipped_train + skipped_test} manifest entries "
            "without reports",
            file=sys.stderr,
        )
    try:
        model = train_classifier(list(zip(train_x, train_y)), hyper)
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    save_model(model, args.model)

    train_report = classification_metrics(predict_many(model, train_x), train_y)
    test_report = classification_metrics(predict_many(model, test_x), test_y)
    print("Training classification report")
    print(render_table(train_report))
    print()
    print("Testing classification report")
    print(render_table(test_report))
    if args.metrics_out:
        Path(args.metrics_out).write_text(
            json.dumps(
                {
                    "train": metrics_to_dict(train_report),
                    "test": metrics_to_dict(test_report),
                },
                indent=2,
            )
            + "\n",
            "utf-8",
        )
    return EXIT_OK


def _cmd_eval(args) -> int:
    report_dir = Path(args.reports)
    manifest_path = Path(args.manifest)
    model_path = Path(args.model)
    if not report_dir.is_dir() or not manifest_path.is_file() or not model_path.is_file():
        print("error: model, reports dir or manifest not found", file=sys.stderr)
        return EXIT_INPUT
    try:
        manifest = load_manifest(manifest_path.read_text("utf-8"))
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    model = load_model(model_path)
    vectors, labels, skipped = _load_labeled_vectors(report_dir, manifest)
    if skipped:
        print(f"skipped {skipped} manifest entries without reports", file=sys.stderr)
    if not vectors:
        print("error: no reports matched the manifest", file=sys.stderr)
        return EXIT_INPUT
    report = classification_metrics(predict_many(model, vectors), labels)
    print(render_table(report))
    if args.metrics_out:
        Path(args.metrics_out).write_text(
            json.dumps(metrics_to_dict(report), indent=2) + "\n", "utf-8"
        )
    return EXIT_OK


def _add_analysis_flags(parser) -> None:
    parser.add_argument("--config", help="JSON config file; flags win over it")
    parser.add_argument("--rule-pack", help="path to a rule pack JSON")
    parser.add_argument(
        "--detector-weight",
        action="append",
        metavar="ID=W",
        help="override one detector weight (repeatable)",
    )
    parser.add_argument("--packed-threshold", type=float, default=None)
    parser.add_argument(
        "--budget", type=int, default=None, help="token budget for reports"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pereport", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze one PE file")
    p.add_argument("file")
    p.add_argument("-o", "--output", help="write the report here instead of stdout")
    _add_analysis_flags(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("batch", help="analyze every file in a directory")
    p.add_argument("dir")
    p.add_argument("--out", required=True, help="output directory for reports")
    _add_analysis_flags(p)
    p.set_defaults(func=_cmd_batch)

    p = sub.add_parser("rules", help="rule pack utilities")
    rules_sub = p.add_subparsers(dest="rules_command", required=True)
    v = rules_sub.add_parser("validate", help="validate a rule pack")
    v.add_argument("pack")
    v.set_defaults(func=_cmd_rules_validate)

    p = sub.add_parser("tokens", help="token statistics over a report directory")
    p.add_argument("report_dir")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_tokens)

    p = sub.add_parser("train", help="train the baseline classifier")
    p.add_argument("--reports", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", required=True, help="output model path (.npz)")
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--metrics-out", help="also write metrics JSON here")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--reports", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--metrics-out", help="also write metrics JSON here")
    p.set_defaults(func=_cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit2 as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: not found: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RulePackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
