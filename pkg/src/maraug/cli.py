"""Command-line entry point wiring the pipeline together.

Subcommands: augment, split, validate, eval, compare, report.
Exit codes: 0 success, 1 operational failure, 2 validation findings.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from .datasetio import (
    Split,
    grouped_split,
    load_manifest,
    save_manifest,
    validate_manifest,
)
from .detmetrics import (
    MAP_THRESHOLDS,
    SCALAR_IOU_THRESHOLD,
    collect_samples,
    evaluate_samples,
)
from .errors import MaraugError
from .reporting import (
    RunReport,
    compare_runs,
    load_report,
    render_comparison,
    render_table,
    save_report,
)
from .weathersim import AugmentParams, plan_augmentation, run_augmentation

log = logging.getLogger("maraug")

DEFAULT_SEED = 42


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("MARAUG_SEED")
    if env is not None:
        return int(env)
    return DEFAULT_SEED


class _Parser(argparse.ArgumentParser):
    # Exit 2 is reserved for validation findings; usage errors are
    # operational failures.
    def error(self, message: str) -> None:  # noqa: D102
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="global seed (default: $MARAUG_SEED or 42)")
    common.add_argument("--workers", type=int, default=None,
                        help="worker threads for per-image work (default: logical cores)")
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="increase log verbosity")

    parser = _Parser(
        prog="maraug",
        description="Weather augmentation, leak-free splitting, and detection scoring "
                    "for aerial maritime imagery.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("augment", parents=[common],
                       help="create one weather variant per source image")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--params", type=Path, default=None,
                   help="JSON file of transform magnitudes (default: built-in values)")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("split", parents=[common],
                       help="assign train/val/test at the source-group level")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--ratios", type=float, nargs=3, default=(0.70, 0.15, 0.15),
                   metavar=("TRAIN", "VAL", "TEST"))
    p.add_argument("--out", type=Path, default=None,
                   help="output manifest (default: rewrite --manifest in place)")

    p = sub.add_parser("validate", parents=[common],
                       help="check files, labels, and split integrity")
    p.add_argument("--manifest", required=True, type=Path)

    p = sub.add_parser("eval", parents=[common],
                       help="score stored predictions against ground truth")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--preds", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--label", default="run",
                   help="run label stored in the report")
    p.add_argument("--split", choices=["train", "val", "test", "all"], default="test",
                   help="which split to evaluate (default: test)")
    p.add_argument("--notes", default="",
                   help="free-form training notes stored in the report")

    p = sub.add_parser("compare", parents=[common],
                       help="baseline-vs-treatment deltas and improvement rates")
    p.add_argument("--baseline", required=True, type=Path)
    p.add_argument("--treatment", required=True, type=Path)
    p.add_argument("--format", choices=["markdown", "csv"], default="markdown")

    p = sub.add_parser("report", parents=[common],
                       help="render metric tables for one or more runs")
    p.add_argument("--runs", required=True, type=Path, nargs="+")
    p.add_argument("--format", choices=["markdown", "csv"], default="markdown")

    return parser


def cmd_augment(args: argparse.Namespace, seed: int, workers: int) -> int:
    manifest = load_manifest(args.manifest)
    params = AugmentParams.from_file(args.params) if args.params else AugmentParams()
    plan = plan_augmentation(manifest, seed)
    log.info("augmenting %d images with %d workers", len(plan), workers)
    result = run_augmentation(manifest, plan, params, args.out, workers=workers)
    save_manifest(result, args.out / "manifest.json")
    print(f"wrote {len(plan)} variants; manifest has {len(result)} records: "
          f"{args.out / 'manifest.json'}")
    return 0


def cmd_split(args: argparse.Namespace, seed: int) -> int:
    manifest = load_manifest(args.manifest)
    result = grouped_split(manifest, tuple(args.ratios), seed)
    out = args.out or args.manifest
    save_manifest(result, out)
    counts = {s.value: 0 for s in Split}
    for record in result.records:
        counts[record.split.value] += 1
    print(f"split {len(result)} records: "
          f"train={counts['train']} val={counts['val']} test={counts['test']}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    violations = validate_manifest(manifest)
    for v in violations:
        print(f"{v.kind}: {v.message}")
    if violations:
        print(f"{len(violations)} violation(s) found", file=sys.stderr)
        return 2
    print("manifest valid")
    return 0


def _config_digest() -> str:
    config = {
        "iou_thresholds": list(MAP_THRESHOLDS),
        "scalar_iou": SCALAR_IOU_THRESHOLD,
        "scalar_strategy": "max-f1",
    }
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:12]


def cmd_eval(args: argparse.Namespace, seed: int) -> int:
    manifest = load_manifest(args.manifest)
    split = None if args.split == "all" else Split(args.split)
    samples, diagnostics = collect_samples(manifest, args.preds, split=split)
    if not samples:
        raise MaraugError(f"no records in split {args.split!r}")
    for line in diagnostics:
        log.warning("%s", line)
    result = evaluate_samples(samples, manifest.taxonomy)
    report = RunReport(
        label=args.label,
        rows=result.groups,
        metadata={
            "seed": seed,
            "dataset": {
                "images": result.image_count,
                "ground_truth": result.gt_count,
                "detections": result.detection_count,
                "split": args.split,
            },
            "config_digest": _config_digest(),
            "notes": args.notes,
            "missing_predictions": len(diagnostics),
        },
    )
    save_report(report, args.out)
    print(f"evaluated {result.image_count} images "
          f"({len(diagnostics)} without predictions): {args.out}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    comparison = compare_runs(load_report(args.baseline), load_report(args.treatment))
    print(render_comparison(comparison, format=args.format), end="")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    reports = [load_report(path) for path in args.runs]
    print(render_table(reports, format=args.format), end="")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else (
        logging.INFO if args.verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(message)s")

    try:
        seed = _resolve_seed(args.seed)
        workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
        if workers < 1:
            raise MaraugError("--workers must be a positive integer")

        if args.command == "augment":
            return cmd_augment(args, seed, workers)
        if args.command == "split":
            return cmd_split(args, seed)
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "eval":
            return cmd_eval(args, seed)
        if args.command == "compare":
            return cmd_compare(args)
        if args.command == "report":
            return cmd_report(args)
        raise MaraugError(f"unknown command {args.command!r}")
    except (MaraugError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
