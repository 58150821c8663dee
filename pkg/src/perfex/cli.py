"""Command line entry points: ``fit``, ``evaluate``, ``generate``.

Exit codes: 0 on success, 1 on module errors (bad data, bad tree file,
I/O problems; diagnostic on stderr), 2 on argument errors.  All output
files are written atomically.  The ``PERFEX_THREADS`` environment variable
caps how many worker threads the split search may use (default 1); results
do not depend on it.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from statistics import NormalDist

from ._files import atomic_write_text
from .dataset import load_table, stratified_split, write_csv
from .errors import PerfexError
from .evaluation import evaluate_tree
from .explain import default_phrase, render, summarize_path
from .metrics import MetricSpec, parse_metric
from .synth import (
    CartClassifier,
    blob_specs,
    generate_blobs,
    generate_two_gaussian,
    predict_table,
    preset_example2d,
    split_dataset,
    two_gaussian_classifier,
)
from .tree import MetaTree, StoppingRule, build_tree, serialize_tree

DEFAULT_Z = 1.96
PRESETS = ("two-gaussian", "blobs", "example2d")


def _metric_arg(text: str) -> MetricSpec:
    try:
        return parse_metric(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _split_arg(text: str) -> tuple[float, ...]:
    try:
        shares = [float(p) for p in text.split("/")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad split {text!r}, expected e.g. 50/25/25")
    if len(shares) < 2 or any(s <= 0 for s in shares):
        raise argparse.ArgumentTypeError(f"bad split {text!r}, expected e.g. 50/25/25")
    total = sum(shares)
    if abs(total - 100.0) > 1e-9 and abs(total - 1.0) > 1e-9:
        raise argparse.ArgumentTypeError("split parts must sum to 100 (or 1.0)")
    return tuple(s / total for s in shares)


def _threads() -> int:
    raw = os.environ.get("PERFEX_THREADS", "")
    if not raw:
        return 1
    try:
        v = int(raw)
    except ValueError:
        raise SystemExit(2)
    return max(1, v)


def _part_paths(out: Path, n_parts: int) -> list[Path]:
    if n_parts == 3:
        tags = ["train", "test1", "test2"]
    else:
        tags = [f"part{i + 1}" for i in range(n_parts)]
    return [out.with_name(f"{out.stem}_{tag}{out.suffix or '.csv'}") for tag in tags]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perfex",
        description="Explain where a classifier performs well or poorly.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="build a tree from a prediction CSV")
    fit.add_argument("--data", required=True, help="prediction CSV to explain")
    fit.add_argument("--metric", type=_metric_arg, default=MetricSpec.accuracy(),
                     help="metric selection string (default: accuracy)")
    fit.add_argument("--alpha", type=int, default=100,
                     help="minimum rows per side of any split (default: 100)")
    fit.add_argument("--max-depth", type=int, default=6)
    fit.add_argument("--min-beta", type=float, default=0.05,
                     help="smallest metric gap worth splitting on (default: 0.05)")
    fit.add_argument("--confidence", type=float, default=None,
                     help="two-sided confidence level for the per-leaf "
                          "interval rule (default: 0.95, i.e. z = 1.96)")
    fit.add_argument("--interval-width", type=float, default=0.1,
                     help="largest tolerated confidence interval width (default: 0.1)")
    fit.add_argument("--max-thresholds", type=int, default=None,
                     help="cap on numeric thresholds per feature "
                          "(default: all values up to 256, then 255 quantiles)")
    fit.add_argument("--out", required=True, help="where to write the tree JSON")
    fit.add_argument("--split", type=_split_arg, default=None,
                     help="stratified shares like 60/40: fit on the first part, "
                          "write the others next to --out")
    fit.add_argument("--seed", type=int, default=0, help="seed for --split")
    fit.add_argument("--unit-noun", default="datapoints")
    fit.add_argument("--phrase", default=None,
                     help="wording for the metric in explanations")
    fit.add_argument("--explanations-out", default=None,
                     help="also write the explanations as JSON")

    ev = sub.add_parser("evaluate", help="compare per-leaf values on two tables")
    ev.add_argument("--tree", required=True)
    ev.add_argument("--build", required=True, help="reference table (tree side)")
    ev.add_argument("--test", required=True, help="held-out table")
    ev.add_argument("--out", default=None, help="optional report JSON path")

    gen = sub.add_parser("generate", help="write a synthetic prediction CSV")
    gen.add_argument("--preset", choices=PRESETS, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--delta", type=float, default=3.0,
                     help="two-gaussian class-mean shift (default: 3)")
    gen.add_argument("--n", type=int, default=None,
                     help="rows per class (two-gaussian, example2d) "
                          "or in total (blobs)")
    gen.add_argument("--cart-depth", type=int, default=3,
                     help="depth of the built-in tree classifier for blobs")
    gen.add_argument("--split", type=_split_arg, default=None,
                     help="write stratified parts like 50/25/25 instead of one file")
    return parser


def _cmd_fit(args) -> int:
    threads = _threads()
    z = DEFAULT_Z if args.confidence is None else NormalDist().inv_cdf(
        (1.0 + args.confidence) / 2.0
    )
    stopping = StoppingRule(
        max_depth=args.max_depth,
        min_beta=args.min_beta,
        confidence_z=z,
        max_interval_width=args.interval_width,
    )
    table = load_table(args.data)
    if args.split is not None:
        parts = stratified_split(table, args.split, args.seed)
        table = parts[0]
        out = Path(args.out)
        for i, part in enumerate(parts[1:], start=1):
            write_csv(part, out.with_name(f"{out.stem}_holdout{i}.csv"))
    tree = build_tree(
        table,
        args.metric,
        stopping,
        alpha=args.alpha,
        max_thresholds=args.max_thresholds,
        threads=threads,
    )
    atomic_write_text(args.out, serialize_tree(tree))

    phrase = args.phrase if args.phrase is not None else default_phrase(args.metric)
    blocks = []
    docs = []
    for stats in tree.leaf_stats():
        summaries = summarize_path(stats, table.schema)
        blocks.append(
            render(stats, summaries, unit_noun=args.unit_noun, phrase=phrase)
        )
        docs.append(
            {
                "leaf": stats.leaf_id,
                "size": stats.size,
                "conditions": [s.describe() for s in summaries],
                "metric": args.metric.name,
                "value": stats.metric.value,
            }
        )
    print("\n\n".join(blocks))
    if tree.n_leaves == 1:
        print(
            f"\nno split exceeded the minimum metric gap "
            f"(min-beta={args.min_beta}); the tree is a single leaf"
        )
    if args.explanations_out:
        import json

        atomic_write_text(
            args.explanations_out,
            json.dumps(docs, sort_keys=True, separators=(",", ":")) + "\n",
        )
    return 0


def _cmd_evaluate(args) -> int:
    tree = MetaTree.from_json(Path(args.tree).read_text(encoding="utf-8"))
    build = load_table(args.build)
    test = load_table(args.test)
    report = evaluate_tree(tree, None, build, test)
    sys.stdout.write(report.to_text())
    if args.out:
        atomic_write_text(args.out, report.to_json())
    return 0


def _cmd_generate(args) -> int:
    seed = args.seed
    if args.preset == "two-gaussian":
        n = args.n if args.n is not None else 10000
        data = generate_two_gaussian(args.delta, n, seed)
        classifier = two_gaussian_classifier(args.delta)
    elif args.preset == "blobs":
        n = args.n if args.n is not None else 10000
        data = generate_blobs(blob_specs(n), seed)
        classifier = None  # trained below, on the right rows
    else:
        n = args.n if args.n is not None else 150
        data, classifier = preset_example2d(seed, n_per_class=n)

    out = Path(args.out)
    if args.split is None:
        if classifier is None:
            classifier = CartClassifier(max_depth=args.cart_depth).fit(data)
        write_csv(predict_table(classifier, data), out)
        return 0

    parts = split_dataset(data, args.split, seed)
    if classifier is None:
        classifier = CartClassifier(max_depth=args.cart_depth).fit(parts[0])
    for part, path in zip(parts, _part_paths(out, len(parts))):
        write_csv(predict_table(classifier, part), path)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"fit": _cmd_fit, "evaluate": _cmd_evaluate, "generate": _cmd_generate}
    try:
        return handlers[args.command](args)
    except (PerfexError, OSError, ValueError) as exc:
        print(f"perfex {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
