"""Batch command-line interface.

Subcommands wire the library into file-based workflows::

    domkernel compare a.html b.html [--model model.json]
    domkernel extract manifest.csv --out features.csv
    domkernel train features.csv --out model.json
    domkernel evaluate model.json manifest.csv --out report.json
    domkernel baselines manifest.csv --out baselines.csv

Exit codes: 0 success, 2 input error, 3 resource budget exhausted,
4 internal error.  Runs are deterministic: identical inputs and
configuration produce byte-identical output files regardless of
``--jobs`` (results are always emitted in manifest order).

When ``--config FILE`` is given, keys in the JSON config file override
the corresponding command-line flags; without it, flags alone apply.
Recognized config keys: lambda, mu, budget, jobs, lenient, depth_limit,
model, out.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .baselines import BASELINE_ORDER, baseline_similarity, write_baseline_csv
from .classify import Hyperparams, LabeledPair, load_model, parse_label, predict, save_model, train
from .errors import (
    DegenerateData,
    DepthLimitExceeded,
    DomKernelError,
    EmptyDocument,
    FormatError,
    ManifestError,
    NodeBudgetExceeded,
)
from .evaluate import (
    evaluate,
    extract_pairs,
    format_report_table,
    load_manifest,
    report_to_json,
)
from .features import component_names, read_feature_csv, similarity_vector, write_feature_csv
from .ingest import DEFAULT_DEPTH_LIMIT, parse_file
from .kernels import DEFAULT_PAIR_BUDGET, KernelParams
from .represent import strategy_order

__all__ = ["main", "entry_point", "CliConfig"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_INTERNAL = 4

_CONFIG_KEYS = {
    "lambda": "lam",
    "mu": "mu",
    "budget": "budget",
    "jobs": "jobs",
    "lenient": "lenient",
    "depth_limit": "depth_limit",
    "model": "model",
    "out": "out",
}


@dataclass(frozen=True)
class CliConfig:
    """Validated run configuration shared by all subcommands.

    ``strategies`` defaults to all three representation strategies; it
    only narrows which components ``compare`` prints (the similarity
    vector itself is always complete, as the classifier requires).
    """

    params: KernelParams
    budget: int = DEFAULT_PAIR_BUDGET
    jobs: int = 1
    lenient: bool = False
    depth_limit: int = DEFAULT_DEPTH_LIMIT
    strategies: tuple = field(default_factory=strategy_order)

    def __post_init__(self) -> None:
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if self.depth_limit < 1:
            raise ValueError(f"depth limit must be >= 1, got {self.depth_limit}")


def _config(args: argparse.Namespace) -> CliConfig:
    strategies = strategy_order()
    if getattr(args, "strategies", None):
        wanted = {name.strip() for name in args.strategies.split(",")}
        strategies = tuple(s for s in strategy_order() if s.value in wanted)
        unknown = wanted - {s.value for s in strategy_order()}
        if unknown:
            raise ValueError(f"unknown strategies: {', '.join(sorted(unknown))}")
    return CliConfig(
        params=KernelParams(lam=args.lam, mu=args.mu),
        budget=args.budget,
        jobs=args.jobs,
        lenient=args.lenient,
        depth_limit=args.depth_limit,
        strategies=strategies,
    )


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, default=0.4,
                        help="kernel decay lambda in (0,1] (default 0.4)")
    parser.add_argument("--mu", type=float, default=0.4,
                        help="PTK decay mu in (0,1] (default 0.4)")
    parser.add_argument("--budget", type=int, default=DEFAULT_PAIR_BUDGET,
                        help="max node-pair product per comparison")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes for batch commands (default 1)")
    parser.add_argument("--lenient", action="store_true",
                        help="record failing pairs in a skip list instead of aborting")
    parser.add_argument("--depth-limit", dest="depth_limit", type=int, default=DEFAULT_DEPTH_LIMIT,
                        help="max HTML nesting depth")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config file; its keys override flags")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="domkernel",
        description="Tree-kernel similarity and near-duplicate classification for web pages.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="similarity vector (and optional prediction) for two pages")
    p.add_argument("file_a", type=Path)
    p.add_argument("file_b", type=Path)
    p.add_argument("--model", type=Path, default=None, help="model JSON for a class prediction")
    p.add_argument("--strategies", default=None,
                   help="comma-separated strategy names to print (default: all)")
    _add_common(p)

    p = sub.add_parser("extract", help="feature CSV for a pair manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--dataset-tag", default=None)
    _add_common(p)

    p = sub.add_parser("train", help="train a model from a feature CSV")
    p.add_argument("features", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--C", dest="c", type=float, default=1.0, help="SVM regularization strength")
    p.add_argument("--epochs", type=int, default=Hyperparams.epochs)
    _add_common(p)

    p = sub.add_parser("evaluate", help="macro-F1 report for a model on a manifest")
    p.add_argument("model", type=Path)
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--dataset-tag", default=None)
    _add_common(p)

    p = sub.add_parser("baselines", help="baseline similarity CSV for a pair manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--dataset-tag", default=None)
    _add_common(p)

    return parser


def _apply_config(args: argparse.Namespace) -> None:
    if getattr(args, "config", None) is None:
        return
    with open(args.config, encoding="utf-8") as handle:
        doc = json.load(handle)
    if not isinstance(doc, dict):
        raise FormatError(f"config file {args.config} must contain a JSON object")
    for key, value in doc.items():
        dest = _CONFIG_KEYS.get(key)
        if dest is None:
            raise FormatError(f"unknown config key {key!r}")
        if dest in ("model", "out"):
            value = Path(value)
        setattr(args, dest, value)


def _write_text(path: Path, text: str) -> None:
    # Write via a sibling temp file so failed runs leave no partial output.
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    os.replace(tmp, path)


def _write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _write_skip_list(out: Path, skipped) -> None:
    if not skipped:
        return
    lines = ["pair_id,reason"] + [f"{pid},{reason.replace(',', ';')}" for pid, reason in skipped]
    _write_text(out.with_name(out.name + ".skipped.csv"), "\n".join(lines) + "\n")
    print(f"skipped {len(skipped)} pair(s); see {out.name}.skipped.csv", file=sys.stderr)


def _cmd_compare(args) -> int:
    config = _config(args)
    tree_a = parse_file(args.file_a, depth_limit=config.depth_limit)
    tree_b = parse_file(args.file_b, depth_limit=config.depth_limit)
    vector = similarity_vector(tree_a, tree_b, config.params, budget=config.budget)
    shown = {s.value for s in config.strategies}
    print(f"pair: {args.file_a}|{args.file_b}")
    for name, value in zip(component_names(), vector.values):
        if name.split("/")[0] in shown:
            print(f"{name}: {value:.17g}")
    if args.model is not None:
        model = load_model(args.model.read_bytes())
        label, scores = predict(model, vector)
        print(f"prediction: {label.value}")
        print("scores: " + " ".join(f"{s:.17g}" for s in scores))
    return EXIT_OK


def _cmd_extract(args) -> int:
    config = _config(args)
    manifest = load_manifest(args.manifest, dataset_tag=args.dataset_tag)
    vectors, skipped = extract_pairs(
        manifest,
        config.params,
        budget=config.budget,
        lenient=config.lenient,
        jobs=config.jobs,
        depth_limit=config.depth_limit,
    )
    rows = [
        (row.pair_id, row.label.value, vector.values)
        for row, vector in zip(manifest.rows, vectors)
        if vector is not None
    ]
    buffer = io.StringIO()
    count = write_feature_csv(rows, buffer)
    _write_text(args.out, buffer.getvalue())
    _write_skip_list(args.out, skipped)
    print(f"wrote {count} feature row(s) to {args.out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    with open(args.features, encoding="utf-8", newline="") as handle:
        rows = read_feature_csv(handle)
    labeled = []
    unlabeled = 0
    for _pair_id, label_text, vector in rows:
        if not label_text:
            unlabeled += 1
            continue
        labeled.append(LabeledPair(vector=vector, label=parse_label(label_text)))
    if unlabeled:
        print(f"ignoring {unlabeled} unlabeled row(s)", file=sys.stderr)
    model = train(labeled, Hyperparams(c=args.c, epochs=args.epochs))
    _write_bytes(args.out, save_model(model))
    print(f"trained on {len(labeled)} pair(s); model written to {args.out}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    config = _config(args)
    model = load_model(args.model.read_bytes())
    manifest = load_manifest(args.manifest, dataset_tag=args.dataset_tag)
    report = evaluate(
        model,
        manifest,
        config.params,
        budget=config.budget,
        lenient=config.lenient,
        jobs=config.jobs,
        depth_limit=config.depth_limit,
    )
    _write_text(args.out, report_to_json(report))
    sys.stdout.write(format_report_table(report))
    return EXIT_OK


def _baseline_one(task) -> tuple[str, object]:
    file_a, file_b, budget, lenient, depth_limit = task
    try:
        tree_a = parse_file(file_a, depth_limit=depth_limit)
        tree_b = parse_file(file_b, depth_limit=depth_limit)
        return (
            "ok",
            tuple(
                baseline_similarity(kind, tree_a, tree_b, budget=budget)
                for kind in BASELINE_ORDER
            ),
        )
    except DomKernelError as exc:
        if lenient:
            return ("skip", f"{type(exc).__name__}: {exc}")
        raise


def _cmd_baselines(args) -> int:
    config = _config(args)
    manifest = load_manifest(args.manifest, dataset_tag=args.dataset_tag)
    tasks = [
        (str(row.file_a), str(row.file_b), config.budget, config.lenient, config.depth_limit)
        for row in manifest.rows
    ]
    if config.jobs <= 1:
        outcomes = [_baseline_one(task) for task in tasks]
    else:
        import concurrent.futures

        with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(_baseline_one, tasks, chunksize=4))
    rows = []
    skipped = []
    for row, (status, payload) in zip(manifest.rows, outcomes):
        if status == "ok":
            rows.append((row.pair_id, row.label.value, payload))
        else:
            skipped.append((row.pair_id, payload))
    buffer = io.StringIO()
    count = write_baseline_csv(rows, buffer)
    _write_text(args.out, buffer.getvalue())
    _write_skip_list(args.out, skipped)
    print(f"wrote {count} baseline row(s) to {args.out}")
    return EXIT_OK


_COMMANDS = {
    "compare": _cmd_compare,
    "extract": _cmd_extract,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "baselines": _cmd_baselines,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        return _COMMANDS[args.command](args)
    except NodeBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (
        FileNotFoundError,
        IsADirectoryError,
        PermissionError,
        ManifestError,
        FormatError,
        DegenerateData,
        DepthLimitExceeded,
        EmptyDocument,
        ValueError,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomKernelError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:  # noqa: BLE001 - the CLI contract reserves exit 4 for internal faults
        import traceback

        traceback.print_exc()
        return EXIT_INTERNAL


def entry_point() -> None:
    sys.exit(main())
