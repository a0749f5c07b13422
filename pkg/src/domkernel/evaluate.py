"""Manifest-driven evaluation: extraction, prediction, macro-F1 reports.

A pair manifest is a CSV with header ``pair_id,file_a,file_b,label``
listing annotated page pairs; relative file paths resolve against the
manifest's directory.  Evaluation extracts the similarity vector of
every pair, predicts with a trained model, and aggregates a confusion
matrix (rows = true class, columns = predicted class, both in the fixed
clone/near_duplicate/distinct order) plus per-class precision, recall,
and F1 and their unweighted macro average.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

from .classify import CLASS_ORDER, ClassLabel, TrainedModel, parse_label, predict, save_model
from .errors import DomKernelError, ManifestError
from .features import SimilarityVector, similarity_vector
from .ingest import DEFAULT_DEPTH_LIMIT, parse_file
from .kernels import DEFAULT_PAIR_BUDGET, KernelParams

__all__ = [
    "ManifestRow",
    "PairManifest",
    "load_manifest",
    "extract_pairs",
    "evaluate",
    "macro_f1",
    "per_class_metrics",
    "EvalReport",
    "report_to_json",
    "format_report_table",
    "MANIFEST_HEADER",
]

MANIFEST_HEADER = ["pair_id", "file_a", "file_b", "label"]


@dataclass(frozen=True)
class ManifestRow:
    pair_id: str
    file_a: Path
    file_b: Path
    label: ClassLabel


@dataclass(frozen=True)
class PairManifest:
    rows: tuple
    dataset_tag: str


def load_manifest(path, dataset_tag: str | None = None) -> PairManifest:
    """Load and validate a pair manifest.

    Raises :class:`ManifestError` carrying the 1-based data-row number
    for malformed rows, unknown labels, duplicate pair ids, or missing
    files.  ``dataset_tag`` defaults to the file stem (uppercased when
    it names one of the standard splits ss/ds/ts).
    """
    path = Path(path)
    if dataset_tag is None:
        stem = path.stem
        dataset_tag = stem.upper() if stem.lower() in ("ss", "ds", "ts") else stem
    base = path.parent
    rows: list[ManifestRow] = []
    seen_ids: set[str] = set()
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise ManifestError(
                f"bad manifest header: expected {','.join(MANIFEST_HEADER)}, "
                f"got {','.join(header) if header else '<empty file>'}"
            )
        for rownum, row in enumerate(reader, start=1):
            if len(row) != 4:
                raise ManifestError(f"expected 4 fields, got {len(row)}", row=rownum)
            pair_id, file_a, file_b, label_text = (field.strip() for field in row)
            if not pair_id:
                raise ManifestError("empty pair_id", row=rownum)
            if pair_id in seen_ids:
                raise ManifestError(f"duplicate pair_id {pair_id!r}", row=rownum)
            seen_ids.add(pair_id)
            try:
                label = parse_label(label_text)
            except ValueError as exc:
                raise ManifestError(str(exc), row=rownum) from exc
            fa = base / file_a
            fb = base / file_b
            for f in (fa, fb):
                if not f.is_file():
                    raise ManifestError(f"file not found: {f}", row=rownum)
            rows.append(ManifestRow(pair_id=pair_id, file_a=fa, file_b=fb, label=label))
    return PairManifest(rows=tuple(rows), dataset_tag=dataset_tag)


# ---------------------------------------------------------------------------
# Feature extraction over manifests (optionally parallel)


_PARSE_CACHE: dict[tuple[str, int], object] = {}
_PARSE_CACHE_LIMIT = 64


def _parse_cached(path: str, depth_limit: int):
    key = (path, depth_limit)
    tree = _PARSE_CACHE.get(key)
    if tree is None:
        tree = parse_file(path, depth_limit=depth_limit)
        if len(_PARSE_CACHE) >= _PARSE_CACHE_LIMIT:
            _PARSE_CACHE.pop(next(iter(_PARSE_CACHE)))
        _PARSE_CACHE[key] = tree
    return tree


def _extract_one(task) -> tuple[str, object]:
    """Worker: returns ("ok", values) or ("skip", reason)."""
    pair_id, file_a, file_b, params, budget, lenient, depth_limit = task
    try:
        tree_a = _parse_cached(file_a, depth_limit)
        tree_b = _parse_cached(file_b, depth_limit)
        vector = similarity_vector(
            tree_a, tree_b, params, pair_id=pair_id, budget=budget, lenient=lenient
        )
        if not vector.is_complete:
            return ("skip", "budget exceeded in " + ",".join(vector.missing_components))
        return ("ok", vector.values)
    except DomKernelError as exc:
        if lenient:
            return ("skip", f"{type(exc).__name__}: {exc}")
        raise


def extract_pairs(
    manifest: PairManifest,
    params: KernelParams,
    *,
    budget: int = DEFAULT_PAIR_BUDGET,
    lenient: bool = False,
    jobs: int = 1,
    depth_limit: int = DEFAULT_DEPTH_LIMIT,
) -> tuple[list[SimilarityVector | None], list[tuple[str, str]]]:
    """Similarity vectors for every manifest row, in manifest order.

    Returns (vectors, skipped) where ``vectors[i]`` is None exactly for
    skipped rows and ``skipped`` lists (pair_id, reason).  In strict mode
    (lenient=False) the first failing row raises instead.  Results are
    identical for any ``jobs`` value; workers only change the schedule.
    """
    tasks = [
        (row.pair_id, str(row.file_a), str(row.file_b), params, budget, lenient, depth_limit)
        for row in manifest.rows
    ]
    if jobs <= 1:
        outcomes = [_extract_one(task) for task in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_extract_one, tasks, chunksize=4))

    vectors: list[SimilarityVector | None] = []
    skipped: list[tuple[str, str]] = []
    for row, (status, payload) in zip(manifest.rows, outcomes):
        if status == "ok":
            vectors.append(SimilarityVector(pair_id=row.pair_id, values=payload))
        else:
            vectors.append(None)
            skipped.append((row.pair_id, payload))
    return vectors, skipped


# ---------------------------------------------------------------------------
# Metrics


def per_class_metrics(confusion) -> list[dict]:
    """Precision/recall/F1/support per class from a 3x3 confusion matrix
    (rows = true, cols = predicted).  Zero denominators yield 0 and a
    ``zero_support`` flag."""
    k = len(CLASS_ORDER)
    metrics = []
    for c in range(k):
        tp = confusion[c][c]
        support = sum(confusion[c])
        predicted = sum(confusion[r][c] for r in range(k))
        precision = tp / predicted if predicted else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
        metrics.append(
            {
                "label": CLASS_ORDER[c].value,
                "precision": precision,
                "recall": recall,
                "f1": f1,
                "support": support,
                "zero_support": support == 0,
            }
        )
    return metrics


def macro_f1(confusion) -> float:
    """Unweighted mean of the per-class F1; zero-support classes count 0."""
    metrics = per_class_metrics(confusion)
    return sum(m["f1"] for m in metrics) / len(metrics)


@dataclass(frozen=True)
class EvalReport:
    dataset_tag: str
    model_id: str
    confusion: tuple  # rows = true, cols = predicted, class order fixed
    per_class: tuple  # dicts as in per_class_metrics
    macro_f1: float
    zero_support_classes: tuple
    scored_pairs: int
    skipped: tuple  # (pair_id, reason)
    pairs_per_second: float


def model_identifier(model: TrainedModel) -> str:
    return hashlib.sha256(save_model(model)).hexdigest()[:12]


def evaluate(
    model: TrainedModel,
    manifest: PairManifest,
    params: KernelParams,
    *,
    budget: int = DEFAULT_PAIR_BUDGET,
    lenient: bool = False,
    jobs: int = 1,
    depth_limit: int = DEFAULT_DEPTH_LIMIT,
) -> EvalReport:
    """Extract, predict, and score every pair in the manifest.

    Pairs failing extraction in lenient mode are tallied as skipped,
    never silently dropped: scored + skipped == manifest size.
    """
    start = time.perf_counter()
    vectors, skipped = extract_pairs(
        manifest, params, budget=budget, lenient=lenient, jobs=jobs, depth_limit=depth_limit
    )
    k = len(CLASS_ORDER)
    confusion = [[0] * k for _ in range(k)]
    scored = 0
    for row, vector in zip(manifest.rows, vectors):
        if vector is None:
            continue
        predicted, _ = predict(model, vector)
        confusion[row.label.index][predicted.index] += 1
        scored += 1
    elapsed = time.perf_counter() - start
    metrics = per_class_metrics(confusion)
    return EvalReport(
        dataset_tag=manifest.dataset_tag,
        model_id=model_identifier(model),
        confusion=tuple(tuple(r) for r in confusion),
        per_class=tuple(metrics),
        macro_f1=macro_f1(confusion),
        zero_support_classes=tuple(m["label"] for m in metrics if m["zero_support"]),
        scored_pairs=scored,
        skipped=tuple(skipped),
        pairs_per_second=(scored + len(skipped)) / elapsed if elapsed > 0 else 0.0,
    )


def report_to_json(report: EvalReport, *, include_timing: bool = False) -> str:
    """Stable JSON rendering.  Timing is excluded by default so that
    repeated runs produce byte-identical report files."""
    doc = {
        "dataset_tag": report.dataset_tag,
        "model_id": report.model_id,
        "class_order": [label.value for label in CLASS_ORDER],
        "confusion": [list(row) for row in report.confusion],
        "per_class": [dict(m) for m in report.per_class],
        "macro_f1": report.macro_f1,
        "zero_support_classes": list(report.zero_support_classes),
        "scored_pairs": report.scored_pairs,
        "skipped_pairs": [list(s) for s in report.skipped],
    }
    if include_timing:
        doc["pairs_per_second"] = report.pairs_per_second
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def format_report_table(report: EvalReport) -> str:
    lines = [
        f"dataset: {report.dataset_tag}    model: {report.model_id}",
        f"scored pairs: {report.scored_pairs}    skipped: {len(report.skipped)}"
        f"    throughput: {report.pairs_per_second:.1f} pairs/s",
        "",
        f"{'class':<16}{'precision':>10}{'recall':>10}{'F1':>10}{'support':>10}",
    ]
    for m in report.per_class:
        flag = " (zero support)" if m["zero_support"] else ""
        lines.append(
            f"{m['label']:<16}{m['precision']:>10.4f}{m['recall']:>10.4f}"
            f"{m['f1']:>10.4f}{m['support']:>10d}{flag}"
        )
    lines.append("")
    lines.append(f"macro-F1: {report.macro_f1:.4f}")
    header = "confusion (rows true, cols predicted): "
    lines.append(header + str([list(r) for r in report.confusion]))
    return "\n".join(lines) + "\n"
