"""Acceptance suite: one test per acceptance criterion, each printing a
single PASS/FAIL line (run with ``pytest -v -s tests/test_acceptance.py``
to see them; the -v test names mirror the criteria).

Tolerances and sample sizes are pinned here and nowhere else.
"""

import os
import random
import statistics
import time
from pathlib import Path

import numpy as np
import pytest

from domkernel.baselines import levenshtein_distance, tree_edit_distance
from domkernel.classify import CLASS_ORDER, LabeledPair, predict, save_model, train
from domkernel.dom import iter_preorder, serialize_preorder
from domkernel.evaluate import evaluate, extract_pairs, load_manifest, macro_f1, per_class_metrics
from domkernel.features import SimilarityVector, similarity_vector
from domkernel.ingest import parse_html
from domkernel.kernels import (
    KERNEL_ORDER,
    KernelKind,
    KernelParams,
    KernelSession,
    normalized_kernel,
    raw_kernel,
)
from domkernel.represent import ReprStrategy, apply_strategy
from tests.oracles import (
    all_trees,
    levenshtein_recursive,
    oracle_kernel,
    ptk_fragments,
    random_tree,
    sst_fragments,
    st_fragments,
    ted_recursive,
)
from tests.pagegen import generate_page, page_pair

EXACT = KernelParams(lam=1, mu=1)
FLOAT_PARAMS = KernelParams(0.4, 0.4)


def _report(tag: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {tag}: {status}" + (f" ({detail})" if detail else ""), flush=True)
    assert ok, f"{tag}: {detail}"


def _session_kernels(t1, t2):
    session = KernelSession(EXACT)
    h1, h2 = session.add_tree(t1), session.add_tree(t2)
    return tuple(session.raw(kind, h1, h2) for kind in KERNEL_ORDER)


def _oracle_kernels(fragments1, fragments2):
    out = []
    for c1, c2 in zip(fragments1, fragments2):
        if len(c2) < len(c1):
            c1, c2 = c2, c1
        out.append(sum(v * c2[k] for k, v in c1.items() if k in c2))
    return tuple(out)


def test_kernel_oracle_equivalence():
    """Exhaustive pairs up to 4 nodes over {a,b,c} plus >= 5000 random
    pairs up to 6 nodes: DP equals fragment enumeration, integer-exact."""
    start = time.perf_counter()
    trees = all_trees(4, "abc")
    assert len(trees) == 471
    fragments = [(st_fragments(t), sst_fragments(t), ptk_fragments(t)) for t in trees]

    mismatches = 0
    checked = 0
    for i in range(len(trees)):
        for j in range(i, len(trees)):
            dp = _session_kernels(trees[i], trees[j])
            oracle = _oracle_kernels(fragments[i], fragments[j])
            mismatches += dp != oracle
            checked += 1
    # the DP is argument-order canonicalized; spot-check reversed orders
    rng = random.Random(0)
    for _ in range(2000):
        i, j = rng.randrange(len(trees)), rng.randrange(len(trees))
        if _session_kernels(trees[j], trees[i]) != _oracle_kernels(fragments[i], fragments[j]):
            mismatches += 1
        checked += 1

    rng = random.Random(101)
    for _ in range(5000):
        t1 = random_tree(rng, 6)
        t2 = random_tree(rng, 6)
        dp = _session_kernels(t1, t2)
        oracle = _oracle_kernels(
            (st_fragments(t1), sst_fragments(t1), ptk_fragments(t1)),
            (st_fragments(t2), sst_fragments(t2), ptk_fragments(t2)),
        )
        mismatches += dp != oracle
        checked += 1

    elapsed = time.perf_counter() - start
    _report(
        "kernel-oracle-equivalence",
        mismatches == 0 and elapsed < 120.0,
        f"{checked} pair checks, {mismatches} mismatches, {elapsed:.1f}s",
    )


def test_fragment_space_ordering():
    """raw_ST <= raw_SST <= raw_PTK at unit decay on >= 10000 random
    pairs of trees with up to 50 nodes; exact integer arithmetic."""
    rng = random.Random(202)
    violations = 0
    n_pairs = 10_000
    for _ in range(n_pairs):
        t1 = random_tree(rng, 50)
        t2 = random_tree(rng, 50)
        st, sst, ptk = _session_kernels(t1, t2)
        if not (st <= sst <= ptk):
            violations += 1
    _report("fragment-space-ordering", violations == 0, f"{n_pairs} pairs, {violations} violations")


def test_kernel_properties():
    """Symmetry (exact), normalized self-similarity within 1e-12,
    normalized range within [0, 1+1e-12], monotone decay in lambda and
    mu, on >= 1000 random pairs each; zero violations."""
    rng = random.Random(303)
    violations = 0

    for _ in range(1000):
        t1 = random_tree(rng, 30)
        t2 = random_tree(rng, 30)
        for kind in KERNEL_ORDER:
            if raw_kernel(kind, FLOAT_PARAMS, t1, t2) != raw_kernel(kind, FLOAT_PARAMS, t2, t1):
                violations += 1
            value = normalized_kernel(kind, FLOAT_PARAMS, t1, t2)
            if not (0.0 <= value <= 1.0 + 1e-12):
                violations += 1
        kind = KERNEL_ORDER[rng.randrange(3)]
        if abs(normalized_kernel(kind, FLOAT_PARAMS, t1, t1) - 1.0) > 1e-12:
            violations += 1

    for _ in range(1000):
        t1 = random_tree(rng, 20)
        t2 = random_tree(rng, 20)
        for kind in KERNEL_ORDER:
            lo = raw_kernel(kind, KernelParams(0.2, 0.5), t1, t2)
            hi = raw_kernel(kind, KernelParams(0.8, 0.5), t1, t2)
            if lo > hi + 1e-12:
                violations += 1
        mu_lo = raw_kernel(KernelKind.PTK, KernelParams(0.5, 0.2), t1, t2)
        mu_hi = raw_kernel(KernelKind.PTK, KernelParams(0.5, 0.9), t1, t2)
        if mu_lo > mu_hi + 1e-12:
            violations += 1

    _report("kernel-properties", violations == 0, f"{violations} violations")


def test_strategy_properties():
    """Idempotence, script-free postcondition, and node-count
    monotonicity on >= 1000 parsed generated pages; zero violations."""
    rng = random.Random(404)
    violations = 0
    n_pages = 1000
    for i in range(n_pages):
        page = generate_page(rng.randrange(10**9), target_nodes=rng.randint(40, 220))
        tree = parse_html(page.encode(), f"gen-{i}")
        body_only = apply_strategy(tree, ReprStrategy.ONLY_BODY)
        stripped = apply_strategy(tree, ReprStrategy.ONLY_BODY_NO_SCRIPTS)
        if apply_strategy(tree, ReprStrategy.AS_IS) is not tree:
            violations += 1
        for strategy, once in (
            (ReprStrategy.ONLY_BODY, body_only),
            (ReprStrategy.ONLY_BODY_NO_SCRIPTS, stripped),
        ):
            twice = apply_strategy(once, strategy)
            if serialize_preorder(twice) != serialize_preorder(once):
                violations += 1
        if any(n.label == "script" for n in iter_preorder(stripped.root)):
            violations += 1
        if not (stripped.node_count <= body_only.node_count <= tree.node_count):
            violations += 1
    _report("strategy-properties", violations == 0, f"{n_pages} pages, {violations} violations")


def _synthetic_cluster_data(n_total: int, seed: int) -> list[LabeledPair]:
    rng = np.random.default_rng(seed)
    centers = {CLASS_ORDER[0]: 0.9, CLASS_ORDER[1]: 0.55, CLASS_ORDER[2]: 0.15}
    per_class = n_total // 3
    pairs = []
    for label, center in centers.items():
        for i in range(per_class):
            values = np.clip(center + rng.normal(0.0, 0.05, 9), 0.0, 1.0)
            pairs.append(
                LabeledPair(SimilarityVector(f"{label.value}-{i}", tuple(values)), label)
            )
    return pairs


def test_classifier_sanity():
    """150 separable synthetic points: held-out macro-F1 >= 0.95,
    bit-identical double training, under 10 seconds."""
    start = time.perf_counter()
    data = _synthetic_cluster_data(150, seed=42)
    train_set = [p for i, p in enumerate(data) if i % 3 != 0]
    held_out = [p for i, p in enumerate(data) if i % 3 == 0]
    model = train(train_set)
    deterministic = save_model(model) == save_model(train(train_set))

    confusion = [[0] * 3 for _ in range(3)]
    for pair in held_out:
        predicted, _ = predict(model, pair.vector)
        confusion[pair.label.index][predicted.index] += 1
    score = macro_f1(confusion)
    elapsed = time.perf_counter() - start
    _report(
        "classifier-sanity",
        score >= 0.95 and deterministic and elapsed < 10.0,
        f"held-out macro-F1 {score:.3f}, deterministic={deterministic}, {elapsed:.1f}s",
    )


def test_metric_correctness():
    """macro_f1 on the worked confusion matrices, within 1e-12."""
    checks = [
        (macro_f1([[5, 0, 0], [0, 7, 0], [0, 0, 2]]), 1.0),
        (macro_f1([[5, 0, 0], [0, 0, 5], [0, 0, 5]]), 5 / 9),
        (macro_f1([[0, 0, 0], [0, 0, 0], [0, 0, 0]]), 0.0),
        (macro_f1([[8, 0, 0], [8, 0, 0], [8, 0, 0]]), 1 / 6),
    ]
    worst = max(abs(got - want) for got, want in checks)
    flags_ok = all(m["zero_support"] for m in per_class_metrics([[0, 0, 0]] * 3))
    _report("metric-correctness", worst <= 1e-12 and flags_ok, f"max error {worst:.2e}")


def test_baseline_correctness():
    """Levenshtein and TED DPs equal plain-recursion oracles, exactly:
    exhaustively for all tree pairs with up to 5 nodes over a two-letter
    alphabet, plus random pairs over three letters."""
    start = time.perf_counter()
    trees = all_trees(5, "ab")
    assert len(trees) == 550
    mismatches = 0
    checked = 0
    sequences = [tuple(serialize_preorder(t)) for t in trees]
    for i in range(len(trees)):
        for j in range(i, len(trees)):
            if tree_edit_distance(trees[i], trees[j]) != ted_recursive(trees[i], trees[j]):
                mismatches += 1
            if levenshtein_distance(list(sequences[i]), list(sequences[j])) != levenshtein_recursive(
                sequences[i], sequences[j]
            ):
                mismatches += 1
            checked += 1
    rng = random.Random(505)
    for _ in range(2000):
        t1 = random_tree(rng, 5)
        t2 = random_tree(rng, 5)
        if tree_edit_distance(t1, t2) != ted_recursive(t1, t2):
            mismatches += 1
        s1, s2 = tuple(serialize_preorder(t1)), tuple(serialize_preorder(t2))
        if levenshtein_distance(list(s1), list(s2)) != levenshtein_recursive(s1, s2):
            mismatches += 1
        checked += 1
    elapsed = time.perf_counter() - start
    _report(
        "baseline-correctness",
        mismatches == 0,
        f"{checked} pair checks, {mismatches} mismatches, {elapsed:.1f}s",
    )


REPLICATION_DIR = os.environ.get("DOMKERNEL_REPLICATION_DIR", "")


@pytest.mark.skipif(
    not REPLICATION_DIR,
    reason="conditional criterion: set DOMKERNEL_REPLICATION_DIR to a directory with "
    "ds.csv, ss.csv, ts.csv manifests built from the external dataset "
    "(see domkernel.dataset_adapter)",
)
def test_table_replication():
    """Train on DS, evaluate on SS and TS: macro-F1 >= 0.53 and >= 0.63."""
    base = Path(REPLICATION_DIR)
    ds = load_manifest(base / "ds.csv")
    vectors, _ = extract_pairs(ds, FLOAT_PARAMS, jobs=os.cpu_count() or 1, lenient=True)
    pairs = [
        LabeledPair(vector=v, label=row.label)
        for row, v in zip(ds.rows, vectors)
        if v is not None
    ]
    model = train(pairs)
    ss_report = evaluate(model, load_manifest(base / "ss.csv"), FLOAT_PARAMS,
                         jobs=os.cpu_count() or 1, lenient=True)
    ts_report = evaluate(model, load_manifest(base / "ts.csv"), FLOAT_PARAMS,
                         jobs=os.cpu_count() or 1, lenient=True)
    _report(
        "table-replication",
        ss_report.macro_f1 >= 0.53 and ts_report.macro_f1 >= 0.63,
        f"SS {ss_report.macro_f1:.3f} (>=0.53), TS {ts_report.macro_f1:.3f} (>=0.63)",
    )


def test_throughput():
    """Median similarity-vector time <= 250 ms on page pairs with DOMs
    of <= 2000 nodes, default budget, single worker."""
    times = []
    sizes = []
    for seed in range(9):
        html_a, html_b = page_pair(seed, target_nodes=1900)
        tree_a = parse_html(html_a.encode(), "a")
        tree_b = parse_html(html_b.encode(), "b")
        assert tree_a.node_count <= 2000 and tree_b.node_count <= 2000
        sizes.append(max(tree_a.node_count, tree_b.node_count))
        begin = time.perf_counter()
        similarity_vector(tree_a, tree_b, FLOAT_PARAMS)
        times.append(time.perf_counter() - begin)
    median_ms = statistics.median(times) * 1000
    _report(
        "throughput",
        median_ms <= 250.0,
        f"median {median_ms:.0f} ms over {len(times)} pairs (largest DOM {max(sizes)} nodes)",
    )
