"""Subtree (ST), subset-tree (SST), and partial-tree (PTK) kernels.

Every kernel value is a sum of fragment matches:

    K(t1, t2) = sum over node pairs (n1, n2) of Delta(n1, n2)

with, writing ``lam``/``mu`` for the decay parameters and "leaf" for a
childless node (matching leaf pairs score ``lam`` under all three
kernels):

* ``Delta_ST``: 0 unless the productions (label + ordered child labels)
  match; ``lam * prod_j Delta_ST(c_j, c_j')`` otherwise.  Nonzero only
  for fully identical subtrees.
* ``Delta_SST``: same gate; ``lam * prod_j (1 + Delta_SST(c_j, c_j'))``.
* ``Delta_PTK``: 0 unless the labels match; otherwise
  ``mu * (lam^2 + S)`` where ``S`` sums, over equal-length ordered child
  subsequences ``J1``/``J2``, ``lam^(span(J1)+span(J2))`` times the
  product of the selected child deltas, with ``span`` = last selected
  index - first + 1.  ``S`` is evaluated by the standard subsequence
  dynamic program, never by enumeration.

Performance model: each tree is first compressed into its set of unique
subtree signatures (hash-consing), so ``Delta`` is evaluated once per
distinct subtree pair instead of once per node pair; repeated page
structure (rows, menu items, cards) collapses.  Two interchangeable
evaluation paths sit on top: a pure-Python path that preserves exact
integer arithmetic whenever ``lam`` and ``mu`` are given as ints, and a
numpy-batched path for large float workloads.  Passing trees through a
shared :class:`KernelSession` additionally reuses signature tables and
delta memos across evaluations of the same pages.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dom import DomNode, DomTree, iter_preorder
from .errors import NodeBudgetExceeded

__all__ = [
    "KernelKind",
    "KernelParams",
    "Production",
    "production_of",
    "candidate_pairs",
    "canonical_tree_key",
    "raw_kernel",
    "normalized_kernel",
    "KernelSession",
    "DEFAULT_PAIR_BUDGET",
]

DEFAULT_PAIR_BUDGET = 10**8

# Above this many dense-matrix entries the batched path would hog memory;
# below this many candidate pairs numpy overhead loses to plain loops.
_DENSE_LIMIT = 1 << 24
_SCALAR_PAIR_CUTOFF = 64
_BATCH_CELL_CAP = 4_000_000


class KernelKind(enum.Enum):
    ST = "st"
    SST = "sst"
    PTK = "ptk"

    @property
    def index(self) -> int:
        return KERNEL_ORDER.index(self)


KERNEL_ORDER = (KernelKind.ST, KernelKind.SST, KernelKind.PTK)


@dataclass(frozen=True)
class KernelParams:
    """Decay parameters; ``mu`` only affects PTK.

    Both must lie in (0, 1].  Passing ints (``lam=1, mu=1``) keeps the
    whole computation in exact integer arithmetic, which the test
    oracles rely on.
    """

    lam: float = 0.4
    mu: float = 0.4

    def __post_init__(self) -> None:
        if not (0 < self.lam <= 1):
            raise ValueError(f"lambda must be in (0, 1], got {self.lam}")
        if not (0 < self.mu <= 1):
            raise ValueError(f"mu must be in (0, 1], got {self.mu}")

    @property
    def is_exact(self) -> bool:
        return isinstance(self.lam, int) and isinstance(self.mu, int)


@dataclass(frozen=True)
class Production:
    """A node label with the ordered labels of its children."""

    parent_label: str
    child_labels: tuple[str, ...]


def production_of(node: DomNode) -> Production:
    return Production(node.label, tuple(c.label for c in node.children))


def candidate_pairs(
    t1: DomTree, t2: DomTree, by: str = "label"
) -> list[tuple[int, int]]:
    """Node-id pairs that can have nonzero delta: equal label (PTK) or
    equal production (ST/SST), found by merging key-sorted node lists."""
    if by == "label":
        def key(node: DomNode):
            return node.label
    elif by == "production":
        def key(node: DomNode):
            return (node.label, tuple(c.label for c in node.children))
    else:
        raise ValueError(f"by must be 'label' or 'production', got {by!r}")

    seq1 = sorted((key(n), n.node_id) for n in iter_preorder(t1.root))
    seq2 = sorted((key(n), n.node_id) for n in iter_preorder(t2.root))
    pairs: list[tuple[int, int]] = []
    i = j = 0
    while i < len(seq1) and j < len(seq2):
        k1, k2 = seq1[i][0], seq2[j][0]
        if k1 < k2:
            i += 1
        elif k2 < k1:
            j += 1
        else:
            i_end = i
            while i_end < len(seq1) and seq1[i_end][0] == k1:
                i_end += 1
            j_end = j
            while j_end < len(seq2) and seq2[j_end][0] == k1:
                j_end += 1
            for _, id1 in seq1[i:i_end]:
                for _, id2 in seq2[j:j_end]:
                    pairs.append((id1, id2))
            i, j = i_end, j_end
    return pairs


# ---------------------------------------------------------------------------
# Subtree-signature compression


class _SigSpace:
    """Interner mapping each distinct subtree shape to a dense id.

    Shared between the trees of one session so that equal subtrees in
    different trees receive the same id, which is what makes the ST
    kernel a multiset intersection and lets delta memos transfer.
    """

    __slots__ = ("intern", "labels", "children", "sizes", "heights")

    def __init__(self) -> None:
        self.intern: dict[tuple, int] = {}
        self.labels: list[str] = []
        self.children: list[tuple[int, ...]] = []
        self.sizes: list[int] = []
        self.heights: list[int] = []

    def _sig(self, label: str, child_sigs: tuple[int, ...]) -> int:
        key = (label, child_sigs)
        sig = self.intern.get(key)
        if sig is None:
            sig = len(self.labels)
            self.intern[key] = sig
            self.labels.append(label)
            self.children.append(child_sigs)
            self.sizes.append(1 + sum(self.sizes[c] for c in child_sigs))
            self.heights.append(1 + max((self.heights[c] for c in child_sigs), default=0))
        return sig

    def compress(self, tree: DomTree) -> "_CompressedTree":
        # One iterative walk: the push phase visits nodes in preorder
        # (collecting the canonical key), the pop phase in postorder
        # (interning children before their parent).
        sig_of: dict[int, int] = {}
        key_parts: list[tuple[str, int]] = []
        stack: list[tuple[DomNode, bool]] = [(tree.root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                child_sigs = tuple(sig_of[id(c)] for c in node.children)
                sig_of[id(node)] = self._sig(node.label, child_sigs)
            else:
                key_parts.append((node.label, len(node.children)))
                stack.append((node, True))
                for child in reversed(node.children):
                    stack.append((child, False))

        counts: dict[int, int] = {}
        for sig in sig_of.values():
            counts[sig] = counts.get(sig, 0) + 1
        return _CompressedTree(
            self,
            tree.node_count,
            sig_of[id(tree.root)],
            counts,
            (tree.node_count, tuple(key_parts)),
        )


class _CompressedTree:
    __slots__ = (
        "space",
        "node_count",
        "root_sig",
        "counts",
        "canon_key",
        "sig_ids",
        "by_label",
        "by_prod",
        "nchild",
        "height_arr",
        "count_arr",
        "child_flat",
        "child_off",
        "local",
    )

    def __init__(
        self,
        space: _SigSpace,
        node_count: int,
        root_sig: int,
        counts: dict[int, int],
        canon_key: tuple,
    ):
        self.space = space
        self.node_count = node_count
        self.root_sig = root_sig
        self.counts = counts
        self.canon_key = canon_key
        self.sig_ids = sorted(counts)  # local order: ascending global sig id
        self.local = {g: i for i, g in enumerate(self.sig_ids)}

        by_label: dict[str, list[int]] = {}
        by_prod: dict[tuple, list[int]] = {}
        nchild = []
        heights = []
        weights = []
        child_flat: list[int] = []
        child_off = [0]
        for i, g in enumerate(self.sig_ids):
            label = space.labels[g]
            kids = space.children[g]
            by_label.setdefault(label, []).append(i)
            prod = (label, tuple(space.labels[c] for c in kids))
            by_prod.setdefault(prod, []).append(i)
            nchild.append(len(kids))
            heights.append(space.heights[g])
            weights.append(counts[g])
            child_flat.extend(self.local[c] for c in kids)
            child_off.append(len(child_flat))
        self.by_label = by_label
        self.by_prod = by_prod
        self.nchild = np.asarray(nchild, dtype=np.int64)
        self.height_arr = np.asarray(heights, dtype=np.int64)
        self.count_arr = np.asarray(weights, dtype=np.float64)
        self.child_flat = np.asarray(child_flat, dtype=np.int64)
        self.child_off = np.asarray(child_off, dtype=np.int64)


def canonical_tree_key(tree: DomTree) -> tuple:
    """A total order on trees by structure: preorder (label, arity) pairs
    encode a tree uniquely.

    Kernel arguments are processed in this order so that K(a, b) and
    K(b, a) run the identical computation and agree bit-exactly; callers
    holding several trees (feature extraction) should likewise add them
    to a session in this order.
    """
    return (tree.node_count, tuple((n.label, len(n.children)) for n in iter_preorder(tree.root)))


# ---------------------------------------------------------------------------
# Session


class KernelSession:
    """Kernel evaluations over a set of trees with shared state.

    Signature tables, per-kind delta memos, and self-kernel values are
    reused across evaluations, which matters when the same pages are
    compared under several strategies and kernels.
    """

    def __init__(self, params: KernelParams, budget: int = DEFAULT_PAIR_BUDGET):
        self.params = params
        self.budget = budget
        self.space = _SigSpace()
        self._trees: list[tuple[DomTree, _CompressedTree]] = []
        self._memos: dict[KernelKind, dict[tuple[int, int], float]] = {
            kind: {} for kind in KERNEL_ORDER
        }
        self._self_cache: dict[tuple[KernelKind, int], float] = {}

    def add_tree(self, tree: DomTree) -> int:
        handle = len(self._trees)
        self._trees.append((tree, self.space.compress(tree)))
        return handle

    def raw(self, kind: KernelKind, h1: int, h2: int):
        """Raw kernel between two added trees; an int in exact mode."""
        tree1, comp1 = self._trees[h1]
        tree2, comp2 = self._trees[h2]
        if tree1.node_count * tree2.node_count > self.budget:
            raise NodeBudgetExceeded(tree1.node_count, tree2.node_count, self.budget)
        if comp2.canon_key < comp1.canon_key:
            comp1, comp2 = comp2, comp1
        if kind is KernelKind.ST:
            return _st_kernel(self.params.lam, comp1, comp2)
        groups = _pair_groups(kind, comp1, comp2)
        npairs = sum(len(la) * len(lb) for la, lb in groups)
        dense_cells = len(comp1.sig_ids) * len(comp2.sig_ids)
        if (
            self.params.is_exact
            or npairs <= _SCALAR_PAIR_CUTOFF
            or dense_cells > _DENSE_LIMIT
        ):
            return _scalar_kernel(kind, self.params, comp1, comp2, groups, self._memos[kind])
        return _batched_kernel(kind, self.params, comp1, comp2, groups)

    def self_kernel(self, kind: KernelKind, h: int):
        key = (kind, h)
        value = self._self_cache.get(key)
        if value is None:
            value = self.raw(kind, h, h)
            self._self_cache[key] = value
        return value

    def normalized(self, kind: KernelKind, h1: int, h2: int) -> float:
        cross = self.raw(kind, h1, h2)
        k11 = self.self_kernel(kind, h1)
        k22 = self.self_kernel(kind, h2)
        return _cosine(cross, k11, k22)


def _cosine(cross, k11, k22) -> float:
    if k11 == 0 or k22 == 0 or cross == 0:
        return 0.0
    if cross == k11 == k22:
        return 1.0
    try:
        # sqrt before multiplying keeps large float self-kernels finite
        denom = math.sqrt(float(k11)) * math.sqrt(float(k22))
        return float(cross) / denom
    except OverflowError:
        # exact-integer values beyond float range: work in log space
        return 2.0 ** (math.log2(cross) - 0.5 * (math.log2(k11) + math.log2(k22)))


def raw_kernel(
    kind: KernelKind,
    params: KernelParams,
    t1: DomTree,
    t2: DomTree,
    *,
    budget: int = DEFAULT_PAIR_BUDGET,
):
    """K(t1, t2) for the given kernel kind; symmetric in its tree
    arguments.  Raises :class:`NodeBudgetExceeded` when the node-pair
    product exceeds ``budget``."""
    session = _pair_session(params, budget, t1, t2)
    return session.raw(kind, 0, 1)


def normalized_kernel(
    kind: KernelKind,
    params: KernelParams,
    t1: DomTree,
    t2: DomTree,
    *,
    budget: int = DEFAULT_PAIR_BUDGET,
) -> float:
    """Cosine-normalized kernel K(t1,t2)/sqrt(K(t1,t1)K(t2,t2)) in [0, 1]."""
    session = _pair_session(params, budget, t1, t2)
    return session.normalized(kind, 0, 1)


def _pair_session(params: KernelParams, budget: int, t1: DomTree, t2: DomTree) -> KernelSession:
    # Trees enter the shared signature space in canonical order so the
    # interning (and with it every float summation order) is independent
    # of argument order.
    session = KernelSession(params, budget=budget)
    if canonical_tree_key(t2) < canonical_tree_key(t1):
        t1, t2 = t2, t1
    session.add_tree(t1)
    session.add_tree(t2)
    return session


# ---------------------------------------------------------------------------
# Evaluation paths


def _st_kernel(lam, a: _CompressedTree, b: _CompressedTree):
    """ST delta is lam^size exactly when the subtrees are identical, so
    the kernel is a weighted multiset intersection of signatures."""
    sizes = a.space.sizes
    total = 0
    for sig in a.sig_ids:
        cb = b.counts.get(sig)
        if cb is not None:
            total += a.counts[sig] * cb * lam ** sizes[sig]
    return total


def _pair_groups(kind: KernelKind, a: _CompressedTree, b: _CompressedTree):
    """Candidate signature-pair groups (label groups for PTK, production
    groups for SST), as (local-ids-in-a, local-ids-in-b) lists in
    deterministic key order."""
    if kind is KernelKind.PTK:
        ga, gb = a.by_label, b.by_label
    else:
        ga, gb = a.by_prod, b.by_prod
    groups = []
    for key in sorted(ga.keys() & gb.keys()):
        groups.append((ga[key], gb[key]))
    return groups


def _scalar_kernel(kind, params, a, b, groups, memo):
    lam = params.lam
    mu = params.mu
    space = a.space
    heights = space.heights
    children = space.children

    buckets: dict[int, list[tuple[int, int]]] = {}
    for la, lb in groups:
        for i in la:
            g1 = a.sig_ids[i]
            h = heights[g1]
            bucket = buckets.setdefault(h, [])
            for j in lb:
                bucket.append((g1, b.sig_ids[j]))

    total = 0
    memo_get = memo.get
    for h in sorted(buckets):
        for g1, g2 in buckets[h]:
            d = memo_get((g1, g2))
            if d is None:
                c1 = children[g1]
                c2 = children[g2]
                if kind is KernelKind.SST:
                    d = lam
                    for x, y in zip(c1, c2):
                        d *= 1 + memo_get((x, y), 0)
                else:  # PTK
                    if not c1 and not c2:
                        d = lam
                    else:
                        d = mu * (lam * lam + _ptk_child_sum(c1, c2, memo_get, lam))
                memo[(g1, g2)] = d
            total += a.counts[g1] * b.counts[g2] * d
    return total


def _ptk_child_sum(u, v, memo_get, lam):
    """Subsequence DP over two child-signature lists.

    A_p(i, j) sums, over subsequence pairs of length p ending exactly at
    positions (i, j), lam^(span1+span2) times the child-delta product;
    R_p is its doubly lam-decayed prefix sum, which extends chains to
    length p+1.  Returns sum over p and (i, j) of A_p.
    """
    m, n = len(u), len(v)
    if m == 0 or n == 0:
        return 0
    D = [[memo_get((ui, vj), 0) for vj in v] for ui in u]
    if not any(any(row) for row in D):
        return 0
    lam2 = lam * lam
    total = 0
    r_prev = None  # (m+1) x (n+1), zero row/col 0
    for p in range(1, min(m, n) + 1):
        r_cur = [[0] * (n + 1) for _ in range(m + 1)]
        p_sum = 0
        for i in range(1, m + 1):
            d_row = D[i - 1]
            rc_i = r_cur[i]
            rc_up = r_cur[i - 1]
            rp_up = r_prev[i - 1] if r_prev is not None else None
            for j in range(1, n + 1):
                d = d_row[j - 1]
                if d:
                    a_ij = lam2 * d if rp_up is None else lam2 * d * rp_up[j - 1]
                else:
                    a_ij = 0
                if a_ij:
                    p_sum += a_ij
                rc_i[j] = a_ij + lam * (rc_up[j] + rc_i[j - 1]) - lam2 * rc_up[j - 1]
        total += p_sum
        if p_sum == 0:
            break  # no length-p chains, so no longer ones either
        r_prev = r_cur
    return total


_BUCKETS = (0, 1, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 24, 32, 40, 48, 64, 96, 128)


def _bucket_sizes(values: np.ndarray) -> np.ndarray:
    """Round child counts up to a fixed ladder so batches can be padded
    to a handful of shapes (padding is exact: phantom children carry
    delta 0, contributing no subsequences and unit SST factors)."""
    ladder = list(_BUCKETS)
    top = int(values.max(initial=0))
    while ladder[-1] < top:
        ladder.append(ladder[-1] * 2)
    ladder_arr = np.asarray(ladder, dtype=np.int64)
    return ladder_arr[np.searchsorted(ladder_arr, values)]


def _gather_children(comp: _CompressedTree, rows: np.ndarray, width: int, phantom: int):
    """(len(rows), width) child-index matrix, padded with ``phantom``."""
    spread = np.arange(width, dtype=np.int64)[None, :]
    valid = spread < comp.nchild[rows][:, None]
    idx = np.where(valid, comp.child_off[rows][:, None] + spread, 0)
    return np.where(valid, comp.child_flat[idx], phantom)


def _decay_lower_triangle(size: int, lam: float, cache: dict) -> np.ndarray:
    matrix = cache.get(size)
    if matrix is None:
        offsets = np.arange(size)
        exponents = offsets[:, None] - offsets[None, :]
        matrix = np.where(exponents >= 0, lam ** np.maximum(exponents, 0), 0.0)
        cache[size] = matrix
    return matrix


def _batched_kernel(kind, params, a, b, groups):
    """Vectorized float path.

    Candidate signature pairs are sorted by the height of the first
    signature (so child deltas are ready before their parents), grouped
    by bucketed child counts, and processed as padded 3-d batches;
    deltas live in a dense matrix with one phantom row and column that
    stay zero.  The decayed 2-d prefix sum R_p = sum of
    lam^(di+dj) A_p over the upper-left rectangle is two triangular
    matrix multiplies.
    """
    lam = float(params.lam)
    mu = float(params.mu)
    p1_parts = []
    p2_parts = []
    for la, lb in groups:
        ia = np.asarray(la, dtype=np.int64)
        ib = np.asarray(lb, dtype=np.int64)
        p1_parts.append(np.repeat(ia, ib.size))
        p2_parts.append(np.tile(ib, ia.size))
    p1 = np.concatenate(p1_parts)
    p2 = np.concatenate(p2_parts)

    h1 = a.height_arr[p1]
    m_real = a.nchild[p1]
    n_real = m_real if kind is KernelKind.SST else b.nchild[p2]
    m_arr = _bucket_sizes(m_real)
    n_arr = m_arr if kind is KernelKind.SST else _bucket_sizes(n_real)
    order = np.lexsort((p2, p1, n_arr, m_arr, h1))
    p1 = p1[order]
    p2 = p2[order]
    m_arr = m_arr[order]
    n_arr = n_arr[order]
    h1 = h1[order]
    pmax_real = np.minimum(m_real, n_real)[order]

    phantom_a = len(a.sig_ids)
    phantom_b = len(b.sig_ids)
    D = np.zeros((phantom_a + 1, phantom_b + 1))
    keys = np.stack([h1, m_arr, n_arr])
    boundaries = np.flatnonzero(np.any(keys[:, 1:] != keys[:, :-1], axis=0)) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [p1.size]))

    lam2 = lam * lam
    tri_cache: dict[int, np.ndarray] = {}
    for s, e in zip(starts, ends):
        m = int(m_arr[s])
        n = int(n_arr[s])
        q1 = p1[s:e]
        q2 = p2[s:e]
        if m == 0 and n == 0:
            D[q1, q2] = lam
            continue
        if kind is KernelKind.PTK and (m == 0 or n == 0):
            D[q1, q2] = mu * lam2
            continue
        p_cap = int(pmax_real[s:e].max())
        cells = max(m * n, m, 1)
        chunk = max(1, _BATCH_CELL_CAP // cells)
        for cs in range(0, q1.size, chunk):
            r1 = q1[cs:cs + chunk]
            r2 = q2[cs:cs + chunk]
            ca = _gather_children(a, r1, m, phantom_a)
            if kind is KernelKind.SST:
                D[r1, r2] = lam * np.prod(1.0 + D[ca, _gather_children(b, r2, m, phantom_b)], axis=1)
                continue
            cb = _gather_children(b, r2, n, phantom_b)
            d_mat = D[ca[:, :, None], cb[:, None, :]]
            total = np.zeros(r1.size)
            r_prev = None
            lower_m = _decay_lower_triangle(m, lam, tri_cache)
            lower_n = _decay_lower_triangle(n, lam, tri_cache)
            for p in range(1, p_cap + 1):
                if r_prev is None:
                    a_mat = lam2 * d_mat
                else:
                    a_mat = lam2 * d_mat
                    a_mat[:, 1:, 1:] *= r_prev[:, :-1, :-1]
                    a_mat[:, 0, :] = 0.0
                    a_mat[:, :, 0] = 0.0
                total += a_mat.sum(axis=(1, 2))
                if p == p_cap or not a_mat.any():
                    break
                r_prev = lower_m @ a_mat @ lower_n.T
            D[r1, r2] = mu * (lam2 + total)

    return float((a.count_arr[p1] * b.count_arr[p2] * D[p1, p2]).sum())
