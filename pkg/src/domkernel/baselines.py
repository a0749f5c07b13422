"""DOM-based baseline similarity measures.

All three baselines consume the same as-is DomTree as the kernel
pipeline so that the similarity function is the only varying factor in
comparisons:

* token-level Levenshtein over the preorder label sequence,
* 64-bit simhash over label 3-grams,
* ordered tree edit distance (Zhang-Shasha keyroot DP), unit costs.

Each returns a similarity in [0, 1] with 1.0 for identical trees.
"""

from __future__ import annotations

import csv
import enum
from typing import IO, Iterable

import numpy as np

from .dom import DomNode, DomTree, serialize_preorder
from .errors import NodeBudgetExceeded
from .kernels import DEFAULT_PAIR_BUDGET

__all__ = [
    "BaselineKind",
    "levenshtein_similarity",
    "simhash_similarity",
    "ted_similarity",
    "baseline_similarity",
    "simhash_fingerprint",
    "tree_edit_distance",
    "BASELINE_CSV_HEADER",
    "write_baseline_csv",
]


class BaselineKind(enum.Enum):
    LEVENSHTEIN_DOM = "levenshtein_dom"
    SIMHASH64 = "simhash64"
    TREE_EDIT_DISTANCE = "tree_edit_distance"


BASELINE_ORDER = (
    BaselineKind.LEVENSHTEIN_DOM,
    BaselineKind.SIMHASH64,
    BaselineKind.TREE_EDIT_DISTANCE,
)

BASELINE_CSV_HEADER = ["pair_id", "label"] + [kind.value for kind in BASELINE_ORDER]


# ---------------------------------------------------------------------------
# Levenshtein over preorder label sequences


def levenshtein_distance(tokens1: list[str], tokens2: list[str]) -> int:
    """Unit-cost token edit distance; row DP vectorized with the
    minimum-accumulate trick for the in-row insertion cascade."""
    if not tokens1:
        return len(tokens2)
    if not tokens2:
        return len(tokens1)
    vocab: dict[str, int] = {}
    s1 = np.array([vocab.setdefault(t, len(vocab)) for t in tokens1], dtype=np.int64)
    s2 = np.array([vocab.setdefault(t, len(vocab)) for t in tokens2], dtype=np.int64)
    n = s2.size
    offsets = np.arange(n + 1, dtype=np.int64)
    prev = offsets.copy()
    for i in range(1, s1.size + 1):
        substitute = prev[:-1] + (s2 != s1[i - 1])
        delete = prev[1:] + 1
        row = np.empty(n + 1, dtype=np.int64)
        row[0] = i
        row[1:] = np.minimum(substitute, delete)
        # insertions cascade left to right: row[j] = min_k<=j row[k] + (j-k)
        row = np.minimum.accumulate(row - offsets) + offsets
        prev = row
    return int(prev[-1])


def levenshtein_similarity(t1: DomTree, t2: DomTree) -> float:
    s1 = serialize_preorder(t1)
    s2 = serialize_preorder(t2)
    longest = max(len(s1), len(s2))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein_distance(s1, s2) / longest


# ---------------------------------------------------------------------------
# Simhash over label 3-grams


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a64(data: bytes) -> int:
    """FNV-1a, 64 bit: the fixed, documented token hash (process-salt
    free, unlike the builtin ``hash``)."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def _tokens(tree: DomTree) -> list[str]:
    labels = serialize_preorder(tree)
    if len(labels) < 3:
        return ["\x1f".join(labels)]
    return ["\x1f".join(labels[i:i + 3]) for i in range(len(labels) - 2)]


def simhash_fingerprint(tokens: Iterable[str]) -> int:
    """Standard bit-voting simhash: each token votes its 64 hash bits up
    or down; fingerprint bit is 1 where the tally is strictly positive."""
    votes = [0] * 64
    for token in tokens:
        h = _fnv1a64(token.encode("utf-8"))
        for bit in range(64):
            if h >> bit & 1:
                votes[bit] += 1
            else:
                votes[bit] -= 1
    fingerprint = 0
    for bit in range(64):
        if votes[bit] > 0:
            fingerprint |= 1 << bit
    return fingerprint


def simhash_similarity(t1: DomTree, t2: DomTree) -> float:
    f1 = simhash_fingerprint(_tokens(t1))
    f2 = simhash_fingerprint(_tokens(t2))
    return 1.0 - (f1 ^ f2).bit_count() / 64.0


# ---------------------------------------------------------------------------
# Ordered tree edit distance (Zhang-Shasha)


class _Annotated:
    """Postorder node arrays plus leftmost-leaf-descendants and keyroots."""

    __slots__ = ("labels", "lmds", "keyroots")

    def __init__(self, root: DomNode):
        labels: list[str] = []
        lmds: list[int] = []
        stack: list[tuple[DomNode, bool]] = [(root, False)]
        lmd_of: dict[int, int] = {}
        while stack:
            node, expanded = stack.pop()
            if expanded:
                index = len(labels)
                if node.children:
                    lmd = lmd_of[id(node.children[0])]
                else:
                    lmd = index
                lmd_of[id(node)] = lmd
                labels.append(node.label)
                lmds.append(lmd)
            else:
                stack.append((node, True))
                for child in reversed(node.children):
                    stack.append((child, False))
        keyroot_for: dict[int, int] = {}
        for index, lmd in enumerate(lmds):
            keyroot_for[lmd] = index  # last postorder index wins
        self.labels = labels
        self.lmds = lmds
        self.keyroots = sorted(keyroot_for.values())


def tree_edit_distance(t1: DomTree, t2: DomTree, *, budget: int = DEFAULT_PAIR_BUDGET) -> int:
    """Exact ordered tree edit distance with unit insert/delete/relabel
    costs via the classical postorder-keyroot dynamic program."""
    if t1.node_count * t2.node_count > budget:
        raise NodeBudgetExceeded(t1.node_count, t2.node_count, budget)
    a = _Annotated(t1.root)
    b = _Annotated(t2.root)
    size1, size2 = len(a.labels), len(b.labels)
    treedist = [[0] * size2 for _ in range(size1)]

    for i in a.keyroots:
        for j in b.keyroots:
            _keyroot_dist(a, b, i, j, treedist)
    return treedist[-1][-1]


def _keyroot_dist(a: _Annotated, b: _Annotated, i: int, j: int, treedist) -> None:
    al, bl = a.lmds, b.lmds
    ioff = al[i] - 1
    joff = bl[j] - 1
    m = i - al[i] + 2
    n = j - bl[j] + 2
    fd = [[0] * n for _ in range(m)]
    for x in range(1, m):
        fd[x][0] = fd[x - 1][0] + 1
    for y in range(1, n):
        fd[0][y] = fd[0][y - 1] + 1
    for x in range(1, m):
        fdx = fd[x]
        fdx1 = fd[x - 1]
        in_left_path = al[i] == al[x + ioff]
        for y in range(1, n):
            if in_left_path and bl[j] == bl[y + joff]:
                cost = a.labels[x + ioff] != b.labels[y + joff]
                fdx[y] = min(fdx1[y] + 1, fdx[y - 1] + 1, fdx1[y - 1] + cost)
                treedist[x + ioff][y + joff] = fdx[y]
            else:
                p = al[x + ioff] - 1 - ioff
                q = bl[y + joff] - 1 - joff
                fdx[y] = min(
                    fdx1[y] + 1,
                    fdx[y - 1] + 1,
                    fd[p][q] + treedist[x + ioff][y + joff],
                )


def ted_similarity(t1: DomTree, t2: DomTree, *, budget: int = DEFAULT_PAIR_BUDGET) -> float:
    distance = tree_edit_distance(t1, t2, budget=budget)
    return 1.0 - distance / (t1.node_count + t2.node_count)


def baseline_similarity(
    kind: BaselineKind, t1: DomTree, t2: DomTree, *, budget: int = DEFAULT_PAIR_BUDGET
) -> float:
    if kind is BaselineKind.LEVENSHTEIN_DOM:
        return levenshtein_similarity(t1, t2)
    if kind is BaselineKind.SIMHASH64:
        return simhash_similarity(t1, t2)
    return ted_similarity(t1, t2, budget=budget)


def write_baseline_csv(rows: Iterable[tuple[str, str, tuple]], out: IO[str]) -> int:
    """Rows are (pair_id, label_text, (lev, simhash, ted)) in baseline
    order; same layout conventions as the feature CSV."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(BASELINE_CSV_HEADER)
    count = 0
    for pair_id, label_text, values in rows:
        writer.writerow([pair_id, label_text] + [f"{v:.17g}" for v in values])
        count += 1
    return count
