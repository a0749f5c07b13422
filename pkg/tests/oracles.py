"""Independent brute-force oracles for the kernel and baseline tests.

Everything here enumerates explicitly and never shares code with the
dynamic programs it checks.  The kernel oracles count matching tree
fragments at lambda = mu = 1, in exact integer arithmetic:

* ST fragments: one per node, the full subtree below it.
* SST fragments rooted at a node: its production with each child either
  cut off ("stop") or recursively expanded; a stopped child and an
  expanded leaf are distinct fragment derivations (the preterminal
  convention the deltas use), so they serialize differently.
* PTK fragments rooted at a node: the bare label, or the label plus a
  nonempty ordered subsequence of children, each recursively expanded.

Fragments are counted as multisets of derivations; the kernel value is
the dot product of the two trees' multisets.
"""

from __future__ import annotations

import random
from collections import Counter

from domkernel.dom import DomNode, DomTree, from_nested, iter_preorder

# ---------------------------------------------------------------------------
# Fragment enumeration


def _st_serial(node: DomNode) -> str:
    return node.label + "(" + ",".join(_st_serial(c) for c in node.children) + ")"


def st_fragments(tree: DomTree) -> Counter:
    return Counter(_st_serial(n) for n in iter_preorder(tree.root))


def _sst_rooted(node: DomNode) -> list[str]:
    """All subset-tree fragments rooted at ``node`` (as strings)."""
    if not node.children:
        return [node.label + "()"]
    options_per_child = []
    for child in node.children:
        stopped = ["#" + child.label]
        options_per_child.append(stopped + _sst_rooted(child))
    fragments = [""]
    for options in options_per_child:
        fragments = [prefix + "," + opt for prefix in fragments for opt in options]
    return [node.label + "(" + f[1:] + ")" for f in fragments]


def sst_fragments(tree: DomTree) -> Counter:
    counter: Counter = Counter()
    for node in iter_preorder(tree.root):
        counter.update(_sst_rooted(node))
    return counter


def _ptk_rooted(node: DomNode, memo: dict) -> list[str]:
    """All partial-tree fragments rooted at ``node`` (as strings, with
    derivation multiplicity preserved by listing duplicates)."""
    key = id(node)
    if key in memo:
        return memo[key]
    fragments = [node.label]
    k = len(node.children)
    for mask in range(1, 1 << k):
        selected = [node.children[i] for i in range(k) if mask & (1 << i)]
        combos = [""]
        for child in selected:
            combos = [
                prefix + "," + frag for prefix in combos for frag in _ptk_rooted(child, memo)
            ]
        fragments.extend(node.label + "(" + c[1:] + ")" for c in combos)
    memo[key] = fragments
    return fragments


def ptk_fragments(tree: DomTree) -> Counter:
    counter: Counter = Counter()
    memo: dict = {}
    for node in iter_preorder(tree.root):
        counter.update(_ptk_rooted(node, memo))
    return counter


def oracle_kernel(kind: str, t1: DomTree, t2: DomTree) -> int:
    """Fragment-counting kernel value at lambda = mu = 1."""
    enumerate_fn = {"st": st_fragments, "sst": sst_fragments, "ptk": ptk_fragments}[kind]
    c1 = enumerate_fn(t1)
    c2 = enumerate_fn(t2)
    if len(c2) < len(c1):
        c1, c2 = c2, c1
    return sum(count * c2[frag] for frag, count in c1.items() if frag in c2)


# ---------------------------------------------------------------------------
# Edit-distance oracles (plain recursion, exponential but tiny inputs)


def levenshtein_recursive(s1, s2) -> int:
    if not s1:
        return len(s2)
    if not s2:
        return len(s1)
    sub = levenshtein_recursive(s1[1:], s2[1:]) + (s1[0] != s2[0])
    dele = levenshtein_recursive(s1[1:], s2) + 1
    ins = levenshtein_recursive(s1, s2[1:]) + 1
    return min(sub, dele, ins)


def ted_recursive(t1: DomTree, t2: DomTree) -> int:
    """Ordered tree edit distance by the forest recurrence, memoized over
    postorder forests.  Independent of the keyroot implementation."""
    post1 = _postorder(t1.root)
    post2 = _postorder(t2.root)

    from functools import lru_cache

    @lru_cache(maxsize=None)
    def forest_dist(f1: tuple, f2: tuple) -> int:
        # forests are tuples of node indices into post1/post2 (roots of
        # the forest trees, left to right)
        if not f1:
            return sum(_size(post2[i]) for i in f2)
        if not f2:
            return sum(_size(post1[i]) for i in f1)
        *rest1, r1 = f1
        *rest2, r2 = f2
        n1 = post1[r1]
        n2 = post2[r2]
        delete = forest_dist(tuple(rest1) + _child_indices(n1, post1), f2) + 1
        insert = forest_dist(f1, tuple(rest2) + _child_indices(n2, post2)) + 1
        match = (
            forest_dist(tuple(rest1), tuple(rest2))
            + forest_dist(_child_indices(n1, post1), _child_indices(n2, post2))
            + (n1.label != n2.label)
        )
        return min(delete, insert, match)

    def _child_indices(node, post):
        index = {id(n): i for i, n in enumerate(post)}
        return tuple(index[id(c)] for c in node.children)

    def _size(node) -> int:
        return 1 + sum(_size(c) for c in node.children)

    full1 = (len(post1) - 1,)
    full2 = (len(post2) - 1,)
    return forest_dist(full1, full2)


def _postorder(root: DomNode) -> list[DomNode]:
    out: list[DomNode] = []

    def walk(node: DomNode) -> None:
        for child in node.children:
            walk(child)
        out.append(node)

    walk(root)
    return out


# ---------------------------------------------------------------------------
# Tree generation


def random_tree(rng: random.Random, max_nodes: int, alphabet: str = "abc") -> DomTree:
    """A uniform-attachment random ordered tree with 1..max_nodes nodes."""
    n = rng.randint(1, max_nodes)
    labels = [rng.choice(alphabet) for _ in range(n)]
    children: list[list[int]] = [[] for _ in range(n)]
    for i in range(1, n):
        children[rng.randrange(i)].append(i)

    def nest(i: int):
        return (labels[i], [nest(c) for c in children[i]])

    return from_nested(nest(0), source_id=f"random-{n}")


def all_trees(max_nodes: int, alphabet: str = "abc") -> list[DomTree]:
    """Every ordered labeled tree with up to ``max_nodes`` nodes."""
    shapes_by_size: dict[int, list] = {1: [()]}

    def shapes(n: int) -> list:
        # a shape is a tuple of child shapes; the root takes one node
        if n in shapes_by_size:
            return shapes_by_size[n]
        result = []
        for child_sizes in _compositions(n - 1):
            child_options = [shapes(size) for size in child_sizes]
            for combo in _product(child_options):
                result.append(tuple(combo))
        shapes_by_size[n] = result
        return result

    def labelings(shape, alphabet) -> list:
        child_labelings = [labelings(c, alphabet) for c in shape]
        result = []
        for label in alphabet:
            for combo in _product(child_labelings):
                result.append((label, list(combo)))
        return result

    trees = []
    for n in range(1, max_nodes + 1):
        for shape in shapes(n):
            for nested in labelings(shape, alphabet):
                trees.append(from_nested(nested, source_id=f"enum-{len(trees)}"))
    return trees


def _compositions(total: int):
    """Ordered compositions of ``total`` into positive parts (including
    the empty composition when total == 0)."""
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in _compositions(total - first):
            yield (first,) + rest


def _product(lists) -> list:
    result = [()]
    for options in lists:
        result = [combo + (item,) for combo in result for item in options]
    return result
