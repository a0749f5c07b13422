"""DOM representation strategies applied before kernel computation.

Three strategies, in canonical order: keep the tree as-is, restrict to
the subtree rooted at the first ``body`` element, or additionally drop
every ``script`` subtree.  The canonical order also fixes the layout of
the similarity vector.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .dom import DomNode, DomTree

__all__ = ["ReprStrategy", "StrategyDiagnostics", "apply_strategy", "apply_strategy_ex"]


class ReprStrategy(enum.Enum):
    AS_IS = "as_is"
    ONLY_BODY = "only_body"
    ONLY_BODY_NO_SCRIPTS = "only_body_no_scripts"

    @property
    def index(self) -> int:
        return _ORDER.index(self)


_ORDER = (
    ReprStrategy.AS_IS,
    ReprStrategy.ONLY_BODY,
    ReprStrategy.ONLY_BODY_NO_SCRIPTS,
)


def strategy_order() -> tuple[ReprStrategy, ...]:
    """The canonical strategy order used for feature-vector layout."""
    return _ORDER


@dataclass(frozen=True)
class StrategyDiagnostics:
    """Fail-soft signals from a strategy application.

    ``body_fallback`` is set when no ``body`` element exists (only
    possible for programmatically built trees; the HTML parser always
    synthesizes one) and the input was returned unchanged.
    """

    body_fallback: bool = False
    scripts_removed: int = 0


def apply_strategy(tree: DomTree, strategy: ReprStrategy) -> DomTree:
    return apply_strategy_ex(tree, strategy)[0]


def apply_strategy_ex(tree: DomTree, strategy: ReprStrategy) -> tuple[DomTree, StrategyDiagnostics]:
    """Apply a representation strategy, returning the transformed tree and
    diagnostics.  Node ids of the result are re-densified in preorder."""
    if strategy is ReprStrategy.AS_IS:
        return tree, StrategyDiagnostics()

    body = _first_body(tree.root)
    if body is None:
        return tree, StrategyDiagnostics(body_fallback=True)
    if strategy is ReprStrategy.ONLY_BODY:
        rebuilt, _ = _rebuild(body, tree.source_id, drop_scripts=False)
        return rebuilt, StrategyDiagnostics()

    rebuilt, removed = _rebuild(body, tree.source_id, drop_scripts=True)
    return rebuilt, StrategyDiagnostics(scripts_removed=removed)


def _first_body(root: DomNode) -> DomNode | None:
    stack = [root]
    while stack:
        node = stack.pop()
        if node.label == "body":
            return node
        stack.extend(reversed(node.children))
    return None


def _rebuild(root: DomNode, source_id: str, drop_scripts: bool) -> tuple[DomTree, int]:
    """Copy a subtree into a fresh DomTree with dense preorder ids.

    The root itself is always kept, even under script removal; only
    descendant ``script`` subtrees are pruned.  Returns the rebuilt tree
    and the number of pruned subtrees.  Iterative two-pass copy: collect
    kept nodes in preorder (indexed by their new ids), then build
    immutable nodes bottom-up.
    """
    removed = 0
    order: list[DomNode] = []
    kept_children: list[list[int]] = []
    stack: list[tuple[DomNode, int]] = [(root, -1)]  # (node, new parent id)
    while stack:
        node, parent = stack.pop()
        new_id = len(order)
        order.append(node)
        kept_children.append([])
        if parent >= 0:
            kept_children[parent].append(new_id)
        if drop_scripts:
            kept = [c for c in node.children if c.label != "script"]
            removed += len(node.children) - len(kept)
        else:
            kept = node.children
        for child in reversed(kept):
            stack.append((child, new_id))

    built: list[DomNode | None] = [None] * len(order)
    for new_id in range(len(order) - 1, -1, -1):
        node = order[new_id]
        built[new_id] = DomNode(
            label=node.label,
            children=tuple(built[c] for c in kept_children[new_id]),
            node_id=new_id,
        )
    return DomTree(root=built[0], node_count=len(order), source_id=source_id), removed
