"""Ordered labeled DOM trees.

A ``DomTree`` is the universal input to the kernels and baselines: an
ordered rooted tree whose nodes carry lowercase element tag names and
dense preorder ids.  Trees are immutable once built; they can be shared
freely across workers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

__all__ = [
    "DomNode",
    "DomTree",
    "iter_preorder",
    "serialize_preorder",
    "from_nested",
    "from_bracket",
    "tree_depth",
    "validate_tree",
]

_LABEL_RE = re.compile(r"^\S+$")


@dataclass(frozen=True)
class DomNode:
    """One element node: a label, ordered children, and its preorder id."""

    label: str
    children: tuple["DomNode", ...]
    node_id: int


@dataclass(frozen=True)
class DomTree:
    root: DomNode
    node_count: int
    source_id: str


def iter_preorder(root: DomNode) -> Iterator[DomNode]:
    """Yield nodes in document order (parent before children)."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def serialize_preorder(tree: DomTree) -> list[str]:
    """Node labels in preorder; the input for the string-based baselines."""
    return [node.label for node in iter_preorder(tree.root)]


def tree_depth(tree: DomTree) -> int:
    """Number of nodes on the longest root-to-leaf path."""
    depth = 0
    stack = [(tree.root, 1)]
    while stack:
        node, d = stack.pop()
        if d > depth:
            depth = d
        for child in node.children:
            stack.append((child, d + 1))
    return depth


def from_nested(nested: tuple[str, list], source_id: str = "nested") -> DomTree:
    """Build a DomTree from ``(label, [children...])`` structures.

    Preorder node ids are assigned during construction.  Used by tests and
    by the parser's freeze step.
    """
    counter = 0

    def build(spec: tuple[str, list]) -> DomNode:
        nonlocal counter
        label, child_specs = spec
        if not _LABEL_RE.match(label):
            raise ValueError(f"invalid node label: {label!r}")
        node_id = counter
        counter += 1
        children = tuple(build(c) for c in child_specs)
        return DomNode(label=label, children=children, node_id=node_id)

    root = build(nested)
    return DomTree(root=root, node_count=counter, source_id=source_id)


def from_bracket(text: str, source_id: str = "literal") -> DomTree:
    """Parse the compact ``a(b(d),c)`` notation into a DomTree.

    Convenient for constructing small trees in tests and on the command
    line; labels may be any run of characters other than ``(``, ``)``,
    ``,`` and whitespace.
    """
    pos = 0

    def parse_node() -> tuple[str, list]:
        nonlocal pos
        match = re.match(r"[^(),\s]+", text[pos:])
        if not match:
            raise ValueError(f"expected label at position {pos} in {text!r}")
        label = match.group(0)
        pos += len(label)
        children: list[tuple[str, list]] = []
        if pos < len(text) and text[pos] == "(":
            pos += 1
            while True:
                children.append(parse_node())
                if pos >= len(text):
                    raise ValueError(f"unbalanced parentheses in {text!r}")
                if text[pos] == ",":
                    pos += 1
                    continue
                if text[pos] == ")":
                    pos += 1
                    break
                raise ValueError(f"unexpected character at position {pos} in {text!r}")
        return (label, children)

    spec = parse_node()
    if pos != len(text):
        raise ValueError(f"trailing characters at position {pos} in {text!r}")
    return from_nested(spec, source_id=source_id)


def validate_tree(tree: DomTree) -> None:
    """Check structural invariants; raises ValueError on violation.

    Verifies dense preorder ids, label well-formedness, node_count
    consistency, and single-parent reachability.
    """
    seen: set[int] = set()
    expected = 0
    for node in iter_preorder(tree.root):
        if not _LABEL_RE.match(node.label):
            raise ValueError(f"node {node.node_id} has invalid label {node.label!r}")
        if node.node_id != expected:
            raise ValueError(
                f"node ids not dense preorder: expected {expected}, got {node.node_id}"
            )
        if id(node) in seen:
            raise ValueError("node reachable via two parents")
        seen.add(id(node))
        expected += 1
    if expected != tree.node_count:
        raise ValueError(
            f"node_count {tree.node_count} does not match reachable nodes {expected}"
        )
