"""Nine-component similarity vectors for page pairs.

One component per (strategy, kernel) combination, strategy-major and
kernel-minor: index = 3 * strategy_index + kernel_index with strategies
ordered (as_is, only_body, only_body_no_scripts) and kernels (st, sst,
ptk).  Each component is the cosine-normalized kernel of the two
strategy-transformed trees; this module adds no other transformation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterable

from .dom import DomTree
from .errors import FormatError, NodeBudgetExceeded
from .kernels import (
    DEFAULT_PAIR_BUDGET,
    KERNEL_ORDER,
    KernelParams,
    KernelSession,
    canonical_tree_key,
)
from .represent import apply_strategy, strategy_order

__all__ = [
    "SimilarityVector",
    "component_names",
    "similarity_vector",
    "write_feature_csv",
    "read_feature_csv",
    "FEATURE_CSV_HEADER",
]

N_COMPONENTS = 9

FEATURE_CSV_HEADER = ["pair_id", "label"] + [f"f{i}" for i in range(N_COMPONENTS)]


def component_names() -> list[str]:
    """Strategy/kernel name of each vector component, in order."""
    return [
        f"{strategy.value}/{kind.value}"
        for strategy in strategy_order()
        for kind in KERNEL_ORDER
    ]


@dataclass(frozen=True)
class SimilarityVector:
    """The nine-component pair descriptor.

    ``values`` holds one normalized kernel score per component; entries
    are ``None`` only when the vector was extracted in lenient mode and
    that component blew the node budget (such vectors are incomplete and
    excluded from training).
    """

    pair_id: str
    values: tuple

    def __post_init__(self) -> None:
        if len(self.values) != N_COMPONENTS:
            raise ValueError(f"expected {N_COMPONENTS} components, got {len(self.values)}")

    @property
    def is_complete(self) -> bool:
        return all(v is not None for v in self.values)

    @property
    def missing_components(self) -> tuple[str, ...]:
        names = component_names()
        return tuple(names[i] for i, v in enumerate(self.values) if v is None)


def similarity_vector(
    page_a: DomTree,
    page_b: DomTree,
    params: KernelParams,
    *,
    pair_id: str | None = None,
    budget: int = DEFAULT_PAIR_BUDGET,
    lenient: bool = False,
) -> SimilarityVector:
    """Compute all nine normalized kernel scores for a page pair.

    Symmetric in the two pages and deterministic.  A component whose
    node-pair product exceeds ``budget`` raises
    :class:`NodeBudgetExceeded` tagged with the failing component, or is
    recorded as missing when ``lenient`` is set.
    """
    if pair_id is None:
        pair_id = f"{page_a.source_id}|{page_b.source_id}"
    # Canonical page order keeps every float operation identical under
    # argument swap, making the vector bit-exactly symmetric.
    if canonical_tree_key(page_b) < canonical_tree_key(page_a):
        page_a, page_b = page_b, page_a

    session = KernelSession(params, budget=budget)
    handles: list[tuple[int, int]] = []
    for strategy in strategy_order():
        ha = session.add_tree(apply_strategy(page_a, strategy))
        hb = session.add_tree(apply_strategy(page_b, strategy))
        handles.append((ha, hb))

    values: list[float | None] = []
    for strategy, (ha, hb) in zip(strategy_order(), handles):
        for kind in KERNEL_ORDER:
            try:
                values.append(session.normalized(kind, ha, hb))
            except NodeBudgetExceeded as exc:
                if not lenient:
                    raise NodeBudgetExceeded(
                        exc.n1, exc.n2, exc.budget,
                        component=f"{strategy.value}/{kind.value}",
                    ) from exc
                values.append(None)
    return SimilarityVector(pair_id=pair_id, values=tuple(values))


# ---------------------------------------------------------------------------
# Feature CSV: pair_id,label,f0,...,f8 with 17-significant-digit floats.
# The label column is one of clone|near_duplicate|distinct, or empty for
# unlabeled pairs.


def _format_value(v: float) -> str:
    return f"{v:.17g}"


def write_feature_csv(rows: Iterable[tuple[str, str, tuple]], out: IO[str]) -> int:
    """Write complete feature rows as (pair_id, label_text, values).

    Returns the number of rows written; refuses incomplete vectors."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(FEATURE_CSV_HEADER)
    count = 0
    for pair_id, label_text, values in rows:
        if any(v is None for v in values):
            raise FormatError(f"pair {pair_id!r}: incomplete vector cannot be serialized")
        writer.writerow([pair_id, label_text] + [_format_value(v) for v in values])
        count += 1
    return count


def read_feature_csv(handle: IO[str]) -> list[tuple[str, str, SimilarityVector]]:
    """Read back (pair_id, label_text, vector) rows; label_text may be
    empty for unlabeled pairs."""
    reader = csv.reader(handle)
    header = next(reader, None)
    if header != FEATURE_CSV_HEADER:
        raise FormatError(
            f"bad feature CSV header: expected {','.join(FEATURE_CSV_HEADER)}, "
            f"got {','.join(header) if header else '<empty file>'}"
        )
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(FEATURE_CSV_HEADER):
            raise FormatError(f"line {lineno}: expected {len(FEATURE_CSV_HEADER)} fields, got {len(row)}")
        pair_id, label_text = row[0], row[1]
        try:
            values = tuple(float(v) for v in row[2:])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        rows.append((pair_id, label_text, SimilarityVector(pair_id=pair_id, values=values)))
    return rows
