"""Adapter stub for external annotated page-pair datasets.

The evaluation pipeline consumes the manifest CSV format defined in
:mod:`domkernel.evaluate` (``pair_id,file_a,file_b,label``).  Published
page-pair datasets ship in their own directory layouts, which this
artifact deliberately does not guess at; to run a full-scale comparison,
complete :func:`build_manifest` against the actual structure of the
downloaded data.

A finished adapter must:

1. locate, for every annotated pair, the two saved HTML files and the
   human label, mapping the dataset's label vocabulary onto
   ``clone`` / ``near_duplicate`` / ``distinct``;
2. write one manifest CSV per split (for example ``ds.csv`` for
   training, ``ss.csv`` and ``ts.csv`` for testing) with ``file_a`` /
   ``file_b`` relative to the manifest's own directory;
3. keep pair ids unique within each manifest.

The resulting manifests plug directly into ``domkernel extract``,
``domkernel train``, and ``domkernel evaluate``.
"""

from __future__ import annotations

from pathlib import Path

__all__ = ["build_manifest"]


def build_manifest(dataset_root: Path, out_csv: Path, split: str) -> None:
    """Translate one split of a downloaded dataset into a manifest CSV.

    Not implemented: the directory layout and annotation format of the
    external dataset must be inspected first; see the module docstring
    for the contract a completed implementation has to satisfy.
    """
    raise NotImplementedError(
        "complete dataset_adapter.build_manifest against the layout of the "
        "downloaded dataset; see the module docstring for the manifest contract"
    )
