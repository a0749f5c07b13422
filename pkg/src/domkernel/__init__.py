"""Tree-kernel similarity and near-duplicate classification for web pages.

Pipeline: HTML files are parsed into element-only DOM trees, transformed
under three representation strategies, compared with three tree kernels
(subtree, subset tree, partial tree) to form a nine-component similarity
vector per page pair, and classified as clone, near-duplicate, or
distinct by a linear multiclass SVM.  DOM-based baseline measures
(Levenshtein, simhash, tree edit distance) and a macro-F1 evaluation
harness round out the toolkit; the ``domkernel`` command drives batch
workflows.
"""

from .baselines import (
    BaselineKind,
    baseline_similarity,
    levenshtein_similarity,
    simhash_similarity,
    ted_similarity,
    tree_edit_distance,
)
from .classify import (
    CLASS_ORDER,
    ClassLabel,
    Hyperparams,
    LabeledPair,
    TrainedModel,
    load_model,
    parse_label,
    predict,
    save_model,
    train,
)
from .dom import DomNode, DomTree, from_bracket, from_nested, serialize_preorder
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
    EvalReport,
    PairManifest,
    evaluate,
    extract_pairs,
    load_manifest,
    macro_f1,
    per_class_metrics,
    report_to_json,
)
from .features import SimilarityVector, component_names, similarity_vector
from .ingest import parse_file, parse_html
from .kernels import (
    DEFAULT_PAIR_BUDGET,
    KERNEL_ORDER,
    KernelKind,
    KernelParams,
    KernelSession,
    Production,
    candidate_pairs,
    normalized_kernel,
    production_of,
    raw_kernel,
)
from .represent import ReprStrategy, apply_strategy, apply_strategy_ex, strategy_order

__version__ = "0.1.0"

__all__ = [
    "BaselineKind",
    "CLASS_ORDER",
    "ClassLabel",
    "DEFAULT_PAIR_BUDGET",
    "DegenerateData",
    "DepthLimitExceeded",
    "DomKernelError",
    "DomNode",
    "DomTree",
    "EmptyDocument",
    "EvalReport",
    "FormatError",
    "Hyperparams",
    "KERNEL_ORDER",
    "KernelKind",
    "KernelParams",
    "KernelSession",
    "LabeledPair",
    "ManifestError",
    "NodeBudgetExceeded",
    "PairManifest",
    "Production",
    "ReprStrategy",
    "SimilarityVector",
    "TrainedModel",
    "apply_strategy",
    "apply_strategy_ex",
    "baseline_similarity",
    "candidate_pairs",
    "component_names",
    "evaluate",
    "extract_pairs",
    "from_bracket",
    "from_nested",
    "levenshtein_similarity",
    "load_manifest",
    "load_model",
    "macro_f1",
    "normalized_kernel",
    "parse_file",
    "parse_html",
    "parse_label",
    "per_class_metrics",
    "predict",
    "production_of",
    "raw_kernel",
    "report_to_json",
    "save_model",
    "serialize_preorder",
    "similarity_vector",
    "simhash_similarity",
    "strategy_order",
    "ted_similarity",
    "train",
    "tree_edit_distance",
]
