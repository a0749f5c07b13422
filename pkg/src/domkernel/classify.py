"""Multiclass classification of page pairs from similarity vectors.

One-vs-rest linear SVMs trained by a deterministic full-batch
subgradient solver on the L2-regularized hinge loss: weights start at
zero, samples are visited in a fixed order, and no randomness enters
anywhere, so identical data and hyperparameters reproduce bit-identical
models.  Features are z-score standardized with training-set statistics
stored in the model; class weights default to inverse class frequency.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, FormatError
from .features import N_COMPONENTS, SimilarityVector

__all__ = [
    "ClassLabel",
    "CLASS_ORDER",
    "parse_label",
    "LabeledPair",
    "Hyperparams",
    "TrainedModel",
    "train",
    "predict",
    "save_model",
    "load_model",
    "MODEL_FORMAT_VERSION",
]

MODEL_FORMAT_VERSION = 1


class ClassLabel(enum.Enum):
    CLONE = "clone"
    NEAR_DUPLICATE = "near_duplicate"
    DISTINCT = "distinct"

    @property
    def index(self) -> int:
        return CLASS_ORDER.index(self)


# Fixed order; also the tie-break order for equal decision values.
CLASS_ORDER = (ClassLabel.CLONE, ClassLabel.NEAR_DUPLICATE, ClassLabel.DISTINCT)


def parse_label(text: str) -> ClassLabel:
    normalized = text.strip().lower()
    for label in CLASS_ORDER:
        if label.value == normalized:
            return label
    raise ValueError(f"unknown class label {text!r}")


@dataclass(frozen=True)
class LabeledPair:
    vector: SimilarityVector
    label: ClassLabel

    def __post_init__(self) -> None:
        if not self.vector.is_complete:
            raise ValueError(
                f"pair {self.vector.pair_id!r}: incomplete vector cannot be labeled training data"
            )


@dataclass(frozen=True)
class Hyperparams:
    c: float = 1.0
    epochs: int = 3000
    class_weights: dict | None = None  # label value -> weight; None = inverse frequency


@dataclass(frozen=True)
class TrainedModel:
    feature_means: tuple
    feature_stddevs: tuple
    weights: tuple  # 3 x 9, in CLASS_ORDER
    biases: tuple  # 3, in CLASS_ORDER
    hyperparams: Hyperparams
    zero_variance_features: tuple = ()
    format_version: int = MODEL_FORMAT_VERSION


def _resolve_class_weights(labels: list[ClassLabel], hp: Hyperparams) -> dict[ClassLabel, float]:
    if hp.class_weights is not None:
        return {parse_label(k): float(v) for k, v in hp.class_weights.items()}
    n = len(labels)
    counts = {label: 0 for label in CLASS_ORDER}
    for label in labels:
        counts[label] += 1
    present = sum(1 for c in counts.values() if c)
    return {
        label: (n / (present * count)) if count else 0.0
        for label, count in counts.items()
    }


def train(data: list[LabeledPair], hyperparams: Hyperparams | None = None) -> TrainedModel:
    """Fit the one-vs-rest model.

    Raises :class:`DegenerateData` when fewer than two labels are
    present or all vectors are identical.
    """
    hp = hyperparams or Hyperparams()
    if not data:
        raise DegenerateData("no training pairs")
    labels = [pair.label for pair in data]
    if len(set(labels)) < 2:
        raise DegenerateData("training data contains a single class label")

    x = np.array([pair.vector.values for pair in data], dtype=np.float64)
    if np.all(x == x[0]):
        raise DegenerateData("all training vectors are identical")

    means = x.mean(axis=0)
    stddevs = x.std(axis=0)
    zero_variance = tuple(int(i) for i in np.flatnonzero(stddevs == 0.0))
    stddevs = np.where(stddevs == 0.0, 1.0, stddevs)
    z = (x - means) / stddevs

    class_weights = _resolve_class_weights(labels, hp)
    sample_weights = np.array([class_weights[label] for label in labels], dtype=np.float64)

    n = len(data)
    lam_reg = 1.0 / (hp.c * n)
    weights = []
    biases = []
    for target in CLASS_ORDER:
        y = np.where(np.array([lab is target for lab in labels]), 1.0, -1.0)
        w, b = _fit_binary_hinge(z, y, sample_weights, lam_reg, hp.epochs)
        weights.append(tuple(float(v) for v in w))
        biases.append(float(b))

    return TrainedModel(
        feature_means=tuple(float(v) for v in means),
        feature_stddevs=tuple(float(v) for v in stddevs),
        weights=tuple(weights),
        biases=tuple(biases),
        hyperparams=hp,
        zero_variance_features=zero_variance,
    )


def _fit_binary_hinge(z, y, sample_weights, lam_reg, epochs):
    """Full-batch projected-subgradient descent on
    lam_reg/2 ||w||^2 + mean_i cw_i hinge_i, with the Pegasos step
    schedule and an unregularized bias.  Zero init, fixed order."""
    n, d = z.shape
    w = np.zeros(d)
    b = 0.0
    wy = sample_weights * y
    for t in range(epochs):
        eta = 1.0 / (lam_reg * (t + 2))
        margin = y * (z @ w + b)
        active = wy * (margin < 1.0)
        w = (1.0 - eta * lam_reg) * w + (eta / n) * (active @ z)
        b = b + (eta / n) * active.sum()
    return w, b


def _standardize(model: TrainedModel, vector: SimilarityVector) -> np.ndarray:
    x = np.asarray(vector.values, dtype=np.float64)
    return (x - np.asarray(model.feature_means)) / np.asarray(model.feature_stddevs)


def predict(model: TrainedModel, vector: SimilarityVector) -> tuple[ClassLabel, tuple]:
    """Return (label, per-class decision scores).

    Ties in the decision values resolve to the earlier class in the
    fixed order clone < near_duplicate < distinct."""
    if not vector.is_complete:
        raise ValueError(f"pair {vector.pair_id!r}: cannot predict from an incomplete vector")
    z = _standardize(model, vector)
    scores = np.asarray(model.weights) @ z + np.asarray(model.biases)
    best = int(np.argmax(scores))  # argmax takes the first maximum
    return CLASS_ORDER[best], tuple(float(s) for s in scores)


# ---------------------------------------------------------------------------
# Versioned JSON model files


def save_model(model: TrainedModel) -> bytes:
    """Serialize to a versioned JSON document; floats round-trip exactly."""
    doc = {
        "format_version": model.format_version,
        "feature_means": list(model.feature_means),
        "feature_stddevs": list(model.feature_stddevs),
        "weights": [list(row) for row in model.weights],
        "biases": list(model.biases),
        "hyperparams": {
            "c": model.hyperparams.c,
            "epochs": model.hyperparams.epochs,
            "class_weights": model.hyperparams.class_weights,
        },
        "zero_variance_features": list(model.zero_variance_features),
    }
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


_REQUIRED_FIELDS = (
    "format_version",
    "feature_means",
    "feature_stddevs",
    "weights",
    "biases",
    "hyperparams",
)


def load_model(data: bytes) -> TrainedModel:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable model file: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("model file is not a JSON object")
    for fieldname in _REQUIRED_FIELDS:
        if fieldname not in doc:
            raise FormatError(f"model file missing field {fieldname!r}")
    version = doc["format_version"]
    if version != MODEL_FORMAT_VERSION:
        raise FormatError(
            f"unsupported model format_version {version!r}; this build reads version {MODEL_FORMAT_VERSION}"
        )
    means = tuple(doc["feature_means"])
    stddevs = tuple(doc["feature_stddevs"])
    weights = tuple(tuple(row) for row in doc["weights"])
    biases = tuple(doc["biases"])
    if (
        len(means) != N_COMPONENTS
        or len(stddevs) != N_COMPONENTS
        or len(weights) != len(CLASS_ORDER)
        or any(len(row) != N_COMPONENTS for row in weights)
        or len(biases) != len(CLASS_ORDER)
    ):
        raise FormatError("model file has inconsistent array shapes")
    if any(s <= 0 for s in stddevs):
        raise FormatError("model file contains non-positive feature stddevs")
    hp_doc = doc["hyperparams"]
    hp = Hyperparams(
        c=float(hp_doc.get("c", 1.0)),
        epochs=int(hp_doc.get("epochs", Hyperparams.epochs)),
        class_weights=hp_doc.get("class_weights"),
    )
    return TrainedModel(
        feature_means=means,
        feature_stddevs=stddevs,
        weights=weights,
        biases=biases,
        hyperparams=hp,
        zero_variance_features=tuple(doc.get("zero_variance_features", ())),
        format_version=version,
    )
