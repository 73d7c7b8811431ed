"""Weighted nearest-reference classification and confusion matrices."""
import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .alignment import align_sequences
from .body import BodyModel
from .errors import PartWeightsError, UnknownLabel
from .geometry import DEFAULT_GEOMETRY, GeometryConfig, transition_bank
from .weighting import WeightVector, coefficients_from_errors

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatabaseEntry:
    label: str
    reference: object  # JointSequence
    weights: WeightVector
    tau: float


@dataclass(frozen=True)
class ReferenceDatabase:
    entries: tuple

    def __post_init__(self):
        entries = tuple(self.entries)
        labels = [e.label for e in entries]
        if len(set(labels)) != len(labels):
            raise ValueError("one entry per action label")
        object.__setattr__(self, "entries", entries)

    def bank(self, label, model=None, stride=1, config=DEFAULT_GEOMETRY):
        """Cached transition bank of one reference."""
        key = (label, stride, config)
        cache = self.__dict__.setdefault("_banks", {})
        if key not in cache:
            entry = self.entries[self.labels.index(label)]
            cache[key] = transition_bank(entry.reference, model, stride, config)
        return cache[key]

    @property
    def labels(self) -> list:
        return [e.label for e in self.entries]

    def uniform(self):
        """Same references and tau, uniform point weights."""
        return ReferenceDatabase(tuple(
            DatabaseEntry(e.label, e.reference, WeightVector.uniform(e.weights.n), e.tau) for e in self.entries))


def classify(target, db: ReferenceDatabase, model: BodyModel = None, stride: int = 1,
             config: GeometryConfig = DEFAULT_GEOMETRY):
    """Best-matching action and the per-action scores.

    Scores are the sequence similarity divided by the number of aligned
    pairs N, which leaves tau minus the summed weighted per-pair errors.

    Ties go to the label listed first in the database.
    """
    if not db.entries:
        raise ValueError("empty reference database")
    scores = {}
    target = transition_bank(target, model, stride, config)
    for entry in db.entries:
        try:
            _, esm = align_sequences(target, db.bank(entry.label, model, stride, config), model, stride, config)
            coeffs = coefficients_from_errors(esm, entry.tau, entry.weights.n)
            scores[entry.label] = coeffs.evaluate(entry.weights) / coeffs.N
        except PartWeightsError as exc:
            warnings.warn(f"skipping action {entry.label!r}: {exc}", RuntimeWarning, stacklevel=2)
    if not scores:
        raise PartWeightsError("no reference could be scored")
    best = None
    for label in db.labels:
        if label in scores and (best is None or scores[label] > scores[best]):
            best = label
    return best, scores


@dataclass(frozen=True)
class ConfusionMatrix:
    labels: tuple
    counts: np.ndarray  # rows: ground truth, columns: predicted

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        total = self.total
        return float(np.trace(self.counts)) / total if total else 0.0

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)


def confusion_from_predictions(labels, truths, predictions) -> ConfusionMatrix:
    labels = tuple(labels)
    counts = np.zeros((len(labels), len(labels)), dtype=int)
    for t, p in zip(truths, predictions):
        if t not in labels:
            raise UnknownLabel(f"ground-truth label {t!r} is not in the database")
        counts[labels.index(t), labels.index(p)] += 1
    return ConfusionMatrix(labels, counts)


@dataclass(frozen=True)
class Evaluation:
    confusion: ConfusionMatrix
    predictions: tuple  # (truth, predicted, scores) per test item

    @property
    def accuracy(self) -> float:
        return self.confusion.accuracy


def evaluate(test_set, db: ReferenceDatabase, model: BodyModel = None, stride: int = 1,
             config: GeometryConfig = DEFAULT_GEOMETRY) -> Evaluation:
    """Classify every labelled sequence; ``test_set`` yields sequences whose
    ``action`` field is the ground truth (or (label, sequence) pairs)."""
    items = [(s.action, s) if hasattr(s, "action") else tuple(s) for s in test_set]
    for truth, _ in items:
        if truth not in db.labels:
            raise UnknownLabel(f"ground-truth label {truth!r} is not in the database")
    preds = []
    for truth, seq in items:
        label, scores = classify(seq, db, model, stride, config)
        preds.append((truth, label, scores))
    conf = confusion_from_predictions(db.labels, [p[0] for p in preds], [p[1] for p in preds])
    return Evaluation(conf, tuple(preds))
