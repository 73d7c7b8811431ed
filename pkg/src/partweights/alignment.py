"""Matching-error matrices and dynamic-programming alignment of two
sequences' pose transitions."""
from dataclasses import dataclass

import numpy as np

from .body import BodyModel
from .errors import IndexMismatch
from .geometry import (DEFAULT_GEOMETRY, GeometryConfig, TransitionBank, pair_errors,
                       pairwise_errors, transition_bank)
from .sequence import JointSequence

SENTINEL_COST = 1e6

# backtrack preference: diagonal, then target-only, then reference-only
_STEPS = ((1, 1), (1, 0), (0, 1))


@dataclass(frozen=True)
class Alignment:
    pairs: tuple  # ((target index, reference index), ...)
    total_cost: float

    def __post_init__(self):
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs or pairs[0] != (0, 0):
            raise ValueError("alignment must start at (0, 0)")
        for (a0, b0), (a1, b1) in zip(pairs, pairs[1:]):
            if (a1 - a0, b1 - b0) not in _STEPS:
                raise ValueError(f"illegal alignment step {(a0, b0)} -> {(a1, b1)}")

    def __len__(self):
        return len(self.pairs)

    @property
    def shape(self):
        return (self.pairs[-1][0] + 1, self.pairs[-1][1] + 1)

    @property
    def target_indices(self) -> np.ndarray:
        return np.array([p[0] for p in self.pairs], dtype=int)

    @property
    def reference_indices(self) -> np.ndarray:
        return np.array([p[1] for p in self.pairs], dtype=int)

    def is_diagonal(self) -> bool:
        return all(a == b for a, b in self.pairs)


@dataclass(frozen=True)
class ErrorScoreMatrix:
    """Triplet-by-aligned-pair error scores; column j belongs to ``pairs[j]``."""

    values: np.ndarray  # (T, L), NaN where masked
    mask: np.ndarray  # (T, L) True = excluded
    pairs: tuple = ()

    @property
    def n_pairs(self) -> int:
        return self.values.shape[1]

    @property
    def n_triplets(self) -> int:
        return self.values.shape[0]

    def column_sums(self) -> np.ndarray:
        return np.where(self.mask, 0.0, self.values).sum(axis=0)


@dataclass(frozen=True)
class Comparison:
    """All-pairs comparison of a target against a reference."""

    errors: np.ndarray  # (m, n, T)
    mask: np.ndarray  # (m, n, T)
    cost: np.ndarray  # (m, n)
    sentinel: np.ndarray  # (m, n) bool, cells that fell back to the sentinel


def compare(target, reference, model: BodyModel = None, stride: int = 1,
            config: GeometryConfig = DEFAULT_GEOMETRY, sentinel: float = SENTINEL_COST) -> Comparison:
    """All-pairs errors and costs.  ``target``/``reference`` may be
    JointSequences or precomputed TransitionBanks."""
    ba = _bank(target, model, stride, config)
    bb = _bank(reference, model, stride, config)
    values, mask = pairwise_errors(ba, bb, config)
    cost = np.where(mask, 0.0, values).sum(axis=-1)
    n_valid = (~mask).sum(axis=-1)
    bad = n_valid < config.min_valid_fraction * mask.shape[-1]
    cost = np.where(bad, sentinel, cost)
    return Comparison(values, mask, cost, bad)


def _bank(x, model, stride, config) -> TransitionBank:
    if isinstance(x, TransitionBank):
        return x
    model = model or x.body_model
    if tuple(x.joint_labels) != model.joint_labels:
        raise ValueError("sequence joints do not match the body model")
    return transition_bank(x, model, stride, config)


def cost_matrix(target: JointSequence, reference: JointSequence, model: BodyModel = None, stride: int = 1,
                config: GeometryConfig = DEFAULT_GEOMETRY, sentinel: float = SENTINEL_COST) -> np.ndarray:
    """Matching-error matrix: entry (j, j') is the all-triplet score between
    target transition j and reference transition j'.  Cells with too few
    usable triplets carry ``sentinel``."""
    return compare(target, reference, model, stride, config, sentinel).cost


def align(cost) -> Alignment:
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or 0 in cost.shape:
        raise ValueError("cost must be a non-empty 2D matrix")
    m, n = cost.shape
    acc = np.full((m, n), np.inf)
    for i in range(m):
        for j in range(n):
            if i == 0 and j == 0:
                acc[i, j] = cost[0, 0]
                continue
            best = np.inf
            if i > 0 and j > 0:
                best = acc[i - 1, j - 1]
            if i > 0:
                best = min(best, acc[i - 1, j])
            if j > 0:
                best = min(best, acc[i, j - 1])
            acc[i, j] = cost[i, j] + best

    i, j = m - 1, n - 1
    path = [(i, j)]
    while (i, j) != (0, 0):
        options = []
        for di, dj in _STEPS:
            pi, pj = i - di, j - dj
            if pi >= 0 and pj >= 0:
                options.append((acc[pi, pj], pi, pj))
        lowest = min(o[0] for o in options)
        _, i, j = next(o for o in options if o[0] == lowest)
        path.append((i, j))
    path.reverse()
    total = 0.0
    for a, b in path:
        total += cost[a, b]
    return Alignment(tuple(path), float(total))


def error_score_matrix(target: JointSequence, reference: JointSequence, alignment: Alignment,
                       model: BodyModel = None, stride: int = 1,
                       config: GeometryConfig = DEFAULT_GEOMETRY) -> ErrorScoreMatrix:
    ba = _bank(target, model, stride, config)
    bb = _bank(reference, model, stride, config)
    m, n = len(ba), len(bb)
    ia, ib = alignment.target_indices, alignment.reference_indices
    if ia.max() >= m or ib.max() >= n:
        raise IndexMismatch(f"alignment spans {alignment.shape} but sequences have {(m, n)} transitions")
    values, mask = pair_errors(ba, bb, ia, ib, config)
    return ErrorScoreMatrix(values.T.copy(), mask.T.copy(), alignment.pairs)


def esm_from_comparison(comp: Comparison, alignment: Alignment) -> ErrorScoreMatrix:
    ia, ib = alignment.target_indices, alignment.reference_indices
    return ErrorScoreMatrix(comp.errors[ia, ib].T.copy(), comp.mask[ia, ib].T.copy(), alignment.pairs)


def align_sequences(target: JointSequence, reference: JointSequence, model: BodyModel = None, stride: int = 1,
                    config: GeometryConfig = DEFAULT_GEOMETRY, sentinel: float = SENTINEL_COST):
    """Compare, align and extract the error-score matrix in one pass.
    Accepts sequences or TransitionBanks."""
    comp = compare(target, reference, model, stride, config, sentinel)
    alignment = align(comp.cost)
    return alignment, esm_from_comparison(comp, alignment)


@dataclass(frozen=True)
class TripletSignificance:
    same_mean: np.ndarray
    same_var: np.ndarray
    cross_mean: np.ndarray
    cross_var: np.ndarray
    index: np.ndarray

    def ranking(self) -> np.ndarray:
        """Triplet ordinals, most significant first (stable)."""
        return np.argsort(-self.index, kind="stable")


def _row_stats(matrices):
    vals = np.concatenate([m.values for m in matrices], axis=1)
    mask = np.concatenate([m.mask for m in matrices], axis=1)
    data = np.ma.masked_array(np.where(mask, 0.0, vals), mask=mask)
    mean = data.mean(axis=1).filled(np.nan)
    var = data.var(axis=1).filled(np.nan)
    return mean, var


def triplet_significance_report(same_action, cross_action) -> TripletSignificance:
    """Per-triplet separation between same-action and cross-action errors.

    index = (cross mean - same mean) / sqrt((same var + cross var) / 2).
    A zero pooled spread gives 0 for equal means and +/-inf otherwise.
    """
    if not same_action or not cross_action:
        raise ValueError("need at least one matrix in each group")
    sm, sv = _row_stats(same_action)
    cm, cv = _row_stats(cross_action)
    diff = cm - sm
    pooled = np.sqrt((sv + cv) / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        index = np.where(pooled > 0, diff / np.where(pooled > 0, pooled, 1.0),
                         np.where(diff == 0, 0.0, np.sign(diff) * np.inf))
    return TripletSignificance(sm, sv, cm, cv, index)
