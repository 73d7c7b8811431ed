"""Point weights, triplet weights and the weighted sequence similarity.

Sequence-level scores treat a masked triplet by substituting the mean of the
unmasked errors of the same aligned pair.  That keeps the score affine in
the point weights (so it can be reduced to ``a0 - a . w``) and coincides
with weight renormalization whenever the weights are uniform.
"""
from dataclasses import dataclass

import numpy as np

from .alignment import ErrorScoreMatrix, error_score_matrix
from .body import BodyModel
from .errors import AllTripletsMasked

SUM_TOL = 1e-9


@dataclass(frozen=True)
class WeightVector:
    omega: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        if w.ndim != 1 or len(w) < 2:
            raise ValueError("omega must be a 1D vector with at least 2 entries")
        if np.any(w < -SUM_TOL) or np.any(w > 1 + SUM_TOL):
            raise ValueError("point weights must lie in [0, 1]")
        if abs(w.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"point weights must sum to 1 (got {w.sum()!r})")
        object.__setattr__(self, "omega", w)

    @classmethod
    def uniform(cls, n: int):
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def from_free(cls, free):
        """Build from the first n - 1 entries; the last is 1 - sum."""
        free = np.asarray(free, dtype=float)
        return cls(np.append(free, 1.0 - free.sum()))

    @property
    def free(self) -> np.ndarray:
        return self.omega[:-1].copy()

    @property
    def n(self) -> int:
        return len(self.omega)


@dataclass(frozen=True)
class TripletWeights:
    lam: np.ndarray


@dataclass(frozen=True)
class AffineScoreCoefficients:
    a0: float
    a: np.ndarray
    tau: float
    N: int

    def evaluate(self, omega) -> float:
        w = omega.free if isinstance(omega, WeightVector) else np.asarray(omega, dtype=float)
        return float(self.a0 - np.dot(self.a, w))


def _as_omega(omega) -> np.ndarray:
    return omega.omega if isinstance(omega, WeightVector) else np.asarray(omega, dtype=float)


def triplet_scale(n: int) -> float:
    """2 / ((n - 1)(n - 2)): each point belongs to C(n-1, 2) triplets."""
    return 2.0 / ((n - 1) * (n - 2))


def triplet_weights(omega, model: BodyModel = None) -> TripletWeights:
    w = _as_omega(omega)
    model = model or BodyModel(tuple(f"p{i}" for i in range(len(w))))
    if len(w) != model.n:
        raise ValueError("weight vector length does not match the body model")
    return TripletWeights(model.incidence @ w * triplet_scale(model.n))


def weighted_transition_error(errors, weights, mask=None) -> float:
    """Sum of lambda * E over unmasked triplets, renormalizing lambda when
    some triplets are masked.

    ``errors`` may be a TransitionErrorVector or a plain array (then ``mask``
    defaults to its NaN entries).
    """
    if hasattr(errors, "mask"):
        values, mask = errors.values, errors.mask
    else:
        values = np.asarray(errors, dtype=float)
        if mask is None:
            mask = ~np.isfinite(values)
    mask = np.asarray(mask, dtype=bool)
    lam = weights.lam if isinstance(weights, TripletWeights) else np.asarray(weights, dtype=float)
    if mask.all():
        raise AllTripletsMasked("every triplet is masked")
    keep = ~mask
    if not mask.any():
        return float(np.dot(lam, values))
    total = lam[keep].sum()
    if total == 0:
        return 0.0
    return float(np.dot(lam[keep], values[keep]) / total)


def filled_errors(esm: ErrorScoreMatrix) -> np.ndarray:
    """(T, L) errors with masked entries replaced by their column's mean."""
    vals = np.where(esm.mask, 0.0, esm.values)
    counts = (~esm.mask).sum(axis=0)
    if np.any(counts == 0):
        raise AllTripletsMasked("an aligned pair has every triplet masked")
    col_mean = vals.sum(axis=0) / counts
    return np.where(esm.mask, col_mean[None, :], vals)


def pair_weighted_errors(esm: ErrorScoreMatrix, omega, model: BodyModel = None) -> np.ndarray:
    """Weighted error of every aligned pair (length L)."""
    lam = triplet_weights(omega, model).lam
    return lam @ filled_errors(esm)


def similarity_from_errors(esm: ErrorScoreMatrix, omega, tau: float) -> float:
    """Proximate similarity of two aligned sequences, evaluated term by term:

        N*tau - 2N/((n-1)(n-2)) * sum_l sum_{i<j<k} (w_i + w_j + w_k) E_l(i,j,k)

    with N the number of aligned pairs.
    """
    w = _as_omega(omega)
    n = len(w)
    E = filled_errors(esm)
    N = esm.n_pairs
    tri = BodyModel(tuple(f"p{i}" for i in range(n))).triplet_array
    if len(tri) != esm.n_triplets:
        raise ValueError("error matrix rows do not match the weight vector's body model")
    point_sums = w[tri].sum(axis=1)
    total = 0.0
    for l in range(N):
        total += float(np.dot(point_sums, E[:, l]))
    return N * tau - 2.0 * N / ((n - 1) * (n - 2)) * total


def sequence_similarity(target, reference, alignment, omega, tau: float, model: BodyModel = None,
                        stride: int = 1) -> float:
    if tau <= 0:
        raise ValueError("tau must be positive")
    esm = error_score_matrix(target, reference, alignment, model, stride)
    return similarity_from_errors(esm, omega, tau)


def coefficients_from_errors(esm: ErrorScoreMatrix, tau: float, n: int) -> AffineScoreCoefficients:
    """Collect the similarity into a0 - sum_i a_i w_i over the free weights,
    after substituting w_n = 1 - sum_{i<n} w_i."""
    E = filled_errors(esm)
    N = esm.n_pairs
    model = BodyModel(tuple(f"p{i}" for i in range(n)))
    per_point = model.incidence.T @ E.sum(axis=1)  # (n,)
    scale = N * triplet_scale(n)
    a0 = N * tau - scale * per_point[-1]
    a = scale * (per_point[:-1] - per_point[-1])
    return AffineScoreCoefficients(float(a0), a, float(tau), int(N))


def affine_coefficients(target, reference, alignment, tau: float, model: BodyModel = None,
                        stride: int = 1) -> AffineScoreCoefficients:
    esm = error_score_matrix(target, reference, alignment, model, stride)
    model = model or target.body_model
    return coefficients_from_errors(esm, tau, model.n)
