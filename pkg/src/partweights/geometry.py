"""Triplet affinities, the eigenvalue-equality homology score and the
all-triplet transition similarity.

Two evaluation routes are provided.  ``transition_similarity`` follows the
construction literally: for every triplet it fits the two cross-view
affinities, forms ``H = H1 @ inv(H2)`` and scores the closest eigenvalue pair
from a general eigen-solver.  ``TransitionBank`` / ``pairwise_errors`` compute
the same numbers for whole sequences at once.  Writing each triangle as a
3x3 matrix of homogeneous columns, ``H1 = B1 A1^-1`` and ``H2 = B2 A2^-1``, so
``H`` is similar to ``(A1^-1 A2) (B1^-1 B2)^-1``: the product of one motion
matrix per sequence.  Both motion matrices have ``1^T M = 1^T``, hence one
eigenvalue is exactly 1 and the other two are the roots of a quadratic in the
trace and determinant.
"""
from dataclasses import dataclass

import numpy as np

from .body import BodyModel
from .errors import (DegenerateTriplet, NumericalDegeneracy, SingularHomography,
                     TooFewValidTriplets)

EPS_AREA = 1e-8
EPS_DET = 1e-12
EPS_SUM = 1e-12
MIN_VALID_FRACTION = 0.5

_PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class GeometryConfig:
    eps_area: float = EPS_AREA
    eps_det: float = EPS_DET
    eps_sum: float = EPS_SUM
    min_valid_fraction: float = MIN_VALID_FRACTION


DEFAULT_GEOMETRY = GeometryConfig()


@dataclass(frozen=True)
class EigenPairScore:
    a: complex
    b: complex
    score: float


@dataclass(frozen=True)
class TransitionErrorVector:
    """Per-triplet errors for one matched transition pair.

    ``mask`` is True where the triplet was excluded; excluded entries of
    ``values`` are NaN.
    """

    values: np.ndarray
    mask: np.ndarray

    @property
    def score(self) -> float:
        return float(np.sum(self.values[~self.mask]))

    @property
    def n_excluded(self) -> int:
        return int(self.mask.sum())


# ---------------------------------------------------------------------------
# single-triplet route


def normalizing_transform(points) -> np.ndarray:
    """Similarity moving the centroid to the origin with RMS distance sqrt(2)."""
    pts = np.asarray(points, dtype=float)
    c = pts.mean(axis=0)
    rms = np.sqrt(np.mean(np.sum((pts - c) ** 2, axis=1)))
    if rms == 0 or not np.isfinite(rms):
        raise DegenerateTriplet("coincident points")
    s = np.sqrt(2.0) / rms
    return np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])


def _homogeneous_columns(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    return np.vstack([pts.T, np.ones(len(pts))])


def triangle_area(points) -> float:
    p = np.asarray(points, dtype=float)
    u, v = p[1] - p[0], p[2] - p[0]
    return 0.5 * abs(u[0] * v[1] - u[1] * v[0])


def _conditioned(points, eps_area):
    T = normalizing_transform(points)
    P = T @ _homogeneous_columns(points)
    if triangle_area(P[:2].T) < eps_area:
        raise DegenerateTriplet("collinear triplet")
    return T, P


def affinity_from_triplet(src, dst, eps_area: float = EPS_AREA) -> np.ndarray:
    """Unique affine map (3x3, last row 0 0 1) taking three src points to dst."""
    src = np.asarray(src, dtype=float).reshape(3, 2)
    dst = np.asarray(dst, dtype=float).reshape(3, 2)
    Ts, S = _conditioned(src, eps_area)
    Td, D = _conditioned(dst, eps_area)
    Hn = np.linalg.solve(S.T, D.T).T  # Hn @ S = D
    H = np.linalg.solve(Td, Hn @ Ts)
    H[2] = (0.0, 0.0, 1.0)
    return H


def select_eigen_pair(eigs, eps_sum: float = EPS_SUM):
    """Pick the eigenvalue pair minimizing |a - b| / |a + b|.

    Works on arrays of shape (..., 3).  Returns (a, b, score); score is
    inf where every pair sum is below ``eps_sum``.
    """
    eigs = np.asarray(eigs, dtype=complex)
    scores = []
    for p, q in _PAIRS:
        a, b = eigs[..., p], eigs[..., q]
        den = np.abs(a + b)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(den > eps_sum, np.abs(a - b) / np.where(den > 0, den, 1.0), np.inf)
        scores.append(s)
    scores = np.stack(scores, axis=-1)
    best = np.argmin(scores, axis=-1)
    first = np.take(np.array([p for p, _ in _PAIRS]), best)
    second = np.take(np.array([q for _, q in _PAIRS]), best)
    a = np.take_along_axis(eigs, first[..., None], axis=-1)[..., 0]
    b = np.take_along_axis(eigs, second[..., None], axis=-1)[..., 0]
    score = np.take_along_axis(scores, best[..., None], axis=-1)[..., 0]
    return a, b, score


def homology_score(h1, h2, eps_det: float = EPS_DET, eps_sum: float = EPS_SUM) -> EigenPairScore:
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    if abs(np.linalg.det(h2)) < eps_det:
        raise SingularHomography("h2 is not invertible")
    H = np.linalg.solve(h2.T, h1.T).T  # h1 @ inv(h2)
    a, b, score = select_eigen_pair(np.linalg.eigvals(H), eps_sum)
    if not np.isfinite(score):
        raise NumericalDegeneracy("all eigenvalue pair sums vanish")
    return EigenPairScore(complex(a), complex(b), float(score))


def _check_valid_count(values, mask, config):
    total = len(mask)
    valid = total - int(mask.sum())
    if valid < config.min_valid_fraction * total:
        raise TooFewValidTriplets(f"only {valid} of {total} triplets usable",
                                  TransitionErrorVector(values, mask))


def transition_similarity(posesA, posesB, model: BodyModel = None, config: GeometryConfig = DEFAULT_GEOMETRY):
    """Sum of per-triplet homology scores between two pose transitions.

    ``posesA`` and ``posesB`` are (first, second) Pose2D pairs.  Returns the
    score and the full TransitionErrorVector.
    """
    a1, a2 = posesA
    b1, b2 = posesB
    if model is None:
        model = BodyModel() if a1.n == 11 else BodyModel(tuple(f"p{i}" for i in range(a1.n)))
    tri = model.triplet_array
    values = np.full(len(tri), np.nan)
    mask = np.ones(len(tri), dtype=bool)
    ok_joint = a1.valid & a2.valid & b1.valid & b2.valid
    for t, idx in enumerate(tri):
        if not ok_joint[idx].all():
            continue
        try:
            h1 = affinity_from_triplet(a1.points[idx], b1.points[idx], config.eps_area)
            h2 = affinity_from_triplet(a2.points[idx], b2.points[idx], config.eps_area)
            res = homology_score(h1, h2, config.eps_det, config.eps_sum)
        except (DegenerateTriplet, SingularHomography, NumericalDegeneracy):
            continue
        values[t] = res.score
        mask[t] = False
    _check_valid_count(values, mask, config)
    vec = TransitionErrorVector(values, mask)
    return vec.score, vec


# ---------------------------------------------------------------------------
# batched route


@dataclass(frozen=True)
class TransitionBank:
    """Per-transition, per-triplet motion matrices of one image sequence.

    ``motion[l, t] = A1^-1 A2`` for transition l and triplet t, computed in
    the conditioned frame of A1 (the product is invariant to that choice).
    """

    motion: np.ndarray  # (L, T, 3, 3)
    inverse: np.ndarray  # (L, T, 3, 3)
    det: np.ndarray  # (L, T)
    mask: np.ndarray  # (L, T) True = excluded

    def __len__(self):
        return len(self.motion)


def _batch_conditioning(tri_pts):
    """tri_pts (..., 3, 2) -> normalizing transforms (..., 3, 3) and RMS-ok flags."""
    c = tri_pts.mean(axis=-2)
    rms = np.sqrt(np.mean(np.sum((tri_pts - c[..., None, :]) ** 2, axis=-1), axis=-1))
    ok = np.isfinite(rms) & (rms > 0)
    s = np.sqrt(2.0) / np.where(ok, rms, 1.0)
    return c, s, ok


def _normalized_triangles(tri_pts, c, s):
    """Homogeneous column matrices (..., 3, 3) after the conditioning transform."""
    p = (tri_pts - c[..., None, :]) * s[..., None, None]
    ones = np.ones(p.shape[:-1] + (1,))
    return np.swapaxes(np.concatenate([p, ones], axis=-1), -1, -2)


def _area_of_columns(P):
    u = P[..., :2, 1] - P[..., :2, 0]
    v = P[..., :2, 2] - P[..., :2, 0]
    return 0.5 * np.abs(u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0])


def transition_bank(seq, model: BodyModel = None, stride: int = 1,
                    config: GeometryConfig = DEFAULT_GEOMETRY) -> TransitionBank:
    if seq.dim != 2:
        raise ValueError("transition banks need image (2D) sequences")
    if stride < 1 or len(seq) - stride < 1:
        raise ValueError("sequence too short for the requested stride")
    model = model or seq.body_model
    tri = model.triplet_array
    pts = np.where(seq.valid[..., None], seq.points, 0.0)
    first = pts[:-stride][:, tri]  # (L, T, 3, 2)
    second = pts[stride:][:, tri]
    c, s, ok1 = _batch_conditioning(first)
    _, s2, ok2 = _batch_conditioning(second)
    A1 = _normalized_triangles(first, c, s)
    A2 = _normalized_triangles(second, c, s)
    # degeneracy is judged on each triangle's own conditioned frame
    area2 = _area_of_columns(A2) * (s2 / s) ** 2
    joint_ok = seq.valid[:-stride][:, tri].all(axis=-1) & seq.valid[stride:][:, tri].all(axis=-1)
    good = joint_ok & ok1 & ok2 & (_area_of_columns(A1) >= config.eps_area) & (area2 >= config.eps_area)
    eye = np.eye(3)
    A1 = np.where(good[..., None, None], A1, eye)
    A2 = np.where(good[..., None, None], A2, eye)
    motion = np.linalg.solve(A1, A2)
    inverse = np.linalg.solve(A2, A1)
    det = np.linalg.det(motion)
    return TransitionBank(motion, inverse, det, ~good)


def affine_eigenvalues(trace, det):
    """Eigenvalues (..., 3) of 3x3 matrices with a known unit eigenvalue."""
    s = np.asarray(trace, dtype=complex) - 1.0
    p = np.asarray(det, dtype=complex)
    r = np.sqrt(s * s - 4.0 * p)
    plus, minus = s + r, s - r
    big = np.where(np.abs(plus) >= np.abs(minus), plus, minus) / 2.0
    safe = np.where(big != 0, big, 1.0)
    small = np.where(big != 0, p / safe, 0.0)
    return np.stack([np.ones_like(big), big, small], axis=-1)


def pair_errors(bank_a: TransitionBank, bank_b: TransitionBank, idx_a, idx_b,
                config: GeometryConfig = DEFAULT_GEOMETRY):
    """Per-triplet errors for the transition pairs (idx_a[p], idx_b[p]).

    Returns values (P, T) with NaN where excluded and mask (P, T).
    """
    idx_a = np.asarray(idx_a, dtype=int)
    idx_b = np.asarray(idx_b, dtype=int)
    ma = bank_a.motion[idx_a]
    mb_inv = bank_b.inverse[idx_b]
    trace = np.einsum("ptab,ptba->pt", ma, mb_inv)
    det = bank_a.det[idx_a] / bank_b.det[idx_b]
    return _score(trace, det, bank_a.mask[idx_a] | bank_b.mask[idx_b], config)


def affine_pair_score(trace, det, eps_sum: float = EPS_SUM):
    """Closest-pair score for matrices with spectrum {1, mu1, mu2}.

    mu1 + mu2 = trace - 1 and mu1 * mu2 = det.  Real arithmetic only; inf
    where every pair sum is below ``eps_sum``.
    """
    s = np.asarray(trace, dtype=float) - 1.0
    p = np.asarray(det, dtype=float)
    disc = s * s - 4.0 * p
    real = disc >= 0
    root = np.sqrt(np.abs(disc))
    inf = np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        # real roots, the larger-magnitude one computed without cancellation
        big = 0.5 * (s + np.where(s >= 0, root, -root))
        small = np.where(big != 0, p / np.where(big != 0, big, 1.0), 0.0)

        def one_vs(mu):
            den = np.abs(1.0 + mu)
            return np.where(den > eps_sum, np.abs(1.0 - mu) / np.where(den > 0, den, 1.0), inf)

        den_mu = np.abs(s)
        between = np.where(den_mu > eps_sum, root / np.where(den_mu > 0, den_mu, 1.0), inf)
        real_best = np.minimum(np.minimum(one_vs(big), one_vs(small)), between)
        # complex pair (s +/- i*root)/2: both score equally against 1
        num = (1.0 - 0.5 * s) ** 2 + 0.25 * root ** 2
        den = (1.0 + 0.5 * s) ** 2 + 0.25 * root ** 2
        cplx_one = np.where(np.sqrt(den) > eps_sum, np.sqrt(num / np.where(den > 0, den, 1.0)), inf)
        cplx_best = np.minimum(cplx_one, between)
    return np.where(real, real_best, cplx_best)


def _score(trace, det, mask, config):
    score = affine_pair_score(trace, det, config.eps_sum)
    mask = mask | ~np.isfinite(score)
    values = np.where(mask, np.nan, score)
    return values, mask


def pairwise_errors(bank_a: TransitionBank, bank_b: TransitionBank,
                    config: GeometryConfig = DEFAULT_GEOMETRY):
    """All-pairs per-triplet errors: values and mask of shape (La, Lb, T)."""
    trace = np.einsum("itab,jtba->ijt", bank_a.motion, bank_b.inverse)
    det = bank_a.det[:, None, :] / bank_b.det[None, :, :]
    mask = bank_a.mask[:, None, :] | bank_b.mask[None, :, :]
    return _score(trace, det, mask, config)
