"""Per-action weight learning.

The objective for action j is

    f(w) = Q1 + alpha * Q2 - beta * Q3

where Q1 and Q2 are the mean and population variance of the reference's
similarity to its own group and Q3 is the mean similarity to every other
group.  Each similarity is affine in the free weights, so f is a quadratic
``w^T Q w + c^T w + c0`` assembled once from cached error matrices.
"""
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .alignment import align_sequences
from .body import BodyModel
from .errors import EmptyGroup, NoOtherGroups
from .geometry import DEFAULT_GEOMETRY, GeometryConfig, transition_bank
from .weighting import WeightVector, coefficients_from_errors, pair_weighted_errors

log = logging.getLogger(__name__)

DEFAULT_ALPHA = -0.1
DEFAULT_BETA = 1.0
DEFAULT_TAU_PERCENTILE = 90.0


@dataclass
class TrainingSet:
    """Reference per action, K training sequences per action and the cached
    error matrices of every (reference, sequence) alignment.

    ``errors[(ref_label, group_label)]`` lists one ErrorScoreMatrix per
    sequence of ``group_label``, in group order.
    """

    labels: list
    references: dict
    groups: dict
    errors: dict = field(default_factory=dict)
    n_points: int = 11

    @classmethod
    def build(cls, references: dict, groups: dict, model: BodyModel = None, stride: int = 1,
              config: GeometryConfig = DEFAULT_GEOMETRY):
        labels = list(references)
        if len(labels) < 2:
            raise ValueError("training needs at least two actions")
        for lab in labels:
            if len(groups.get(lab, ())) < 2:
                raise ValueError(f"action {lab!r} needs at least two training sequences")
        model = model or next(iter(references.values())).body_model
        ref_banks = {lab: transition_bank(references[lab], model, stride, config) for lab in labels}
        errors = {(r, g): [] for r in labels for g in labels}
        for group_label in labels:
            for seq in groups[group_label]:
                bank = transition_bank(seq, model, stride, config)
                for ref_label in labels:
                    esm = align_sequences(bank, ref_banks[ref_label], model, stride, config)[1]
                    errors[(ref_label, group_label)].append(esm)
        return cls(labels, dict(references), dict(groups), errors, model.n)

    def same(self, label) -> list:
        esms = self.errors.get((label, label), [])
        if not esms:
            raise EmptyGroup(f"no training sequences for action {label!r}")
        return esms

    def cross(self, label) -> list:
        others = [g for g in self.labels if g != label]
        if not others:
            raise NoOtherGroups(f"no actions other than {label!r}")
        out = []
        for g in others:
            out.extend(self.errors[(label, g)])
        if not out:
            raise NoOtherGroups(f"other actions have no sequences for {label!r}")
        return out


def _similarities(esms, omega, tau) -> np.ndarray:
    n = len(omega.omega) if isinstance(omega, WeightVector) else len(np.atleast_1d(omega))
    w = omega if isinstance(omega, WeightVector) else WeightVector(np.asarray(omega, dtype=float))
    return np.array([coefficients_from_errors(e, tau, n).evaluate(w) for e in esms])


def q1_mean_same(training: TrainingSet, label, omega, tau: float) -> float:
    return float(np.mean(_similarities(training.same(label), omega, tau)))


def q2_variance_same(training: TrainingSet, label, omega, tau: float) -> float:
    s = _similarities(training.same(label), omega, tau)
    K = len(s)
    return float(np.sum(s ** 2) / K - np.sum(s) ** 2 / K ** 2)


def q3_mean_cross(training: TrainingSet, label, omega, tau: float) -> float:
    return float(np.mean(_similarities(training.cross(label), omega, tau)))


def estimate_tau(esms, n: int, percentile: float = DEFAULT_TAU_PERCENTILE) -> float:
    """Percentile of per-pair uniform-weight errors over a set of alignments."""
    if not esms:
        raise EmptyGroup("no alignments to estimate tau from")
    uniform = WeightVector.uniform(n)
    errs = np.concatenate([pair_weighted_errors(e, uniform) for e in esms])
    return float(np.percentile(errs, percentile))


@dataclass(frozen=True)
class QuadraticObjective:
    """f(w) = w^T Q w + c^T w + c0 over the n - 1 free point weights."""

    Q: np.ndarray
    c: np.ndarray
    c0: float
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    tau: float = 1.0

    @property
    def dim(self) -> int:
        return len(self.c)

    def value(self, w) -> float:
        w = np.asarray(w, dtype=float)
        return float(w @ self.Q @ w + self.c @ w + self.c0)

    def gradient(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return 2.0 * self.Q @ w + self.c


def _stack(coeffs):
    a0 = np.array([c.a0 for c in coeffs])
    A = np.array([c.a for c in coeffs])
    return a0, A


def build_objective(training: TrainingSet, label, alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA,
                    tau: float = 1.0) -> QuadraticObjective:
    n = training.n_points
    a0_s, A_s = _stack([coefficients_from_errors(e, tau, n) for e in training.same(label)])
    a0_c, A_c = _stack([coefficients_from_errors(e, tau, n) for e in training.cross(label)])

    # each similarity is s_k(w) = a0_k - A_k . w
    mean_a0, mean_A = a0_s.mean(), A_s.mean(axis=0)
    d0 = a0_s - mean_a0
    dA = A_s - mean_A
    K = len(a0_s)
    cov_A = dA.T @ dA / K
    cov_A0 = dA.T @ d0 / K
    var_a0 = float(d0 @ d0 / K)

    Q = alpha * cov_A
    Q = 0.5 * (Q + Q.T)
    c = -mean_A - 2.0 * alpha * cov_A0 + beta * A_c.mean(axis=0)
    c0 = mean_a0 + alpha * var_a0 - beta * a0_c.mean()
    return QuadraticObjective(Q, c, float(c0), alpha, beta, tau)


# ---------------------------------------------------------------------------
# optimizer


def project_feasible(w) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum(w) <= 1}."""
    w = np.asarray(w, dtype=float)
    clipped = np.clip(w, 0.0, None)
    if clipped.sum() <= 1.0:
        return np.minimum(clipped, 1.0)
    # projection onto the probability simplex (sort-based)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, len(w) + 1)
    rho = ind[u - css / ind > 0][-1]
    theta = css[rho - 1] / rho
    out = np.clip(w - theta, 0.0, None)
    excess = out.sum() - 1.0
    if excess > 0:
        # rounding can leave the sum a few ulps above 1
        out = out / out.sum()
        out = np.clip(out, 0.0, 1.0)
    return out


def is_feasible(w) -> bool:
    w = np.asarray(w, dtype=float)
    return bool(np.all(w >= 0) and np.all(w <= 1) and w.sum() <= 1.0 and 1.0 - w.sum() >= 0)


@dataclass(frozen=True)
class OptimizeResult:
    omega: WeightVector
    value: float
    converged: bool
    iterations: int
    history: tuple
    grad_norm: float


def _max_ray_step(w, d) -> float:
    """Largest t with w + t d feasible."""
    t = np.inf
    neg = d < 0
    if neg.any():
        t = min(t, float(np.min(-w[neg] / d[neg])))
    sd = d.sum()
    if sd > 0:
        t = min(t, (1.0 - w.sum()) / sd)
    return max(t, 0.0)


def optimize_weights(obj: QuadraticObjective, tol: float = 1e-8, max_iter: int = None,
                     armijo: float = 1e-4, init=None) -> OptimizeResult:
    """Maximize the objective over the feasible weights by projected
    conjugate gradient (Polak-Ribiere+, restarts) with backtracking.

    Starts from uniform weights.  Every accepted step increases f, so the
    returned iterate is never worse than the start.  Stops when the
    projected-gradient norm drops to ``tol``, or when no step can raise f
    by more than its rounding error.
    """
    m = obj.dim
    n = m + 1
    if max_iter is None:
        max_iter = 10 * m * m
    w = np.full(m, 1.0 / n) if init is None else project_feasible(init)
    f = obj.value(w)
    history = [f]
    g = obj.gradient(w)
    d_prev = None
    g_prev = None
    converged = False
    it = 0
    pg_norm = np.inf
    for it in range(1, max_iter + 1):
        pg = project_feasible(w + g) - w
        pg_norm = float(np.linalg.norm(pg))
        if pg_norm <= tol:
            converged = True
            it -= 1
            break
        d = g.copy()
        if d_prev is not None:
            beta_pr = max(0.0, float(g @ (g - g_prev)) / float(g_prev @ g_prev))
            cand = g + beta_pr * d_prev
            if cand @ g > 0:
                d = cand
        step = _line_search(obj, w, f, g, d, armijo)
        if step is None and d_prev is not None:
            d = g.copy()
            step = _line_search(obj, w, f, g, d, armijo)
        if step is None:
            # no ascent along the projected path: try the gradient-mapping direction
            step = _line_search(obj, w, f, g, pg, armijo)
            if step is None:
                # stationary to working precision when the predicted gain is below rounding of f
                converged = float(g @ pg) <= 64 * np.finfo(float).eps * max(1.0, abs(f))
                break
            d = pg
        w_new, f_new, clipped = step
        g_prev, g = g, obj.gradient(w_new)
        d_prev = None if clipped or it % m == 0 else d
        w, f = w_new, f_new
        history.append(f)
    result = OptimizeResult(WeightVector.from_free(w), f, converged, it, tuple(history), pg_norm)
    if not converged:
        warnings.warn(f"weight optimization stopped after {it} iterations "
                      f"(projected gradient norm {pg_norm:.3g})", RuntimeWarning, stacklevel=2)
    return result


def _line_search(obj, w, f, g, d, armijo, max_halvings=60):
    """Backtracking along the projected path w(t) = P(w + t d)."""
    dQd = float(d @ obj.Q @ d)
    gd = float(g @ d)
    if gd <= 0:
        return None
    t_ray = _max_ray_step(w, d)
    if dQd < 0:
        t = -gd / (2.0 * dQd)
    else:
        t = t_ray if np.isfinite(t_ray) and t_ray > 0 else 1.0 / max(np.linalg.norm(d), 1e-300)
    # stop at the boundary first; the projection handles the rest
    if 0 < t_ray < t:
        candidates = [t_ray, t]
    else:
        candidates = [t]
    best = None
    for t0 in candidates:
        t = t0
        for _ in range(max_halvings):
            w_new = project_feasible(w + t * d)
            f_new = obj.value(w_new)
            if f_new > f and f_new - f >= armijo * float(g @ (w_new - w)):
                if best is None or f_new > best[1]:
                    projected = not np.array_equal(w_new, w + t * d)
                    best = (w_new, f_new, projected)
                break
            t *= 0.5
    return best


def train_action(training: TrainingSet, label, alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA,
                 tau: float = None, tau_percentile: float = DEFAULT_TAU_PERCENTILE, **solver):
    """Learn the weights of one action.  Returns (OptimizeResult, objective)."""
    if tau is None:
        tau = estimate_tau(training.same(label), training.n_points, tau_percentile)
    obj = build_objective(training, label, alpha, beta, tau)
    res = optimize_weights(obj, **solver)
    log.info("action %s: f=%.6g converged=%s iterations=%d", label, res.value, res.converged, res.iterations)
    return res, obj
