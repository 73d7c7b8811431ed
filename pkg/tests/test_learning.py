import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from partweights.alignment import ErrorScoreMatrix
from partweights.errors import EmptyGroup, NoOtherGroups
from partweights.learning import (QuadraticObjective, TrainingSet, build_objective, estimate_tau, is_feasible,
                                  optimize_weights, project_feasible, q1_mean_same, q2_variance_same,
                                  q3_mean_cross, train_action)
from partweights.weighting import WeightVector, similarity_from_errors


def _esm(values):
    return ErrorScoreMatrix(values, np.zeros(values.shape, dtype=bool), tuple((i, i) for i in range(values.shape[1])))


def random_training(seed, n=4, J=2, K=2):
    rng = np.random.default_rng(seed)
    labels = [f"a{j}" for j in range(J)]
    T = n * (n - 1) * (n - 2) // 6
    errors = {}
    for r in labels:
        for g in labels:
            scale = 0.1 if r == g else 0.5
            errors[(r, g)] = [_esm(rng.uniform(0, scale, size=(T, int(rng.integers(2, 6))))) for _ in range(K)]
    return TrainingSet(labels, {}, {}, errors, n)


def random_simplex_point(rng, n):
    return rng.dirichlet(np.ones(n))


def objective_by_composition(training, label, omega, alpha, beta, tau):
    same = [similarity_from_errors(e, omega, tau) for e in training.errors[(label, label)]]
    cross = [similarity_from_errors(e, omega, tau)
             for g in training.labels if g != label for e in training.errors[(label, g)]]
    return np.mean(same) + alpha * np.var(same) - beta * np.mean(cross)


@pytest.mark.parametrize("alpha", [-0.1, 0.0, 0.1, 1.0])
def test_objective_matches_composition(alpha):
    for seed in range(10):
        training = random_training(seed)
        obj = build_objective(training, "a0", alpha, 0.7, tau=0.2)
        rng = np.random.default_rng(seed)
        for _ in range(5):
            w = random_simplex_point(rng, 4)
            expected = objective_by_composition(training, "a0", w, alpha, 0.7, 0.2)
            assert obj.value(w[:-1]) == pytest.approx(expected, abs=1e-9)


def test_q_terms_match_numpy():
    training = random_training(3, n=5, J=3, K=3)
    w = WeightVector.uniform(5)
    same = [similarity_from_errors(e, w, 0.3) for e in training.same("a1")]
    assert q1_mean_same(training, "a1", w, 0.3) == pytest.approx(np.mean(same))
    assert q2_variance_same(training, "a1", w, 0.3) == pytest.approx(np.var(same), abs=1e-12)
    assert len(training.cross("a1")) == 6
    cross = [similarity_from_errors(e, w, 0.3) for e in training.cross("a1")]
    assert q3_mean_cross(training, "a1", w, 0.3) == pytest.approx(np.mean(cross))


def test_gradient_matches_central_differences():
    training = random_training(7, n=6)
    obj = build_objective(training, "a1", -0.5, 1.0, 0.2)
    rng = np.random.default_rng(1)
    h = 1e-6
    for _ in range(20):
        w = random_simplex_point(rng, 6)[:-1]
        g = obj.gradient(w)
        fd = np.array([(obj.value(w + h * e) - obj.value(w - h * e)) / (2 * h) for e in np.eye(5)])
        assert np.linalg.norm(g - fd) <= 1e-5 * max(np.linalg.norm(g), 1e-12)


def test_groups_validation():
    training = random_training(0)
    with pytest.raises(EmptyGroup):
        TrainingSet(["a0"], {}, {}, {("a0", "a0"): []}, 4).same("a0")
    with pytest.raises(NoOtherGroups):
        TrainingSet(["a0"], {}, {}, {("a0", "a0"): training.errors[("a0", "a0")]}, 4).cross("a0")


def test_estimate_tau_percentile():
    E = np.tile(np.linspace(0, 1, 11), (4, 1))
    assert estimate_tau([_esm(E)], 4, 50) == pytest.approx(0.5)
    with pytest.raises(EmptyGroup):
        estimate_tau([], 4)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=12))
def test_projection_is_feasible_and_idempotent(v):
    p = project_feasible(v)
    assert is_feasible(p)
    np.testing.assert_allclose(project_feasible(p), p, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3), st.integers(0, 1000))
def test_projection_is_nearest_feasible_point(v, seed):
    """Compare with random feasible candidates: none is closer."""
    v = np.array(v)
    p = project_feasible(v)
    rng = np.random.default_rng(seed)
    cands = rng.dirichlet(np.ones(4), size=500)[:, :3]
    assert np.linalg.norm(v - p) <= np.linalg.norm(v - cands, axis=1).min() + 1e-12


def concave_quadratic(rng, m, w_star):
    B = rng.normal(size=(m, m))
    Q = -(B @ B.T) - 0.1 * np.eye(m)
    c = -2.0 * Q @ w_star
    return QuadraticObjective(Q, c, 0.0)


def test_optimizer_recovers_interior_maximizer():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = int(rng.integers(2, 11))
        w_star = random_simplex_point(rng, m + 1)[:-1] * 0.9 + 0.1 / (m + 1)
        res = optimize_weights(concave_quadratic(rng, m, w_star))
        assert res.converged
        np.testing.assert_allclose(res.omega.free, w_star, atol=1e-6)
        assert np.all(np.diff(res.history) > 0)


def test_optimizer_boundary_maximizer_linear():
    # f = w1 on {w >= 0, sum <= 1} in 2 free dimensions: maximum at (1, 0)
    obj = QuadraticObjective(np.zeros((2, 2)), np.array([1.0, 0.0]), 0.0)
    res = optimize_weights(obj)
    np.testing.assert_allclose(res.omega.omega, [1.0, 0.0, 0.0], atol=1e-9)


def test_optimizer_on_convex_objective_stays_feasible_and_ascends():
    rng = np.random.default_rng(2)
    for _ in range(10):
        B = rng.normal(size=(5, 5))
        obj = QuadraticObjective(B @ B.T, rng.normal(size=5), 0.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = optimize_weights(obj)
        assert is_feasible(res.omega.free)
        assert np.all(np.diff(res.history) > 0)


def test_optimizer_warns_when_capped():
    rng = np.random.default_rng(3)
    obj = concave_quadratic(rng, 6, np.full(6, 0.1))
    with pytest.warns(RuntimeWarning):
        res = optimize_weights(obj, max_iter=1)
    assert not res.converged


def test_train_action_improves_objective():
    training = random_training(5, n=5, J=3, K=3)
    res, obj = train_action(training, "a2")
    assert res.value >= obj.value(WeightVector.uniform(5).free)
    assert is_feasible(res.omega.free)
