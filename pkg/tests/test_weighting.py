import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from partweights.alignment import ErrorScoreMatrix
from partweights.errors import AllTripletsMasked
from partweights.weighting import (WeightVector, coefficients_from_errors, filled_errors, similarity_from_errors,
                                   triplet_weights, weighted_transition_error)

from oracles import similarity_literal


def _esm(values, mask=None):
    values = np.asarray(values, dtype=float)
    mask = np.zeros(values.shape, dtype=bool) if mask is None else mask
    return ErrorScoreMatrix(values, mask, tuple((i, i) for i in range(values.shape[1])))


simplex = st.lists(st.floats(0.0, 1.0), min_size=11, max_size=11).filter(lambda v: sum(v) > 1e-6).map(
    lambda v: np.array(v) / sum(v))


def test_uniform_weights():
    lam = triplet_weights(WeightVector.uniform(11)).lam
    np.testing.assert_allclose(lam, np.full(165, 1 / 165), rtol=1e-12)


def test_point_mass_weights():
    w = np.zeros(11)
    w[0] = 1.0
    lam = triplet_weights(w).lam
    # triplets containing point 0 get 2/90 = 1/45 each, others none
    assert np.count_nonzero(lam) == 45
    np.testing.assert_allclose(lam[lam > 0], 1 / 45)


@given(simplex)
def test_lambda_sums_to_one(w):
    lam = triplet_weights(w).lam
    assert abs(lam.sum() - 1.0) <= 1e-12
    assert (lam >= 0).all()


def test_weight_vector_validation():
    with pytest.raises(ValueError):
        WeightVector(np.full(11, 0.1))
    with pytest.raises(ValueError):
        WeightVector(np.array([1.2, -0.2, 0.0, 0.0]))
    w = WeightVector.from_free(np.full(10, 0.05))
    assert w.omega[-1] == pytest.approx(0.5)
    np.testing.assert_allclose(w.free, np.full(10, 0.05))


def test_weighted_error_all_equal():
    lam = triplet_weights(WeightVector.uniform(11)).lam
    assert weighted_transition_error(np.full(165, 0.3), lam) == pytest.approx(0.3)


def test_weighted_error_renormalizes_masked():
    lam = np.array([0.25, 0.25, 0.5])
    assert weighted_transition_error(np.array([1.0, np.nan, 3.0]), lam) == pytest.approx((0.25 + 1.5) / 0.75)
    with pytest.raises(AllTripletsMasked):
        weighted_transition_error(np.array([np.nan] * 3), lam)


def test_uniform_similarity_is_tau_minus_mean_error():
    rng = np.random.default_rng(0)
    E = rng.uniform(0, 0.2, size=(165, 7))
    s = similarity_from_errors(_esm(E), WeightVector.uniform(11), tau=0.1)
    assert s == pytest.approx(7 * 0.1 - 7 * E.mean(axis=0).sum() * 165 / 165, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), simplex)
def test_similarity_matches_literal_loop(seed, w):
    rng = np.random.default_rng(seed)
    E = rng.uniform(0, 1, size=(165, int(rng.integers(1, 8))))
    tau = float(rng.uniform(0.01, 1.0))
    assert similarity_from_errors(_esm(E), w, tau) == pytest.approx(similarity_literal(E, w, tau), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), simplex)
def test_affine_coefficients_match_direct(seed, w):
    rng = np.random.default_rng(seed)
    E = rng.uniform(0, 1, size=(165, int(rng.integers(1, 10))))
    mask = rng.uniform(size=E.shape) < 0.05
    esm = _esm(np.where(mask, np.nan, E), mask)
    tau = float(rng.uniform(0.01, 1.0))
    coeffs = coefficients_from_errors(esm, tau, 11)
    direct = similarity_from_errors(esm, w, tau)
    assert abs(direct - (coeffs.a0 - coeffs.a @ w[:-1])) <= 1e-9


def test_masked_entries_take_column_mean():
    E = np.array([[1.0, 2.0], [3.0, np.nan], [5.0, 4.0]])
    mask = np.isnan(E)
    np.testing.assert_allclose(filled_errors(_esm(E, mask)), [[1, 2], [3, 3], [5, 4]])
