import numpy as np
import pytest

from partweights.alignment import align_sequences
from partweights.errors import UnknownLabel
from partweights.recognition import (ConfusionMatrix, DatabaseEntry, ReferenceDatabase, classify,
                                     confusion_from_predictions, evaluate)
from partweights.weighting import WeightVector, coefficients_from_errors


def _db(views, tau=0.05, cam=0):
    return ReferenceDatabase(tuple(DatabaseEntry(k, views[(k, 0, cam)], WeightVector.uniform(11), tau)
                                   for k in ("walk", "run", "jump")))


def test_reference_matches_itself(views):
    db = _db(views)
    label, scores = classify(views[("run", 0, 0)], db)
    assert label == "run"
    assert scores["run"] == pytest.approx(0.05, abs=1e-5)
    _, esm = align_sequences(views[("run", 0, 0)], views[("run", 0, 0)])
    s = coefficients_from_errors(esm, 0.05, 11).evaluate(WeightVector.uniform(11))
    # residual errors of an exact match are rounding noise, about 1e-8 per triplet
    assert s == pytest.approx(esm.n_pairs * 0.05, rel=1e-5)


def test_single_entry_always_wins(views):
    db = ReferenceDatabase((DatabaseEntry("walk", views[("walk", 0, 0)], WeightVector.uniform(11), 0.1),))
    for key in (("jump", 1, 2), ("run", 1, 3)):
        assert classify(views[key], db)[0] == "walk"


def test_classify_scale_invariant(views):
    db = _db(views)
    target = views[("jump", 1, 2)]
    base_label, base = classify(target, db)
    scaled = target.with_points(target.points * 3.7)
    label, scores = classify(scaled, db)
    assert label == base_label
    for k in base:
        assert scores[k] == pytest.approx(base[k], abs=1e-9)


def test_uniform_ranking_follows_alignment_cost(views):
    """Uniform weights and a shared tau rank references by total alignment cost."""
    db = _db(views, tau=0.05)
    for key in (("walk", 1, 3), ("jump", 1, 2), ("run", 0, 1)):
        target = views[key]
        label, scores = classify(target, db)
        total = {e.label: align_sequences(target, e.reference)[0].total_cost for e in db.entries}
        assert label == min(total, key=total.get)
        assert sorted(scores, key=scores.get, reverse=True) == sorted(total, key=total.get)
        for k in scores:
            assert scores[k] == pytest.approx(0.05 - total[k] / 165, rel=1e-9, abs=1e-12)


def test_evaluate_confusion_rows(views):
    db = _db(views)
    ev = evaluate([views[(k, 1, c)] for k in ("walk", "run", "jump") for c in (1, 2, 3)], db)
    assert ev.confusion.row_sums().tolist() == [3, 3, 3]
    assert 0.0 <= ev.accuracy <= 1.0
    assert len(ev.predictions) == 9


def test_self_view_recognition_is_perfect(views):
    db = _db(views)
    ev = evaluate([views[(k, 0, 0)] for k in ("walk", "run", "jump")], db)
    assert np.array_equal(ev.confusion.counts, np.eye(3, dtype=int))


def test_confusion_matrix_cases():
    perfect = confusion_from_predictions(["a", "b"], ["a", "b", "b"], ["a", "b", "b"])
    assert perfect.accuracy == 1.0
    assert np.array_equal(perfect.counts, np.diag([1, 2]))
    one = confusion_from_predictions(["a", "b"], ["a"], ["b"])
    assert np.count_nonzero(one.counts) == 1 and one.accuracy == 0.0
    with pytest.raises(UnknownLabel):
        confusion_from_predictions(["a"], ["z"], ["a"])
    assert ConfusionMatrix(("a",), np.zeros((1, 1), dtype=int)).accuracy == 0.0


def test_evaluate_rejects_unknown_label(views):
    with pytest.raises(UnknownLabel):
        evaluate([("swim", views[("walk", 0, 1)])], _db(views))
