import numpy as np
import pytest

from partweights.sequence import JointSequence, transition_count, transitions_of


def _seq(frames=6):
    return JointSequence.from_points(np.arange(frames * 11 * 2, dtype=float).reshape(frames, 11, 2))


def test_transitions_by_stride():
    seq = _seq(6)
    assert transition_count(seq) == 5
    assert transition_count(seq, 2) == 4
    first = transitions_of(seq, 2)[0]
    assert np.array_equal(first[1].points, seq.points[2])


def test_no_transitions_at_large_stride():
    with pytest.raises(ValueError):
        transitions_of(_seq(3), 3)
    with pytest.raises(ValueError):
        transitions_of(_seq(3), 0)


def test_non_finite_points_become_invalid():
    pts = np.ones((3, 11, 2))
    pts[1, 4, 0] = np.nan
    seq = JointSequence.from_points(pts)
    assert not seq.valid[1, 4]
    assert seq.valid.sum() == 32


def test_sequence_validation():
    with pytest.raises(ValueError):
        JointSequence.from_points(np.zeros((1, 11, 2)))
    with pytest.raises(ValueError):
        JointSequence.from_points(np.zeros((4, 11)))
