"""Body-point model and triplet enumeration."""
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import comb

import numpy as np

DEFAULT_JOINTS = (
    "head",
    "l_shoulder", "r_shoulder",
    "l_elbow", "r_elbow",
    "l_hand", "r_hand",
    "l_knee", "r_knee",
    "l_foot", "r_foot",
)


@dataclass(frozen=True)
class TripletId:
    i: int
    j: int
    k: int
    ordinal: int


@dataclass(frozen=True)
class BodyModel:
    joint_labels: tuple = DEFAULT_JOINTS

    def __post_init__(self):
        labels = tuple(self.joint_labels)
        object.__setattr__(self, "joint_labels", labels)
        if len(labels) < 4:
            raise ValueError("a body model needs at least 4 joints")
        if len(set(labels)) != len(labels):
            raise ValueError("joint labels must be unique")

    @property
    def n(self) -> int:
        return len(self.joint_labels)

    @property
    def triplet_count(self) -> int:
        return comb(self.n, 3)

    def index(self, label: str) -> int:
        return self.joint_labels.index(label)

    @cached_property
    def triplets(self) -> list:
        return enumerate_triplets(self)

    @cached_property
    def triplet_array(self) -> np.ndarray:
        """(T, 3) int array of joint indices, one row per triplet."""
        return triplet_index_array(self.n)

    @cached_property
    def incidence(self) -> np.ndarray:
        """(T, n) 0/1 matrix; row t marks the three joints of triplet t."""
        tri = self.triplet_array
        out = np.zeros((len(tri), self.n))
        out[np.arange(len(tri))[:, None], tri] = 1.0
        return out

    def triplet_labels(self, ordinal: int) -> tuple:
        i, j, k = self.triplet_array[ordinal]
        return (self.joint_labels[i], self.joint_labels[j], self.joint_labels[k])


def _count(model_or_n) -> int:
    n = model_or_n.n if isinstance(model_or_n, BodyModel) else int(model_or_n)
    if n < 3:
        raise ValueError("need at least 3 points to form a triplet")
    return n


def enumerate_triplets(model_or_n) -> list:
    """All C(n,3) triplets in lexicographic order.

    Accepts a BodyModel or a bare point count (n >= 3).
    """
    n = _count(model_or_n)
    return [TripletId(i, j, k, r) for r, (i, j, k) in enumerate(combinations(range(n), 3))]


def triplet_index_array(n: int) -> np.ndarray:
    return np.array(list(combinations(range(n), 3)), dtype=int).reshape(-1, 3)


def triplet_ordinal(i: int, j: int, k: int, n: int) -> int:
    """Lexicographic rank of the combination (i, j, k), i < j < k < n."""
    if not 0 <= i < j < k < n:
        raise ValueError(f"invalid triplet ({i}, {j}, {k}) for n={n}")
    rank = 0
    for a in range(i):
        rank += comb(n - 1 - a, 2)
    for b in range(i + 1, j):
        rank += n - 1 - b
    return rank + (k - j - 1)


def triplet_from_ordinal(ordinal: int, n: int) -> TripletId:
    total = comb(n, 3)
    if not 0 <= ordinal < total:
        raise ValueError(f"ordinal {ordinal} out of range for n={n}")
    rest = ordinal
    i = 0
    while rest >= comb(n - 1 - i, 2):
        rest -= comb(n - 1 - i, 2)
        i += 1
    j = i + 1
    while rest >= n - 1 - j:
        rest -= n - 1 - j
        j += 1
    k = j + 1 + rest
    return TripletId(i, j, k, ordinal)
