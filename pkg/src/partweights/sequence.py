"""Pose and joint-sequence containers."""
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .body import BodyModel


@dataclass(frozen=True)
class Pose2D:
    points: np.ndarray  # (n, 2)
    valid: np.ndarray  # (n,) bool

    @classmethod
    def from_points(cls, points, valid=None):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2:
            raise ValueError("Pose2D points must have shape (n, 2)")
        if valid is None:
            valid = np.isfinite(points).all(axis=1)
        return cls(points, np.asarray(valid, dtype=bool))

    @property
    def n(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class JointSequence:
    """Ordered poses of one performance seen by one camera.

    ``points`` is (frames, n, dim) with dim 2 for image sequences and 3 for
    world-space (motion capture) sequences.
    """

    points: np.ndarray
    valid: np.ndarray
    action: str = ""
    subject: str = ""
    camera: str = ""
    fps: Optional[float] = None
    joint_labels: tuple = field(default_factory=lambda: BodyModel().joint_labels)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 3 or pts.shape[2] not in (2, 3):
            raise ValueError("points must have shape (frames, n, 2|3)")
        if len(pts) < 2:
            raise ValueError("a sequence needs at least two frames")
        valid = np.asarray(self.valid, dtype=bool)
        if valid.shape != pts.shape[:2]:
            raise ValueError("valid mask must have shape (frames, n)")
        if len(self.joint_labels) != pts.shape[1]:
            raise ValueError("joint_labels length does not match point count")
        # non-finite coordinates are treated as missing
        valid = valid & np.isfinite(pts).all(axis=2)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "valid", valid)
        object.__setattr__(self, "joint_labels", tuple(self.joint_labels))

    @classmethod
    def from_points(cls, points, valid=None, **meta):
        points = np.asarray(points, dtype=float)
        if valid is None:
            valid = np.ones(points.shape[:2], dtype=bool)
        if "joint_labels" not in meta:
            n = points.shape[1]
            default = BodyModel().joint_labels
            meta["joint_labels"] = default if n == len(default) else tuple(f"p{i}" for i in range(n))
        return cls(points, valid, **meta)

    def __len__(self):
        return len(self.points)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def dim(self) -> int:
        return self.points.shape[2]

    @property
    def body_model(self) -> BodyModel:
        return BodyModel(self.joint_labels)

    def pose(self, t: int) -> Pose2D:
        if self.dim != 2:
            raise ValueError("pose() is only defined for image sequences")
        return Pose2D(self.points[t], self.valid[t])

    @property
    def poses(self) -> list:
        return [self.pose(t) for t in range(len(self))]

    def with_points(self, points, valid=None):
        return replace(self, points=points, valid=self.valid if valid is None else valid)

    def equals(self, other) -> bool:
        """Field-by-field equality (NaN-aware on coordinates)."""
        return (
            self.points.shape == other.points.shape
            and np.array_equal(self.valid, other.valid)
            and np.array_equal(self.points, other.points, equal_nan=True)
            and (self.action, self.subject, self.camera, self.fps, self.joint_labels)
            == (other.action, other.subject, other.camera, other.fps, other.joint_labels)
        )


def transitions_of(seq: JointSequence, stride: int = 1) -> list:
    """Pose-transition pairs (frame t, frame t + stride)."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if len(seq) - stride < 1:
        raise ValueError(f"sequence of {len(seq)} frames has no transitions at stride {stride}")
    return [(seq.pose(t), seq.pose(t + stride)) for t in range(len(seq) - stride)]


def transition_count(seq: JointSequence, stride: int = 1) -> int:
    return max(len(seq) - stride, 0)
