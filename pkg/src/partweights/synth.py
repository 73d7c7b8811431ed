"""Synthetic motion and a random multi-camera rig.

World frame: z up, the subject faces +x and +y points to its left.  The
procedural actions are sinusoid/spline driven stick figures; they only need
to be distinct between classes and varied between subjects.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .body import DEFAULT_JOINTS
from .sequence import JointSequence

ACTIONS = ("walk", "run", "jump", "swing", "climb")
_ALIASES = {f"{a}-like": a for a in ACTIONS}


@dataclass(frozen=True)
class CameraModel:
    kind: str  # "affine" | "perspective"
    rotation: np.ndarray  # world -> camera, orthonormal
    translation: np.ndarray  # meters
    focal: float = 1000.0  # pixels
    principal_point: tuple = (640.0, 360.0)
    seed: Optional[int] = None
    name: str = ""
    # affine cameras scale by focal / reference_depth (weak perspective)
    reference_depth: float = 1.0

    def __post_init__(self):
        if self.kind not in ("affine", "perspective"):
            raise ValueError(f"unknown camera kind {self.kind!r}")
        R = np.asarray(self.rotation, dtype=float)
        if R.shape != (3, 3) or not np.allclose(R @ R.T, np.eye(3), atol=1e-9):
            raise ValueError("rotation must be orthonormal")
        if self.focal <= 0:
            raise ValueError("focal length must be positive")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))

    @property
    def center(self) -> np.ndarray:
        return -self.rotation.T @ self.translation


def look_at(center, target, up=(0.0, 0.0, 1.0), roll: float = 0.0) -> np.ndarray:
    """Rotation whose z axis points from ``center`` to ``target``."""
    fwd = np.asarray(target, float) - np.asarray(center, float)
    fwd /= np.linalg.norm(fwd)
    right = np.cross(fwd, up)
    if np.linalg.norm(right) < 1e-9:
        right = np.cross(fwd, (1.0, 0.0, 0.0))
    right /= np.linalg.norm(right)
    down = np.cross(fwd, right)
    R = np.vstack([right, down, fwd])
    if roll:
        c, s = np.cos(roll), np.sin(roll)
        R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]) @ R
    return R


def project_points(points, cam: CameraModel, min_depth: float = 1e-6):
    """Project (..., 3) world points.  Returns image points (..., 2) and a
    validity mask (False behind a perspective camera)."""
    X = np.asarray(points, dtype=float) @ cam.rotation.T + cam.translation
    pp = np.asarray(cam.principal_point, dtype=float)
    if cam.kind == "affine":
        xy = cam.focal / cam.reference_depth * X[..., :2] + pp
        return xy, np.ones(X.shape[:-1], dtype=bool)
    z = X[..., 2]
    valid = z > min_depth
    safe = np.where(valid, z, 1.0)
    xy = cam.focal * X[..., :2] / safe[..., None] + pp
    xy = np.where(valid[..., None], xy, np.nan)
    return xy, valid


def project(seq3d: JointSequence, cam: CameraModel, noise: float = 0.0, rng=None) -> JointSequence:
    """Image sequence of a world-space sequence seen by ``cam``.

    Joints behind a perspective camera become invalid; the sequence is kept.
    ``noise`` adds isotropic Gaussian pixel noise (needs ``rng``).
    """
    if seq3d.dim != 3:
        raise ValueError("project() needs a 3D sequence")
    xy, valid = project_points(seq3d.points, cam)
    if noise > 0:
        rng = rng if rng is not None else np.random.default_rng(0)
        xy = xy + rng.normal(scale=noise, size=xy.shape)
    valid = valid & seq3d.valid
    return JointSequence(xy, valid, seq3d.action, seq3d.subject, cam.name, seq3d.fps, seq3d.joint_labels)


def random_rig(count: int = 17, seed: int = 0, radius_range=(8.0, 12.0), elevation_range=(-5.0, 30.0),
               kind: str = "perspective", focal_range=(800.0, 1600.0), target=(0.0, 0.0, 1.0),
               roll_range=(-10.0, 10.0), subject_radius: float = 1.2, principal_point=(640.0, 360.0)) -> list:
    """Cameras at random azimuths on a spherical sector, all looking at
    ``target``.  Angles in degrees.  Deterministic per seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if min(radius_range) <= subject_radius:
        raise ValueError("cameras must stay outside the subject bounding sphere")
    rng = np.random.default_rng(seed)
    target = np.asarray(target, dtype=float)
    cams = []
    for c in range(count):
        az = rng.uniform(0.0, 2 * np.pi)
        el = np.deg2rad(rng.uniform(*elevation_range))
        r = rng.uniform(*radius_range)
        f = rng.uniform(*focal_range)
        roll = np.deg2rad(rng.uniform(*roll_range))
        center = target + r * np.array([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])
        R = look_at(center, target, roll=roll)
        cams.append(CameraModel(kind, R, -R @ center, f, tuple(principal_point), seed, f"c{c:02d}",
                                reference_depth=r))
    return cams


# ---------------------------------------------------------------------------
# procedural actions


@dataclass(frozen=True)
class SubjectParams:
    height: float = 1.0  # overall scale
    limb_jitter: tuple = (1.0,) * 8
    cadence: float = 1.0
    amplitude: float = 1.0
    phase: float = 0.0
    style: tuple = field(default=(0.0,) * 6)

    @classmethod
    def random(cls, seed: int):
        rng = np.random.default_rng([seed, 7])
        return cls(
            height=float(rng.uniform(0.9, 1.1)),
            limb_jitter=tuple(float(v) for v in rng.uniform(0.92, 1.08, size=8)),
            cadence=float(rng.uniform(0.9, 1.1)),
            amplitude=float(rng.uniform(0.85, 1.15)),
            phase=float(rng.uniform(0, 2 * np.pi)),
            style=tuple(float(v) for v in rng.normal(0.0, 0.08, size=6)),
        )


def _rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _pos(u):
    return np.clip(u, 0.0, None)


def _smooth(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3 - 2 * u)


def _angles(kind, t, u, p: SubjectParams):
    """Joint angles at time t (seconds) / normalized time u.  Returns dict."""
    A = p.amplitude
    st = p.style
    if kind == "walk":
        ph = 2 * np.pi * 1.0 * p.cadence * t + p.phase
        hip = 0.38 * A * np.sin(ph)
        return dict(
            hip_l=hip, hip_r=-hip,
            knee_l=0.1 + 0.55 * A * _pos(np.sin(ph + 1.3)), knee_r=0.1 + 0.55 * A * _pos(np.sin(ph + 1.3 + np.pi)),
            sh_l=-0.3 * A * np.sin(ph) + st[0], sh_r=0.3 * A * np.sin(ph) + st[0],
            el_l=0.25 + st[1], el_r=0.25 + st[1], abd_l=0.12, abd_r=0.12,
            lean=0.04 + st[2], yaw=0.05 * np.sin(ph), bob=0.025 * np.cos(2 * ph), rise=0.0,
        )
    if kind == "run":
        ph = 2 * np.pi * 1.45 * p.cadence * t + p.phase
        hip = 0.2 + 0.6 * A * np.sin(ph)
        hip2 = 0.2 - 0.6 * A * np.sin(ph)
        return dict(
            hip_l=hip, hip_r=hip2,
            knee_l=0.35 + 1.1 * A * _pos(np.sin(ph + 1.0)), knee_r=0.35 + 1.1 * A * _pos(np.sin(ph + 1.0 + np.pi)),
            sh_l=-0.65 * A * np.sin(ph) + st[0], sh_r=0.65 * A * np.sin(ph) + st[0],
            el_l=1.5 + st[1], el_r=1.5 + st[1], abd_l=0.15, abd_r=0.15,
            lean=0.18 + st[2], yaw=0.08 * np.sin(ph), bob=0.06 * np.cos(2 * ph), rise=0.0,
        )
    if kind == "jump":
        uu = np.clip(u * p.cadence + 0.05 * np.sin(p.phase), 0.0, 1.0)
        crouch = np.exp(-((uu - 0.3) / 0.12) ** 2) + 0.8 * np.exp(-((uu - 0.85) / 0.08) ** 2)
        flight = np.where((uu > 0.45) & (uu < 0.75), np.sin(np.pi * (uu - 0.45) / 0.3), 0.0)
        arms = -0.8 * np.exp(-((uu - 0.3) / 0.12) ** 2) + 2.6 * A * _smooth((uu - 0.35) / 0.15) * (1 - _smooth((uu - 0.8) / 0.15))
        return dict(
            hip_l=0.9 * A * crouch + st[0], hip_r=0.9 * A * crouch + st[0],
            knee_l=1.6 * A * crouch + 0.1 * flight, knee_r=1.6 * A * crouch + 0.1 * flight,
            sh_l=arms, sh_r=arms, el_l=0.2 + st[1], el_r=0.2 + st[1], abd_l=0.15 + 0.2 * flight, abd_r=0.15 + 0.2 * flight,
            lean=0.35 * crouch + st[2], yaw=0.0, bob=-0.3 * A * crouch + 0.45 * A * flight, rise=0.0,
        )
    if kind == "swing":
        uu = np.clip(u * p.cadence + 0.05 * np.sin(p.phase), 0.0, 1.0)
        back = _smooth(uu / 0.55)
        down = _smooth((uu - 0.55) / 0.2)
        yaw = -1.3 * A * back + 2.3 * A * down
        lift = 1.0 + 1.2 * A * back * (1 - down) + 1.0 * A * _smooth((uu - 0.75) / 0.2)
        return dict(
            hip_l=0.25 + st[0], hip_r=0.25 + st[0], knee_l=0.35 + 0.1 * down, knee_r=0.35 - 0.05 * down,
            sh_l=lift, sh_r=lift, el_l=0.1 + 0.4 * back * (1 - down) + st[1], el_r=0.1 + st[1],
            abd_l=-0.35, abd_r=-0.35,
            lean=0.45 + st[2], yaw=yaw, bob=0.0, rise=0.0,
        )
    if kind == "climb":
        ph = 2 * np.pi * 0.7 * p.cadence * t + p.phase
        s = np.sin(ph)
        return dict(
            hip_l=0.7 + 0.6 * A * s, hip_r=0.7 - 0.6 * A * s,
            knee_l=1.0 + 0.7 * A * s, knee_r=1.0 - 0.7 * A * s,
            sh_l=2.5 + 0.45 * A * s + st[0], sh_r=2.5 - 0.45 * A * s + st[0],
            el_l=0.6 - 0.4 * s + st[1], el_r=0.6 + 0.4 * s + st[1], abd_l=0.2, abd_r=0.2,
            lean=-0.05 + st[2], yaw=0.0, bob=0.03 * np.cos(2 * ph), rise=0.35 * t,
        )
    raise ValueError(f"unknown action kind {kind!r}")


def _skeleton(ang, p: SubjectParams):
    L = np.array([0.45, 0.43, 0.5, 0.3, 0.33, 0.11, 0.19, 0.25]) * np.array(p.limb_jitter) * p.height
    thigh, shin, torso, upper, fore, hip_w, sh_w, neck = L
    leg = thigh + shin
    pelvis = np.array([0.0, 0.0, leg + ang["bob"] + ang["rise"]])
    body = _rot_z(ang["yaw"]) @ _rot_y(ang["lean"])
    up = body @ np.array([0.0, 0.0, 1.0])
    lateral = body @ np.array([0.0, 1.0, 0.0])
    # legs hang from the pelvis, unaffected by torso lean
    out = {}
    for side, sgn in (("l", 1.0), ("r", -1.0)):
        hip_pt = pelvis + sgn * hip_w * np.array([0.0, 1.0, 0.0])
        h = ang[f"hip_{side}"]
        knee = hip_pt + thigh * np.array([np.sin(h), 0.0, -np.cos(h)])
        k = h - ang[f"knee_{side}"]
        foot = knee + shin * np.array([np.sin(k), 0.0, -np.cos(k)])
        out[f"{side}_knee"], out[f"{side}_foot"] = knee, foot
    neck_base = pelvis + torso * up
    out["head"] = neck_base + neck * up
    for side, sgn in (("l", 1.0), ("r", -1.0)):
        sh = neck_base + sgn * sh_w * lateral
        a, abd = ang[f"sh_{side}"], ang[f"abd_{side}"]
        d1 = np.array([np.sin(a) * np.cos(abd), sgn * np.sin(abd), -np.cos(a) * np.cos(abd)])
        b = a + ang[f"el_{side}"]
        d2 = np.array([np.sin(b) * np.cos(abd), sgn * np.sin(abd), -np.cos(b) * np.cos(abd)])
        elbow = sh + upper * (body @ d1)
        hand = elbow + fore * (body @ d2)
        out[f"{side}_shoulder"], out[f"{side}_elbow"], out[f"{side}_hand"] = sh, elbow, hand
    return np.array([out[name] for name in DEFAULT_JOINTS])


def procedural_action(kind: str, params: SubjectParams = None, frames: int = 40, seed: int = 0,
                      fps: float = 30.0, subject: str = "") -> JointSequence:
    """World-space 11-joint sequence of a procedural action."""
    kind = _ALIASES.get(kind, kind)
    if kind not in ACTIONS:
        raise ValueError(f"unknown action kind {kind!r}")
    if frames < 8:
        raise ValueError("need at least 8 frames")
    params = params or SubjectParams()
    rng = np.random.default_rng([seed, ACTIONS.index(kind)])
    wobble = rng.normal(0.0, 0.01, size=(frames, len(DEFAULT_JOINTS), 3))
    pts = np.empty((frames, len(DEFAULT_JOINTS), 3))
    for f in range(frames):
        t = f / fps
        u = f / (frames - 1)
        pts[f] = _skeleton(_angles(kind, t, u, params), params)
    pts += wobble
    return JointSequence(pts, np.ones(pts.shape[:2], dtype=bool), kind, subject, "", fps, DEFAULT_JOINTS)


@dataclass(frozen=True)
class SynthConfig:
    subjects: int = 2
    actions: tuple = ACTIONS
    cameras: int = 17
    frames: int = 40
    fps: float = 30.0
    seed: int = 0
    camera_kind: str = "perspective"
    radius_min: float = 8.0
    radius_max: float = 12.0
    elevation_min: float = -5.0
    elevation_max: float = 30.0
    focal_min: float = 800.0
    focal_max: float = 1600.0
    noise: float = 0.0


@dataclass(frozen=True)
class SyntheticItem:
    sequence: JointSequence
    action: str
    subject: str
    camera: str
    seed: int


def synthesize(cfg: SynthConfig = SynthConfig()):
    """Every (subject, action, camera) combination.  Returns (items, rig)."""
    rig = random_rig(cfg.cameras, cfg.seed, (cfg.radius_min, cfg.radius_max),
                     (cfg.elevation_min, cfg.elevation_max), cfg.camera_kind, (cfg.focal_min, cfg.focal_max))
    items = []
    for s in range(cfg.subjects):
        subject = f"s{s}"
        params = SubjectParams.random(cfg.seed * 1000 + s)
        for a, action in enumerate(cfg.actions):
            motion_seed = cfg.seed * 1000 + 10 * s + a
            seq3d = procedural_action(action, params, cfg.frames, motion_seed, cfg.fps, subject)
            for c, cam in enumerate(rig):
                item_seed = motion_seed * 100 + c
                rng = np.random.default_rng(item_seed)
                seq = project(seq3d, cam, cfg.noise, rng)
                items.append(SyntheticItem(seq, action, subject, cam.name, item_seed))
    return items, rig
