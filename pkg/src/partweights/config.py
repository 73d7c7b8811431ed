"""Run configuration: one key-value file, overridable from the command line.

Recognized keys (defaults in parentheses)::

    stride (1)              transition stride, >= 1
    tau_policy (percentile) percentile | fixed
    tau_percentile (90)     in (0, 100]
    tau (1.0)               used when tau_policy = fixed, > 0
    alpha (-0.1)            weight of the same-action variance term
    beta (1.0)              weight of the cross-action mean, >= 0
    tol (1e-8)              projected-gradient stopping tolerance, > 0
    max_iter (0)            optimizer iteration cap; 0 = 10 (n-1)^2
    min_valid_fraction (0.5)
    sentinel (1e6)          cost of cells with too few usable triplets
    seed (0)
    subjects (2), cameras (17), frames (40), fps (30.0)
    actions (walk,run,jump,swing,climb)
    camera_kind (perspective)  affine | perspective
    radius_min (8.0), radius_max (12.0)       meters
    elevation_min (-5.0), elevation_max (30.0) degrees
    focal_min (800.0), focal_max (1600.0)     pixels
    noise (0.0)             pixel noise sigma
    train_cameras (11)      cameras c00..c(k-1) train, the rest test
    reference_subject (s0), reference_camera (c00)
"""
from dataclasses import asdict, dataclass, fields, replace

from .errors import ConfigError, ParseError
from .io import dumps_kv, read_kv
from .synth import ACTIONS, SynthConfig


@dataclass(frozen=True)
class RunConfig:
    stride: int = 1
    tau_policy: str = "percentile"
    tau_percentile: float = 90.0
    tau: float = 1.0
    alpha: float = -0.1
    beta: float = 1.0
    tol: float = 1e-8
    max_iter: int = 0
    min_valid_fraction: float = 0.5
    sentinel: float = 1e6
    seed: int = 0
    subjects: int = 2
    cameras: int = 17
    frames: int = 40
    fps: float = 30.0
    actions: tuple = ACTIONS
    camera_kind: str = "perspective"
    radius_min: float = 8.0
    radius_max: float = 12.0
    elevation_min: float = -5.0
    elevation_max: float = 30.0
    focal_min: float = 800.0
    focal_max: float = 1600.0
    noise: float = 0.0
    train_cameras: int = 11
    reference_subject: str = "s0"
    reference_camera: str = "c00"

    def validate(self):
        checks = [
            (self.stride >= 1, "stride must be >= 1"),
            (self.tau_policy in ("percentile", "fixed"), "tau_policy must be percentile or fixed"),
            (0 < self.tau_percentile <= 100, "tau_percentile must be in (0, 100]"),
            (self.tau > 0, "tau must be positive"),
            (self.beta >= 0, "beta must be >= 0"),
            (self.tol > 0, "tol must be positive"),
            (self.max_iter >= 0, "max_iter must be >= 0"),
            (0 <= self.min_valid_fraction <= 1, "min_valid_fraction must be in [0, 1]"),
            (self.sentinel > 0, "sentinel must be positive"),
            (self.seed >= 0, "seed must be >= 0"),
            (self.subjects >= 1, "subjects must be >= 1"),
            (self.cameras >= 1, "cameras must be >= 1"),
            (self.frames >= 8, "frames must be >= 8"),
            (self.fps > 0, "fps must be positive"),
            (len(self.actions) >= 1 and set(self.actions) <= set(ACTIONS), f"actions must be drawn from {ACTIONS}"),
            (len(set(self.actions)) == len(self.actions), "actions must be unique"),
            (self.camera_kind in ("affine", "perspective"), "camera_kind must be affine or perspective"),
            (0 < self.radius_min <= self.radius_max, "need 0 < radius_min <= radius_max"),
            (-90 <= self.elevation_min <= self.elevation_max <= 90, "elevations must be ordered within [-90, 90]"),
            (0 < self.focal_min <= self.focal_max, "need 0 < focal_min <= focal_max"),
            (self.noise >= 0, "noise must be >= 0"),
            (1 <= self.train_cameras <= self.cameras, "train_cameras must be in [1, cameras]"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        return self

    def synth_config(self) -> SynthConfig:
        return SynthConfig(self.subjects, tuple(self.actions), self.cameras, self.frames, self.fps, self.seed,
                           self.camera_kind, self.radius_min, self.radius_max, self.elevation_min,
                           self.elevation_max, self.focal_min, self.focal_max, self.noise)

    def solver_options(self) -> dict:
        return {"tol": self.tol, "max_iter": self.max_iter or None}

    def dumps(self) -> str:
        items = [(k, ",".join(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()]
        return dumps_kv(items, "partweights run config")


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def coerce(key: str, value):
    if key not in _TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _TYPES[key]
    if not isinstance(value, str):
        return tuple(value) if kind in (tuple, "tuple") else value
    try:
        if kind in (int, "int"):
            return int(value)
        if kind in (float, "float"):
            return float(value)
        if kind in (tuple, "tuple"):
            return tuple(v.strip() for v in value.split(",") if v.strip())
        return value
    except ValueError:
        raise ParseError(f"bad value {value!r}", field=key) from None


def load_config(path=None, overrides: dict = None) -> RunConfig:
    """Defaults, then the file, then non-None overrides."""
    values = {}
    if path is not None:
        for key, value in read_kv(path).items():
            values[key] = coerce(key, value)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = coerce(key, value)
    return replace(RunConfig(), **values).validate()
