"""Dataset-level plumbing shared by the command-line front end."""
import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path

from .body import BodyModel
from .errors import ParseError, SchemaMismatch, UnknownLabel
from .geometry import GeometryConfig
from .io import (confusion_table, dumps_sequence, dumps_weights, fmt, load_sequence, loads_weights, read_csv,
                 write_csv, write_kv, write_text_atomic)
from .learning import TrainingSet, train_action
from .recognition import DatabaseEntry, ReferenceDatabase, evaluate
from .synth import synthesize
from .weighting import WeightVector

log = logging.getLogger(__name__)

MANIFEST_HEADER = ("file", "action", "subject", "camera", "seed", "sha256")


@dataclass(frozen=True)
class DatasetItem:
    file: str
    action: str
    subject: str
    camera: str
    seed: int
    path: Path


def geometry_config(cfg) -> GeometryConfig:
    return GeometryConfig(min_valid_fraction=cfg.min_valid_fraction)


def write_dataset(cfg, out_dir) -> list:
    """Synthesize every sequence, write them with a manifest; returns rows."""
    out = Path(out_dir)
    items, rig = synthesize(cfg.synth_config())
    rows = []
    for item in items:
        name = f"sequences/{item.action}_{item.subject}_{item.camera}.seq"
        text = dumps_sequence(item.sequence)
        write_text_atomic(out / name, text)
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        rows.append((name, item.action, item.subject, item.camera, item.seed, digest))
    write_csv(out / "manifest.csv", MANIFEST_HEADER, rows)
    rig_items = [("count", len(rig)), ("seed", cfg.seed), ("kind", cfg.camera_kind),
                 ("radius_min", cfg.radius_min), ("radius_max", cfg.radius_max),
                 ("elevation_min", cfg.elevation_min), ("elevation_max", cfg.elevation_max),
                 ("focal_min", cfg.focal_min), ("focal_max", cfg.focal_max)]
    for cam in rig:
        c = cam.center
        rig_items.append((f"{cam.name}.center", " ".join(fmt(v) for v in c)))
        rig_items.append((f"{cam.name}.focal", cam.focal))
    write_kv(out / "rig.txt", rig_items, "partweights camera rig")
    write_text_atomic(out / "config.txt", cfg.dumps())
    return rows


def read_manifest(dataset_dir) -> list:
    root = Path(dataset_dir)
    rows = read_csv(root / "manifest.csv")
    if not rows or tuple(rows[0]) != MANIFEST_HEADER:
        raise ParseError("manifest header mismatch", line=1)
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(MANIFEST_HEADER):
            raise ParseError("manifest row has the wrong width", line=lineno)
        try:
            seed = int(row[4])
        except ValueError:
            raise ParseError("bad seed", line=lineno, field="seed") from None
        out.append(DatasetItem(row[0], row[1], row[2], row[3], seed, root / row[0]))
    return out


def split(items, cfg):
    """(references by action, training groups by action, test items)."""
    cams = sorted({it.camera for it in items})
    train_cams = set(cams[:cfg.train_cameras])
    refs, groups, test = {}, {}, []
    for action in cfg.actions:
        ref = [it for it in items if it.action == action and it.subject == cfg.reference_subject
               and it.camera == cfg.reference_camera]
        if not ref:
            raise UnknownLabel(f"no reference sequence for action {action!r}")
        refs[action] = ref[0]
        groups[action] = [it for it in items if it.action == action and it.camera in train_cams]
    test = [it for it in items if it.camera not in train_cams and it.action in cfg.actions]
    return refs, groups, test


def _load(item, model):
    seq = load_sequence(item.path, model)
    if seq.action != item.action:
        raise SchemaMismatch(f"{item.file}: action {seq.action!r} disagrees with the manifest")
    return seq


TRAIN_LOG_HEADER = ("action", "alpha", "beta", "tau", "objective", "objective_uniform", "converged",
                    "iterations", "grad_norm", "reference")


def train_dataset(cfg, dataset_dir, out_dir, model: BodyModel = None):
    """Learn weights for every configured action.  Returns the train-log rows."""
    model = model or BodyModel()
    items = read_manifest(dataset_dir)
    refs, groups, _ = split(items, cfg)
    references = {a: _load(it, model) for a, it in refs.items()}
    seqs = {a: [_load(it, model) for it in grp] for a, grp in groups.items()}
    gc = geometry_config(cfg)
    training = TrainingSet.build(references, seqs, model, cfg.stride, gc)
    out = Path(out_dir)
    rows = []
    for action in cfg.actions:
        tau = cfg.tau if cfg.tau_policy == "fixed" else None
        res, obj = train_action(training, action, cfg.alpha, cfg.beta, tau, cfg.tau_percentile,
                                **cfg.solver_options())
        f_uniform = obj.value(WeightVector.uniform(model.n).free)
        doc = dumps_weights(action, model.joint_labels, res.omega.omega, alpha=float(cfg.alpha),
                            beta=float(cfg.beta), tau=obj.tau, objective=res.value,
                            objective_uniform=f_uniform, converged=res.converged,
                            iterations=res.iterations, grad_norm=res.grad_norm,
                            reference=refs[action].file, stride=cfg.stride)
        write_text_atomic(out / f"weights_{action}.txt", doc)
        rows.append((action, float(cfg.alpha), float(cfg.beta), obj.tau, res.value, f_uniform,
                     res.converged, res.iterations, res.grad_norm, refs[action].file))
    write_csv(out / "train_log.csv", TRAIN_LOG_HEADER, rows)
    return rows


def load_database(cfg, dataset_dir, weights_dir, model: BodyModel = None) -> ReferenceDatabase:
    model = model or BodyModel()
    items = read_manifest(dataset_dir)
    refs, _, _ = split(items, cfg)
    entries = []
    for action in cfg.actions:
        path = Path(weights_dir) / f"weights_{action}.txt"
        with open(path, encoding="utf-8") as fh:
            label, labels, omega, meta = loads_weights(fh.read(), model)
        if label != action:
            raise SchemaMismatch(f"{path.name} holds weights for {label!r}")
        try:
            tau = float(meta["tau"])
        except (KeyError, ValueError):
            raise ParseError("weights document lacks a valid tau", field="tau") from None
        entries.append(DatabaseEntry(action, _load(refs[action], model), WeightVector(omega), tau))
    return ReferenceDatabase(tuple(entries))


def recognize_dataset(cfg, dataset_dir, weights_dir, out_dir, model: BodyModel = None):
    """Weighted and uniform-weight evaluation on the held-out cameras."""
    model = model or BodyModel()
    db = load_database(cfg, dataset_dir, weights_dir, model)
    items = read_manifest(dataset_dir)
    _, _, test = split(items, cfg)
    for it in test:
        if it.action not in db.labels:
            raise UnknownLabel(f"test label {it.action!r} not in the database")
    seqs = [_load(it, model) for it in test]
    gc = geometry_config(cfg)
    weighted = evaluate(seqs, db, model, cfg.stride, gc)
    uniform = evaluate(seqs, db.uniform(), model, cfg.stride, gc)
    out = Path(out_dir)
    write_csv(out / "confusion.csv", *confusion_table(weighted.confusion))
    write_csv(out / "confusion_uniform.csv", *confusion_table(uniform.confusion))
    header = ["file", "truth", "predicted", "predicted_uniform"] + [f"score.{a}" for a in db.labels]
    rows = []
    for it, (truth, pred, scores), (_, upred, _) in zip(test, weighted.predictions, uniform.predictions):
        rows.append([it.file, truth, pred, upred] + [scores.get(a, float("nan")) for a in db.labels])
    write_csv(out / "predictions.csv", header, rows)
    summary = [("test_sequences", len(seqs)), ("accuracy", weighted.accuracy),
               ("accuracy_uniform", uniform.accuracy), ("delta", weighted.accuracy - uniform.accuracy)]
    write_kv(out / "summary.txt", summary, "partweights recognition summary")
    return weighted, uniform
