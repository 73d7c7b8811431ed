"""Text file formats: sequence files, key-value documents and CSV tables.

Sequence file (UTF-8, newline-delimited)::

    #partweights-sequence v1;dim=2;joints=head|l_shoulder|...;action=walk;subject=s0;camera=c00;fps=30.0
    0,head,412.5,133.25,1,l_shoulder,398.0,170.5,1,...
    1,head,413.0,133.5,1,...

One record per frame: the frame index, then for every joint its label, the
coordinates (x, y or x, y, z) and a validity flag (1/0).  An empty
coordinate marks the joint as missing.  Floats are written with Python's
shortest round-trip repr, so save/load is lossless.

Key-value documents hold one ``key = value`` pair per line; ``#`` starts a
comment line.
"""
import csv
import io as _io
import os
import tempfile
from pathlib import Path

import numpy as np

from .body import BodyModel
from .errors import ParseError, SchemaMismatch
from .sequence import JointSequence

MAGIC = "#partweights-sequence v1"
_RESERVED = set(";|=\n\r,")


def write_text_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# sequences


def _check_meta(name, value):
    if set(str(value)) & _RESERVED:
        raise ValueError(f"{name} {value!r} contains a reserved character")


def dumps_sequence(seq: JointSequence) -> str:
    meta = [("dim", str(seq.dim)), ("joints", "|".join(seq.joint_labels)),
            ("action", seq.action), ("subject", seq.subject), ("camera", seq.camera),
            ("fps", "" if seq.fps is None else fmt(seq.fps))]
    for label in seq.joint_labels:
        _check_meta("joint label", label)
    for key, value in meta[2:]:
        _check_meta(key, value)
    lines = [";".join([MAGIC] + [f"{k}={v}" for k, v in meta])]
    for t in range(len(seq)):
        fields = [str(t)]
        for j, label in enumerate(seq.joint_labels):
            fields.append(label)
            for v in seq.points[t, j]:
                fields.append(fmt(v) if np.isfinite(v) else "")
            fields.append("1" if seq.valid[t, j] else "0")
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def save_sequence(seq: JointSequence, path) -> None:
    write_text_atomic(path, dumps_sequence(seq))


def loads_sequence(text: str, model: BodyModel = None) -> JointSequence:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(MAGIC):
        raise ParseError("missing sequence header", line=1)
    meta = {}
    for part in lines[0].split(";")[1:]:
        if "=" not in part:
            raise ParseError("malformed header entry", line=1, field=part)
        key, value = part.split("=", 1)
        meta[key] = value
    try:
        dim = int(meta["dim"])
        joints = tuple(meta["joints"].split("|"))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"header lacks a valid {exc}", line=1) from None
    if dim not in (2, 3):
        raise ParseError(f"unsupported dimensionality {dim}", line=1, field="dim")
    if model is not None and joints != model.joint_labels:
        raise SchemaMismatch(f"file joints {joints} do not match body model {model.joint_labels}")
    n = len(joints)
    width = 1 + n * (dim + 2)
    frames, valid = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != width:
            labels_seen = fields[1::dim + 2] if len(fields) > 1 else []
            if len(fields) > 1 and (len(fields) - 1) % (dim + 2) == 0 and tuple(labels_seen) != joints:
                raise SchemaMismatch(f"line {lineno}: joints {tuple(labels_seen)} do not match header {joints}")
            raise ParseError(f"expected {width} fields, got {len(fields)}", line=lineno)
        try:
            index = int(fields[0])
        except ValueError:
            raise ParseError("bad frame index", line=lineno, field="frame") from None
        if index != len(frames):
            raise ParseError(f"frame index {index} out of order", line=lineno, field="frame")
        pts = np.full((n, dim), np.nan)
        ok = np.zeros(n, dtype=bool)
        for j in range(n):
            base = 1 + j * (dim + 2)
            if fields[base] != joints[j]:
                raise SchemaMismatch(f"line {lineno}: joint {fields[base]!r} where {joints[j]!r} expected")
            missing = False
            for d in range(dim):
                raw = fields[base + 1 + d]
                if raw == "":
                    missing = True
                    continue
                try:
                    pts[j, d] = float(raw)
                except ValueError:
                    raise ParseError("bad coordinate", line=lineno, field=f"{joints[j]}[{d}]") from None
            flag = fields[base + 1 + dim]
            if flag not in ("0", "1"):
                raise ParseError("validity flag must be 0 or 1", line=lineno, field=f"{joints[j]}.valid")
            ok[j] = flag == "1" and not missing
        frames.append(pts)
        valid.append(ok)
    if len(frames) < 2:
        raise ParseError("a sequence needs at least two frames")
    fps = meta.get("fps", "")
    return JointSequence(np.array(frames), np.array(valid), meta.get("action", ""), meta.get("subject", ""),
                         meta.get("camera", ""), float(fps) if fps else None, joints)


def load_sequence(path, model: BodyModel = None) -> JointSequence:
    with open(path, encoding="utf-8") as fh:
        return loads_sequence(fh.read(), model)


# ---------------------------------------------------------------------------
# key-value documents


def dumps_kv(items, comment: str = None) -> str:
    lines = [f"# {comment}"] if comment else []
    for key, value in items:
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, (float, np.floating)):
            value = fmt(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def loads_kv(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in stripped.split("=", 1))
        if not key:
            raise ParseError("empty key", line=lineno)
        if key in out:
            raise ParseError("duplicate key", line=lineno, field=key)
        out[key] = value
    return out


def write_kv(path, items, comment: str = None) -> None:
    write_text_atomic(path, dumps_kv(items, comment))


def read_kv(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return loads_kv(fh.read())


def parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# weights documents: label -> weight plus training metadata

WEIGHT_PREFIX = "weight."


def dumps_weights(action: str, labels, omega, **meta) -> str:
    items = [("action", action)]
    items += [(f"{WEIGHT_PREFIX}{lab}", float(w)) for lab, w in zip(labels, omega)]
    items += list(meta.items())
    return dumps_kv(items, "partweights weights v1")


def loads_weights(text: str, model: BodyModel = None):
    """Returns (action, labels, omega array, meta dict of strings)."""
    kv = loads_kv(text)
    labels, omega, meta = [], [], {}
    for key, value in kv.items():
        if key.startswith(WEIGHT_PREFIX):
            labels.append(key[len(WEIGHT_PREFIX):])
            try:
                omega.append(float(value))
            except ValueError:
                raise ParseError("bad weight", field=key) from None
        elif key != "action":
            meta[key] = value
    if "action" not in kv:
        raise ParseError("weights document lacks 'action'")
    if model is not None and tuple(labels) != model.joint_labels:
        raise SchemaMismatch("weight labels do not match the body model")
    return kv["action"], tuple(labels), np.array(omega), meta


# ---------------------------------------------------------------------------
# CSV tables


def dumps_csv(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return fmt(v) if np.isfinite(v) else ("" if np.isnan(v) else fmt(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return v


def write_csv(path, header, rows) -> None:
    write_text_atomic(path, dumps_csv(header, rows))


def read_csv(path) -> list:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


def alignment_rows(alignment, cost=None):
    """alignment.csv columns: pair, target_transition, reference_transition, cell_cost."""
    for p, (a, b) in enumerate(alignment.pairs):
        yield (p, a, b, float(cost[a, b]) if cost is not None else float("nan"))


ALIGNMENT_HEADER = ("pair", "target_transition", "reference_transition", "cell_cost")


def error_matrix_table(esm, model: BodyModel):
    """error_matrix.csv: one row per triplet (ordinal, three joint labels),
    then one column per aligned pair; masked entries are empty."""
    header = ["triplet", "joint_i", "joint_j", "joint_k"] + [f"pair_{p}" for p in range(esm.n_pairs)]
    rows = []
    for t in range(esm.n_triplets):
        vals = [float("nan") if esm.mask[t, p] else float(esm.values[t, p]) for p in range(esm.n_pairs)]
        rows.append([t, *model.triplet_labels(t), *vals])
    return header, rows


def confusion_table(conf):
    """confusion.csv: header 'truth' + predicted labels; one row per truth label."""
    header = ["truth", *conf.labels]
    rows = [[lab, *[int(c) for c in conf.counts[i]]] for i, lab in enumerate(conf.labels)]
    return header, rows


def coefficients_table(coeffs, labels):
    rows = [("a0", coeffs.a0)] + [(f"a.{lab}", a) for lab, a in zip(labels, coeffs.a)]
    rows += [("tau", coeffs.tau), ("N", coeffs.N)]
    return ("name", "value"), rows
