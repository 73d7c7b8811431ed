"""Command-line front end.

    partweights synth     --out DATASET
    partweights align     TARGET REFERENCE --out DIR
    partweights train     DATASET --out WEIGHTS
    partweights recognize DATASET --weights WEIGHTS --out RESULTS
    partweights report    DATASET --weights WEIGHTS [--results RESULTS] --out REPORT

Exit codes: 0 success, 2 parse error, 3 validation error, 4 optimizer did
not converge, 5 I/O error.
"""
import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import io as pio
from .alignment import align_sequences, compare, triplet_significance_report
from .body import BodyModel
from .config import RunConfig, load_config
from .errors import (ConfigError, NotConverged, ParseError, PartWeightsError, SchemaMismatch,
                     UnknownLabel)
from .pipeline import (geometry_config, load_database, read_manifest, recognize_dataset, split,
                       train_dataset, write_dataset)

log = logging.getLogger("partweights")

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_CONVERGENCE, EXIT_IO = 0, 2, 3, 4, 5


def _add_config_flags(p):
    p.add_argument("--config", help="key-value run configuration file")
    defaults = RunConfig()
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        value = getattr(defaults, f.name)
        shown = ",".join(value) if isinstance(value, tuple) else value
        p.add_argument(flag, dest=f.name, default=None, metavar="V", help=f"(default {shown})")


def _config(args) -> RunConfig:
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)}
    return load_config(args.config, overrides)


def cmd_synth(args):
    cfg = _config(args)
    rows = write_dataset(cfg, args.out)
    print(f"wrote {len(rows)} sequences to {args.out}")
    return EXIT_OK


def cmd_align(args):
    cfg = _config(args)
    model = BodyModel()
    target = pio.load_sequence(args.target, model)
    reference = pio.load_sequence(args.reference, model)
    gc = geometry_config(cfg)
    comp = compare(target, reference, model, cfg.stride, gc, cfg.sentinel)
    alignment, esm = align_sequences(target, reference, model, cfg.stride, gc, cfg.sentinel)
    out = Path(args.out)
    pio.write_csv(out / "alignment.csv", pio.ALIGNMENT_HEADER, pio.alignment_rows(alignment, comp.cost))
    pio.write_csv(out / "error_matrix.csv", *pio.error_matrix_table(esm, model))
    pio.write_kv(out / "summary.txt", [("pairs", len(alignment)), ("total_cost", alignment.total_cost),
                                       ("excluded_entries", int(esm.mask.sum())),
                                       ("sentinel_cells", int(comp.sentinel.sum()))],
                 "partweights alignment summary")
    print(f"aligned {len(alignment)} pairs, total cost {alignment.total_cost:.6g}")
    return EXIT_OK


def cmd_train(args):
    cfg = _config(args)
    rows = train_dataset(cfg, args.dataset, args.out)
    failed = [r[0] for r in rows if not r[6]]
    for r in rows:
        print(f"{r[0]}: tau={r[3]:.4g} f={r[4]:.6g} (uniform {r[5]:.6g}) converged={r[6]}")
    if failed:
        raise NotConverged(f"optimizer did not converge for: {', '.join(failed)}")
    return EXIT_OK


def cmd_recognize(args):
    cfg = _config(args)
    weighted, uniform = recognize_dataset(cfg, args.dataset, args.weights, args.out)
    print(f"accuracy {weighted.accuracy:.4f} (uniform weights {uniform.accuracy:.4f})")
    return EXIT_OK


def cmd_report(args):
    """Figures plus the triplet-significance table."""
    from . import plotting

    cfg = _config(args)
    model = BodyModel()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gc = geometry_config(cfg)
    items = read_manifest(args.dataset)
    refs, groups, _ = split(items, cfg)
    action = args.action or cfg.actions[0]
    if action not in refs:
        raise UnknownLabel(f"unknown action {action!r}")
    ref = pio.load_sequence(refs[action].path, model)
    same, cross = [], []
    for a, grp in groups.items():
        for it in grp:
            if it.file == refs[action].file:
                continue
            esm = align_sequences(pio.load_sequence(it.path, model), ref, model, cfg.stride, gc, cfg.sentinel)[1]
            (same if a == action else cross).append(esm)
    sig = triplet_significance_report(same, cross)
    header = ["triplet", "joint_i", "joint_j", "joint_k", "same_mean", "same_var", "cross_mean", "cross_var", "index"]
    rows = [[t, *model.triplet_labels(t), sig.same_mean[t], sig.same_var[t], sig.cross_mean[t], sig.cross_var[t],
             sig.index[t]] for t in range(model.triplet_count)]
    pio.write_csv(out / f"significance_{action}.csv", header, rows)
    vmax = float(np.nanpercentile(np.concatenate([same[0].values.ravel(), cross[0].values.ravel()]), 99))
    plotting.plot_error_matrix(same[0], out / f"error_matrix_{action}_same.png", f"{action}: same action", vmax)
    plotting.plot_error_matrix(cross[0], out / f"error_matrix_{action}_cross.png", f"{action}: other action", vmax)
    order = sig.ranking()
    picks = [int(order[0]), int(order[1]), int(order[-1])]
    plotting.plot_triplet_rows(same[0], cross[0], picks, out / f"triplets_{action}.png",
                               [model.triplet_labels(t) for t in range(model.triplet_count)])
    plotting.plot_significance(sig.index, out / f"significance_{action}.png")
    if args.weights:
        db = load_database(cfg, args.dataset, args.weights, model)
        wrows = []
        for e in db.entries:
            plotting.plot_weights(model.joint_labels, e.weights.omega, out / f"weights_{e.label}.png",
                                  f"point weights: {e.label}")
            wrows.append([e.label, *e.weights.omega])
        pio.write_csv(out / "weights.csv", ["action", *model.joint_labels], wrows)
    if args.results:
        for name in ("confusion", "confusion_uniform"):
            path = Path(args.results) / f"{name}.csv"
            if path.exists():
                plotting.plot_confusion(_read_confusion(path), out / f"{name}.png", name.replace("_", " "))
    print(f"report written to {out}")
    return EXIT_OK


def _read_confusion(path):
    from .recognition import ConfusionMatrix

    rows = pio.read_csv(path)
    labels = tuple(rows[0][1:])
    counts = np.array([[int(c) for c in r[1:]] for r in rows[1:]], dtype=int)
    return ConfusionMatrix(labels, counts)


def build_parser():
    parser = argparse.ArgumentParser(prog="partweights", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic multi-camera dataset")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("align", help="align a target sequence file to a reference")
    p.add_argument("target")
    p.add_argument("reference")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("train", help="learn per-action point weights")
    p.add_argument("dataset")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("recognize", help="classify held-out sequences")
    p.add_argument("dataset")
    p.add_argument("--weights", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("report", help="render figures and the triplet-significance table")
    p.add_argument("dataset")
    p.add_argument("--weights")
    p.add_argument("--results")
    p.add_argument("--action")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SchemaMismatch, UnknownLabel, ConfigError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NotConverged as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PartWeightsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
