"""Command line entry point: ``microbeam simulate|process|train|evaluate|render``.

Exit codes: 0 success, 1 validation error, 2 I/O or file-format error,
3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import shutil
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import config as config_mod
from .array import beam_weights
from .classify import NnModel, evaluate
from .dsp import process_beam
from .errors import (ConfigurationError, DomainError, FormatError, InvariantError, MicrobeamError,
                     StructuralError)
from .experiment import split_indices
from .features import extract, fit
from .fileio import (TrainedModel, atomic_write, load_cube, load_model, load_spectrogram, render_pgm,
                     save_cube, save_model, save_spectrogram, sha256)
from .scene import dataset_plan, synthesize

log = logging.getLogger("microbeam")

MANIFEST = "manifest.csv"
CONFIG_COPY = "config.toml"
CUBE_FIELDS = ("index", "file", "label", "seed", "sha256")
SPEC_FIELDS = ("index", "label", "seed", "theta1_file", "theta2_file", "theta1_sha256", "theta2_sha256")


class ItemizedFailure(FormatError):
    def __init__(self, failures):
        self.failures = failures
        super().__init__(f"{len(failures)} example(s) failed:\n" + "\n".join(f"  {f}" for f in failures))


def _csv_bytes(fieldnames, rows) -> bytes:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def read_manifest(directory) -> list:
    path = Path(directory) / MANIFEST
    if not path.is_file():
        raise FileNotFoundError(f"no {MANIFEST} in {directory}")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise FormatError(f"{path} lists no examples")
    return rows


def resolve_config(args, data_dir=None):
    if args.config:
        cfg = config_mod.load(args.config, args.profile)
    elif data_dir is not None and (Path(data_dir) / CONFIG_COPY).is_file():
        cfg = config_mod.load(Path(data_dir) / CONFIG_COPY, args.profile)
    else:
        cfg = config_mod.profile_defaults(args.profile)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _map(fn, items, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


class _Staging:
    """Collects outputs in a hidden sibling directory, moved into place only on success."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)

    def __enter__(self):
        self.created = not self.out_dir.exists()
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.path = Path(tempfile.mkdtemp(prefix=".staging-", dir=self.out_dir))
        return self.path

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                for item in sorted(self.path.iterdir()):
                    os.replace(item, self.out_dir / item.name)
        finally:
            shutil.rmtree(self.path, ignore_errors=True)
            if exc_type is not None and self.created and not any(self.out_dir.iterdir()):
                self.out_dir.rmdir()
        return False


# -- simulate ---------------------------------------------------------------

def _simulate_one(job):
    plan, radar, path = job
    save_cube(path, synthesize(plan.scene, radar))
    return sha256(path)


def cmd_simulate(cfg, out_dir, jobs: int = 1) -> list:
    """Write one cube file per example plus a manifest; returns the manifest rows."""
    plan = dataset_plan(cfg.scene, cfg.radar)
    with _Staging(out_dir) as stage:
        names = [f"ex{p.index:04d}.mbc" for p in plan]
        hashes = _map(_simulate_one, [(p, cfg.radar, stage / n) for p, n in zip(plan, names)], jobs)
        rows = [dict(index=p.index, file=n, label=p.label, seed=p.seed, sha256=h)
                for p, n, h in zip(plan, names, hashes)]
        atomic_write(stage / CONFIG_COPY, cfg.to_text().encode("utf-8"))
        atomic_write(stage / MANIFEST, _csv_bytes(CUBE_FIELDS, rows))
    log.info("simulated %d examples into %s", len(rows), out_dir)
    return rows


# -- process ----------------------------------------------------------------

def _process_one(job):
    row, data_dir, stage, cfg = job
    name = row["file"]
    try:
        cube = load_cube(Path(data_dir) / name)
        if cube.params != cfg.radar:
            raise ConfigurationError("cube radar parameters differ from the configuration")
        if cube.label != int(row["label"]):
            raise FormatError(f"label {cube.label} in file disagrees with manifest label {row['label']}")
        geometry = cube.params.geometry
        stem = Path(name).stem
        out = dict(index=row["index"], label=row["label"], seed=row["seed"])
        for tag, angle in zip(("theta1", "theta2"), cfg.look_angles):
            spec = process_beam(cube, beam_weights(geometry, angle), cfg.processing)
            fname = f"{stem}_{tag}.mbs"
            save_spectrogram(Path(stage) / fname, spec)
            out[f"{tag}_file"] = fname
            out[f"{tag}_sha256"] = sha256(Path(stage) / fname)
        return out, None
    except (OSError, MicrobeamError) as exc:
        return None, f"{name}: {exc}"


def cmd_process(cfg, data_dir, out_dir, jobs: int = 1) -> list:
    rows = read_manifest(data_dir)
    with _Staging(out_dir) as stage:
        results = _map(_process_one, [(r, str(data_dir), str(stage), cfg) for r in rows], jobs)
        failures = [err for _, err in results if err]
        if failures:
            raise ItemizedFailure(failures)
        out_rows = [r for r, _ in results]
        atomic_write(stage / CONFIG_COPY, cfg.to_text().encode("utf-8"))
        atomic_write(stage / MANIFEST, _csv_bytes(SPEC_FIELDS, out_rows))
    return out_rows


# -- train / evaluate -------------------------------------------------------

def load_pairs(spec_dir):
    rows = read_manifest(spec_dir)
    pairs, labels, ids = [], [], []
    for r in rows:
        pairs.append((load_spectrogram(Path(spec_dir) / r["theta1_file"]),
                      load_spectrogram(Path(spec_dir) / r["theta2_file"])))
        labels.append(int(r["label"]))
        ids.append(int(r["index"]))
    return pairs, labels, ids


def cmd_train(cfg, spec_dir, model_path) -> TrainedModel:
    pairs, labels, ids = load_pairs(spec_dir)
    train_idx, _ = split_indices(labels, cfg.train_per_class, cfg.split_seed)
    training = [(pairs[i], labels[i]) for i in train_idx]
    models = fit(training, cfg.k)
    nn = NnModel.from_features([extract(p, models, lab) for p, lab in training], cfg.metric)
    model = TrainedModel(config=cfg, pca=models, nn=nn, train_ids=tuple(ids[i] for i in train_idx))
    save_model(model_path, model)
    log.info("trained on %d examples (K=%d)", len(train_idx), cfg.k)
    return model


def cmd_evaluate(model_path, spec_dir, out_dir=None, include_training: bool = False):
    model = load_model(model_path)
    pairs, labels, ids = load_pairs(spec_dir)
    seen = set(model.train_ids)
    chosen = [i for i, ex in enumerate(ids) if include_training or ex not in seen]
    if not chosen:
        raise DomainError("no held-out examples to evaluate")
    test = [extract(pairs[i], model.pca, labels[i]) for i in chosen]
    cm = evaluate(model.nn, test)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        atomic_write(out / "report.txt", (cm.as_table() + "\n").encode("utf-8"))
        rows = [dict(predicted=p, actual=a, count=c, percent=f"{pct:.6f}") for p, a, c, pct in cm.as_rows()]
        atomic_write(out / "confusion.csv", _csv_bytes(("predicted", "actual", "count", "percent"), rows))
    return cm


def cmd_render(spec_path, image_path) -> None:
    atomic_write(image_path, render_pgm(load_spectrogram(spec_path).power))


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--profile", choices=config_mod.PROFILES, default="desk")
    common.add_argument("--seed", type=int, help="override scene.master_seed")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="microbeam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate a labelled dataset of raw cubes")
    p.add_argument("--out", required=True)

    p = sub.add_parser("process", parents=[common], help="turn cubes into beamformed spectrogram pairs")
    p.add_argument("dataset")
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", parents=[common], help="fit 2D-PCA models and the NN classifier")
    p.add_argument("spectrograms")
    p.add_argument("--model", required=True)

    p = sub.add_parser("evaluate", parents=[common], help="confusion matrix on held-out examples")
    p.add_argument("spectrograms")
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="directory for report.txt and confusion.csv")
    p.add_argument("--all", action="store_true", help="include training examples")

    p = sub.add_parser("render", parents=[common], help="export a spectrogram as a PGM image")
    p.add_argument("spectrogram")
    p.add_argument("--out", required=True)
    return parser


def run(args) -> int:
    if args.command == "simulate":
        rows = cmd_simulate(resolve_config(args), args.out, args.jobs)
        print(f"wrote {len(rows)} cubes to {args.out}")
    elif args.command == "process":
        rows = cmd_process(resolve_config(args, args.dataset), args.dataset, args.out, args.jobs)
        print(f"wrote {2 * len(rows)} spectrograms to {args.out}")
    elif args.command == "train":
        model = cmd_train(resolve_config(args, args.spectrograms), args.spectrograms, args.model)
        print(f"model with K={model.pca[0].K} trained on {len(model.train_ids)} examples -> {args.model}")
    elif args.command == "evaluate":
        print(cmd_evaluate(args.model, args.spectrograms, args.out, args.all).as_table())
    elif args.command == "render":
        cmd_render(args.spectrogram, args.out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return run(args)
    except (ConfigurationError, DomainError, StructuralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
