"""In-memory end-to-end runs: simulate, process, split, train, evaluate."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .array import selection_weights
from .classify import ConfusionMatrix, NnModel, evaluate
from .config import ExperimentConfig
from .dsp import process_beam, process_example
from .errors import DomainError
from .features import extract, fit
from .scene import dataset_plan, synthesize

MODES = ("beams", "single")


@dataclass
class ProcessedDataset:
    """Spectrogram pairs per processing mode, with labels and example seeds.

    In ``single`` mode both entries of a pair are the same first-antenna
    spectrogram, so the fused feature is that image's projection twice.
    """

    labels: list
    seeds: list
    pairs: dict = field(default_factory=dict)


def _process_one(args):
    scene, config, modes = args
    cube = synthesize(scene, config.radar)
    out = {}
    if "beams" in modes:
        out["beams"] = process_example(cube, config.look_angles, config.processing)
    if "single" in modes:
        spec = process_beam(cube, selection_weights(config.radar.geometry, 0), config.processing)
        out["single"] = (spec, spec)
    return out


def simulate_and_process(config: ExperimentConfig, modes=("beams",), jobs: int = 1) -> ProcessedDataset:
    """Synthesize every example and keep only its spectrograms."""
    for mode in modes:
        if mode not in MODES:
            raise DomainError(f"unknown processing mode {mode!r}")
    plan = dataset_plan(config.scene, config.radar)
    work = [(p.scene, config, tuple(modes)) for p in plan]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_process_one, work))
    else:
        results = [_process_one(w) for w in work]
    data = ProcessedDataset(labels=[p.label for p in plan], seeds=[p.seed for p in plan])
    for mode in modes:
        data.pairs[mode] = [r[mode] for r in results]
    return data


def split_indices(labels, train_per_class: int, seed: int) -> tuple:
    """Deterministic per-class random split into (train, test) index lists."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < train_per_class:
            raise DomainError(
                f"class {cls} has {idx.size} examples, {train_per_class} needed for training "
                f"(short by {train_per_class - idx.size})")
        idx = idx[rng.permutation(idx.size)]
        train += idx[:train_per_class].tolist()
        test += idx[train_per_class:].tolist()
    return sorted(train), sorted(test)


def train_models(pairs, labels, train_idx, k: int, metric: str = "euclidean") -> tuple:
    """Fit both 2D-PCA models and the nearest-neighbour store on ``train_idx``."""
    training = [(pairs[i], labels[i]) for i in train_idx]
    models = fit(training, k)
    nn = NnModel.from_features([extract(p, models, lab) for p, lab in training], metric)
    return models, nn


def run_split(pairs, labels, train_idx, test_idx, k: int, metric: str = "euclidean") -> ConfusionMatrix:
    models, nn = train_models(pairs, labels, train_idx, k, metric)
    test = [extract(pairs[i], models, labels[i]) for i in test_idx]
    return evaluate(nn, test)


def run_experiment(config: ExperimentConfig, mode: str = "beams", jobs: int = 1) -> ConfusionMatrix:
    """Held-out confusion matrix for one configuration."""
    data = simulate_and_process(config, (mode,), jobs)
    train_idx, test_idx = split_indices(data.labels, config.train_per_class, config.split_seed)
    return run_split(data.pairs[mode], data.labels, train_idx, test_idx, config.k, config.metric)
