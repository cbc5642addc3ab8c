"""Two-dimensional PCA on spectrogram images and beam-pair feature fusion.

Images are ``F x T`` (frequency x time).  For centred training images
``S_i`` the image covariance ``C = sum_i S_i^T S_i`` is ``T x T``; each image
is projected onto the ``K`` dominant eigenvectors of ``C`` giving an
``F x K`` matrix.  One model is fitted per look angle, pooling both classes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dsp import Spectrogram
from .errors import DomainError, InvariantError, StructuralError

DB_FLOOR = 1e-6
EIG_TOL = 1e-8


@dataclass(frozen=True)
class PcaModel:
    mean_image: np.ndarray
    basis: np.ndarray
    eigenvalues: np.ndarray

    @property
    def K(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class FusedFeature:
    values: np.ndarray
    label: Optional[int] = None


def _power(spec) -> np.ndarray:
    return np.asarray(spec.power if isinstance(spec, Spectrogram) else spec, dtype=float)


def to_db(power) -> np.ndarray:
    """``10 log10`` of a power image with a floor 60 dB below its peak."""
    x = _power(power)
    peak = x.max() if x.size else 0.0
    if not peak > 0:
        raise DomainError("cannot convert an all-zero spectrogram to dB")
    return 10.0 * np.log10(np.maximum(x, DB_FLOOR * peak))


def normalize(spec, mean_image: np.ndarray) -> np.ndarray:
    db = to_db(spec)
    if db.shape != np.shape(mean_image):
        raise StructuralError(f"image {db.shape} does not match mean image {np.shape(mean_image)}")
    return db - mean_image


def _tree_sum(terms: list) -> np.ndarray:
    # pairwise reduction in index order; fixed order keeps the sum bit-reproducible
    while len(terms) > 1:
        paired = [terms[i] + terms[i + 1] for i in range(0, len(terms) - 1, 2)]
        if len(terms) % 2:
            paired.append(terms[-1])
        terms = paired
    return terms[0]


def image_covariance(images: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_i S_i^T S_i`` over real ``F x T`` images."""
    if len(images) == 0:
        raise DomainError("need at least one image")
    cov = _tree_sum([np.asarray(s).T @ np.asarray(s) for s in images])
    return 0.5 * (cov + cov.T)


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def dominant_eigenpairs(cov: np.ndarray, K: int):
    """``K`` largest eigenpairs of a symmetric matrix, sign-canonicalized."""
    n = cov.shape[0]
    if not 1 <= K <= n:
        raise DomainError(f"K={K} outside 1..{n}")
    values, vectors = np.linalg.eigh(cov)
    order = np.argsort(values, kind="stable")[::-1][:K]
    values, vectors = values[order], _canonical_signs(vectors[:, order])
    scale = np.linalg.norm(cov)
    residual = np.linalg.norm(cov @ vectors - vectors * values, axis=0)
    if np.any(residual > EIG_TOL * scale):
        raise InvariantError(f"eigenpair residual {residual.max():.3e} exceeds tolerance")
    if np.any(values < -1e-9 * scale):
        raise InvariantError("covariance is not positive semidefinite")
    return values, vectors


def fit_model(spectrograms: Sequence, K: int) -> PcaModel:
    """Fit a 2D-PCA model to images of one look angle."""
    if len(spectrograms) == 0:
        raise DomainError("need at least one training spectrogram")
    db = np.stack([to_db(s) for s in spectrograms])
    T = db.shape[2]
    if not 1 <= K <= T:
        raise DomainError(f"K={K} outside 1..{T}")
    mean_image = db.mean(axis=0)
    cov = image_covariance(list(db - mean_image))
    values, vectors = dominant_eigenpairs(cov, K)
    return PcaModel(mean_image=mean_image, basis=vectors, eigenvalues=values)


def fit(training: Sequence, K: int) -> tuple:
    """Fit one model per look angle from ``[((spec_a, spec_b), label), ...]``."""
    if len(training) == 0:
        raise DomainError("need at least one training example")
    pairs = [pair for pair, _ in training]
    return fit_model([p[0] for p in pairs], K), fit_model([p[1] for p in pairs], K)


def project(spec, model: PcaModel) -> np.ndarray:
    """``F x K`` projection of a centred dB image onto the model basis."""
    return normalize(spec, model.mean_image) @ model.basis


def fuse(proj_a: np.ndarray, proj_b: np.ndarray, label: Optional[int] = None) -> FusedFeature:
    """Column-major vectorization of both projections, first beam first."""
    if np.shape(proj_a) != np.shape(proj_b):
        raise StructuralError(f"projection shapes differ: {np.shape(proj_a)} vs {np.shape(proj_b)}")
    values = np.concatenate([np.ravel(proj_a, order="F"), np.ravel(proj_b, order="F")]).astype(float)
    return FusedFeature(values=values, label=label)


def extract(pair, models: tuple, label: Optional[int] = None) -> FusedFeature:
    """Fused feature of one spectrogram pair."""
    return fuse(project(pair[0], models[0]), project(pair[1], models[1]), label)


def reconstruct(projection: np.ndarray, model: PcaModel) -> np.ndarray:
    """Centred dB image approximated from its projection."""
    return projection @ model.basis.T
