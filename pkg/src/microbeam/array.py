"""Uniform linear receive array: steering vectors and beamformer weights.

Angles are azimuths in degrees with the element phase proportional to
``cos(theta)``, so broadside is 90 degrees (not 0 as in the ``sin``
convention used by many texts).  Element ``m`` of the steering vector is::

    a_m(theta) = exp(j * 2*pi * (d / lambda) * m * cos(theta))

Beamformer weights are the element-wise conjugate of the steering vector and
are applied as a plain inner product with each array snapshot, giving a gain
of exactly ``M`` towards the look direction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ArrayGeometry:
    """ULA with ``num_elements`` sensors spaced ``spacing_wavelengths * lambda`` apart."""

    num_elements: int = 4
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise DomainError(f"num_elements must be a positive integer, got {self.num_elements!r}")
        if not self.spacing_wavelengths > 0:
            raise DomainError(f"spacing_wavelengths must be > 0, got {self.spacing_wavelengths!r}")


@dataclass(frozen=True)
class SteeringVector:
    elements: np.ndarray
    angle_deg: float


@dataclass(frozen=True)
class BeamWeights:
    """Complex weights applied to array snapshots.

    ``look_angle_deg`` is NaN for weight vectors that do not point anywhere,
    such as the single-antenna selection vector.
    """

    weights: np.ndarray
    look_angle_deg: float


def _check_angle(theta_deg):
    theta = float(theta_deg)
    if not 0.0 <= theta <= 180.0:
        raise DomainError(f"azimuth must lie in [0, 180] degrees, got {theta_deg!r}")
    return theta


def steering_phases(geometry: ArrayGeometry, theta_deg) -> np.ndarray:
    """Per-element phase (radians) of a plane wave from ``theta_deg``."""
    theta = np.deg2rad(_check_angle(theta_deg))
    m = np.arange(geometry.num_elements)
    return 2.0 * np.pi * geometry.spacing_wavelengths * m * np.cos(theta)


def steering_vector(geometry: ArrayGeometry, theta_deg) -> SteeringVector:
    """Steering vector of the ULA towards azimuth ``theta_deg``.

    Element 0 is exactly ``1 + 0j`` and every element has unit modulus.
    """
    elements = np.exp(1j * steering_phases(geometry, theta_deg))
    return SteeringVector(elements=elements, angle_deg=float(theta_deg))


def beam_weights(geometry: ArrayGeometry, theta_deg) -> BeamWeights:
    """Matched (delay-and-sum) weights looking towards ``theta_deg``."""
    a = steering_vector(geometry, theta_deg)
    return BeamWeights(weights=np.conj(a.elements), look_angle_deg=a.angle_deg)


def selection_weights(geometry: ArrayGeometry, element: int = 0) -> BeamWeights:
    """Weights that pass a single antenna through unchanged (no beamforming)."""
    if not 0 <= element < geometry.num_elements:
        raise DomainError(f"element index {element} outside 0..{geometry.num_elements - 1}")
    w = np.zeros(geometry.num_elements, dtype=complex)
    w[element] = 1.0
    return BeamWeights(weights=w, look_angle_deg=float("nan"))


def array_response(geometry: ArrayGeometry, look_deg, source_deg) -> complex:
    """Complex gain of a beam steered to ``look_deg`` for a unit source at ``source_deg``.

    ``|response| <= M`` with equality when the two phase profiles coincide.
    """
    w = beam_weights(geometry, look_deg).weights
    a = steering_vector(geometry, source_deg).elements
    return complex(np.sum(w * a))


def beam_pattern(geometry: ArrayGeometry, look_deg, angles_deg) -> np.ndarray:
    """Array response over a grid of source angles."""
    return np.array([array_response(geometry, look_deg, s) for s in np.atleast_1d(angles_deg)])
