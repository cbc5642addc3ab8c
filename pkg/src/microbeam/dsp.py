"""Per-example signal chain.

beamform -> reshape into PRIs -> column-wise range DFT -> range gate ->
collapse to a slow-time signal -> spectrogram.

All DFTs are unnormalized forward transforms.  Spectrogram rows are
frequency bins shifted so that row ``H // 2`` is zero Doppler and rows
above it are positive Doppler.  Under the simulator's phase convention an
approaching target appears *below* the centre row (negative Doppler).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .array import BeamWeights, beam_weights
from .errors import DomainError, StructuralError
from .scene import SPEED_OF_LIGHT, RawDataCube

WINDOW_KINDS = ("rectangular", "hamming", "hann", "blackman")


@dataclass(frozen=True)
class RangeMap:
    data: np.ndarray
    look_angle_deg: float
    range_bin_m: float


@dataclass(frozen=True)
class SlowTimeSignal:
    samples: np.ndarray
    look_angle_deg: float
    gate: tuple


@dataclass(frozen=True)
class Spectrogram:
    """Power ``F x T`` (frequency rows, time columns), zero Doppler at row ``F // 2``."""

    power: np.ndarray
    look_angle_deg: float
    hop: int
    window_kind: str

    @property
    def shape(self):
        return self.power.shape


@dataclass(frozen=True)
class GatePolicy:
    """Range-bin selection: explicit inclusive bounds or an energy-fraction search."""

    kind: str = "auto"
    energy_fraction: float = 0.95
    bounds: tuple = (0, 0)

    @classmethod
    def auto(cls, energy_fraction: float = 0.95) -> "GatePolicy":
        return cls("auto", float(energy_fraction))

    @classmethod
    def explicit(cls, lower: int, upper: int) -> "GatePolicy":
        return cls("explicit", bounds=(int(lower), int(upper)))

    def __post_init__(self):
        if self.kind not in ("auto", "explicit"):
            raise DomainError(f"unknown gate policy {self.kind!r}")
        if self.kind == "auto" and not 0 < self.energy_fraction <= 1:
            raise DomainError(f"energy_fraction must lie in (0, 1], got {self.energy_fraction}")


@dataclass(frozen=True)
class ProcessingConfig:
    window: str = "hamming"
    window_length: int = 128
    hop: int = 31
    frames: int = 384
    gate: GatePolicy = GatePolicy.auto(0.95)

    def __post_init__(self):
        if self.window not in WINDOW_KINDS:
            raise DomainError(f"window must be one of {WINDOW_KINDS}, got {self.window!r}")
        if self.window_length < 2 or self.hop < 1 or self.frames < 1:
            raise DomainError("need window_length >= 2, hop >= 1 and frames >= 1")


def apply_beamformer(cube: RawDataCube, weights: BeamWeights) -> np.ndarray:
    """Spatially filtered N-vector ``x[n] = sum_m s[n, m] * w[m]``."""
    w = np.asarray(weights.weights)
    data = cube.data if isinstance(cube, RawDataCube) else np.asarray(cube)
    if data.ndim != 2 or data.shape[1] != w.shape[0]:
        raise StructuralError(f"cube with shape {data.shape} does not match {w.shape[0]} weights")
    return data @ w


def reshape_to_pri(x: np.ndarray, samples_per_pri: int) -> np.ndarray:
    """Stack each PRI's ``P`` samples into a column, giving a ``P x Q`` matrix."""
    x = np.asarray(x)
    if x.ndim != 1 or samples_per_pri < 1 or x.size % samples_per_pri:
        raise StructuralError(f"length {x.size} is not a multiple of P={samples_per_pri}")
    return x.reshape(-1, samples_per_pri).T


def range_map(x2d: np.ndarray, bandwidth_hz: float = 5e9, look_angle_deg: float = float("nan")) -> RangeMap:
    """Column-wise P-point DFT of the PRI matrix (no scaling)."""
    x2d = np.asarray(x2d)
    if x2d.ndim != 2:
        raise StructuralError("range_map expects a P x Q matrix")
    return RangeMap(data=np.fft.fft(x2d, axis=0), look_angle_deg=look_angle_deg,
                    range_bin_m=SPEED_OF_LIGHT / (2.0 * bandwidth_hz))


def range_profile(rmap: RangeMap) -> np.ndarray:
    """Slow-time-integrated energy per range bin."""
    return np.sum(np.abs(rmap.data) ** 2, axis=1)


def select_gate(rmap: RangeMap, policy: GatePolicy = GatePolicy.auto()) -> tuple:
    """Inclusive range-bin interval ``(r_l, r_u)`` to collapse.

    The automatic policy returns the narrowest contiguous interval around
    the strongest bin holding at least ``energy_fraction`` of the total
    energy; among equally narrow intervals the most energetic wins, then the
    lowest start bin.
    """
    P = rmap.data.shape[0] if rmap.data.ndim == 2 else 0
    if P == 0 or rmap.data.size == 0:
        raise StructuralError("empty range map")
    if policy.kind == "explicit":
        lo, hi = policy.bounds
        if not 0 <= lo <= hi < P:
            raise StructuralError(f"gate {policy.bounds} outside 0..{P - 1}")
        return lo, hi

    profile = range_profile(rmap)
    cs = np.concatenate(([0.0], np.cumsum(profile)))
    total = cs[-1]
    if not total > 0:
        raise StructuralError("range map carries no energy; cannot place an automatic gate")
    peak = int(np.argmax(profile))
    target = policy.energy_fraction * total
    for width in range(1, P + 1):
        starts = np.arange(max(0, peak - width + 1), min(peak, P - width) + 1)
        energy = cs[starts + width] - cs[starts]
        best = int(np.argmax(energy))
        if energy[best] >= target:
            lo = int(starts[best])
            return lo, lo + width - 1
    return 0, P - 1


def collapse_range(rmap: RangeMap, gate: tuple) -> SlowTimeSignal:
    """Coherently sum range bins ``r_l..r_u`` (inclusive) into a slow-time signal."""
    lo, hi = (int(g) for g in gate)
    P = rmap.data.shape[0]
    if not 0 <= lo <= hi < P:
        raise StructuralError(f"gate {gate} outside 0..{P - 1}")
    return SlowTimeSignal(samples=rmap.data[lo:hi + 1].sum(axis=0),
                          look_angle_deg=rmap.look_angle_deg, gate=(lo, hi))


def taper(window_kind: str, length: int) -> np.ndarray:
    if window_kind not in WINDOW_KINDS:
        raise DomainError(f"window must be one of {WINDOW_KINDS}, got {window_kind!r}")
    if window_kind == "rectangular":
        return np.ones(length)
    return get_window(window_kind, length, fftbins=True)


def spectrogram(sig, window_kind: str = "hamming", H: int = 128, hop: int = 31,
                frames: int = 384) -> Spectrogram:
    """Squared-magnitude STFT of a slow-time signal.

    Frame ``t`` starts at sample ``t * hop``; the tail is zero padded so that
    exactly ``frames`` frames exist.  Returns an ``H x frames`` matrix with
    zero Doppler at row ``H // 2``.
    """
    samples = np.asarray(sig.samples if isinstance(sig, SlowTimeSignal) else sig)
    look = sig.look_angle_deg if isinstance(sig, SlowTimeSignal) else float("nan")
    if H < 2 or hop < 1 or frames < 1:
        raise DomainError("need H >= 2, hop >= 1 and frames >= 1")
    if H > samples.size:
        raise DomainError(f"window length {H} exceeds signal length {samples.size}")
    needed = (frames - 1) * hop + H
    padded = np.zeros(max(needed, samples.size), dtype=complex)
    padded[:samples.size] = samples
    segments = np.lib.stride_tricks.sliding_window_view(padded[:needed], H)[::hop]
    spectra = np.fft.fft(segments * taper(window_kind, H), axis=1)
    power = np.abs(np.fft.fftshift(spectra, axes=1)) ** 2
    return Spectrogram(power=np.ascontiguousarray(power.T), look_angle_deg=look,
                       hop=hop, window_kind=window_kind)


def doppler_axis_hz(H: int, prf_hz: float) -> np.ndarray:
    """Frequency of each spectrogram row."""
    return (np.arange(H) - H // 2) * prf_hz / H


def process_beam(cube: RawDataCube, weights: BeamWeights, config: ProcessingConfig = ProcessingConfig()) -> Spectrogram:
    """Full chain for a single set of beamformer weights."""
    params = cube.params
    x = apply_beamformer(cube, weights)
    rmap = range_map(reshape_to_pri(x, params.samples_per_pri), params.bandwidth_hz, weights.look_angle_deg)
    sig = collapse_range(rmap, select_gate(rmap, config.gate))
    return spectrogram(sig, config.window, config.window_length, config.hop, config.frames)


def process_example(cube: RawDataCube, look_angles=(75.0, 105.0),
                    config: ProcessingConfig = ProcessingConfig()) -> tuple:
    """Spectrogram pair for beams steered to the two look angles."""
    geometry = cube.params.geometry
    return tuple(process_beam(cube, beam_weights(geometry, angle), config) for angle in look_angles)


def half_plane_energy(spec: Spectrogram) -> tuple:
    """Total power below and above zero Doppler, ``(negative, positive)``; the centre row is excluded."""
    centre = spec.power.shape[0] // 2
    return float(spec.power[:centre].sum()), float(spec.power[centre + 1:].sum())
