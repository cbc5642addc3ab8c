"""Point-scatterer simulator for dechirped multi-channel FMCW returns.

Each person is three point scatterers on a constant azimuth: a torso moving
radially at the walking speed with a small vertical-bounce velocity ripple,
and two limbs swinging in anti-phase around the torso velocity.  For PRI
``q`` and fast-time sample ``p`` a scatterer at range ``R`` contributes::

    alpha * exp(j*2*pi*f_b*p/f_s) * exp(j*4*pi*R(t_q)/lambda) * a_m(theta)

with beat frequency ``f_b = 2*R*slope/c``.  With this phase convention a
closing (approaching) scatterer has a *negative* slow-time Doppler
frequency.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .array import ArrayGeometry, steering_vector
from .errors import ConfigurationError, DomainError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class RadarParams:
    """Chirp, sampling and receive-array parameters.

    Defaults are the full-scale setup: 1 ms PRI, 512 ksps ADC giving 512
    fast-time samples per PRI, 12000 PRIs (12 s) and four receivers at half
    wavelength spacing.
    """

    carrier_hz: float = 77e9
    bandwidth_hz: float = 5e9
    pri_s: float = 1e-3
    adc_rate_sps: float = 512e3
    samples_per_pri: int = 512
    num_pri: int = 12000
    num_rx: int = 4
    noise_variance: float = 0.1
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        for name in ("carrier_hz", "bandwidth_hz", "pri_s", "adc_rate_sps"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"radar.{name} must be > 0")
        for name in ("samples_per_pri", "num_pri", "num_rx"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigurationError(f"radar.{name} must be a positive integer")
        if not self.noise_variance >= 0:
            raise ConfigurationError("radar.noise_variance must be >= 0")
        if not self.spacing_wavelengths > 0:
            raise ConfigurationError("radar.spacing_wavelengths must be > 0")
        if self.samples_per_pri != round(self.adc_rate_sps * self.pri_s):
            raise ConfigurationError(
                f"samples_per_pri={self.samples_per_pri} does not match "
                f"adc_rate_sps * pri_s = {self.adc_rate_sps * self.pri_s:g}"
            )

    @property
    def num_samples(self) -> int:
        return self.samples_per_pri * self.num_pri

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def slope_hz_per_s(self) -> float:
        return self.bandwidth_hz / self.pri_s

    @property
    def prf_hz(self) -> float:
        return 1.0 / self.pri_s

    @property
    def duration_s(self) -> float:
        return self.num_pri * self.pri_s

    @property
    def range_bin_m(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)

    @property
    def max_unambiguous_speed_mps(self) -> float:
        return self.wavelength_m / (4.0 * self.pri_s)

    @property
    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.num_rx, self.spacing_wavelengths)

    def beat_frequency(self, range_m):
        return 2.0 * np.asarray(range_m) * self.slope_hz_per_s / SPEED_OF_LIGHT

    def doppler_hz(self, radial_velocity_mps):
        """Slow-time frequency of a scatterer; negative for approaching targets."""
        return 2.0 * np.asarray(radial_velocity_mps) / self.wavelength_m


@dataclass(frozen=True)
class WalkerSpec:
    """Kinematics and reflectivity of one walking person.

    ``radial_speed_mps`` is signed: negative values approach the radar.
    """

    azimuth_deg: float
    initial_range_m: float
    radial_speed_mps: float
    gait_hz: float = 1.0
    torso_rcs: float = 1.0
    limb_rcs: float = 0.4
    limb_sway_mps: float = 0.12
    phase_seed: int = 0
    torso_bob_mps: float = 0.02

    def __post_init__(self):
        if not self.initial_range_m > 0:
            raise ConfigurationError("initial_range_m must be > 0")
        if not self.gait_hz > 0:
            raise ConfigurationError("gait_hz must be > 0")
        if self.limb_sway_mps < 0 or self.torso_bob_mps < 0:
            raise ConfigurationError("limb_sway_mps and torso_bob_mps must be >= 0")

    @property
    def peak_speed_mps(self) -> float:
        return abs(self.radial_speed_mps) + self.torso_bob_mps + self.limb_sway_mps


@dataclass(frozen=True)
class SceneSpec:
    """A set of walkers observed for ``duration_s``.

    For labelled two-walker scenes ``walkers[0]`` stands at the first look
    angle and ``walkers[1]`` at the second; Class 1 has the first walker
    approaching and the second receding, Class 2 the reverse.
    """

    walkers: tuple = ()
    class_label: Optional[int] = None
    duration_s: float = 12.0
    noise_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "walkers", tuple(self.walkers))
        if self.class_label is not None and self.class_label not in (1, 2):
            raise ConfigurationError(f"class_label must be 1 or 2, got {self.class_label!r}")
        if self.class_label is not None and len(self.walkers) == 2:
            first, second = (w.radial_speed_mps for w in self.walkers)
            ok = (first < 0 < second) if self.class_label == 1 else (second < 0 < first)
            if not ok:
                raise ConfigurationError(
                    f"class {self.class_label} walker directions do not match the label "
                    f"(speeds {first:+.3f}, {second:+.3f} m/s)"
                )


@dataclass
class RawDataCube:
    """Complex N x M received samples, rows ordered PRI-major (n = q*P + p)."""

    data: np.ndarray
    params: RadarParams
    label: Optional[int] = None

    def __post_init__(self):
        expected = (self.params.num_samples, self.params.num_rx)
        if self.data.shape != expected:
            raise ConfigurationError(f"cube shape {self.data.shape} != {expected}")
        if not np.all(np.isfinite(self.data)):
            raise ConfigurationError("cube contains non-finite samples")


def scatterer_tracks(spec: WalkerSpec, t):
    """Ranges, radial velocities and amplitudes of the torso and two limbs.

    Returns arrays of shape ``(3, len(t))``, ``(3, len(t))`` and ``(3,)``.
    Velocities are integrated in closed form so the torso starts exactly at
    ``initial_range_m``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    rng = np.random.default_rng(spec.phase_seed)
    limb_phase, bob_phase = rng.uniform(0.0, 2.0 * np.pi, size=2)

    v0, g = spec.radial_speed_mps, spec.gait_hz
    w_bob = 4.0 * np.pi * g
    torso_v = v0 + spec.torso_bob_mps * np.sin(w_bob * t + bob_phase)
    torso_r = spec.initial_range_m + v0 * t + spec.torso_bob_mps / w_bob * (
        np.cos(bob_phase) - np.cos(w_bob * t + bob_phase)
    )

    w_gait = 2.0 * np.pi * g
    ranges = [torso_r]
    velocities = [torso_v]
    for phi in (limb_phase, limb_phase + np.pi):
        velocities.append(torso_v + spec.limb_sway_mps * np.sin(w_gait * t + phi))
        ranges.append(torso_r + spec.limb_sway_mps / w_gait * (np.cos(phi) - np.cos(w_gait * t + phi)))
    amps = np.array([spec.torso_rcs, spec.limb_rcs, spec.limb_rcs], dtype=float)
    return np.vstack(ranges), np.vstack(velocities), amps


def walker_state(spec: WalkerSpec, t: float, duration_s: Optional[float] = None):
    """Scatterer states ``[(range_m, radial_velocity_mps, amplitude), ...]`` at time ``t``."""
    if t < 0 or (duration_s is not None and t > duration_s):
        raise DomainError(f"t={t} outside observation window [0, {duration_s}]")
    r, v, a = scatterer_tracks(spec, [t])
    return [(float(r[i, 0]), float(v[i, 0]), float(a[i])) for i in range(3)]


def signal_power(scene: SceneSpec) -> float:
    """Expected per-channel signal power of a scene (sum of squared amplitudes)."""
    return float(sum(w.torso_rcs**2 + 2.0 * w.limb_rcs**2 for w in scene.walkers))


def validate_scene(scene: SceneSpec, params: RadarParams) -> None:
    if not np.isclose(scene.duration_s, params.duration_s, rtol=1e-9):
        raise ConfigurationError(
            f"scene duration {scene.duration_s} s != num_pri * pri_s = {params.duration_s} s"
        )
    vmax = params.max_unambiguous_speed_mps
    t = np.arange(params.num_pri) * params.pri_s
    for i, w in enumerate(scene.walkers):
        if not w.peak_speed_mps < vmax:
            raise ConfigurationError(
                f"walker {i}: peak radial speed {w.peak_speed_mps:.3f} m/s is Doppler-ambiguous "
                f"(limit {vmax:.3f} m/s)"
            )
        ranges, _, _ = scatterer_tracks(w, t)
        if ranges.min() <= 0:
            raise ConfigurationError(f"walker {i}: range becomes non-positive within the window")


def synthesize(scene: SceneSpec, params: RadarParams) -> RawDataCube:
    """Simulate the raw N x M data cube of a scene. Deterministic in ``(scene, params)``."""
    validate_scene(scene, params)
    P, Q, M = params.samples_per_pri, params.num_pri, params.num_rx
    geometry = params.geometry
    t = np.arange(Q) * params.pri_s
    p = np.arange(P)
    data = np.zeros((P * Q, M), dtype=complex)

    for w in scene.walkers:
        ranges, _, amps = scatterer_tracks(w, t)
        base = np.zeros((Q, P), dtype=complex)
        for r, amp in zip(ranges, amps):
            if amp == 0:
                continue
            fast = (2.0 * np.pi / params.adc_rate_sps) * params.beat_frequency(r)[:, None] * p[None, :]
            slow = (4.0 * np.pi / params.wavelength_m) * r[:, None]
            base += amp * np.exp(1j * (fast + slow))
        a = steering_vector(geometry, w.azimuth_deg).elements
        data += base.reshape(-1)[:, None] * a[None, :]

    if params.noise_variance > 0:
        rng = np.random.default_rng(scene.noise_seed)
        scale = np.sqrt(params.noise_variance / 2.0)
        data += scale * (rng.standard_normal((P * Q, M)) + 1j * rng.standard_normal((P * Q, M)))
    return RawDataCube(data=data, params=params, label=scene.class_label)


@dataclass(frozen=True)
class DatasetConfig:
    """How labelled two-walker examples are drawn.

    Each ``*_range`` is a ``(low, high)`` uniform jitter interval.  The
    approaching walker starts in ``far_range_m`` and the receding one in
    ``near_range_m``.
    """

    angles_deg: tuple = (75.0, 105.0)
    class_counts: tuple = (60, 60)
    speed_range_mps: tuple = (0.4, 0.8)
    gait_range_hz: tuple = (0.8, 1.2)
    near_range_m: tuple = (1.5, 2.5)
    far_range_m: tuple = (11.0, 12.0)
    torso_rcs_range: tuple = (0.8, 1.2)
    limb_rcs_range: tuple = (0.3, 0.5)
    limb_sway_mps: float = 0.12
    torso_bob_mps: float = 0.02
    master_seed: int = 0

    def __post_init__(self):
        for name in ("angles_deg", "class_counts", "speed_range_mps", "gait_range_hz",
                     "near_range_m", "far_range_m", "torso_rcs_range", "limb_rcs_range"):
            value = tuple(getattr(self, name))
            if len(value) != 2:
                raise ConfigurationError(f"scene.{name} needs exactly two values")
            if name not in ("angles_deg", "class_counts") and value[0] > value[1]:
                raise ConfigurationError(f"scene.{name}: low bound exceeds high bound")
            object.__setattr__(self, name, value)
        for angle in self.angles_deg:
            if not 0 <= angle <= 180:
                raise ConfigurationError(f"scene.angles_deg {angle} outside [0, 180]")
        if any(int(c) != c or c < 0 for c in self.class_counts):
            raise ConfigurationError("scene.class_counts must be non-negative integers")
        if self.speed_range_mps[0] <= 0:
            raise ConfigurationError("scene.speed_range_mps must be strictly positive")
        if self.near_range_m[0] <= 0:
            raise ConfigurationError("scene.near_range_m must be strictly positive")


@dataclass(frozen=True)
class ExamplePlan:
    index: int
    label: int
    seed: int
    scene: SceneSpec = field(repr=False)


def example_seeds(master_seed: int, count: int) -> list:
    """Per-example 63-bit seeds spawned deterministically from ``master_seed``."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(c.generate_state(1, np.uint64)[0] >> np.uint64(1)) for c in children]


def draw_scene(config: DatasetConfig, params: RadarParams, label: int, seed: int) -> SceneSpec:
    """Draw one labelled two-walker scene from the jitter distributions."""
    if label not in (1, 2):
        raise DomainError(f"label must be 1 or 2, got {label!r}")
    rng = np.random.default_rng(seed)
    walkers = []
    for i, azimuth in enumerate(config.angles_deg):
        approaching = (label == 1) == (i == 0)
        speed = rng.uniform(*config.speed_range_mps)
        start = rng.uniform(*(config.far_range_m if approaching else config.near_range_m))
        walkers.append(WalkerSpec(
            azimuth_deg=float(azimuth),
            initial_range_m=float(start),
            radial_speed_mps=float(-speed if approaching else speed),
            gait_hz=float(rng.uniform(*config.gait_range_hz)),
            torso_rcs=float(rng.uniform(*config.torso_rcs_range)),
            limb_rcs=float(rng.uniform(*config.limb_rcs_range)),
            limb_sway_mps=config.limb_sway_mps,
            phase_seed=int(rng.integers(2**63)),
            torso_bob_mps=config.torso_bob_mps,
        ))
    return SceneSpec(walkers=tuple(walkers), class_label=label,
                     duration_s=params.duration_s, noise_seed=int(rng.integers(2**63)))


def dataset_plan(config: DatasetConfig, params: RadarParams) -> list:
    """Labelled scenes for every example: all Class-1 examples first, then Class-2."""
    n1, n2 = (int(c) for c in config.class_counts)
    if n1 + n2 == 0:
        raise DomainError("dataset must contain at least one example")
    labels = [1] * n1 + [2] * n2
    seeds = example_seeds(config.master_seed, len(labels))
    return [ExamplePlan(i, lab, s, draw_scene(config, params, lab, s))
            for i, (lab, s) in enumerate(zip(labels, seeds))]


def make_dataset(config: DatasetConfig, params: RadarParams) -> list:
    """Synthesize every example of :func:`dataset_plan` in memory."""
    return [synthesize(plan.scene, params) for plan in dataset_plan(config, params)]


def with_noise(params: RadarParams, noise_variance: float) -> RadarParams:
    return replace(params, noise_variance=noise_variance)


def static_scatterer(azimuth_deg: float, range_m: float, amplitude: float = 1.0) -> WalkerSpec:
    """A motionless point reflector (no limbs, no torso ripple)."""
    return WalkerSpec(azimuth_deg=azimuth_deg, initial_range_m=range_m, radial_speed_mps=0.0,
                      torso_rcs=amplitude, limb_rcs=0.0, limb_sway_mps=0.0, torso_bob_mps=0.0)


def scene_from_walkers(params: RadarParams, walkers: Sequence[WalkerSpec],
                       class_label: Optional[int] = None, noise_seed: int = 0) -> SceneSpec:
    return SceneSpec(walkers=tuple(walkers), class_label=class_label,
                     duration_s=params.duration_s, noise_seed=noise_seed)
