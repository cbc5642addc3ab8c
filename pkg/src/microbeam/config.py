"""Experiment configuration: profiles, flat dotted-key files, validation.

A config file is flat ``section.key = value`` text (a TOML subset)::

    # desk-scale run with a narrower angle pair
    radar.noise_variance = 0.5
    scene.angles_deg = [80.0, 100.0]
    pca.k = 1

Keys not listed in :func:`schema` are rejected.  Values override the chosen
profile (``desk`` or ``full``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .dsp import GatePolicy, ProcessingConfig
from .errors import ConfigurationError, MicrobeamError
from .scene import DatasetConfig, RadarParams

PROFILES = ("desk", "full")


@dataclass(frozen=True)
class ExperimentConfig:
    radar: RadarParams = field(default_factory=RadarParams)
    scene: DatasetConfig = field(default_factory=DatasetConfig)
    processing: ProcessingConfig = field(default_factory=ProcessingConfig)
    k: int = 2
    train_per_class: int = 46
    split_seed: int = 0
    metric: str = "euclidean"

    def __post_init__(self):
        validate(self)

    @property
    def look_angles(self) -> tuple:
        return tuple(self.scene.angles_deg)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, scene=replace(self.scene, master_seed=int(seed)))

    def to_flat(self) -> dict:
        flat = {}
        for section, obj in (("radar", self.radar), ("scene", self.scene)):
            for f in fields(obj):
                flat[f"{section}.{f.name}"] = _plain(getattr(obj, f.name))
        p = self.processing
        flat.update({
            "processing.window": p.window,
            "processing.window_length": p.window_length,
            "processing.hop": p.hop,
            "processing.frames": p.frames,
            "processing.gate": p.gate.kind,
            "processing.gate_energy_fraction": p.gate.energy_fraction,
            "processing.gate_bins": list(p.gate.bounds),
            "pca.k": self.k,
            "split.train_per_class": self.train_per_class,
            "split.seed": self.split_seed,
            "classify.metric": self.metric,
        })
        return flat

    def to_text(self) -> str:
        return "".join(f"{key} = {_toml_value(value)}\n" for key, value in sorted(self.to_flat().items()))


def _plain(value):
    return list(value) if isinstance(value, tuple) else value


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    return repr(value)


def profile_defaults(profile: str = "desk") -> ExperimentConfig:
    """Baseline configuration of a named profile.

    ``full`` uses the 512 x 12000 PRI grid and 384 spectrogram frames;
    ``desk`` shrinks it to 128 samples x 4000 PRIs (4 s) and 126 frames.
    The desk chirp sweeps 2.5 GHz so the 128 range bins still span the
    walkers' trajectories.
    """
    if profile == "full":
        return ExperimentConfig()
    if profile == "desk":
        return ExperimentConfig(
            radar=RadarParams(bandwidth_hz=2.5e9, adc_rate_sps=128e3, samples_per_pri=128, num_pri=4000),
            scene=DatasetConfig(near_range_m=(1.0, 2.0), far_range_m=(4.5, 5.5)),
            processing=ProcessingConfig(frames=126),
        )
    raise ConfigurationError(f"unknown profile {profile!r}; choose from {PROFILES}")


def schema() -> dict:
    """Every accepted key with its default-profile value (which also fixes its type)."""
    return profile_defaults("full").to_flat()


def _coerce(key: str, value, template):
    if isinstance(template, bool):
        if not isinstance(value, bool):
            raise ConfigurationError(f"{key}: expected true/false")
        return value
    if isinstance(template, int):
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigurationError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(template, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if isinstance(template, str):
        if not isinstance(value, str):
            raise ConfigurationError(f"{key}: expected a string, got {value!r}")
        return value
    if isinstance(template, list):
        if not isinstance(value, list) or len(value) != len(template):
            raise ConfigurationError(f"{key}: expected a list of {len(template)} values")
        return [_coerce(key, v, t) for v, t in zip(value, template)]
    raise ConfigurationError(f"{key}: unsupported value {value!r}")


def from_flat(overrides: dict, profile: str = "desk") -> ExperimentConfig:
    """Apply flat dotted-key overrides to a profile and validate the result."""
    flat = profile_defaults(profile).to_flat()
    known = schema()
    unknown = sorted(set(overrides) - set(known))
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in overrides.items():
        flat[key] = _coerce(key, value, known[key])
    return build(flat)


def build(flat: dict) -> ExperimentConfig:
    def section(prefix, cls):
        kwargs = {}
        for f in fields(cls):
            value = flat[f"{prefix}.{f.name}"]
            kwargs[f.name] = tuple(value) if isinstance(value, list) else value
        return cls(**kwargs)

    try:
        if flat["processing.gate"] == "explicit":
            gate = GatePolicy.explicit(*flat["processing.gate_bins"])
        else:
            gate = GatePolicy(flat["processing.gate"], flat["processing.gate_energy_fraction"],
                              tuple(flat["processing.gate_bins"]))
        processing = ProcessingConfig(
            window=flat["processing.window"], window_length=flat["processing.window_length"],
            hop=flat["processing.hop"], frames=flat["processing.frames"], gate=gate,
        )
        return ExperimentConfig(
            radar=section("radar", RadarParams), scene=section("scene", DatasetConfig),
            processing=processing, k=flat["pca.k"], train_per_class=flat["split.train_per_class"],
            split_seed=flat["split.seed"], metric=flat["classify.metric"],
        )
    except ConfigurationError:
        raise
    except MicrobeamError as exc:
        raise ConfigurationError(str(exc)) from exc


def _flatten(table: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in table.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = value
    return out


def parse_text(text: str, profile: str = "desk") -> ExperimentConfig:
    try:
        table = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    return from_flat(_flatten(table), profile)


def load(path, profile: str = "desk") -> ExperimentConfig:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigurationError(f"{path}: config is not UTF-8 text") from exc
    return parse_text(text, profile)


def validate(config: ExperimentConfig) -> None:
    """Cross-module checks that no single dataclass can make on its own."""
    radar, scene, proc = config.radar, config.scene, config.processing
    if proc.window_length > radar.num_pri:
        raise ConfigurationError(
            f"processing.window_length={proc.window_length} exceeds radar.num_pri={radar.num_pri}")
    if not 1 <= config.k <= proc.frames:
        raise ConfigurationError(f"pca.k={config.k} must lie in 1..processing.frames={proc.frames}")
    if config.train_per_class < 1:
        raise ConfigurationError("split.train_per_class must be >= 1")
    if config.metric not in ("euclidean", "manhattan"):
        raise ConfigurationError(f"classify.metric {config.metric!r} not supported")
    if proc.gate.kind == "explicit" and not proc.gate.bounds[1] < radar.samples_per_pri:
        raise ConfigurationError("processing.gate_bins exceed the number of range bins")

    if not scene.gait_range_hz[0] > 0:
        raise ConfigurationError("scene.gait_range_hz must be strictly positive")
    peak = scene.speed_range_mps[1] + scene.limb_sway_mps + scene.torso_bob_mps
    if not peak < radar.max_unambiguous_speed_mps:
        raise ConfigurationError(
            f"walker peak speed {peak:.3f} m/s is Doppler-ambiguous "
            f"(limit {radar.max_unambiguous_speed_mps:.3f} m/s)")
    excursion = (scene.limb_sway_mps / (math.pi * scene.gait_range_hz[0])
                 + scene.torso_bob_mps / (2 * math.pi * scene.gait_range_hz[0]))
    closest = scene.far_range_m[0] - scene.speed_range_mps[1] * radar.duration_s - excursion
    if not closest > 0:
        raise ConfigurationError(
            f"approaching walkers can reach non-positive range ({closest:.2f} m); "
            "raise scene.far_range_m or shorten the observation")
