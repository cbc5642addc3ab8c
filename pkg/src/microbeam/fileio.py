"""Binary file formats, PGM rendering and atomic writes.

All multi-byte fields are little-endian.

Cube file (``.mbc``)::

    "MBC1" | u32 version | u64 N | u32 M | 9 x f64 radar params | u8 label (0 = none)
    N*M complex samples as interleaved f32 (real, imag), row-major (sample-major, channel-minor)

Spectrogram file (``.mbs``)::

    "MBS1" | u32 version | u32 F | u32 T | f64 look angle | u32 hop | u32 window id
    F*T f32 power values, row-major (frequency-major)

Model file (``.mbm``)::

    "MBM1" | u32 version | u64 header length | UTF-8 JSON header | raw arrays

The JSON header is written with sorted keys and describes each array by
name, dtype, shape and byte offset into the payload.
"""
from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classify import NnModel
from .config import ExperimentConfig, build, schema
from .dsp import WINDOW_KINDS, Spectrogram
from .errors import FormatError
from .features import PcaModel, to_db
from .scene import RadarParams, RawDataCube

VERSION = 1

CUBE_MAGIC = b"MBC1"
CUBE_HEADER = struct.Struct("<4sIQI9dB")
SPEC_MAGIC = b"MBS1"
SPEC_HEADER = struct.Struct("<4sIIIdII")
MODEL_MAGIC = b"MBM1"
MODEL_PREFIX = struct.Struct("<4sIQ")

_RADAR_FIELDS = ("carrier_hz", "bandwidth_hz", "pri_s", "adc_rate_sps", "samples_per_pri",
                 "num_pri", "num_rx", "noise_variance", "spacing_wavelengths")
_INT_RADAR_FIELDS = {"samples_per_pri", "num_pri", "num_rx"}


def atomic_write(path, payload: bytes) -> None:
    """Write ``payload`` to a temporary sibling file and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _check_prefix(buf: bytes, magic: bytes, what: str, min_len: int):
    if len(buf) < min_len:
        raise FormatError(f"{what} file truncated ({len(buf)} bytes)")
    if buf[:4] != magic:
        raise FormatError(f"not a {what} file (magic {buf[:4]!r}, expected {magic!r})")
    version = struct.unpack_from("<I", buf, 4)[0]
    if version != VERSION:
        raise FormatError(f"unsupported {what} file version {version} (this reader handles {VERSION})")


# -- cubes ------------------------------------------------------------------

def cube_to_bytes(cube: RawDataCube) -> bytes:
    N, M = cube.data.shape
    params = [float(getattr(cube.params, name)) for name in _RADAR_FIELDS]
    header = CUBE_HEADER.pack(CUBE_MAGIC, VERSION, N, M, *params, cube.label or 0)
    samples = np.ascontiguousarray(cube.data, dtype="<c8")
    return header + samples.tobytes()


def cube_from_bytes(buf: bytes) -> RawDataCube:
    _check_prefix(buf, CUBE_MAGIC, "cube", CUBE_HEADER.size)
    _, _, N, M, *params, label = CUBE_HEADER.unpack_from(buf)
    expected = CUBE_HEADER.size + 8 * N * M
    if len(buf) != expected:
        raise FormatError(f"cube payload has {len(buf)} bytes, header implies {expected}")
    kwargs = {name: (int(v) if name in _INT_RADAR_FIELDS else v) for name, v in zip(_RADAR_FIELDS, params)}
    radar = RadarParams(**kwargs)
    data = np.frombuffer(buf, dtype="<c8", offset=CUBE_HEADER.size).reshape(N, M).astype(complex)
    return RawDataCube(data=data, params=radar, label=label or None)


def save_cube(path, cube: RawDataCube) -> None:
    atomic_write(path, cube_to_bytes(cube))


def load_cube(path) -> RawDataCube:
    return cube_from_bytes(Path(path).read_bytes())


# -- spectrograms -----------------------------------------------------------

def spectrogram_to_bytes(spec: Spectrogram) -> bytes:
    F, T = spec.power.shape
    header = SPEC_HEADER.pack(SPEC_MAGIC, VERSION, F, T, float(spec.look_angle_deg), spec.hop,
                              WINDOW_KINDS.index(spec.window_kind))
    return header + np.ascontiguousarray(spec.power, dtype="<f4").tobytes()


def spectrogram_from_bytes(buf: bytes) -> Spectrogram:
    _check_prefix(buf, SPEC_MAGIC, "spectrogram", SPEC_HEADER.size)
    _, _, F, T, look, hop, window_id = SPEC_HEADER.unpack_from(buf)
    expected = SPEC_HEADER.size + 4 * F * T
    if len(buf) != expected:
        raise FormatError(f"spectrogram payload has {len(buf)} bytes, header implies {expected}")
    if window_id >= len(WINDOW_KINDS):
        raise FormatError(f"unknown window id {window_id}")
    power = np.frombuffer(buf, dtype="<f4", offset=SPEC_HEADER.size).reshape(F, T).astype(float)
    return Spectrogram(power=power, look_angle_deg=look, hop=hop, window_kind=WINDOW_KINDS[window_id])


def save_spectrogram(path, spec: Spectrogram) -> None:
    atomic_write(path, spectrogram_to_bytes(spec))


def load_spectrogram(path) -> Spectrogram:
    return spectrogram_from_bytes(Path(path).read_bytes())


# -- rendering --------------------------------------------------------------

def render_pgm(power: np.ndarray, dynamic_range_db: float = 60.0) -> bytes:
    """8-bit binary PGM: time left to right, positive Doppler up, peak at 255.

    The top ``dynamic_range_db`` below the peak maps linearly onto 0..255.
    An all-zero image renders uniformly black.
    """
    power = np.asarray(power, dtype=float)
    F, T = power.shape
    if power.max() > 0:
        db = to_db(power)
        scaled = (db - (db.max() - dynamic_range_db)) / dynamic_range_db
        pixels = np.clip(np.round(255.0 * scaled), 0, 255).astype(np.uint8)
    else:
        pixels = np.zeros((F, T), dtype=np.uint8)
    return f"P5\n{T} {F}\n255\n".encode("ascii") + np.ascontiguousarray(pixels[::-1]).tobytes()


def read_pgm(buf: bytes) -> np.ndarray:
    parts = buf.split(b"\n", 3)
    if parts[0] != b"P5" or len(parts) < 4:
        raise FormatError("not a binary PGM image")
    width, height = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(height, width)


# -- model files ------------------------------------------------------------

@dataclass(frozen=True)
class TrainedModel:
    """Everything needed to classify new spectrogram pairs."""

    config: ExperimentConfig
    pca: tuple
    nn: NnModel
    train_ids: tuple = ()


def _model_arrays(model: TrainedModel) -> list:
    arrays = []
    for tag, pca in zip(("theta1", "theta2"), model.pca):
        arrays += [(f"{tag}.mean_image", pca.mean_image.astype("<f8")),
                   (f"{tag}.basis", pca.basis.astype("<f8")),
                   (f"{tag}.eigenvalues", pca.eigenvalues.astype("<f8"))]
    arrays += [("nn.features", model.nn.features.astype("<f8")),
               ("nn.labels", model.nn.labels.astype("<i8"))]
    return arrays


def model_to_bytes(model: TrainedModel) -> bytes:
    descriptors, blobs, offset = [], [], 0
    for name, arr in _model_arrays(model):
        blob = np.ascontiguousarray(arr).tobytes()
        descriptors.append({"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape), "offset": offset})
        blobs.append(blob)
        offset += len(blob)
    header = {
        "format": "microbeam-model",
        "config": model.config.to_flat(),
        "k": model.pca[0].K,
        "metric": model.nn.metric,
        "train_ids": list(model.train_ids),
        "arrays": descriptors,
    }
    text = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return MODEL_PREFIX.pack(MODEL_MAGIC, VERSION, len(text)) + text + b"".join(blobs)


def model_from_bytes(buf: bytes) -> TrainedModel:
    _check_prefix(buf, MODEL_MAGIC, "model", MODEL_PREFIX.size)
    _, _, header_len = MODEL_PREFIX.unpack_from(buf)
    start = MODEL_PREFIX.size + header_len
    if len(buf) < start:
        raise FormatError("model header truncated")
    try:
        header = json.loads(buf[MODEL_PREFIX.size:start].decode("utf-8"))
        flat = header["config"]
        if set(flat) != set(schema()):
            raise FormatError("model config block does not match this version's schema")
        config = build(flat)
        arrays = {}
        for d in header["arrays"]:
            dtype = np.dtype(d["dtype"])
            count = int(np.prod(d["shape"], dtype=np.int64))
            end = start + d["offset"] + count * dtype.itemsize
            if end > len(buf):
                raise FormatError(f"model array {d['name']} truncated")
            arrays[d["name"]] = np.frombuffer(buf, dtype=dtype, count=count,
                                              offset=start + d["offset"]).reshape(d["shape"]).copy()
        pca = tuple(PcaModel(mean_image=arrays[f"{t}.mean_image"], basis=arrays[f"{t}.basis"],
                             eigenvalues=arrays[f"{t}.eigenvalues"]) for t in ("theta1", "theta2"))
        nn = NnModel(arrays["nn.features"], arrays["nn.labels"], header["metric"])
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"corrupt model file: {exc}") from exc
    return TrainedModel(config=config, pca=pca, nn=nn, train_ids=tuple(header["train_ids"]))


def save_model(path, model: TrainedModel) -> None:
    atomic_write(path, model_to_bytes(model))


def load_model(path) -> TrainedModel:
    return model_from_bytes(Path(path).read_bytes())
