"""Binary persistence: per-user dataset containers and model files.

Dataset container ("FCDS"): a fixed little-endian header followed by
contiguous float32 sample tensors and labels.  The train/validation split is
re-derived from the stored seed, so a write/read round trip reproduces the
dataset exactly at 32-bit precision.

Model file ("FCMP"): header with an architecture digest plus the flat
float64 parameter vector.
"""

import struct

import numpy as np

from .net.model import param_count_actual
from .pilots import LocalDataset, TrainingSample, split_indices

DATASET_MAGIC = b"FCDS"
MODEL_MAGIC = b"FCMP"
DATASET_VERSION = 1
MODEL_VERSION = 1

_SCENARIOS = ("mmimo", "irs")
_DATASET_HEADER = struct.Struct("<4sIIIIIIIIQQ")
_MODEL_HEADER = struct.Struct("<4sI16sQ")


class DataFormatError(ValueError):
    pass


def write_dataset(path, dataset, scenario, seed, m_sub):
    """Serialize one user's LocalDataset; floats are stored at 32-bit precision."""
    if scenario not in _SCENARIOS:
        raise DataFormatError(f"unknown scenario {scenario!r}")
    samples = dataset.samples
    if not samples:
        raise DataFormatError("refusing to write an empty dataset")
    rows, cols, planes = samples[0].input.shape
    label_len = len(samples[0].label)
    header = _DATASET_HEADER.pack(
        DATASET_MAGIC, DATASET_VERSION, _SCENARIOS.index(scenario), dataset.user,
        rows, cols, planes, label_len, m_sub, len(samples), seed)
    with open(path, "wb") as fh:
        fh.write(header)
        for s in samples:
            if s.input.shape != (rows, cols, planes) or len(s.label) != label_len:
                raise DataFormatError("inconsistent sample dims")
            fh.write(np.ascontiguousarray(s.input, dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(s.label, dtype="<f4").tobytes())


def read_dataset(path):
    """Load a dataset container; returns (LocalDataset, scenario, seed)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _DATASET_HEADER.size:
        raise DataFormatError("truncated header")
    (magic, version, scen_idx, user, rows, cols, planes, label_len,
     m_sub, count, seed) = _DATASET_HEADER.unpack_from(raw)
    if magic != DATASET_MAGIC:
        raise DataFormatError(f"bad magic {magic!r}")
    if version != DATASET_VERSION:
        raise DataFormatError(f"unsupported dataset version {version}")
    if scen_idx >= len(_SCENARIOS):
        raise DataFormatError(f"bad scenario code {scen_idx}")
    scenario = _SCENARIOS[scen_idx]

    input_size = rows * cols * planes
    record = (input_size + label_len) * 4
    payload = raw[_DATASET_HEADER.size:]
    if len(payload) < count * record:
        raise DataFormatError(f"truncated payload: have {len(payload)} bytes, "
                              f"need {count * record}")
    if len(payload) != count * record:
        raise DataFormatError("payload length does not match header-declared dims")

    flat = np.frombuffer(payload, dtype="<f4").reshape(count, input_size + label_len)
    samples = []
    for i in range(count):
        inp = flat[i, :input_size].reshape(rows, cols, planes).astype(np.float64)
        lab = flat[i, input_size:].astype(np.float64)
        sub = i % m_sub if scenario == "mmimo" else None
        samples.append(TrainingSample(input=inp, label=lab, scenario=scenario,
                                      user=user, subcarrier=sub))
    train, val = split_indices(count, seed, user)
    return LocalDataset(user=user, samples=samples, train_indices=train,
                        val_indices=val), scenario, seed


def write_model(path, params, spec):
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (param_count_actual(spec),):
        raise DataFormatError("parameter vector does not match the architecture")
    header = _MODEL_HEADER.pack(MODEL_MAGIC, MODEL_VERSION, spec.digest(), len(params))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(params.astype("<f8").tobytes())


def read_model(path, spec):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _MODEL_HEADER.size:
        raise DataFormatError("truncated header")
    magic, version, digest, length = _MODEL_HEADER.unpack_from(raw)
    if magic != MODEL_MAGIC:
        raise DataFormatError(f"bad magic {magic!r}")
    if version != MODEL_VERSION:
        raise DataFormatError(f"unsupported model version {version}")
    if digest != spec.digest():
        raise DataFormatError("model file was written for a different architecture")
    payload = raw[_MODEL_HEADER.size:]
    if len(payload) != length * 8:
        raise DataFormatError("truncated payload")
    params = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    if params.shape != (param_count_actual(spec),):
        raise DataFormatError("parameter vector does not match the architecture")
    return params
