"""Experiment configuration: defaults, profiles and the key=value parser.

The file format is flat key = value lines with optional [section] headers,
'#' comments, booleans true/false and comma-separated lists.  Keys are
globally unique; assigning a key twice is an error.  Every field defaults to
the reference simulation value; the desk profile shrinks the system and the
network so the whole pipeline runs in minutes on a laptop.
"""

import math
from dataclasses import dataclass, replace

from .channel import SystemConfig
from .pilots import PilotConfig
from .training import CorruptionConfig, TrainConfig


class ConfigError(ValueError):
    pass


SWEEP_AXES = ("k_users", "snr_theta", "zeta", "bits", "pilot_snr")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "mmimo"
    # system
    n_bs: int = 128
    n_ms: int = 32
    n_irs: int = 64
    m_sub: int = 16
    cp_len: int = 4
    n_paths: int = 5
    n_paths_b: int = 5
    n_paths_s: int = 5
    n_paths_irs: int = 5
    sym_period: float = 1.0
    k_users: int = 8
    antenna_spacing: float = 0.5
    # pilots
    m_bs: int | None = None
    m_ms: int | None = None
    snr_levels_db: tuple = (20.0, 25.0, 30.0)
    rho: float = 1.0
    label_noise_db: float | None = None
    # network
    n_filters: int = 128
    fc_width: int = 1024
    kappa: float = 0.5
    # training
    mode: str = "fl"
    rounds: int = 100
    lr: float = 0.001
    momentum: float = 0.9
    batch_size: int | None = 128
    local_batches: int = 1
    # transport corruption
    snr_theta_db: float | None = None
    quant_bits: int | None = None
    erasure_frac: float = 0.0
    apply_uplink: bool = True
    apply_downlink: bool = True
    snr_convention: str = "verbatim"
    literal_erasure_count: bool = False
    # data generation / evaluation
    n_realizations: int = 100
    aug_per_snr: int = 20
    eval_snr_db: float = 25.0
    eval_trials: int = 100
    # experiment driver
    sweep: str | None = None
    sweep_values: tuple = ()
    seeds: tuple = (0,)
    out_dir: str = "results"

    def __post_init__(self):
        if self.scenario not in ("mmimo", "irs"):
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.sweep is not None and self.sweep not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.sweep!r}")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative")

    def system(self):
        return SystemConfig(n_bs=self.n_bs, n_ms=self.n_ms, n_irs=self.n_irs,
                            m_sub=self.m_sub, cp_len=self.cp_len,
                            n_paths=self.n_paths, n_paths_b=self.n_paths_b,
                            n_paths_s=self.n_paths_s, n_paths_irs=self.n_paths_irs,
                            sym_period=self.sym_period, k_users=self.k_users,
                            antenna_spacing=self.antenna_spacing)

    def pilots(self):
        return PilotConfig.for_system(self.system(), m_bs=self.m_bs, m_ms=self.m_ms,
                                      snr_levels_db=self.snr_levels_db, rho=self.rho)

    def train_config(self, seed, mode=None):
        return TrainConfig(mode=self.mode if mode is None else mode,
                           rounds=self.rounds, lr=self.lr, momentum=self.momentum,
                           batch_size=self.batch_size,
                           local_batches=self.local_batches, seed=seed)

    def corruption(self):
        return CorruptionConfig(snr_theta_db=self.snr_theta_db,
                                quant_bits=self.quant_bits,
                                erasure_frac=self.erasure_frac,
                                apply_uplink=self.apply_uplink,
                                apply_downlink=self.apply_downlink,
                                snr_convention=self.snr_convention,
                                literal_erasure_count=self.literal_erasure_count)

    def samples_per_user(self):
        per_real = len(self.snr_levels_db) * self.aug_per_snr
        if self.scenario == "mmimo":
            per_real *= self.m_sub
        return per_real * self.n_realizations

    def total_samples(self):
        return self.samples_per_user() * self.k_users


# Desk-scale preset: small enough for the full acceptance suite to run in
# minutes, while keeping every pipeline stage intact.  The learning rate is
# retuned because the paper-scale value is unstable on the shrunken network.
DESK_PROFILE = {
    "n_bs": 16, "n_ms": 4, "n_irs": 8, "m_sub": 4, "cp_len": 2, "k_users": 4,
    "n_realizations": 50, "aug_per_snr": 2, "rounds": 100, "lr": 2e-4,
    "n_filters": 8, "fc_width": 32, "eval_trials": 50,
}

PROFILES = {"paper": {}, "desk": DESK_PROFILE}


def _parse_bool(text):
    if text == "true":
        return True
    if text == "false":
        return False
    raise ConfigError(f"expected true/false, got {text!r}")


def _parse_optional_float(text):
    if text in ("none", "inf"):
        return None
    return float(text)


def _parse_optional_int(text):
    if text == "none":
        return None
    return int(text)


def _parse_float_list(text):
    return tuple(float(v.strip()) for v in text.split(",") if v.strip())


def _parse_int_list(text):
    return tuple(int(v.strip()) for v in text.split(",") if v.strip())


def _parse_value_list(text):
    # sweep values; 'inf' stands for clean transport
    out = []
    for v in text.split(","):
        v = v.strip()
        if not v:
            continue
        out.append(None if v == "inf" else float(v))
    return tuple(out)


_PARSERS = {
    "scenario": ("experiment", str),
    "n_bs": ("system", int), "n_ms": ("system", int), "n_irs": ("system", int),
    "m_sub": ("system", int), "cp_len": ("system", int),
    "n_paths": ("system", int), "n_paths_b": ("system", int),
    "n_paths_s": ("system", int), "n_paths_irs": ("system", int),
    "sym_period": ("system", float), "k_users": ("system", int),
    "antenna_spacing": ("system", float),
    "m_bs": ("pilot", _parse_optional_int), "m_ms": ("pilot", _parse_optional_int),
    "snr_levels_db": ("pilot", _parse_float_list), "rho": ("pilot", float),
    "label_noise_db": ("pilot", _parse_optional_float),
    "n_filters": ("network", int), "fc_width": ("network", int),
    "kappa": ("network", float),
    "mode": ("train", str), "rounds": ("train", int), "lr": ("train", float),
    "momentum": ("train", float), "batch_size": ("train", _parse_optional_int),
    "local_batches": ("train", int),
    "snr_theta_db": ("corruption", _parse_optional_float),
    "quant_bits": ("corruption", _parse_optional_int),
    "erasure_frac": ("corruption", float),
    "apply_uplink": ("corruption", _parse_bool),
    "apply_downlink": ("corruption", _parse_bool),
    "snr_convention": ("corruption", str),
    "literal_erasure_count": ("corruption", _parse_bool),
    "n_realizations": ("data", int), "aug_per_snr": ("data", int),
    "eval_snr_db": ("data", float), "eval_trials": ("data", int),
    "sweep": ("experiment", str), "values": ("experiment", _parse_value_list),
    "seeds": ("experiment", _parse_int_list), "out_dir": ("experiment", str),
}

_FIELD_NAMES = {"values": "sweep_values"}


def parse_config(text, base=None):
    """Parse key=value text into an ExperimentConfig over optional base values."""
    overrides = {}
    section = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        expected_section, parser = _PARSERS[key]
        if section is not None and section != expected_section:
            raise ConfigError(f"line {line_no}: key {key!r} does not belong to "
                              f"section [{section}]")
        field_name = _FIELD_NAMES.get(key, key)
        if field_name in overrides:
            raise ConfigError(f"line {line_no}: duplicate assignment of {key!r}")
        try:
            overrides[field_name] = parser(value)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"line {line_no}: bad value for {key!r}: {exc}") from exc

    base_cfg = ExperimentConfig() if base is None else base
    try:
        return replace(base_cfg, **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path=None, profile="paper", overrides=None):
    """Profile defaults, then file overrides, then explicit overrides."""
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}")
    cfg = replace(ExperimentConfig(), **PROFILES[profile])
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            cfg = parse_config(fh.read(), base=cfg)
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def sweep_sort_key(value):
    """Numeric sort key for sweep values; clean transport sorts last."""
    return math.inf if value is None else float(value)


def format_value(value):
    """Stable textual form for CSV cells."""
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return repr(value)
    return str(value)
