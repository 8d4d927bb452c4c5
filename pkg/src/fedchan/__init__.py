"""Federated channel estimation testbed.

Deterministic simulator for pilot-based channel estimation with a
from-scratch CNN trained either centrally or federatively under noisy,
quantized and lossy model transport, plus classical baselines and the
transmission-overhead accounting.
"""

from .channel import (IrsChannelSet, IrsPhaseVector, PathSet, SystemConfig,
                      delay_tap, gen_irs_channels, gen_user_paths,
                      irs_reflect_gain, ofdm_channel, steering_vector)
from .config import ExperimentConfig, load_config, parse_config
from .net import NetworkSpec
from .pilots import (LocalDataset, PilotConfig, TrainingSample,
                     collect_local_dataset, make_sample_irs, make_sample_mimo,
                     preprocess_mimo, receive_cascaded_sweep, receive_direct_irs,
                     receive_pilots_mimo)
from .training import CorruptionConfig, TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "CorruptionConfig", "ExperimentConfig", "IrsChannelSet", "IrsPhaseVector",
    "LocalDataset", "NetworkSpec", "PathSet", "PilotConfig", "SystemConfig",
    "TrainConfig", "TrainingSample", "collect_local_dataset", "delay_tap",
    "gen_irs_channels", "gen_user_paths", "irs_reflect_gain", "load_config",
    "make_sample_irs", "make_sample_mimo", "ofdm_channel", "parse_config",
    "preprocess_mimo", "receive_cascaded_sweep", "receive_direct_irs",
    "receive_pilots_mimo", "steering_vector", "train",
]
