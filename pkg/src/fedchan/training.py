"""Centralized and federated training with corrupted model transport.

One aggregated update per round: broadcast the model, let every user compute
a local mini-batch gradient, corrupt the uplink, average at the base station
and apply a momentum step.  Corruption order when several impairments are
enabled is quantize -> erase -> AWGN.  Momentum lives at the aggregator only.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import seeding
from .net import model as net

DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class CorruptionConfig:
    snr_theta_db: float | None = None   # None = clean transport
    quant_bits: int | None = None
    erasure_frac: float = 0.0
    apply_uplink: bool = True
    apply_downlink: bool = True
    snr_convention: str = "verbatim"    # or "per_coord"
    literal_erasure_count: bool = False

    def __post_init__(self):
        if self.quant_bits is not None and not 1 <= self.quant_bits <= 16:
            raise ValueError("quant_bits must lie in 1..16")
        if not 0.0 <= self.erasure_frac <= 0.5:
            raise ValueError("erasure_frac must lie in [0, 0.5]")
        if self.snr_convention not in ("verbatim", "per_coord"):
            raise ValueError(f"unknown snr convention {self.snr_convention!r}")

    @property
    def is_clean(self):
        snr_clean = self.snr_theta_db is None or math.isinf(self.snr_theta_db)
        return snr_clean and self.quant_bits is None and self.erasure_frac == 0.0


@dataclass(frozen=True)
class TrainConfig:
    mode: str = "fl"                    # "cl" | "fl"
    rounds: int = 100
    lr: float = 0.001
    momentum: float = 0.9
    batch_size: int | None = 128       # None = full batch
    local_batches: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("cl", "fl"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.local_batches < 1:
            raise ValueError("local_batches must be >= 1")


@dataclass
class RoundLog:
    round_index: int
    user_grad_norms: tuple
    agg_grad_norm: float
    loss: float
    val_rmse: float
    wall_clock: float


@dataclass
class TrainResult:
    params: np.ndarray
    logs: list
    diverged: bool = False
    param_trace: list | None = None

    @property
    def final_val_rmse(self):
        return self.logs[-1].val_rmse if self.logs else math.inf


def corrupt_awgn(v, snr_theta_db, rng, convention="verbatim"):
    """Add transport noise at a target SNR.

    The verbatim convention sets the noise variance to ||v||^2 / 10^(snr/20);
    per_coord uses the mean-square coordinate over a 10-log scale instead.
    """
    if snr_theta_db is None or math.isinf(snr_theta_db):
        return v
    norm2 = float(np.dot(v, v))
    if norm2 == 0.0:
        return v
    if convention == "verbatim":
        sigma2 = norm2 / (10.0 ** (snr_theta_db / 20.0))
    elif convention == "per_coord":
        sigma2 = (norm2 / len(v)) / (10.0 ** (snr_theta_db / 10.0))
    else:
        raise ValueError(f"unknown snr convention {convention!r}")
    return v + np.sqrt(sigma2) * rng.standard_normal(v.shape)


def quantize(v, bits):
    """Uniform symmetric mid-rise quantizer over [-a, a] with a = max|v|.

    Values are reconstructed at cell centers, so the elementwise error is at
    most half a step.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    v = np.asarray(v)
    a = float(np.max(np.abs(v))) if v.size else 0.0
    if a == 0.0:
        return v.copy()
    levels = 2 ** bits
    delta = 2.0 * a / levels
    idx = np.clip(np.floor((v + a) / delta), 0, levels - 1)
    return -a + (idx + 0.5) * delta


def erase(v, zeta, rng, literal_count=False):
    """Zero a uniformly-chosen set of coordinates.

    By default floor(zeta * len(v)) coordinates are dropped; literal_count
    instead drops floor(100 * zeta) coordinates in total.
    """
    if not 0.0 <= zeta <= 0.5:
        raise ValueError("zeta must lie in [0, 0.5]")
    v = np.asarray(v)
    n_zero = int(math.floor(100 * zeta)) if literal_count else int(math.floor(zeta * len(v)))
    n_zero = min(n_zero, len(v))
    if n_zero == 0:
        return v.copy()
    out = v.copy()
    out[rng.choice(len(v), size=n_zero, replace=False)] = 0.0
    return out


def corrupt_vector(v, cfg, rng):
    """Apply the configured transport impairments: quantize -> erase -> AWGN."""
    out = v
    if cfg.quant_bits is not None:
        out = quantize(out, cfg.quant_bits)
    if cfg.erasure_frac > 0.0:
        out = erase(out, cfg.erasure_frac, rng, cfg.literal_erasure_count)
    out = corrupt_awgn(out, cfg.snr_theta_db, rng, cfg.snr_convention)
    return out


def aggregate_and_update(params, grads, lr, velocity, momentum=0.9):
    """Momentum step on the user-mean gradient (fixed user-index order)."""
    if len(grads) < 1:
        raise ValueError("need at least one gradient")
    for g in grads:
        if g.shape != params.shape:
            raise ValueError("gradient layout does not match parameters")
    mean_grad = np.mean(np.stack(grads), axis=0)
    new_params, new_velocity = net.sgd_step(params, mean_grad, lr, velocity, momentum)
    return new_params, new_velocity, mean_grad


def broadcast(params, corruption, seed, round_index, k_users):
    """Per-user downlink copies of the model, corrupted per the downlink flag."""
    if not corruption.apply_downlink or corruption.is_clean:
        return [params for _ in range(k_users)]
    out = []
    for k in range(k_users):
        rng = seeding.derive_rng(seeding.DOWNLINK, seed, round_index, k)
        out.append(corrupt_vector(params, corruption, rng))
    return out


class BatchSelector:
    """Seed-deterministic mini-batch stream: without replacement per epoch."""

    def __init__(self, indices, seed, *keys):
        self._indices = np.asarray(indices)
        if len(self._indices) == 0:
            raise ValueError("empty train split")
        self._rng = seeding.derive_rng(seeding.BATCH, seed, *keys)
        self._order = self._rng.permutation(self._indices)
        self._pos = 0

    def next_batch(self, size):
        if size is None or size >= len(self._indices):
            return self._indices
        if self._pos >= len(self._order):
            self._order = self._rng.permutation(self._indices)
            self._pos = 0
        batch = self._order[self._pos:self._pos + size]
        self._pos += len(batch)
        return batch


def local_gradient(dataset, params, spec, mask, selector, batch_size):
    """Gradient of the mean loss over one local mini-batch; returns (grad, loss)."""
    if len(dataset.train_indices) == 0:
        raise ValueError("empty train split")
    idx = selector.next_batch(batch_size)
    x, y = net.samples_to_arrays([dataset.samples[i] for i in idx])
    return net.backward(params, x, y, spec, mask)


def _validation_arrays(datasets):
    samples = [s for d in datasets for s in d.val_samples]
    if not samples:
        return None
    return net.samples_to_arrays(samples)


def _val_rmse(params, spec, val_arrays):
    if val_arrays is None:
        return math.inf
    x, y = val_arrays
    pred = net.predict(params, x, spec)
    per_sample = np.sum((pred - y) ** 2, axis=1)
    return float(np.sqrt(np.mean(per_sample)))


def train(mode, datasets, spec, train_cfg, corrupt_cfg=None, trace_params=False):
    """Run T rounds of centralized or federated training.

    CL pools every user's train split and performs one mini-batch momentum
    step per round.  FL broadcasts the model, aggregates the (possibly
    corrupted) per-user gradients and applies one momentum step per round.
    Both modes draw the same per-round dropout mask from (seed, round).
    """
    if mode not in ("cl", "fl"):
        raise ValueError(f"unknown mode {mode!r}")
    corrupt_cfg = corrupt_cfg if corrupt_cfg is not None else CorruptionConfig()
    active = [d for d in datasets if len(d.train_indices) > 0]
    if not active:
        raise ValueError("all datasets are empty")

    seed = train_cfg.seed
    params = net.init_params(spec, seed)
    velocity = np.zeros_like(params)
    val_arrays = _validation_arrays(datasets)
    logs = []
    trace = [] if trace_params else None
    if trace_params:
        trace.append(params.copy())

    if mode == "cl":
        pooled = [(d, i) for d in active for i in d.train_indices]
        selector = BatchSelector(np.arange(len(pooled)), seed)
    else:
        selectors = [BatchSelector(d.train_indices, seed, d.user) for d in active]

    initial_loss = None
    diverged = False
    for t in range(train_cfg.rounds):
        t0 = time.perf_counter()
        mask = (net.DropoutMask.for_round(seed, t, spec.kappa, spec.fc_width)
                if spec.fc_width > 0 else None)

        if mode == "cl":
            idx = selector.next_batch(train_cfg.batch_size)
            x, y = net.samples_to_arrays([pooled[i][0].samples[pooled[i][1]] for i in idx])
            grad, round_loss = net.backward(params, x, y, spec, mask)
            params, velocity = net.sgd_step(params, grad, train_cfg.lr,
                                            velocity, train_cfg.momentum)
            user_norms = (float(np.linalg.norm(grad)),)
            agg_norm = user_norms[0]
        else:
            received = broadcast(params, corrupt_cfg, seed, t, len(active))
            uplinked = []
            losses = []
            for k, dataset in enumerate(active):
                partials = []
                for _ in range(train_cfg.local_batches):
                    g, l = local_gradient(dataset, received[k], spec, mask,
                                          selectors[k], train_cfg.batch_size)
                    partials.append(g)
                    losses.append(l)
                g_k = partials[0] if len(partials) == 1 else np.mean(partials, axis=0)
                if corrupt_cfg.apply_uplink and not corrupt_cfg.is_clean:
                    rng = seeding.derive_rng(seeding.UPLINK, seed, t, dataset.user)
                    g_k = corrupt_vector(g_k, corrupt_cfg, rng)
                uplinked.append(g_k)
            params, velocity, mean_grad = aggregate_and_update(
                params, uplinked, train_cfg.lr, velocity, train_cfg.momentum)
            round_loss = float(np.mean(losses))
            user_norms = tuple(float(np.linalg.norm(g)) for g in uplinked)
            agg_norm = float(np.linalg.norm(mean_grad))

        if initial_loss is None:
            initial_loss = round_loss
        blew_up = (not math.isfinite(round_loss)
                   or (initial_loss > 0 and round_loss > DIVERGENCE_FACTOR * initial_loss))
        if blew_up:
            diverged = True
            logs.append(RoundLog(round_index=t, user_grad_norms=user_norms,
                                 agg_grad_norm=agg_norm,
                                 loss=round_loss if math.isfinite(round_loss) else math.inf,
                                 val_rmse=math.inf,
                                 wall_clock=time.perf_counter() - t0))
            if trace_params:
                trace.append(params.copy())
            break

        rmse = _val_rmse(params, spec, val_arrays)
        if not math.isfinite(rmse):
            rmse = math.inf
        logs.append(RoundLog(round_index=t, user_grad_norms=user_norms,
                             agg_grad_norm=agg_norm, loss=round_loss,
                             val_rmse=rmse, wall_clock=time.perf_counter() - t0))
        if trace_params:
            trace.append(params.copy())

    return TrainResult(params=params, logs=logs, diverged=diverged, param_trace=trace)
