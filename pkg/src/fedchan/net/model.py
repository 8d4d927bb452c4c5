"""From-scratch CNN for channel regression.

Architecture (10 layers at the default sizes): input, three conv blocks of
n_filters 3x3 kernels each followed by a parameter-free normalization layer
with ReLU, a fully connected feature-mapping layer, a dropout layer over the
FC units, and a linear output regression layer.  No bias terms anywhere; the
trainable parameters are exactly the conv kernels and the two weight
matrices, exchanged as one flat float64 vector.

Normalization standardizes each feature map per sample over its spatial
extent (epsilon 1e-5).  Keeping the statistics per-sample decouples the loss
across samples, so the gradient of a batch is exactly the mean of per-sample
gradients; train and eval behave identically, so no running statistics are
kept.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .. import seeding
from . import kernels

NORM_EPS = 1e-5


@dataclass(frozen=True)
class NetworkSpec:
    in_rows: int
    in_cols: int
    out_len: int
    in_planes: int = 3
    n_conv: int = 3
    n_filters: int = 128
    kernel: int = 3
    fc_width: int = 1024
    kappa: float = 0.5

    def __post_init__(self):
        if self.in_rows < 1 or self.in_cols < 1 or self.in_planes < 1:
            raise ValueError("input dims must be >= 1")
        if self.n_conv < 0 or self.fc_width < 0 or self.out_len < 0:
            raise ValueError("layer sizes must be non-negative")
        if self.n_conv > 0 and (self.n_filters < 1 or self.kernel < 1):
            raise ValueError("conv blocks need filters and a kernel")
        if self.kernel % 2 == 0:
            raise ValueError("kernel must be odd to preserve spatial dims")
        if not 0 < self.kappa <= 1:
            raise ValueError("kappa must lie in (0, 1]")

    @classmethod
    def for_mimo(cls, cfg, n_filters=128, fc_width=1024, kappa=0.5):
        return cls(in_rows=cfg.n_ms, in_cols=cfg.n_bs,
                   out_len=2 * cfg.n_ms * cfg.n_bs,
                   n_filters=n_filters, fc_width=fc_width, kappa=kappa)

    @classmethod
    def for_irs(cls, cfg, m_bs=None, n_filters=128, fc_width=1024, kappa=0.5):
        m_bs = cfg.n_bs if m_bs is None else m_bs
        return cls(in_rows=cfg.n_irs + 1, in_cols=m_bs,
                   out_len=2 * cfg.n_bs * (cfg.n_irs + 1),
                   n_filters=n_filters, fc_width=fc_width, kappa=kappa)

    @property
    def conv_out_planes(self):
        return self.n_filters if self.n_conv > 0 else self.in_planes

    @property
    def flat_len(self):
        return self.conv_out_planes * self.in_rows * self.in_cols

    def canonical(self):
        return (self.in_rows, self.in_cols, self.out_len, self.in_planes,
                self.n_conv, self.n_filters, self.kernel, self.fc_width, self.kappa)

    def digest(self):
        """Stable 16-byte identity of the architecture, used by the model file."""
        text = "netspec/v1:" + ",".join(repr(v) for v in self.canonical())
        return hashlib.sha256(text.encode()).digest()[:16]


def param_shapes(spec):
    """Trainable tensors in flat-vector order: conv kernels, FC, output."""
    shapes = []
    c = spec.in_planes
    for i in range(spec.n_conv):
        shapes.append((f"conv{i + 1}", (spec.n_filters, c, spec.kernel, spec.kernel)))
        c = spec.n_filters
    if spec.fc_width > 0:
        shapes.append(("fc", (spec.flat_len, spec.fc_width)))
        if spec.out_len > 0:
            shapes.append(("out", (spec.fc_width, spec.out_len)))
    elif spec.out_len > 0:
        shapes.append(("out", (spec.flat_len, spec.out_len)))
    return shapes


def param_count_actual(spec):
    """Exact number of trainable scalars in the implemented architecture."""
    return int(sum(np.prod(shape) for _, shape in param_shapes(spec)))


def param_layout(spec):
    """(name, shape, offset) triples of the flat parameter vector."""
    layout = []
    offset = 0
    for name, shape in param_shapes(spec):
        layout.append((name, shape, offset))
        offset += int(np.prod(shape))
    return layout


def unflatten(params, spec):
    """Views into the flat vector, one per trainable tensor (no copies)."""
    params = np.asarray(params)
    if params.shape != (param_count_actual(spec),):
        raise ValueError(f"parameter vector length {params.shape} does not match "
                         f"spec ({param_count_actual(spec)})")
    return [params[off:off + int(np.prod(shape))].reshape(shape)
            for _, shape, off in param_layout(spec)]


def flatten(arrays):
    return np.concatenate([np.asarray(a).ravel() for a in arrays])


def init_params(spec, seed):
    """Uniform +-sqrt(6 / (fan_in + fan_out)) per layer, seed-deterministic."""
    rng = seeding.derive_rng(seeding.WEIGHT_INIT, seed)
    parts = []
    for name, shape in param_shapes(spec):
        if name.startswith("conv"):
            f, c, kh, kw = shape
            fan_in, fan_out = c * kh * kw, f * kh * kw
        else:
            fan_in, fan_out = shape
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        parts.append(rng.uniform(-bound, bound, int(np.prod(shape))))
    return np.concatenate(parts) if parts else np.zeros(0)


@dataclass(frozen=True)
class DropoutMask:
    """Shared-seed binary keep-mask over the FC units for one training round.

    Derived purely from (seed, round), so every node regenerates the same
    mask; entries are 1 with probability kappa.
    """

    seed: int
    round_index: int
    kappa: float
    mask: np.ndarray

    @classmethod
    def for_round(cls, seed, round_index, kappa, n_units):
        rng = seeding.derive_rng(seeding.DROPOUT, seed, round_index)
        m = (rng.random(n_units) < kappa).astype(np.float64)
        return cls(seed=seed, round_index=round_index, kappa=kappa, mask=m)


def _norm_forward(z):
    mu = z.mean(axis=(2, 3), keepdims=True)
    var = z.var(axis=(2, 3), keepdims=True)
    inv_std = 1.0 / np.sqrt(var + NORM_EPS)
    return (z - mu) * inv_std, inv_std


def _norm_backward(dxhat, xhat, inv_std):
    m1 = dxhat.mean(axis=(2, 3), keepdims=True)
    m2 = (dxhat * xhat).mean(axis=(2, 3), keepdims=True)
    return inv_std * (dxhat - m1 - xhat * m2)


def _to_batch(x, spec):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 3
    xb = x[None] if single else x
    if xb.shape[1:] != (spec.in_rows, spec.in_cols, spec.in_planes):
        raise ValueError(f"input shape {xb.shape[1:]} does not match spec "
                         f"({spec.in_rows}, {spec.in_cols}, {spec.in_planes})")
    return np.ascontiguousarray(xb.transpose(0, 3, 1, 2)), single


def _forward_full(params, xb, spec, mask, train):
    ws = unflatten(params, spec)
    conv_caches = []
    a = xb
    for i in range(spec.n_conv):
        z = kernels.conv2d_forward(a, np.ascontiguousarray(ws[i]))
        xhat, inv_std = _norm_forward(z)
        relu_mask = xhat > 0
        conv_caches.append((a, xhat, inv_std, relu_mask))
        a = xhat * relu_mask
    f = a.reshape(a.shape[0], -1)
    idx = spec.n_conv
    if spec.fc_width > 0:
        h = f @ ws[idx]
        if train and mask is not None:
            scale = mask.mask / mask.kappa
            d = h * scale
        else:
            scale = None
            d = h
        y = d @ ws[idx + 1]
        return y, (ws, conv_caches, f, d, scale)
    y = f @ ws[idx]
    return y, (ws, conv_caches, f, None, None)


def forward(params, x, spec, mask=None, mode="eval"):
    """Prediction for one sample (rows, cols, planes) or a batch of them.

    Train mode applies the inverted-scaling dropout mask to the FC units;
    eval mode ignores the mask.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"unknown mode {mode!r}")
    xb, single = _to_batch(x, spec)
    y, _ = _forward_full(params, xb, spec, mask, train=(mode == "train"))
    return y[0] if single else y


def loss(pred, label):
    """Squared Euclidean distance between one prediction and its label."""
    pred = np.asarray(pred)
    label = np.asarray(label)
    if pred.shape != label.shape:
        raise ValueError("prediction and label lengths differ")
    diff = pred - label
    return float(np.sum(diff * diff))


def backward(params, inputs, labels, spec, mask=None):
    """Gradient of the batch-mean loss; returns (flat gradient, batch loss).

    Units dropped by the mask receive zero gradient in both weight matrices.
    """
    xb, single = _to_batch(inputs, spec)
    labels = np.asarray(labels, dtype=np.float64)
    if single:
        labels = labels[None]
    if xb.shape[0] == 0:
        raise ValueError("empty batch")
    if labels.shape != (xb.shape[0], spec.out_len):
        raise ValueError(f"labels shape {labels.shape} does not match "
                         f"({xb.shape[0]}, {spec.out_len})")

    y, (ws, conv_caches, f, d, scale) = _forward_full(params, xb, spec, mask, train=True)
    batch = xb.shape[0]
    diff = y - labels
    batch_loss = float(np.sum(diff * diff) / batch)
    dy = (2.0 / batch) * diff

    grads = [None] * len(ws)
    idx = spec.n_conv
    if spec.fc_width > 0:
        grads[idx + 1] = d.T @ dy
        dd = dy @ ws[idx + 1].T
        dh = dd * scale if scale is not None else dd
        grads[idx] = f.T @ dh
        df = dh @ ws[idx].T
    else:
        grads[idx] = f.T @ dy
        df = dy @ ws[idx].T

    da = df.reshape(batch, spec.conv_out_planes, spec.in_rows, spec.in_cols)
    for i in reversed(range(spec.n_conv)):
        a_in, xhat, inv_std, relu_mask = conv_caches[i]
        dxhat = da * relu_mask
        dz = np.ascontiguousarray(_norm_backward(dxhat, xhat, inv_std))
        grads[i] = kernels.conv2d_backward_weights(a_in, dz, spec.kernel, spec.kernel)
        if i > 0:
            da = kernels.conv2d_backward_input(dz, np.ascontiguousarray(ws[i]))
    return flatten(grads), batch_loss


def sgd_step(params, grad, lr, velocity, momentum=0.9):
    """Classical momentum update; returns (new params, new velocity)."""
    params = np.asarray(params)
    grad = np.asarray(grad)
    velocity = np.asarray(velocity)
    if params.shape != grad.shape or params.shape != velocity.shape:
        raise ValueError("parameter, gradient and velocity layouts differ")
    new_velocity = momentum * velocity + grad
    return params - lr * new_velocity, new_velocity


def predict(params, inputs, spec, chunk=1024):
    """Eval-mode forward over an array of inputs (n, rows, cols, planes)."""
    inputs = np.asarray(inputs, dtype=np.float64)
    outs = []
    for start in range(0, inputs.shape[0], chunk):
        xb, _ = _to_batch(inputs[start:start + chunk], spec)
        y, _ = _forward_full(params, xb, spec, None, train=False)
        outs.append(y)
    return np.vstack(outs) if outs else np.zeros((0, spec.out_len))


def samples_to_arrays(samples):
    """Stack TrainingSamples into (inputs, labels) float64 arrays."""
    if len(samples) == 0:
        raise ValueError("empty sample list")
    x = np.stack([s.input for s in samples]).astype(np.float64)
    y = np.stack([s.label for s in samples]).astype(np.float64)
    return x, y
