"""Classical estimators, evaluation metrics and analytic accounting.

LS inverts the pilot equation with pseudoinverses; LMMSE applies the linear
MMSE filter with a genie-aided prior (sample covariance over independent
draws of the same channel generator).  The accounting functions reproduce
the reference parameter-count, transmission-overhead and operation-count
expressions at their stated constants.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import seeding
from .channel import gen_user_paths, ofdm_channel
from .net import model as net


@dataclass(frozen=True)
class MetricReport:
    nmse: float
    per_user: tuple
    trials: int
    scenario: str
    snr_db: float


@dataclass(frozen=True)
class OverheadReport:
    t_cl: int
    t_fl: int
    ratio: float
    p_paper: int
    scenario: str


def ls_estimate(y_bar, cfg):
    """Least-squares channel estimate (W^H)^+ Y F^+ per subcarrier."""
    y = np.asarray(y_bar)
    single = y.ndim == 2
    yy = y[None] if single else y
    w, f = cfg.w_bar, cfg.f_bar
    if np.linalg.matrix_rank(w) < min(w.shape) or np.linalg.matrix_rank(f) < min(f.shape):
        raise ValueError("rank-deficient pilot matrices")
    left = np.linalg.pinv(w.conj().T)
    right = np.linalg.pinv(f)
    out = np.einsum("ij,mjk,kl->mil", left, yy, right)
    return out[0] if single else out


def build_channel_covariance(cfg, user_index, n_draws=10000, rng_seed=0):
    """Genie prior: sample covariance of vec(H[m]) pooled over subcarriers.

    Diagonal loading of 1e-8 * trace / N keeps the matrix invertible.
    """
    n = cfg.n_ms * cfg.n_bs
    vecs = np.empty((n_draws * cfg.m_sub, n), dtype=complex)
    for i in range(n_draws):
        rng = seeding.derive_rng(seeding.COVARIANCE, rng_seed, user_index, i)
        h = ofdm_channel(gen_user_paths(cfg, user_index, rng), cfg)
        for m in range(cfg.m_sub):
            vecs[i * cfg.m_sub + m] = h[m].ravel(order="F")
    r = (vecs.T @ vecs.conj()) / vecs.shape[0]
    load = 1e-8 * float(np.trace(r).real) / n
    return r + load * np.eye(n)


def lmmse_estimate(y_bar, cfg, channel_covariance, noise_var):
    """Linear MMSE estimate R A^H (A R A^H + R_n)^-1 vec(Y) per subcarrier.

    A is the known pilot operator (F^T kron W^H); R_n accounts for the
    combiner colouring of the receiver noise.
    """
    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    y = np.asarray(y_bar)
    single = y.ndim == 2
    yy = y[None] if single else y
    w, f = cfg.w_bar, cfg.f_bar
    n_ms, n_bs = w.shape[0], f.shape[0]
    r = np.asarray(channel_covariance)
    if r.shape != (n_ms * n_bs, n_ms * n_bs):
        raise ValueError("covariance does not match vec(H) length")

    a = np.kron(f.T, w.conj().T)
    r_n = noise_var * np.kron(np.eye(cfg.m_bs), w.conj().T @ w)
    gram = a @ r @ a.conj().T + r_n
    if np.linalg.cond(gram) > 1e12:
        raise ValueError("LMMSE filter is severely ill-conditioned; degenerate setup")
    # R A^H gram^-1 = (gram^-1 A R)^H because R and gram are Hermitian
    filt = np.linalg.solve(gram, a @ r).conj().T

    out = np.empty((yy.shape[0], n_ms, n_bs), dtype=complex)
    for m in range(yy.shape[0]):
        est = filt @ yy[m].ravel(order="F")
        out[m] = est.reshape(n_ms, n_bs, order="F")
    return out[0] if single else out


def nmse(h_true, h_est):
    """Mean normalized squared error over all leading axes.

    Inputs are stacks of matrices (..., rows, cols); the Frobenius ratio is
    computed per matrix and averaged.  Zero-norm true channels are excluded
    with a warning.
    """
    h_true = np.asarray(h_true)
    h_est = np.asarray(h_est)
    if h_true.shape != h_est.shape:
        raise ValueError("truth and estimate shapes differ")
    err = np.sum(np.abs(h_true - h_est) ** 2, axis=(-2, -1)).ravel()
    ref = np.sum(np.abs(h_true) ** 2, axis=(-2, -1)).ravel()
    keep = ref > 0
    if not np.any(keep):
        raise ValueError("all true channels have zero norm")
    if not np.all(keep):
        warnings.warn(f"excluding {int(np.sum(~keep))} zero-norm true channels from NMSE")
    return float(np.mean(err[keep] / ref[keep]))


def validation_rmse(params, spec, samples):
    """Root of the mean squared prediction error over a validation set."""
    if len(samples) == 0:
        raise ValueError("empty validation set")
    x, y = net.samples_to_arrays(samples)
    pred = net.predict(params, x, spec)
    return float(np.sqrt(np.mean(np.sum((pred - y) ** 2, axis=1))))


def param_count_paper(n_cl=3, c=3, n_sf=128, w_x=3, w_y=3, kappa=0.5, n_fcl=1024):
    """Reference parameter-count expression; 600,192 at the default constants."""
    value = n_cl * (c * n_sf * w_x * w_y) + kappa * n_sf * w_x * w_y * n_fcl
    return int(round(value))


def overhead_cl(scenario, dataset_size, n_ms=None, n_bs=None, n_irs=None, m_bs=None):
    """Uplink symbols needed to collect the training dataset centrally."""
    if dataset_size < 0:
        raise ValueError("dataset size must be >= 0")
    if scenario == "mmimo":
        per_pair = 3 * n_ms * n_bs + 2 * n_ms * n_bs
    elif scenario == "irs":
        per_pair = 3 * (n_irs + 1) * m_bs + 2 * n_bs * (n_irs + 1)
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    return int(per_pair * dataset_size)


def overhead_fl(p, t, k):
    """Model-exchange symbols over T rounds: gradients up, parameters down."""
    if p < 0 or t < 0 or k < 0:
        raise ValueError("arguments must be >= 0")
    return int(2 * p * t * k)


def build_overhead_report(scenario, dataset_size, t, k, n_ms=None, n_bs=None,
                          n_irs=None, m_bs=None, p=None):
    p = param_count_paper() if p is None else p
    t_cl = overhead_cl(scenario, dataset_size, n_ms=n_ms, n_bs=n_bs,
                       n_irs=n_irs, m_bs=m_bs)
    t_fl = overhead_fl(p, t, k)
    ratio = t_cl / t_fl if t_fl else math.inf
    return OverheadReport(t_cl=t_cl, t_fl=t_fl, ratio=ratio, p_paper=p,
                          scenario=scenario)


def complexity_report(n_ms, n_bs):
    """Order-of-growth operation counts at the reference constants.

    Reporting only; these are not wall-clock claims.
    """
    if n_ms < 1 or n_bs < 1:
        raise ValueError("dims must be positive")
    nn = n_ms * n_bs
    c_cl = 3 * 9 * 128 ** 2 * nn
    c_fcl = 4 * 128 ** 2 * nn
    return {
        "c_cl": c_cl,
        "c_fcl": c_fcl,
        "c_total": 31 * 128 ** 2 * nn,
        "c_ls": nn ** 2,
        "c_mmse": nn ** 3,
    }
