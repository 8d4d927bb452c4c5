"""Pilot transmission, reception and training-sample assembly.

Simulates the preamble stage for both scenarios, undoes the beamforming
matrices to form the network input, and builds per-user local datasets with
SNR augmentation and a deterministic 80/20 train/validation split.
"""

from dataclasses import dataclass

import numpy as np

from . import seeding
from .channel import gen_irs_channels, gen_user_paths, ofdm_channel


def dft_matrix(n):
    """Unitary n-point DFT matrix."""
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


@dataclass
class PilotConfig:
    m_bs: int
    m_ms: int
    f_bar: np.ndarray                      # (n_bs, m_bs) BS pilot beams
    w_bar: np.ndarray                      # (n_ms, m_ms) user combiners
    s_bar: np.ndarray                      # (m_bs, m_bs) pilot symbols, identity by default
    s_bar_irs: np.ndarray | None           # (n_bs, m_bs) IRS pilot block; needs n_bs <= m_bs
    snr_levels_db: tuple = (20.0, 25.0, 30.0)
    rho: float = 1.0

    @classmethod
    def for_system(cls, cfg, m_bs=None, m_ms=None, snr_levels_db=(20.0, 25.0, 30.0), rho=1.0):
        """Default pilots: leading columns of unitary DFT matrices, identity symbols."""
        m_bs = cfg.n_bs if m_bs is None else m_bs
        m_ms = cfg.n_ms if m_ms is None else m_ms
        if not 1 <= m_bs or not 1 <= m_ms:
            raise ValueError("pilot beam counts must be >= 1")
        f_bar = dft_matrix(cfg.n_bs)[:, :m_bs]
        w_bar = dft_matrix(cfg.n_ms)[:, :m_ms]
        s_bar = np.eye(m_bs, dtype=complex)
        # the one-element-at-a-time protocol needs at least n_bs pilot slots
        s_bar_irs = np.eye(cfg.n_bs, m_bs, dtype=complex) if cfg.n_bs <= m_bs else None
        return cls(m_bs=m_bs, m_ms=m_ms, f_bar=f_bar, w_bar=w_bar,
                   s_bar=s_bar, s_bar_irs=s_bar_irs,
                   snr_levels_db=tuple(float(s) for s in snr_levels_db), rho=float(rho))


@dataclass
class TrainingSample:
    input: np.ndarray       # (rows, cols, 3) real: Re, Im, angle planes
    label: np.ndarray       # real vector
    scenario: str           # "mmimo" | "irs"
    user: int
    subcarrier: int | None = None


@dataclass
class LocalDataset:
    user: int
    samples: list
    train_indices: np.ndarray
    val_indices: np.ndarray

    @property
    def train_samples(self):
        return [self.samples[i] for i in self.train_indices]

    @property
    def val_samples(self):
        return [self.samples[i] for i in self.val_indices]


def complex_awgn(rng, shape, var):
    """Circular complex Gaussian with per-entry variance var."""
    if var < 0:
        raise ValueError("noise variance must be non-negative")
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def noise_power_for_snr(signal, snr_db, rho=1.0):
    """Per-entry noise variance for a target pilot SNR.

    SNR is defined against the per-realization mean entry power of the
    channel being probed, scaled by the average received power rho.
    """
    sig_power = float(np.mean(np.abs(signal) ** 2))
    return rho * sig_power / (10.0 ** (snr_db / 10.0))


def receive_pilots_mimo(h, cfg, noise_sigma, rng_seed):
    """Received pilot block W^H H F S + W^H N per subcarrier.

    h is (n_ms, n_bs) or (m, n_ms, n_bs); noise entries are i.i.d. circular
    complex Gaussian with per-entry variance noise_sigma.
    """
    h = np.asarray(h)
    single = h.ndim == 2
    hh = h[None] if single else h
    n_ms, n_bs = cfg.w_bar.shape[0], cfg.f_bar.shape[0]
    if hh.shape[-2:] != (n_ms, n_bs):
        raise ValueError(f"channel shape {hh.shape[-2:]} does not match pilots "
                         f"({n_ms}, {n_bs})")
    rng = seeding.as_rng(seeding.PILOT_NOISE, rng_seed)
    w_h = cfg.w_bar.conj().T
    fs = cfg.f_bar @ cfg.s_bar
    out = np.empty((hh.shape[0], cfg.m_ms, cfg.m_bs), dtype=complex)
    for m in range(hh.shape[0]):
        noise = complex_awgn(rng, (n_ms, cfg.m_bs), noise_sigma)
        out[m] = np.sqrt(cfg.rho) * (w_h @ hh[m] @ fs) + w_h @ noise
    return out[0] if single else out


def preprocess_mimo(y_bar, cfg):
    """Undo the pilot beamforming: G = T_ms Y T_bs, shape (n_ms, n_bs).

    T_ms is W (undersampled) or (W W^H)^-1 W; T_bs is F^H or F^H (F F^H)^-1.
    """
    y = np.asarray(y_bar)
    single = y.ndim == 2
    yy = y[None] if single else y
    if yy.shape[-2:] != (cfg.m_ms, cfg.m_bs):
        raise ValueError(f"pilot block shape {yy.shape[-2:]} does not match "
                         f"({cfg.m_ms}, {cfg.m_bs})")
    w, f = cfg.w_bar, cfg.f_bar
    n_ms, n_bs = w.shape[0], f.shape[0]
    try:
        if cfg.m_ms < n_ms:
            t_ms = w
        else:
            t_ms = np.linalg.solve(w @ w.conj().T, w)
        if cfg.m_bs < n_bs:
            t_bs = f.conj().T
        else:
            t_bs = np.linalg.solve(f @ f.conj().T, f).conj().T
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular pilot Gram matrix; ill-chosen pilot beams") from exc
    out = np.einsum("ij,mjk,kl->mil", t_ms, yy, t_bs)
    return out[0] if single else out


def _three_planes(z):
    # angle plane follows atan2, range (-pi, pi]; angle of exact zero is 0
    return np.stack([z.real, z.imag, np.angle(z)], axis=-1)


def _vec_label(z):
    # column-major stacking of real then imaginary parts
    return np.concatenate([z.real.ravel(order="F"), z.imag.ravel(order="F")])


def label_to_matrix(label, shape):
    """Invert the label vectorization back to a complex matrix."""
    n = int(np.prod(shape))
    if len(label) != 2 * n:
        raise ValueError(f"label length {len(label)} does not match shape {shape}")
    re = label[:n].reshape(shape, order="F")
    im = label[n:].reshape(shape, order="F")
    return re + 1j * im


def _noisy_label(z, label_noise_db, rng):
    if label_noise_db is None:
        return z
    if rng is None:
        raise ValueError("label noise requires an rng")
    var = noise_power_for_snr(z, label_noise_db)
    return z + complex_awgn(rng, z.shape, var)


def make_sample_mimo(g, h_true, label_noise_db=None, rng=None, user=0, subcarrier=None):
    """One conventional-scenario sample: 3-plane input from G, vectorized channel label."""
    g = np.asarray(g)
    h_true = np.asarray(h_true)
    if g.shape != h_true.shape:
        raise ValueError("preprocessed block and channel must share a shape")
    h_label = _noisy_label(h_true, label_noise_db, rng)
    return TrainingSample(input=_three_planes(g), label=_vec_label(h_label),
                          scenario="mmimo", user=user, subcarrier=subcarrier)


def receive_direct_irs(chs, cfg, noise_sigma, rng_seed):
    """Received row with all IRS elements off: h_direct^H S + n, shape (m_bs,)."""
    s = cfg.s_bar_irs
    if s is None or s.shape[0] != len(chs.h_direct):
        raise ValueError("IRS pilot block does not match n_bs (needs n_bs <= m_bs)")
    rng = seeding.as_rng(seeding.PILOT_NOISE, rng_seed)
    noise = complex_awgn(rng, (cfg.m_bs,), noise_sigma)
    return np.sqrt(cfg.rho) * (chs.h_direct.conj() @ s) + noise


def receive_cascaded_sweep(chs, cfg, noise_sigma, rng_seed):
    """One-element-at-a-time sweep, shape (n_irs, m_bs).

    Row n is (h_direct^H + cascaded[:, n]^H) S plus noise drawn independently
    per row (each element-on frame is a separate transmission).
    """
    s = cfg.s_bar_irs
    if s is None or s.shape[0] != len(chs.h_direct):
        raise ValueError("IRS pilot block does not match n_bs (needs n_bs <= m_bs)")
    rng = seeding.as_rng(seeding.PILOT_NOISE, rng_seed)
    eff = chs.h_direct[None, :].conj() + chs.cascaded.T.conj()  # (n_irs, n_bs)
    noise = complex_awgn(rng, (chs.cascaded.shape[1], cfg.m_bs), noise_sigma)
    return np.sqrt(cfg.rho) * (eff @ s) + noise


def irs_label_matrix(chs):
    """Joint label matrix [h_direct, cascaded], shape (n_bs, n_irs + 1)."""
    return np.concatenate([chs.h_direct[:, None], chs.cascaded], axis=1)


def make_sample_irs(y_direct, y_sweep, chs, label_noise_db=None, rng=None,
                    user=0, sigma_label=None):
    """One IRS-scenario sample: stacked receptions in, joint channel label out."""
    y_direct = np.atleast_2d(np.asarray(y_direct))
    y_sweep = np.asarray(y_sweep)
    if y_direct.shape[1] != y_sweep.shape[1]:
        raise ValueError("direct and sweep receptions must share the pilot length")
    upsilon = np.vstack([y_direct, y_sweep])
    sigma = irs_label_matrix(chs) if sigma_label is None else sigma_label
    sigma = _noisy_label(sigma, label_noise_db, rng)
    return TrainingSample(input=_three_planes(upsilon), label=_vec_label(sigma),
                          scenario="irs", user=user, subcarrier=None)


def split_indices(n, rng_seed, user_index, val_fraction=0.2):
    """Deterministic train/validation split; validation gets floor(val_fraction * n)."""
    rng = seeding.derive_rng(seeding.SPLIT, rng_seed, user_index)
    perm = rng.permutation(n)
    n_val = int(np.floor(val_fraction * n))
    val = np.sort(perm[:n_val])
    train = np.sort(perm[n_val:])
    return train, val


def collect_local_dataset(scenario, cfg, pilots, user_index, n_realizations,
                          aug_per_snr, rng_seed, label_noise_db=None):
    """Build one user's local dataset.

    For each of n_realizations channel draws and each pilot SNR level,
    aug_per_snr independent noisy receptions are converted to samples; the
    conventional scenario emits one sample per subcarrier.  Label noise, when
    enabled, is drawn once per realization (the stored estimate is reused
    across the augmented receptions of that realization).
    """
    if n_realizations < 1 or aug_per_snr < 1:
        raise ValueError("n_realizations and aug_per_snr must be >= 1")
    if len(pilots.snr_levels_db) == 0:
        raise ValueError("snr_levels_db must not be empty")
    if scenario not in ("mmimo", "irs"):
        raise ValueError(f"unknown scenario {scenario!r}")

    rng = seeding.derive_rng(seeding.DATASET, rng_seed, user_index)
    label_rng = seeding.derive_rng(seeding.LABEL_NOISE, rng_seed, user_index)
    samples = []
    for i in range(n_realizations):
        if scenario == "mmimo":
            paths = gen_user_paths(cfg, user_index,
                                   seeding.derive_rng(seeding.PATHS, rng_seed, user_index, i))
            h = ofdm_channel(paths, cfg)
            h_label = _noisy_label(h, label_noise_db, label_rng)
            for snr_db in pilots.snr_levels_db:
                sigma2 = noise_power_for_snr(h, snr_db, pilots.rho)
                for _ in range(aug_per_snr):
                    y = receive_pilots_mimo(h, pilots, sigma2, rng)
                    g = preprocess_mimo(y, pilots)
                    for m in range(cfg.m_sub):
                        samples.append(make_sample_mimo(g[m], h_label[m],
                                                        user=user_index, subcarrier=m))
        else:
            chs = gen_irs_channels(cfg, user_index,
                                   seeding.derive_rng(seeding.IRS_LINKS, rng_seed, user_index, i))
            sigma_true = irs_label_matrix(chs)
            sigma_label = _noisy_label(sigma_true, label_noise_db, label_rng)
            for snr_db in pilots.snr_levels_db:
                sigma2 = noise_power_for_snr(sigma_true, snr_db, pilots.rho)
                for _ in range(aug_per_snr):
                    y_d = receive_direct_irs(chs, pilots, sigma2, rng)
                    y_c = receive_cascaded_sweep(chs, pilots, sigma2, rng)
                    samples.append(make_sample_irs(y_d, y_c, chs, user=user_index,
                                                   sigma_label=sigma_label))

    train, val = split_indices(len(samples), rng_seed, user_index)
    return LocalDataset(user=user_index, samples=samples,
                        train_indices=train, val_indices=val)
