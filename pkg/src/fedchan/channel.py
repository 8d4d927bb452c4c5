"""Geometric mm-Wave channel generation.

Covers the conventional MIMO link (multipath delay taps -> per-subcarrier
frequency response) and the three links of the IRS scenario (BS-user,
BS-IRS, IRS-user) together with their cascaded product.  All generators are
pure functions of (config, user index, seed).
"""

from dataclasses import dataclass

import numpy as np

from . import seeding


@dataclass(frozen=True)
class SystemConfig:
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
    antenna_spacing: float = 0.5  # in wavelengths

    def __post_init__(self):
        counts = (self.n_bs, self.n_ms, self.n_irs, self.m_sub, self.cp_len,
                  self.n_paths, self.n_paths_b, self.n_paths_s,
                  self.n_paths_irs, self.k_users)
        if any(int(c) < 1 for c in counts):
            raise ValueError("all counts must be >= 1")
        if self.cp_len > self.m_sub:
            raise ValueError("cp_len must not exceed m_sub")
        if self.antenna_spacing <= 0:
            raise ValueError("antenna_spacing must be positive")
        if self.sym_period <= 0:
            raise ValueError("sym_period must be positive")


@dataclass(frozen=True)
class PathSet:
    """Multipath parameters of one user: complex gains, delays (s), AoA/AoD (rad)."""

    gains: np.ndarray
    delays: np.ndarray
    aoa: np.ndarray
    aod: np.ndarray

    def __post_init__(self):
        n = len(self.gains)
        if not (len(self.delays) == len(self.aoa) == len(self.aod) == n):
            raise ValueError("path arrays must have equal length")
        if n < 1:
            raise ValueError("need at least one path")
        for ang in (self.aoa, self.aod):
            if np.any(np.abs(ang) > np.pi / 2 + 1e-12):
                raise ValueError("angles must lie in [-pi/2, pi/2]")
        if np.any(self.delays < 0):
            raise ValueError("delays must be non-negative")


def steering_vector(phi, n, spacing=0.5):
    """ULA array response for angle phi; element i is exp(j*2*pi*spacing*i*sin(phi))."""
    if n < 1:
        raise ValueError("array size must be >= 1")
    return np.exp(2j * np.pi * spacing * np.arange(n) * np.sin(phi))


def user_sector(user_index, k_users):
    """Angular sub-interval assigned to a user: the k-th of K equal slices of [-pi/2, pi/2]."""
    width = np.pi / k_users
    lo = -np.pi / 2 + user_index * width
    return lo, lo + width


def gen_user_paths(cfg, user_index, rng_seed):
    """Draw a PathSet for one user.

    AoD/AoA are uniform over the user's angular sector, gains are standard
    complex normal, delays are uniform within the CP window.
    """
    if not 0 <= user_index < cfg.k_users:
        raise ValueError(f"user_index {user_index} out of range [0, {cfg.k_users})")
    rng = seeding.as_rng(seeding.PATHS, rng_seed, user_index)
    lo, hi = user_sector(user_index, cfg.k_users)
    L = cfg.n_paths
    gains = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / np.sqrt(2)
    delays = rng.uniform(0.0, (cfg.cp_len - 1) * cfg.sym_period, L)
    aoa = rng.uniform(lo, hi, L)
    aod = rng.uniform(lo, hi, L)
    return PathSet(gains=gains, delays=delays, aoa=aoa, aod=aod)


def _steering_matrix(angles, n, spacing):
    # columns are steering vectors, shape (n, len(angles))
    return np.exp(2j * np.pi * spacing * np.outer(np.arange(n), np.sin(angles)))


def delay_tap(paths, d, cfg):
    """Time-domain channel matrix of delay tap d, shape (n_ms, n_bs).

    Sinc pulse shaping: tap weight of path l is sinc(d - tau_l/T_s), so a
    path at an exact nonzero multiple of T_s contributes nothing off-tap.
    """
    if not 0 <= d < cfg.cp_len:
        raise ValueError(f"tap index {d} out of range [0, {cfg.cp_len})")
    pulse = np.sinc(d - paths.delays / cfg.sym_period)
    a_ms = _steering_matrix(paths.aoa, cfg.n_ms, cfg.antenna_spacing)
    a_bs = _steering_matrix(paths.aod, cfg.n_bs, cfg.antenna_spacing)
    scale = np.sqrt(cfg.n_bs * cfg.n_ms / len(paths.gains))
    coef = paths.gains * pulse
    return scale * ((a_ms * coef) @ a_bs.conj().T)


def ofdm_channel(paths, cfg):
    """Per-subcarrier frequency response, shape (m_sub, n_ms, n_bs).

    DFT of the delay taps over m = 0..M-1 (taps beyond the CP are zero).
    """
    taps = np.stack([delay_tap(paths, d, cfg) for d in range(cfg.cp_len)])
    m = np.arange(cfg.m_sub)
    d = np.arange(cfg.cp_len)
    twiddle = np.exp(-2j * np.pi * np.outer(m, d) / cfg.m_sub)
    return np.einsum("md,dij->mij", twiddle, taps)


@dataclass(frozen=True)
class IrsChannelSet:
    """The three IRS-scenario links of one user plus the cascaded product.

    cascaded[:, n] always equals h_bs_irs[:, n] * h_irs_user[n].
    """

    h_direct: np.ndarray    # (n_bs,)  BS-user
    h_irs_user: np.ndarray  # (n_irs,) IRS-user
    h_bs_irs: np.ndarray    # (n_bs, n_irs) BS-IRS
    cascaded: np.ndarray    # (n_bs, n_irs)

    def __post_init__(self):
        expected = self.h_bs_irs * self.h_irs_user[None, :]
        err = np.max(np.abs(self.cascaded - expected))
        ref = max(np.max(np.abs(expected)), 1.0)
        if err > 1e-12 * ref:
            raise ValueError("cascaded channel inconsistent with h_bs_irs * diag(h_irs_user)")

    @classmethod
    def from_links(cls, h_direct, h_irs_user, h_bs_irs):
        cascaded = h_bs_irs * h_irs_user[None, :]
        return cls(h_direct=h_direct, h_irs_user=h_irs_user,
                   h_bs_irs=h_bs_irs, cascaded=cascaded)


def gen_irs_channels(cfg, user_index, rng_seed):
    """Draw all IRS-scenario channels for one user.

    BS-IRS angles are uniform over the full angular domain; the user-side
    links (BS-user AoD, IRS-user AoD) use the user's sector, matching the
    conventional-link convention.
    """
    if not 0 <= user_index < cfg.k_users:
        raise ValueError(f"user_index {user_index} out of range [0, {cfg.k_users})")
    rng = seeding.as_rng(seeding.IRS_LINKS, rng_seed, user_index)
    lo, hi = user_sector(user_index, cfg.k_users)
    sp = cfg.antenna_spacing

    # BS-IRS: double-steering sum over L_IRS paths, full angular domain
    li = cfg.n_paths_irs
    g_irs = (rng.standard_normal(li) + 1j * rng.standard_normal(li)) / np.sqrt(2)
    phi_bs = rng.uniform(-np.pi / 2, np.pi / 2, li)
    phi_irs = rng.uniform(-np.pi / 2, np.pi / 2, li)
    a_bs = _steering_matrix(phi_bs, cfg.n_bs, sp)
    a_irs = _steering_matrix(phi_irs, cfg.n_irs, sp)
    h_bs_irs = np.sqrt(cfg.n_bs * cfg.n_irs / li) * ((a_bs * g_irs) @ a_irs.conj().T)

    # BS-user direct link
    lb = cfg.n_paths_b
    g_b = (rng.standard_normal(lb) + 1j * rng.standard_normal(lb)) / np.sqrt(2)
    phi_b = rng.uniform(lo, hi, lb)
    h_direct = np.sqrt(cfg.n_bs / lb) * (_steering_matrix(phi_b, cfg.n_bs, sp) @ g_b)

    # IRS-user link
    ls = cfg.n_paths_s
    g_s = (rng.standard_normal(ls) + 1j * rng.standard_normal(ls)) / np.sqrt(2)
    phi_s = rng.uniform(lo, hi, ls)
    h_irs_user = np.sqrt(cfg.n_irs / ls) * (_steering_matrix(phi_s, cfg.n_irs, sp) @ g_s)

    return IrsChannelSet.from_links(h_direct, h_irs_user, h_bs_irs)


@dataclass(frozen=True)
class IrsPhaseVector:
    """Reflecting beamformer state: per-element amplitude and phase shift.

    Amplitudes model imperfect switching: eps_off when off, 1 - eps_on when on.
    """

    on_off: np.ndarray  # amplitudes a_n
    phase: np.ndarray   # radians in [0, 2*pi]
    eps_on: float = 0.0
    eps_off: float = 0.0

    def __post_init__(self):
        if len(self.on_off) != len(self.phase):
            raise ValueError("amplitude and phase arrays must have equal length")
        if self.eps_on < 0 or self.eps_off < 0:
            raise ValueError("insertion losses must be non-negative")
        if np.any(self.on_off < 0) or np.any(self.on_off > 1):
            raise ValueError("element amplitudes must lie in [0, 1]")

    @property
    def psi(self):
        return self.on_off * np.exp(1j * self.phase)

    @classmethod
    def from_states(cls, on, phase=None, eps_on=0.0, eps_off=0.0):
        on = np.asarray(on, dtype=bool)
        amp = np.where(on, 1.0 - eps_on, eps_off)
        if phase is None:
            phase = np.zeros(len(on))
        return cls(on_off=amp, phase=np.asarray(phase, dtype=float),
                   eps_on=eps_on, eps_off=eps_off)

    @classmethod
    def single_on(cls, index, n, phase=0.0, eps_on=0.0, eps_off=0.0):
        on = np.zeros(n, dtype=bool)
        on[index] = True
        phases = np.zeros(n)
        phases[index] = phase
        return cls.from_states(on, phases, eps_on=eps_on, eps_off=eps_off)


def irs_reflect_gain(psi, v):
    """Effective cascaded response v @ psi for a configured phase vector."""
    v = np.asarray(v)
    if v.ndim != 2 or v.shape[1] != len(psi.on_off):
        raise ValueError(f"cascaded matrix shape {v.shape} does not match "
                         f"{len(psi.on_off)} IRS elements")
    return v @ psi.psi
