import numpy as np
import pytest

from fedchan.channel import (IrsChannelSet, IrsPhaseVector, PathSet,
                             SystemConfig, delay_tap, gen_irs_channels,
                             gen_user_paths, irs_reflect_gain, ofdm_channel,
                             steering_vector, user_sector)


def small_cfg(**kw):
    base = dict(n_bs=8, n_ms=4, n_irs=4, m_sub=4, cp_len=2, n_paths=3,
                n_paths_b=2, n_paths_s=2, n_paths_irs=2, k_users=2)
    base.update(kw)
    return SystemConfig(**base)


class TestSystemConfig:
    def test_rejects_cp_longer_than_symbols(self):
        with pytest.raises(ValueError):
            small_cfg(cp_len=8, m_sub=4)

    def test_rejects_zero_counts(self):
        with pytest.raises(ValueError):
            small_cfg(n_bs=0)

    def test_rejects_nonpositive_spacing(self):
        with pytest.raises(ValueError):
            small_cfg(antenna_spacing=0.0)


class TestSteeringVector:
    def test_broadside_is_all_ones(self):
        assert np.allclose(steering_vector(0.0, 4), np.ones(4))

    def test_endfire_two_elements(self):
        assert np.allclose(steering_vector(np.pi / 2, 2), [1.0, -1.0])

    def test_thirty_degrees_quarter_turns(self):
        # sin(pi/6) = 1/2 gives phase steps of pi/2
        v = steering_vector(np.pi / 6, 4)
        assert np.allclose(v, [1.0, 1j, -1.0, -1j])

    def test_unit_modulus(self):
        rng = np.random.default_rng(1)
        for phi in rng.uniform(-np.pi / 2, np.pi / 2, 20):
            v = steering_vector(phi, 16)
            assert np.allclose(np.abs(v), 1.0)

    def test_rejects_empty_array(self):
        with pytest.raises(ValueError):
            steering_vector(0.0, 0)


class TestGenUserPaths:
    def test_first_sector_of_two(self):
        cfg = small_cfg(k_users=2, n_paths=64)
        paths = gen_user_paths(cfg, 0, 5)
        assert np.all(paths.aod >= -np.pi / 2)
        assert np.all(paths.aod < 0)

    def test_deterministic(self):
        cfg = small_cfg()
        a = gen_user_paths(cfg, 1, 42)
        b = gen_user_paths(cfg, 1, 42)
        for x, y in ((a.gains, b.gains), (a.delays, b.delays),
                     (a.aoa, b.aoa), (a.aod, b.aod)):
            assert np.array_equal(x, y)

    def test_user_index_out_of_range(self):
        with pytest.raises(ValueError):
            gen_user_paths(small_cfg(), 2, 0)

    def test_aod_uniform_over_full_domain(self):
        # single user: sector is all of [-pi/2, pi/2]; mean of sin is 0
        cfg = small_cfg(k_users=1, n_paths=10_000)
        paths = gen_user_paths(cfg, 0, 11)
        s = np.sin(paths.aod)
        stderr = np.std(s) / np.sqrt(len(s))
        assert abs(np.mean(s)) < 3 * stderr

    def test_delays_within_cp_window(self):
        cfg = small_cfg(cp_len=2, n_paths=500)
        paths = gen_user_paths(cfg, 0, 3)
        assert np.all(paths.delays >= 0)
        assert np.all(paths.delays <= (cfg.cp_len - 1) * cfg.sym_period)

    def test_sectors_partition_domain(self):
        lo0, hi0 = user_sector(0, 4)
        lo3, hi3 = user_sector(3, 4)
        assert lo0 == pytest.approx(-np.pi / 2)
        assert hi3 == pytest.approx(np.pi / 2)
        assert hi0 == pytest.approx(user_sector(1, 4)[0])


class TestDelayTap:
    def test_single_path_zero_delay_zero_angles(self):
        cfg = small_cfg(n_bs=2, n_ms=2, n_paths=1)
        paths = PathSet(gains=np.array([1.0 + 0j]), delays=np.array([0.0]),
                        aoa=np.array([0.0]), aod=np.array([0.0]))
        tap = delay_tap(paths, 0, cfg)
        assert np.allclose(tap, 2.0 * np.ones((2, 2)))

    def test_sinc_null_at_integer_offset(self):
        cfg = small_cfg(n_bs=2, n_ms=2, n_paths=1, cp_len=3)
        paths = PathSet(gains=np.array([1.0 + 0j]), delays=np.array([0.0]),
                        aoa=np.array([0.0]), aod=np.array([0.0]))
        assert np.allclose(delay_tap(paths, 1, cfg), 0.0)
        assert np.allclose(delay_tap(paths, 2, cfg), 0.0)

    def test_linearity_over_paths(self):
        cfg = small_cfg(n_paths=2)
        rng = np.random.default_rng(2)
        gains = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        delays = rng.uniform(0, 1, 2)
        aoa = rng.uniform(-1, 1, 2)
        aod = rng.uniform(-1, 1, 2)
        both = PathSet(gains=gains, delays=delays, aoa=aoa, aod=aod)
        parts = [PathSet(gains=gains[i:i + 1], delays=delays[i:i + 1],
                         aoa=aoa[i:i + 1], aod=aod[i:i + 1]) for i in range(2)]
        # sqrt(1/L) scaling differs between L=2 and L=1
        combined = delay_tap(both, 1, cfg)
        split = sum(delay_tap(p, 1, cfg) for p in parts) / np.sqrt(2)
        assert np.allclose(combined, split, atol=1e-12)

    def test_tap_out_of_range(self):
        cfg = small_cfg()
        paths = gen_user_paths(cfg, 0, 0)
        with pytest.raises(ValueError):
            delay_tap(paths, cfg.cp_len, cfg)


class TestOfdmChannel:
    def test_single_tap_is_flat_across_subcarriers(self):
        cfg = small_cfg(n_paths=1)
        paths = PathSet(gains=np.array([1.0 - 0.5j]), delays=np.array([0.0]),
                        aoa=np.array([0.3]), aod=np.array([-0.2]))
        h = ofdm_channel(paths, cfg)
        for m in range(1, cfg.m_sub):
            assert np.allclose(h[m], h[0])

    def test_zero_gains_give_zero_channel(self):
        cfg = small_cfg()
        paths = PathSet(gains=np.zeros(3, dtype=complex),
                        delays=np.array([0.0, 0.4, 0.9]),
                        aoa=np.zeros(3), aod=np.zeros(3))
        assert np.allclose(ofdm_channel(paths, cfg), 0.0)

    def test_matches_termwise_dft(self):
        cfg = small_cfg(m_sub=4, cp_len=2)
        paths = gen_user_paths(cfg, 0, 9)
        h = ofdm_channel(paths, cfg)
        for m in range(cfg.m_sub):
            direct = sum(delay_tap(paths, d, cfg) * np.exp(-2j * np.pi * m * d / cfg.m_sub)
                         for d in range(cfg.cp_len))
            assert np.allclose(h[m], direct, atol=1e-12)

    def test_linear_in_gains(self):
        cfg = small_cfg()
        paths = gen_user_paths(cfg, 0, 4)
        scaled = PathSet(gains=3.0 * paths.gains, delays=paths.delays,
                         aoa=paths.aoa, aod=paths.aod)
        assert np.allclose(ofdm_channel(scaled, cfg), 3.0 * ofdm_channel(paths, cfg))

    def test_parseval_over_taps(self):
        cfg = small_cfg(m_sub=8, cp_len=3)
        for seed in range(5):
            paths = gen_user_paths(cfg, 1, seed)
            h = ofdm_channel(paths, cfg)
            freq = np.sum(np.abs(h) ** 2)
            taps = sum(np.sum(np.abs(delay_tap(paths, d, cfg)) ** 2)
                       for d in range(cfg.cp_len))
            assert freq == pytest.approx(cfg.m_sub * taps, rel=1e-10)


class TestIrsChannels:
    def test_cascade_columnwise(self):
        cfg = small_cfg()
        for seed in range(5):
            chs = gen_irs_channels(cfg, 0, seed)
            for n in range(cfg.n_irs):
                expect = chs.h_bs_irs[:, n] * chs.h_irs_user[n]
                assert np.allclose(chs.cascaded[:, n], expect, rtol=1e-12, atol=0)

    def test_unit_irs_user_channel_gives_cascade_equal_bs_irs(self):
        cfg = small_cfg()
        base = gen_irs_channels(cfg, 0, 1)
        forced = IrsChannelSet.from_links(base.h_direct,
                                          np.ones(cfg.n_irs, dtype=complex),
                                          base.h_bs_irs)
        assert np.array_equal(forced.cascaded, base.h_bs_irs)

    def test_single_element_cascade(self):
        cfg = small_cfg(n_irs=1)
        chs = gen_irs_channels(cfg, 0, 2)
        assert chs.cascaded.shape == (cfg.n_bs, 1)
        assert np.allclose(chs.cascaded[:, 0], chs.h_bs_irs[:, 0] * chs.h_irs_user[0])

    def test_inconsistent_cascade_rejected(self):
        cfg = small_cfg()
        chs = gen_irs_channels(cfg, 0, 3)
        with pytest.raises(ValueError):
            IrsChannelSet(h_direct=chs.h_direct, h_irs_user=chs.h_irs_user,
                          h_bs_irs=chs.h_bs_irs, cascaded=chs.cascaded + 1.0)

    def test_deterministic(self):
        cfg = small_cfg()
        a = gen_irs_channels(cfg, 1, 7)
        b = gen_irs_channels(cfg, 1, 7)
        assert np.array_equal(a.cascaded, b.cascaded)
        assert np.array_equal(a.h_direct, b.h_direct)


class TestIrsReflectGain:
    def test_single_element_selects_column(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        psi = IrsPhaseVector.single_on(1, 3)
        assert np.allclose(irs_reflect_gain(psi, v), v[:, 1])

    def test_all_off_gives_zero(self):
        v = np.ones((4, 3), dtype=complex)
        psi = IrsPhaseVector.from_states(np.zeros(3, dtype=bool))
        assert np.allclose(irs_reflect_gain(psi, v), 0.0)

    def test_insertion_loss_scales_column(self):
        rng = np.random.default_rng(1)
        v = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        psi = IrsPhaseVector.single_on(2, 3, eps_on=0.1)
        assert np.allclose(irs_reflect_gain(psi, v), 0.9 * v[:, 2])

    def test_dimension_mismatch(self):
        psi = IrsPhaseVector.single_on(0, 3)
        with pytest.raises(ValueError):
            irs_reflect_gain(psi, np.ones((4, 5)))
