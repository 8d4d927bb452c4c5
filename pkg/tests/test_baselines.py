import numpy as np
import pytest

from fedchan.baselines import (build_channel_covariance, complexity_report,
                               lmmse_estimate, ls_estimate, nmse, overhead_cl,
                               overhead_fl, param_count_paper, validation_rmse)
from fedchan.channel import SystemConfig, gen_user_paths, ofdm_channel
from fedchan.net import NetworkSpec, init_params, predict
from fedchan.pilots import (PilotConfig, noise_power_for_snr,
                            receive_pilots_mimo)


def small_cfg(**kw):
    base = dict(n_bs=8, n_ms=4, n_irs=2, m_sub=4, cp_len=2, n_paths=3, k_users=2)
    base.update(kw)
    return SystemConfig(**base)


class TestLsEstimate:
    def test_noiseless_exact(self):
        cfg = small_cfg()
        pilots = PilotConfig.for_system(cfg)
        h = ofdm_channel(gen_user_paths(cfg, 0, 0), cfg)
        y = receive_pilots_mimo(h, pilots, 0.0, 0)
        est = ls_estimate(y, pilots)
        assert np.max(np.abs(est - h)) < 1e-10

    def test_zero_observation(self):
        cfg = small_cfg()
        pilots = PilotConfig.for_system(cfg)
        y = np.zeros((cfg.m_sub, cfg.n_ms, cfg.n_bs), dtype=complex)
        assert np.allclose(ls_estimate(y, pilots), 0.0)

    def test_nmse_improves_with_pilot_snr(self):
        cfg = small_cfg()
        pilots = PilotConfig.for_system(cfg)
        scores = {}
        for snr in (20.0, 30.0):
            ratios = []
            for trial in range(100):
                h = ofdm_channel(gen_user_paths(cfg, 0, trial), cfg)
                sigma2 = noise_power_for_snr(h, snr)
                y = receive_pilots_mimo(h, pilots, sigma2, 1000 + trial)
                est = ls_estimate(y, pilots)
                ratios.append(np.sum(np.abs(h - est) ** 2) / np.sum(np.abs(h) ** 2))
            scores[snr] = np.mean(ratios)
        assert scores[30.0] < scores[20.0]

    def test_rank_deficient_rejected(self):
        cfg = small_cfg()
        pilots = PilotConfig.for_system(cfg)
        pilots.f_bar = np.zeros_like(pilots.f_bar)
        with pytest.raises(ValueError):
            ls_estimate(np.zeros((pilots.m_ms, pilots.m_bs), dtype=complex), pilots)


class TestLmmseEstimate:
    def test_collapses_to_ls_without_noise(self):
        cfg = small_cfg()
        pilots = PilotConfig.for_system(cfg)
        cov = build_channel_covariance(cfg, 0, n_draws=200, rng_seed=0)
        h = ofdm_channel(gen_user_paths(cfg, 0, 1), cfg)
        y = receive_pilots_mimo(h, pilots, 0.0, 0)
        mmse = lmmse_estimate(y, pilots, cov, 0.0)
        ls = ls_estimate(y, pilots)
        rel = np.max(np.abs(mmse - ls)) / np.max(np.abs(ls))
        assert rel < 1e-6

    def test_zero_prior_gives_zero_estimate(self):
        cfg = small_cfg()
        pilots = PilotConfig.for_system(cfg)
        n = cfg.n_ms * cfg.n_bs
        y = np.ones((pilots.m_ms, pilots.m_bs), dtype=complex)
        est = lmmse_estimate(y, pilots, np.zeros((n, n)), 1.0)
        assert np.allclose(est, 0.0)

    def test_beats_ls_on_average(self):
        cfg = small_cfg()
        pilots = PilotConfig.for_system(cfg)
        cov = build_channel_covariance(cfg, 0, n_draws=500, rng_seed=0)
        wins = 0
        for trial in range(50):
            h = ofdm_channel(gen_user_paths(cfg, 0, 500 + trial), cfg)
            sigma2 = noise_power_for_snr(h, 20.0)
            y = receive_pilots_mimo(h, pilots, sigma2, trial)
            e_ls = np.sum(np.abs(ls_estimate(y, pilots) - h) ** 2)
            e_mm = np.sum(np.abs(lmmse_estimate(y, pilots, cov, sigma2) - h) ** 2)
            wins += e_mm < e_ls
        assert wins > 40

    def test_degenerate_setup_rejected(self):
        cfg = small_cfg()
        pilots = PilotConfig.for_system(cfg)
        n = cfg.n_ms * cfg.n_bs
        with pytest.raises(ValueError):
            lmmse_estimate(np.zeros((pilots.m_ms, pilots.m_bs), dtype=complex),
                           pilots, np.zeros((n, n)), 0.0)


class TestNmse:
    def test_zero_at_truth(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal((3, 2, 4, 4)) + 1j * rng.standard_normal((3, 2, 4, 4))
        assert nmse(h, h) == 0.0

    def test_double_estimate_gives_one(self):
        rng = np.random.default_rng(1)
        h = rng.standard_normal((5, 2, 3, 3)) + 1j * rng.standard_normal((5, 2, 3, 3))
        assert nmse(h, 2.0 * h) == pytest.approx(1.0, rel=1e-12)

    def test_matches_nested_loops(self):
        rng = np.random.default_rng(2)
        shape = (2, 3, 4, 2, 2)  # trials, users, subcarriers, rows, cols
        h = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        est = h + 0.1 * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        total = 0.0
        for i in range(2):
            for k in range(3):
                for m in range(4):
                    num = np.sum(np.abs(h[i, k, m] - est[i, k, m]) ** 2)
                    den = np.sum(np.abs(h[i, k, m]) ** 2)
                    total += num / den
        expect = total / (2 * 3 * 4)
        assert nmse(h, est) == pytest.approx(expect, rel=1e-12)

    def test_unitary_rotation_invariance(self):
        rng = np.random.default_rng(3)
        h = rng.standard_normal((4, 3, 3)) + 1j * rng.standard_normal((4, 3, 3))
        est = h + 0.2 * rng.standard_normal((4, 3, 3))
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        assert nmse(q @ h, q @ est) == pytest.approx(nmse(h, est), rel=1e-10)

    def test_zero_norm_channels_excluded_with_warning(self):
        h = np.ones((3, 2, 2), dtype=complex)
        h[0] = 0.0
        est = np.zeros_like(h)
        with pytest.warns(UserWarning):
            value = nmse(h, est)
        assert value == pytest.approx(1.0)

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            nmse(np.zeros((2, 2, 2)), np.zeros((2, 2, 2)))


class TestValidationRmse:
    def _sample(self, spec, label):
        from fedchan.pilots import TrainingSample
        x = np.zeros((spec.in_rows, spec.in_cols, spec.in_planes))
        return TrainingSample(input=x, label=label, scenario="mmimo", user=0)

    def test_perfect_predictor(self):
        spec = NetworkSpec(in_rows=2, in_cols=2, out_len=4, n_conv=0, fc_width=0,
                           in_planes=1)
        params = np.zeros(16)
        samples = [self._sample(spec, np.zeros(4)) for _ in range(3)]
        assert validation_rmse(params, spec, samples) == 0.0

    def test_constant_error_norm(self):
        spec = NetworkSpec(in_rows=2, in_cols=2, out_len=4, n_conv=0, fc_width=0,
                           in_planes=1)
        params = np.zeros(16)
        label = np.array([3.0, 0.0, 4.0, 0.0])  # norm 5 on every sample
        samples = [self._sample(spec, label) for _ in range(4)]
        assert validation_rmse(params, spec, samples) == pytest.approx(5.0)

    def test_matches_per_sample_bruteforce(self):
        spec = NetworkSpec(in_rows=2, in_cols=3, out_len=5, n_conv=1,
                           n_filters=2, fc_width=4)
        params = init_params(spec, 0)
        rng = np.random.default_rng(4)
        from fedchan.pilots import TrainingSample
        samples = [TrainingSample(input=rng.standard_normal((2, 3, 3)),
                                  label=rng.standard_normal(5), scenario="mmimo",
                                  user=0) for _ in range(6)]
        got = validation_rmse(params, spec, samples)
        x = np.stack([s.input for s in samples])
        preds = predict(params, x, spec)
        expect = np.sqrt(np.mean([np.sum((preds[i] - samples[i].label) ** 2)
                                  for i in range(6)]))
        assert got == pytest.approx(expect, rel=1e-12)

    def test_empty_rejected(self):
        spec = NetworkSpec(in_rows=2, in_cols=2, out_len=4, n_conv=0, fc_width=0)
        with pytest.raises(ValueError):
            validation_rmse(np.zeros(48), spec, [])


class TestAccounting:
    def test_parameter_count_at_default_constants(self):
        assert param_count_paper() == 600_192

    def test_parameter_count_degenerate(self):
        assert param_count_paper(n_cl=0, kappa=1e-12) == 0

    def test_parameter_count_hand_example(self):
        assert param_count_paper(n_cl=1, c=1, n_sf=2, w_x=1, w_y=1,
                                 kappa=1.0, n_fcl=3) == 8

    def test_overhead_cl_reference_value(self):
        assert overhead_cl("mmimo", 768_000, n_ms=32, n_bs=128) == 15_728_640_000

    def test_overhead_cl_zero_dataset(self):
        assert overhead_cl("mmimo", 0, n_ms=32, n_bs=128) == 0

    def test_overhead_cl_irs_hand_example(self):
        assert overhead_cl("irs", 1, n_bs=64, n_irs=64, m_bs=64) == 20_800

    def test_overhead_fl_reference_value(self):
        assert overhead_fl(600_192, 100, 8) == 960_307_200

    def test_overhead_fl_zero_factor(self):
        assert overhead_fl(0, 100, 8) == 0
        assert overhead_fl(600_192, 0, 8) == 0

    def test_overhead_ratio(self):
        ratio = overhead_cl("mmimo", 768_000, n_ms=32, n_bs=128) / overhead_fl(600_192, 100, 8)
        assert 16.0 <= ratio <= 17.0

    def test_overhead_fl_linear(self):
        base = overhead_fl(1000, 10, 4)
        assert overhead_fl(2000, 10, 4) == 2 * base
        assert overhead_fl(1000, 20, 4) == 2 * base
        assert overhead_fl(1000, 10, 8) == 2 * base

    def test_complexity_reference_total(self):
        rep = complexity_report(32, 128)
        assert rep["c_total"] == 2_080_374_784
        assert rep["c_cl"] == 3 * 9 * 128 ** 2 * 32 * 128
        assert rep["c_fcl"] == 4 * 128 ** 2 * 32 * 128

    def test_complexity_unit_dims(self):
        assert complexity_report(1, 1)["c_cl"] == 442_368

    def test_complexity_crossover_region(self):
        # the cubic classical estimator overtakes the network near 720 antennas
        rep = complexity_report(1, 720)
        assert rep["c_mmse"] / rep["c_total"] == pytest.approx(1.0, rel=0.05)
        below = complexity_report(1, 600)
        assert below["c_mmse"] < below["c_total"]
        above = complexity_report(1, 900)
        assert above["c_mmse"] > above["c_total"]
