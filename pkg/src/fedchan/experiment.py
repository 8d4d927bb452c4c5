"""End-to-end experiment driver.

Builds per-user datasets, trains CL/FL models, evaluates estimation error
over fresh Monte Carlo trials, runs sweeps into a fixed-schema CSV, and
provides the selfcheck battery of analytic golden numbers.
"""

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import seeding
from .baselines import (MetricReport, build_channel_covariance,
                        build_overhead_report, lmmse_estimate, ls_estimate,
                        param_count_paper)
from .channel import gen_irs_channels, gen_user_paths, ofdm_channel
from .config import ConfigError, format_value, sweep_sort_key
from .net import model as net
from .pilots import (collect_local_dataset, irs_label_matrix, label_to_matrix,
                     make_sample_irs, make_sample_mimo, noise_power_for_snr,
                     preprocess_mimo, receive_cascaded_sweep, receive_direct_irs,
                     receive_pilots_mimo)
from .training import CorruptionConfig, TrainConfig, train

RESULT_COLUMNS = ("scenario", "mode", "sweep_axis", "sweep_value", "seed",
                  "round", "loss", "val_rmse", "nmse", "snr_theta_db", "bits",
                  "zeta", "k_users")
ROUND_COLUMNS = ("round", "mode", "loss", "val_rmse", "grad_norm",
                 "snr_theta_db", "bits", "zeta", "seed")
OVERHEAD_COLUMNS = ("scenario", "mode", "blocks", "symbols", "total_symbols")
_MODE_ORDER = {"cl": 0, "fl": 1, "ls": 2, "lmmse": 3}


def network_spec(cfg):
    sys_cfg = cfg.system()
    if cfg.scenario == "mmimo":
        return net.NetworkSpec.for_mimo(sys_cfg, n_filters=cfg.n_filters,
                                        fc_width=cfg.fc_width, kappa=cfg.kappa)
    m_bs = cfg.m_bs if cfg.m_bs is not None else cfg.n_bs
    return net.NetworkSpec.for_irs(sys_cfg, m_bs=m_bs, n_filters=cfg.n_filters,
                                   fc_width=cfg.fc_width, kappa=cfg.kappa)


def build_datasets(cfg, seed):
    sys_cfg = cfg.system()
    pilots = cfg.pilots()
    return [collect_local_dataset(cfg.scenario, sys_cfg, pilots, k,
                                  cfg.n_realizations, cfg.aug_per_snr, seed,
                                  label_noise_db=cfg.label_noise_db)
            for k in range(sys_cfg.k_users)]


@dataclass
class EvalOutcome:
    report: MetricReport
    per_trial: np.ndarray


def evaluate_mimo(sys_cfg, pilots, snr_db, j_trials, seed, models=None,
                  use_ls=False, use_lmmse=False, cov_draws=10000):
    """Paired Monte Carlo evaluation on fresh channel draws.

    All requested estimators see the same pilot receptions trial by trial.
    models maps a name to (params, spec).  Returns name -> EvalOutcome.
    """
    models = models or {}
    names = list(models) + (["ls"] if use_ls else []) + (["lmmse"] if use_lmmse else [])
    ratios = {name: np.empty((j_trials, sys_cfg.k_users, sys_cfg.m_sub))
              for name in names}
    covs = {}
    if use_lmmse:
        for k in range(sys_cfg.k_users):
            covs[k] = build_channel_covariance(sys_cfg, k, n_draws=cov_draws,
                                               rng_seed=seed)
    for j in range(j_trials):
        for k in range(sys_cfg.k_users):
            rng = seeding.derive_rng(seeding.EVAL, seed, j, k)
            h = ofdm_channel(gen_user_paths(sys_cfg, k, rng), sys_cfg)
            sigma2 = noise_power_for_snr(h, snr_db, pilots.rho)
            y = receive_pilots_mimo(h, pilots, sigma2, rng)
            ref = np.sum(np.abs(h) ** 2, axis=(1, 2))
            for name, (params, spec) in models.items():
                g = preprocess_mimo(y, pilots)
                inputs = np.stack([make_sample_mimo(g[m], h[m]).input
                                   for m in range(sys_cfg.m_sub)])
                pred = net.predict(params, inputs, spec)
                est = np.stack([label_to_matrix(pred[m], h[m].shape)
                                for m in range(sys_cfg.m_sub)])
                err = np.sum(np.abs(h - est) ** 2, axis=(1, 2))
                ratios[name][j, k] = err / ref
            if use_ls:
                est = ls_estimate(y, pilots)
                err = np.sum(np.abs(h - est) ** 2, axis=(1, 2))
                ratios["ls"][j, k] = err / ref
            if use_lmmse:
                est = lmmse_estimate(y, pilots, covs[k], sigma2)
                err = np.sum(np.abs(h - est) ** 2, axis=(1, 2))
                ratios["lmmse"][j, k] = err / ref
    out = {}
    for name in names:
        r = ratios[name]
        report = MetricReport(nmse=float(np.mean(r)),
                              per_user=tuple(np.mean(r, axis=(0, 2))),
                              trials=j_trials, scenario="mmimo", snr_db=snr_db)
        out[name] = EvalOutcome(report=report, per_trial=np.mean(r, axis=(1, 2)))
    return out


def evaluate_irs(sys_cfg, pilots, snr_db, j_trials, seed, models):
    """Joint direct+cascaded NMSE on fresh IRS channel draws."""
    ratios = {name: np.empty((j_trials, sys_cfg.k_users)) for name in models}
    for j in range(j_trials):
        for k in range(sys_cfg.k_users):
            rng = seeding.derive_rng(seeding.EVAL, seed, j, k)
            chs = gen_irs_channels(sys_cfg, k, rng)
            sigma_true = irs_label_matrix(chs)
            sigma2 = noise_power_for_snr(sigma_true, snr_db, pilots.rho)
            y_d = receive_direct_irs(chs, pilots, sigma2, rng)
            y_c = receive_cascaded_sweep(chs, pilots, sigma2, rng)
            sample = make_sample_irs(y_d, y_c, chs)
            ref = float(np.sum(np.abs(sigma_true) ** 2))
            for name, (params, spec) in models.items():
                pred = net.predict(params, sample.input[None], spec)[0]
                est = label_to_matrix(pred, sigma_true.shape)
                ratios[name][j, k] = float(np.sum(np.abs(sigma_true - est) ** 2)) / ref
    out = {}
    for name, r in ratios.items():
        report = MetricReport(nmse=float(np.mean(r)), per_user=tuple(np.mean(r, axis=0)),
                              trials=j_trials, scenario="irs", snr_db=snr_db)
        out[name] = EvalOutcome(report=report, per_trial=np.mean(r, axis=1))
    return out


def evaluate_model_nmse(cfg, params, spec, seed, snr_db=None):
    sys_cfg = cfg.system()
    pilots = cfg.pilots()
    snr = cfg.eval_snr_db if snr_db is None else snr_db
    if cfg.scenario == "mmimo":
        out = evaluate_mimo(sys_cfg, pilots, snr, cfg.eval_trials, seed,
                            models={"net": (params, spec)})
    else:
        out = evaluate_irs(sys_cfg, pilots, snr, cfg.eval_trials, seed,
                           models={"net": (params, spec)})
    return out["net"].report


def apply_sweep_value(cfg, axis, value):
    """Specialize the base config to one sweep point."""
    if axis == "k_users":
        k = int(value)
        if k < 1:
            raise ConfigError("k_users sweep values must be >= 1")
        # hold the total dataset size fixed by rescaling the augmentation factor
        aug = max(1, round(cfg.aug_per_snr * cfg.k_users / k))
        return replace(cfg, k_users=k, aug_per_snr=aug)
    if axis == "snr_theta":
        return replace(cfg, snr_theta_db=value)
    if axis == "zeta":
        return replace(cfg, erasure_frac=float(value))
    if axis == "bits":
        return replace(cfg, quant_bits=int(value))
    if axis == "pilot_snr":
        return replace(cfg, eval_snr_db=float(value))
    raise ConfigError(f"unknown sweep axis {axis!r}")


def _format_sweep(value):
    if value is None:
        return "inf"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return format_value(value)


def _row(cfg, axis, value, seed, mode, round_index, loss, val_rmse, nmse_value):
    return {
        "scenario": cfg.scenario,
        "mode": mode,
        "sweep_axis": axis,
        "sweep_value": _format_sweep(value),
        "seed": seed,
        "round": round_index,
        "loss": format_value(loss),
        "val_rmse": format_value(val_rmse),
        "nmse": format_value(nmse_value),
        "snr_theta_db": "inf" if cfg.snr_theta_db is None else format_value(cfg.snr_theta_db),
        "bits": format_value(cfg.quant_bits),
        "zeta": format_value(cfg.erasure_frac),
        "k_users": cfg.k_users,
    }


def run_point(base_cfg, axis, value, seed):
    """One sweep point: build data, train CL and FL, evaluate, emit rows."""
    cfg = apply_sweep_value(base_cfg, axis, value)
    datasets = build_datasets(cfg, seed)
    spec = network_spec(cfg)
    rows = []
    for mode in ("cl", "fl"):
        result = train(mode, datasets, spec, cfg.train_config(seed, mode),
                       cfg.corruption())
        if result.diverged or not result.logs:
            final_nmse = math.inf
        else:
            final_nmse = evaluate_model_nmse(cfg, result.params, spec, seed).nmse
        last = len(result.logs) - 1
        for i, log in enumerate(result.logs):
            rows.append(_row(cfg, axis, value, seed, mode, log.round_index,
                             log.loss, log.val_rmse,
                             final_nmse if i == last else None))
    if axis == "pilot_snr" and cfg.scenario == "mmimo":
        out = evaluate_mimo(cfg.system(), cfg.pilots(), cfg.eval_snr_db,
                            cfg.eval_trials, seed, use_ls=True, use_lmmse=True)
        for mode in ("ls", "lmmse"):
            rows.append(_row(cfg, axis, value, seed, mode, 0, None, None,
                             out[mode].report.nmse))
    return rows


def _point_worker(args):
    return run_point(*args)


def _max_workers(n_points):
    env = os.environ.get("FEDCHAN_THREADS")
    cap = int(env) if env else 1
    return max(1, min(cap, n_points))


def write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def run_experiment(cfg, out_dir, csv_name="results.csv"):
    """Full sweep: every sweep value x seed, CL and FL, sorted deterministic CSV."""
    if cfg.sweep is None:
        raise ConfigError("config selects no sweep axis")
    if not cfg.sweep_values:
        raise ConfigError("sweep requires a non-empty values list")
    os.makedirs(out_dir, exist_ok=True)
    points = [(cfg, cfg.sweep, value, seed)
              for value in cfg.sweep_values for seed in cfg.seeds]
    workers = _max_workers(len(points))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_point_worker, points))
    else:
        chunks = [run_point(*p) for p in points]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (sweep_sort_key(None if r["sweep_value"] == "inf"
                                            else float(r["sweep_value"])),
                             r["seed"], _MODE_ORDER[r["mode"]], r["round"]))
    path = os.path.join(out_dir, csv_name)
    write_csv(path, RESULT_COLUMNS, rows)
    return path


def round_log_rows(cfg, seed, mode, logs):
    rows = []
    for log in logs:
        rows.append({
            "round": log.round_index,
            "mode": mode,
            "loss": format_value(log.loss),
            "val_rmse": format_value(log.val_rmse),
            "grad_norm": format_value(log.agg_grad_norm),
            "snr_theta_db": "inf" if cfg.snr_theta_db is None else format_value(cfg.snr_theta_db),
            "bits": format_value(cfg.quant_bits),
            "zeta": format_value(cfg.erasure_frac),
            "seed": seed,
        })
    return rows


def overhead_rows(cfg, block_symbols=1000, n_points=50):
    """Cumulative transmitted symbols versus transmission blocks, per mode."""
    if cfg.scenario == "mmimo":
        report = build_overhead_report("mmimo", cfg.total_samples(), cfg.rounds,
                                       cfg.k_users, n_ms=cfg.n_ms, n_bs=cfg.n_bs)
    else:
        m_bs = cfg.m_bs if cfg.m_bs is not None else cfg.n_bs
        report = build_overhead_report("irs", cfg.total_samples(), cfg.rounds,
                                       cfg.k_users, n_bs=cfg.n_bs,
                                       n_irs=cfg.n_irs, m_bs=m_bs)
    rows = []
    for mode, total in (("fl", report.t_fl), ("cl", report.t_cl)):
        terminal = math.ceil(total / block_symbols)
        step = max(1, math.ceil(terminal / n_points))
        blocks = list(range(0, terminal, step)) + [terminal]
        for b in blocks:
            rows.append({"scenario": cfg.scenario, "mode": mode, "blocks": b,
                         "symbols": min(b * block_symbols, total),
                         "total_symbols": total})
    return rows, report


def _fd_gradient(params, x, y, spec, mask, step=1e-3):
    # central differences on the batch-mean loss; selfcheck-internal oracle
    def f(p):
        pred = net.forward(p, x, spec, mask=mask, mode="train")
        return float(np.mean(np.sum((pred - y) ** 2, axis=1)))

    grad = np.empty_like(params)
    for i in range(len(params)):
        up = params.copy(); up[i] += step
        dn = params.copy(); dn[i] -= step
        grad[i] = (f(up) - f(dn)) / (2 * step)
    return grad


def _check_gradient():
    # seed 1 gives a stencil well clear of every ReLU kink; error in max norm
    spec = net.NetworkSpec(in_rows=4, in_cols=4, out_len=6, n_conv=2,
                           n_filters=2, fc_width=8)
    rng = np.random.default_rng(1)
    params = net.init_params(spec, 1)
    x = rng.standard_normal((1, 4, 4, 3))
    y = rng.standard_normal((1, 6))
    mask = net.DropoutMask.for_round(1, 0, spec.kappa, spec.fc_width)
    grad, _ = net.backward(params, x, y, spec, mask)
    fd = _fd_gradient(params, x, y, spec, mask)
    return float(np.max(np.abs(grad - fd)) / np.max(np.abs(fd)))


def _check_preprocess_identity():
    from .channel import SystemConfig
    from .pilots import PilotConfig
    sys_cfg = SystemConfig(n_bs=8, n_ms=4, m_sub=4, cp_len=2, k_users=2,
                           n_paths=3, n_irs=2)
    pilots = PilotConfig.for_system(sys_cfg)
    worst = 0.0
    for i in range(5):
        h = ofdm_channel(gen_user_paths(sys_cfg, 0, 100 + i), sys_cfg)
        y = receive_pilots_mimo(h, pilots, 0.0, 0)
        g = preprocess_mimo(y, pilots)
        worst = max(worst, float(np.max(np.abs(g - h))))
    return worst


def _check_fl_equals_cl():
    from .channel import SystemConfig
    from .pilots import PilotConfig
    sys_cfg = SystemConfig(n_bs=4, n_ms=2, n_irs=2, m_sub=2, cp_len=2,
                           n_paths=2, n_paths_b=2, n_paths_s=2, n_paths_irs=2,
                           k_users=2)
    pilots = PilotConfig.for_system(sys_cfg, snr_levels_db=(20.0,))
    datasets = [collect_local_dataset("mmimo", sys_cfg, pilots, k, 5, 1, 3)
                for k in range(2)]
    spec = net.NetworkSpec.for_mimo(sys_cfg, n_filters=2, fc_width=8)
    tcfg = TrainConfig(rounds=5, batch_size=None, seed=3)
    fl = train("fl", datasets, spec, tcfg, CorruptionConfig(), trace_params=True)
    cl = train("cl", datasets, spec, tcfg, CorruptionConfig(), trace_params=True)
    return float(max(np.max(np.abs(a - b))
                     for a, b in zip(fl.param_trace, cl.param_trace)))


def selfcheck():
    """Analytic golden numbers plus the core numerical identities."""
    checks = []

    p = param_count_paper()
    checks.append(("parameter count expression", p == 600192, f"got {p}"))

    from .baselines import overhead_cl, overhead_fl
    t_fl = overhead_fl(600192, 100, 8)
    checks.append(("FL transmission overhead", t_fl == 960307200, f"got {t_fl}"))
    t_cl = overhead_cl("mmimo", 768000, n_ms=32, n_bs=128)
    checks.append(("CL transmission overhead", t_cl == 15728640000, f"got {t_cl}"))
    ratio = t_cl / t_fl
    checks.append(("overhead ratio in [16, 17]", 16 <= ratio <= 17, f"got {ratio:.3f}"))

    err = _check_gradient()
    checks.append(("gradient vs finite differences", err < 1e-4, f"max rel err {err:.2e}"))

    err = _check_preprocess_identity()
    checks.append(("pilot preprocessing identity", err < 1e-10, f"max abs err {err:.2e}"))

    err = _check_fl_equals_cl()
    checks.append(("federated equals pooled full-batch", err < 1e-10,
                   f"max trajectory diff {err:.2e}"))
    return checks
