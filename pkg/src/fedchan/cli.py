"""Command-line entry point.

Subcommands: generate (datasets), train, evaluate, sweep, selfcheck, report.
Common flags: --config PATH, --seed N, --out DIR, --profile {desk,paper}.
The FEDCHAN_THREADS environment variable caps the sweep worker pool.
"""

import argparse
import os
import sys

from . import data_io, experiment
from .baselines import complexity_report
from .config import ConfigError, load_config
from .training import train


def _add_common(parser):
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config's seed list with one seed")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--profile", choices=("desk", "paper"), default="paper",
                        help="named parameter preset applied before the config file")


def _load(args):
    overrides = {}
    if args.seed is not None:
        overrides["seeds"] = (args.seed,)
    if args.out is not None:
        overrides["out_dir"] = args.out
    return load_config(args.config, profile=args.profile, overrides=overrides)


def _cmd_generate(args):
    cfg = _load(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    for seed in cfg.seeds:
        datasets = experiment.build_datasets(cfg, seed)
        for d in datasets:
            path = os.path.join(cfg.out_dir,
                                f"dataset_{cfg.scenario}_s{seed}_u{d.user}.fcds")
            data_io.write_dataset(path, d, cfg.scenario, seed, cfg.m_sub)
            print(f"wrote {path}: {len(d.samples)} samples "
                  f"({len(d.train_indices)} train / {len(d.val_indices)} val)")
    print(f"samples per user: {cfg.samples_per_user()}, total: {cfg.total_samples()}")
    return 0


def _cmd_train(args):
    cfg = _load(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    spec = experiment.network_spec(cfg)
    for seed in cfg.seeds:
        datasets = experiment.build_datasets(cfg, seed)
        result = train(cfg.mode, datasets, spec, cfg.train_config(seed),
                       cfg.corruption())
        model_path = os.path.join(cfg.out_dir, f"model_{cfg.mode}_s{seed}.fcmp")
        data_io.write_model(model_path, result.params, spec)
        rounds_path = os.path.join(cfg.out_dir, f"rounds_{cfg.mode}_s{seed}.csv")
        experiment.write_csv(rounds_path, experiment.ROUND_COLUMNS,
                             experiment.round_log_rows(cfg, seed, cfg.mode, result.logs))
        status = "DIVERGED" if result.diverged else "ok"
        final = result.logs[-1].val_rmse if result.logs else float("nan")
        print(f"seed {seed}: {len(result.logs)} rounds, final val RMSE {final:.6g} "
              f"[{status}] -> {model_path}")
    return 0


def _cmd_evaluate(args):
    cfg = _load(args)
    spec = experiment.network_spec(cfg)
    params = data_io.read_model(args.model, spec)
    for seed in cfg.seeds:
        report = experiment.evaluate_model_nmse(cfg, params, spec, seed)
        print(f"seed {seed}: NMSE {report.nmse:.6g} over {report.trials} trials "
              f"at {report.snr_db} dB pilot SNR")
    return 0


def _cmd_sweep(args):
    cfg = _load(args)
    path = experiment.run_experiment(cfg, cfg.out_dir)
    print(f"wrote {path}")
    return 0


def _cmd_selfcheck(args):
    checks = experiment.selfcheck()
    width = max(len(name) for name, _, _ in checks)
    failed = 0
    for name, ok, detail in checks:
        status = "PASS" if ok else "FAIL"
        print(f"{name:<{width}}  {status}  {detail}")
        failed += 0 if ok else 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def _cmd_report(args):
    cfg = _load(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    if args.kind == "overhead":
        rows, report = experiment.overhead_rows(cfg, block_symbols=args.block_symbols)
        path = os.path.join(cfg.out_dir, "overhead.csv")
        experiment.write_csv(path, experiment.OVERHEAD_COLUMNS, rows)
        print(f"T_CL = {report.t_cl} symbols, T_FL = {report.t_fl} symbols, "
              f"ratio {report.ratio:.2f} -> {path}")
    else:
        rep = complexity_report(cfg.n_ms, cfg.n_bs)
        path = os.path.join(cfg.out_dir, "complexity.csv")
        rows = [{"n_ms": cfg.n_ms, "n_bs": cfg.n_bs, **rep}]
        experiment.write_csv(path, ("n_ms", "n_bs", "c_cl", "c_fcl", "c_total",
                                    "c_ls", "c_mmse"), rows)
        print(f"operation counts at ({cfg.n_ms}, {cfg.n_bs}) -> {path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="fedchan",
                                     description="Federated channel estimation testbed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate and store per-user datasets")
    _add_common(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("train", help="train one model per seed")
    _add_common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="estimate NMSE of a stored model")
    _add_common(p)
    p.add_argument("--model", required=True, help="model file to evaluate")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="run the configured sweep into results.csv")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("selfcheck", help="run the analytic golden-number checks")
    p.set_defaults(func=_cmd_selfcheck)

    p = sub.add_parser("report", help="emit overhead/complexity accounting CSVs")
    _add_common(p)
    p.add_argument("--kind", choices=("overhead", "complexity"), default="overhead")
    p.add_argument("--block-symbols", type=int, default=1000,
                   help="symbols per transmission block for the overhead curve")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, data_io.DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
