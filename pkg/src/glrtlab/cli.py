"""Experiment runner CLI.

Subcommands: ``run`` (Monte Carlo sweep + analytics), ``predict``
(analytics only), ``validate`` (config check incl. the vulnerability
threshold), ``figure`` (canned replication configs).  Exit codes:
0 ok, 1 configuration error, 2 runtime error.
"""

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

from .backend import active_backend
from .config import ConfigError, load_config, parse_config_text, validate_config
from .sweep import predict, run_experiment

FIGURES = ("fig1", "fig2", "fig3")


def _add_common(sub):
    sub.add_argument("--trials", type=int, default=None,
                     help="override the configured trial count")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the configured master seed")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker threads (affects speed only, never results)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="glrtlab",
        description="Robust Gaussian detection experiments: Monte Carlo "
                    "sweeps and analytical error predictions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a Monte Carlo sweep")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output CSV path")
    _add_common(p_run)

    p_pred = sub.add_parser("predict", help="analytical columns only")
    p_pred.add_argument("config")
    p_pred.add_argument("--out", default=None)

    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("config")

    p_fig = sub.add_parser("figure",
                           help="run a canned replication experiment")
    p_fig.add_argument("figure_id", choices=FIGURES)
    p_fig.add_argument("--out", required=True,
                       help="output directory for the CSV")
    _add_common(p_fig)

    sub.add_parser("backend", help="print the active kernel backend")
    return parser


def load_packaged_config(figure_id):
    text = (resources.files("glrtlab") / "configs" / f"{figure_id}.cfg") \
        .read_text(encoding="utf-8")
    return parse_config_text(text, source=f"configs/{figure_id}.cfg")


def _cmd_run(args):
    cfg = load_config(args.config)
    validate_config(cfg)
    path = run_experiment(cfg, out=args.out, trials=args.trials,
                          seed=args.seed, threads=args.threads)
    print(path)
    return 0


def _cmd_predict(args):
    cfg = load_config(args.config)
    if cfg.mode != "sweep":
        raise ConfigError("predict applies to sweep configs; moments-mode "
                          "outputs already carry their analytical columns")
    path = predict(cfg, out=args.out)
    print(path)
    return 0


def _cmd_validate(args):
    cfg = load_config(args.config)
    print(validate_config(cfg))
    return 0


def _cmd_figure(args):
    cfg = load_packaged_config(args.figure_id)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out = out_dir / f"{args.figure_id}.csv"
    if args.figure_id == "fig3":
        # prediction-only replication (no sampling)
        path = predict(cfg, out=str(out))
    else:
        path = run_experiment(cfg, out=str(out), trials=args.trials,
                              seed=args.seed, threads=args.threads)
    print(path)
    return 0


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "figure":
            return _cmd_figure(args)
        if args.command == "backend":
            print(active_backend())
            return 0
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
