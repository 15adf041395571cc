"""Command line entry point for the named experiments.

Usage: ``copolymer <subcommand> [--config FILE] [overrides...]``

Subcommands: free-energy, hc, bounds, hbar, scaling, deloc, smoothing,
mu, paths.  Flags override config-file values.  Exit codes: 0 success,
2 configuration error, 3 budget exceeded, 4 internal assertion failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .experiments import (
    BudgetError,
    ConfigError,
    ExperimentConfig,
    run_experiment,
)

_SUBCOMMANDS = (
    "free-energy", "hc", "bounds", "hbar", "scaling", "deloc", "smoothing", "mu", "paths",
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="copolymer",
        description="Desk-scale experiments for the copolymer at a selective interface",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key = value configuration file")
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument("--h", type=float, default=None)
        p.add_argument("--n", default=None, help="comma-separated length list")
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--disorder", choices=("gaussian", "rademacher", "uniform"), default=None)
        p.add_argument("--k-family", choices=("zeta", "srw"), default=None)
        p.add_argument("--emit-plot-data", action="store_true", default=False)
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        cfg = ExperimentConfig()
    overrides = {"experiment": args.experiment}
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.lam is not None:
        overrides["lam"] = args.lam
    if args.h is not None:
        overrides["h"] = args.h
    if args.n is not None:
        try:
            overrides["n_list"] = tuple(int(v) for v in args.n.split(",") if v.strip())
        except ValueError:
            raise ConfigError(f"bad --n value: {args.n!r}") from None
    if args.samples is not None:
        overrides["n_samples"] = args.samples
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.out is not None:
        overrides["output_path"] = args.out
    if args.disorder is not None:
        overrides["disorder"] = args.disorder
    if args.k_family is not None:
        overrides["k_family"] = args.k_family
    if args.emit_plot_data:
        overrides["emit_plot_data"] = True
    return replace(cfg, **overrides)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        cfg = _config_from_args(args)
        run_experiment(cfg)
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except BudgetError as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 3
    except AssertionError as e:
        print(f"internal assertion failed: {e}", file=sys.stderr)
        return 4
    print(f"wrote {cfg.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
