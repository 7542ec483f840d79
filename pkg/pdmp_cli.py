#!/usr/bin/env python3
"""PDMP toolkit - command-line interface.

Subcommands:
    simulate   trajectory CSV of --n jumps (optionally the plot-ready path)
    estimate   one-line estimate CSV of q_hat, p_hat, h_hat at (--x, --y)
    replicate  replicated estimates over the n-list (replicates.csv, summary.csv)
    sweep      replicated estimates over an (alpha, beta) grid at fixed n
    clt        standardized errors and normality test (clt.csv)
    pi         p_hat curve against the empirical law of pre-jump locations (pi.csv)
    curve      q_hat(x, .) curves at every n of the n-list (curve_<x>.csv)
    rdump      one-step density r(y, .) over a grid (r_<y>.csv)

Exit codes: 0 success, 1 config error, 2 runtime failure.
"""

import sys
import logging
import argparse
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from dotenv import load_dotenv

from src.settings import ENV_PATH
from src.logging_setup import setup_logging
from src.core import build_cell_model, entropy_seed, simulate, trajectory_path
from src.errors import ConfigError, PdmpError
from src.estimators import EvalTarget
from src.experiments import (
    bandwidth_sweep,
    build_estimator,
    build_kernel,
    clt_study,
    curve_study,
    pi_study,
    run_replicates,
    summarize,
)
from src.experiments.harness import quad_spec
from src.models import RunConfig
from src.services import ResultFiles, load_config_file, parse_config, split_override
from src.services.config_loader import section_keys
from src.services.files import tag

load_dotenv(dotenv_path=ENV_PATH)

logger = logging.getLogger("pdmp")

COMMANDS = ("simulate", "estimate", "replicate", "sweep", "clt", "pi", "curve", "rdump")
DEFAULT_SIMULATE_JUMPS = 10


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises ConfigError instead of exiting with status 2."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


# ============================================================================
# Argument parsing
# ============================================================================

def _common_options() -> argparse.ArgumentParser:
    common = CliParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="YAML config file (sections: model, kernel, bandwidths, experiment)")
    common.add_argument("--set", dest="set_pairs", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="Override a config key (repeatable)")
    common.add_argument("--seed", type=int, default=None, help="Master seed (drawn from entropy when absent)")
    common.add_argument("-o", "--output", type=str, default=None, help="Output directory (experiment.output_dir)")
    common.add_argument("--workers", type=int, default=None, help="Parallel workers (capped by PDMP_THREADS)")
    common.add_argument("--log-level", type=str, default=None, help="Logging level (default PDMP_LOG_LEVEL or INFO)")
    common.add_argument("overrides", nargs="*", metavar="KEY=VALUE", help="Bare overrides, e.g. alpha=0.5")

    flags = common.add_argument_group("config keys")
    for section, keys in section_keys().items():
        for key in keys:
            flags.add_argument(f"--{section}.{key}", dest=f"flag:{section}.{key}", default=None, metavar="VALUE")
    return common


def build_parser() -> CliParser:
    parser = CliParser(
        prog="pdmp_cli.py",
        description="Simulate PDMPs and estimate their transition density recursively",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")
    common = _common_options()

    p = sub.add_parser("simulate", parents=[common], help="Simulate one trajectory")
    p.add_argument("--n", type=int, default=DEFAULT_SIMULATE_JUMPS, help="Number of jumps")
    p.add_argument("--path", action="store_true", help="Also write the continuous-time path for plotting")

    p = sub.add_parser("estimate", parents=[common], help="Estimate q, p, h at one pair")
    p.add_argument("--x", type=float, default=None, help="Pre-jump coordinate (default: first target)")
    p.add_argument("--y", type=float, default=None, help="Post-jump coordinate (default: first target)")
    p.add_argument("--n", type=int, default=None, help="Observed jumps (default: largest of experiment.jump_counts)")

    sub.add_parser("replicate", parents=[common], help="Replicated estimates over the n-list")
    sub.add_parser("sweep", parents=[common], help="Replicated estimates over an (alpha, beta) grid")

    p = sub.add_parser("clt", parents=[common], help="CLT standardized errors")
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--y", type=float, default=None)

    sub.add_parser("pi", parents=[common], help="Invariant law of the pre-jump chain")

    p = sub.add_parser("curve", parents=[common], help="q_hat(x, .) curves")
    p.add_argument("--x", type=float, default=None, help="Pre-jump coordinate (default: experiment.curve_x)")

    p = sub.add_parser("rdump", parents=[common], help="One-step pre-jump density r(y, .)")
    p.add_argument("--y", type=float, default=1.0, help="Previous pre-jump location")
    return parser


def collect_overrides(args: argparse.Namespace) -> List[str]:
    """Overrides in application order: --set, bare pairs, --section.key flags, shortcut flags."""
    pairs = list(args.set_pairs) + list(args.overrides)
    for dest, value in vars(args).items():
        if dest.startswith("flag:") and value is not None:
            pairs.append(f"{dest[len('flag:'):]}={value}")
    if args.seed is not None:
        pairs.append(f"experiment.seed={args.seed}")
    if args.output is not None:
        pairs.append(f"experiment.output_dir={args.output}")
    if args.workers is not None:
        pairs.append(f"experiment.workers={args.workers}")
    for pair in pairs:
        split_override(pair)
    return pairs


def resolve_run(args: argparse.Namespace) -> RunConfig:
    """Config file + overrides; a missing seed is drawn from entropy and recorded as an override."""
    overrides = collect_overrides(args)
    if args.config:
        run = load_config_file(args.config, overrides, command=args.command)
    else:
        run = parse_config("", overrides, command=args.command)
    if run.config.experiment.seed is None:
        seed = entropy_seed()
        logger.warning(f"No seed given; drew {seed} from entropy (recorded in the manifest)")
        overrides = overrides + [f"experiment.seed={seed}"]
        run = run.model_copy(update={
            "config": run.config.with_experiment(seed=seed),
            "overrides": overrides,
        })
    return run


# ============================================================================
# Commands
# ============================================================================

def cmd_simulate(run: RunConfig, args: argparse.Namespace, out: Path) -> None:
    cfg = run.config
    if args.n < 1:
        raise ConfigError(f"--n must be >= 1, got {args.n}")
    model = build_cell_model(cfg.model)
    traj = simulate(model, (cfg.model.x0,), args.n, cfg.require_seed(), stream=0)
    ResultFiles.write_trajectory(out / "trajectory.csv", traj)
    if args.path:
        times, values = trajectory_path(model, traj)
        ResultFiles.write_path(out / "path.csv", times, values)


def cmd_estimate(run: RunConfig, args: argparse.Namespace, out: Path) -> None:
    cfg = run.config
    x0, y0 = cfg.experiment.targets[0]
    x = x0 if args.x is None else args.x
    y = y0 if args.y is None else args.y
    n = cfg.experiment.jump_counts[-1] if args.n is None else args.n
    if n < 1:
        raise ConfigError(f"--n must be >= 1, got {n}")

    model = build_cell_model(cfg.model)
    est = build_estimator(cfg, model, build_kernel(cfg, model.dimension))
    est.register(EvalTarget.pair(x, y))
    traj = simulate(model, (cfg.model.x0,), n + 1, cfg.require_seed(), stream=0)
    est.consume(traj.records)
    ResultFiles.write_estimates(out / "estimate.csv", est.snapshot())


def cmd_replicate(run: RunConfig, args: argparse.Namespace, out: Path) -> None:
    table = run_replicates(run.config)
    ResultFiles.write_replicates(out / "replicates.csv", table)
    ResultFiles.write_summary(out / "summary.csv", summarize(table))


def cmd_sweep(run: RunConfig, args: argparse.Namespace, out: Path) -> None:
    table = bandwidth_sweep(run.config)
    ResultFiles.write_replicates(out / "replicates.csv", table)
    ResultFiles.write_summary(out / "summary.csv", summarize(table))


def cmd_clt(run: RunConfig, args: argparse.Namespace, out: Path) -> None:
    cfg = run.config
    target = None
    if args.x is not None or args.y is not None:
        cx, cy = cfg.experiment.clt_target
        target = (cx if args.x is None else args.x, cy if args.y is None else args.y)
    ResultFiles.write_clt(out / "clt.csv", clt_study(cfg, target))


def cmd_pi(run: RunConfig, args: argparse.Namespace, out: Path) -> None:
    ResultFiles.write_pi(out, pi_study(run.config))


def cmd_curve(run: RunConfig, args: argparse.Namespace, out: Path) -> None:
    cfg = run.config
    xs = cfg.experiment.curve_x if args.x is None else [args.x]
    for x in xs:
        ResultFiles.write_curves(out, curve_study(cfg, x))


def cmd_rdump(run: RunConfig, args: argparse.Namespace, out: Path) -> None:
    cfg = run.config
    exp = cfg.experiment
    model = build_cell_model(cfg.model)
    grid = np.linspace(exp.pi_lower, exp.pi_upper, exp.pi_points).tolist()
    ResultFiles.write_r_dump(out / f"r_{tag(args.y)}.csv", model, args.y, grid, quad_spec(cfg))


HANDLERS: Dict[str, Callable[[RunConfig, argparse.Namespace, Path], None]] = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "replicate": cmd_replicate,
    "sweep": cmd_sweep,
    "clt": cmd_clt,
    "pi": cmd_pi,
    "curve": cmd_curve,
    "rdump": cmd_rdump,
}


# ============================================================================
# Entry point
# ============================================================================

def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        setup_logging(args.log_level)
        run = resolve_run(args)
    except ConfigError as exc:
        print(parser.format_usage(), file=sys.stderr, end="")
        print(f"error: {exc}", file=sys.stderr)
        return 1

    out = Path(run.config.experiment.output_dir)
    logger.info(f"Running '{run.command}' (seed={run.config.experiment.seed}) -> {out}")
    try:
        HANDLERS[run.command](run, args, out)
        ResultFiles.write_manifest(out, run)
    except ConfigError as exc:
        logger.error(f"Config error: {exc}")
        return 1
    except (PdmpError, OSError) as exc:
        logger.error(f"'{run.command}' failed: {type(exc).__name__}: {exc}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
