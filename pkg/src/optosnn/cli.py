"""Command-line entry point.

Usage: optosnn <recipe> [--config FILE] [--out DIR] [--seed N] [--set SECTION.KEY=VALUE ...]

Every run writes its artifacts plus a manifest.json (config hash, seed,
versions, PRNG identity, output list) into the output directory.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .calibration import CalibrationError
from .config import ConfigError, ExperimentConfig
from .convert import ConversionError
from .mnist import IdxFormatError
from .recipes import RECIPES, default_config, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optosnn",
        description="Optoelectronic spiking neural network experiment harness",
    )
    sub = parser.add_subparsers(dest="recipe", required=True, metavar="RECIPE")
    descriptions = {
        "simulate-neuron": "single neuron driven by the grouped test pattern",
        "fig3-presets": "all committed spiking regimes under the reference drives",
        "fig5": "excitatory-only grouped-pattern run with per-group spike counts",
        "fig6": "grouped pattern with the inhibitory suppression train",
        "calibrate": "search neuron parameters for the N-spike accumulation target",
        "train-ann": "train the rectifier network on MNIST",
        "convert-ann": "transfer trained weights onto a spiking topology",
        "infer": "rate-coded spiking inference over MNIST test images",
        "train-stdp": "unsupervised WTA training at desk scale",
        "energy-report": "device energy/power sheet evaluation",
        "benchmark-points": "spike-event efficiency points for the shipped hardware sheets",
    }
    for name in sorted(RECIPES):
        p = sub.add_parser(name, help=descriptions.get(name, ""))
        p.add_argument("--config", help="experiment config file (key-value sections)")
        p.add_argument("--out", help="output directory (default out/<recipe>)")
        p.add_argument("--seed", type=int, help="override [experiment] seed")
        p.add_argument("--mnist-dir", help="directory with the four standard IDX files")
        p.add_argument(
            "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
            help="override one config entry (repeatable)",
        )
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> None:
    if args.out:
        cfg.sections.setdefault("experiment", {})["output_dir"] = args.out
    if args.seed is not None:
        cfg.sections.setdefault("experiment", {})["seed"] = str(args.seed)
    if args.mnist_dir:
        cfg.sections.setdefault("mnist", {})["dir"] = args.mnist_dir
    for item in args.set:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        cfg.sections.setdefault(section.strip(), {})[key.strip()] = value.strip()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = ExperimentConfig.from_file(args.config)
            cfg.sections.setdefault("experiment", {}).setdefault("name", args.recipe)
        else:
            cfg = default_config(args.recipe)
        if cfg.get_str("experiment", "name") != args.recipe:
            raise ConfigError(
                f"config names experiment {cfg.get_str('experiment', 'name')!r} "
                f"but the {args.recipe!r} recipe was requested"
            )
        _apply_overrides(cfg, args)
        manifest = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IdxFormatError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (CalibrationError, ConversionError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(manifest["summary"], indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
