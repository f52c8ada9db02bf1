"""Command-line entry point: `pipeline <command> --config <file> ...`.

Exit codes: 0 success, 1 usage or configuration error, 2 missing
dependency or run-state conflict, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from ..errors import (
    ConfigError,
    CropganError,
    DatasetError,
    DependencyError,
    NumericalError,
    ShapeError,
)
from .config import config_hash, default_config_yaml, load_config
from .report import render_report
from .runrecord import run_lock
from .stages import PipelineRun

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DEPENDENCY = 2
EXIT_NUMERICAL = 3

RUN_ALL_ORDER = [
    "preprocess", "pair", "train-gan", "generate",
    "eval-gen", "train-clf", "explain", "eval-seg", "report",
]

COMMANDS = {
    "preprocess": "ingest raw images, preprocess, augment and split",
    "pair": "couple healthy and diseased training images",
    "train-gan": "train both translators per disease",
    "generate": "translate healthy images into disease-styled ones",
    "eval-gen": "score generated sets (FID, inception score)",
    "train-clf": "train classifier adapters and compute their metrics",
    "explain": "render CAM heatmap overlays and the method grid",
    "eval-seg": "export COCO, emit engine configs, evaluate instances",
    "report": "render the markdown report and figures",
    "run-all": "run every stage in dependency order",
    "init-config": "print a commented default configuration file",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pipeline",
                     description="crop disease synthesis and evaluation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        cmd = sub.add_parser(name, help=help_text)
        if name == "init-config":
            cmd.add_argument("--out", default=None,
                             help="write the template here instead of stdout")
            continue
        cmd.add_argument("--config", default=None, help="YAML configuration file")
        cmd.add_argument("--run", default=None, help="run directory id")
        cmd.add_argument("--seed", type=int, default=None, help="override config seed")
        cmd.add_argument("--force", action="store_true",
                         help="redo completed stages / accept config changes")
        if name == "explain":
            cmd.add_argument("--layer", default=None, help="target activation layer")
            cmd.add_argument("--class-index", type=int, default=None,
                             help="class to explain (default: predicted)")
            cmd.add_argument("--alpha", type=float, default=None,
                             help="overlay blend weight in [0, 1]")
            cmd.add_argument("--colormap", default=None, help="matplotlib colormap name")
    return parser


def _effective_config(args) -> dict:
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if os.environ.get("PIPELINE_RUN_ROOT"):
        overrides["run_root"] = os.environ["PIPELINE_RUN_ROOT"]
    cam = {}
    for flag, key in (("layer", "layer"), ("class_index", "class_index"),
                      ("alpha", "alpha"), ("colormap", "colormap")):
        value = getattr(args, flag, None)
        if value is not None:
            cam[key] = value
    if cam:
        overrides["cam"] = cam
    return load_config(args.config, overrides)


def _run_id(args, cfg: dict) -> str:
    if args.run:
        return args.run
    return f"run-{config_hash(cfg)}"


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "init-config":
        text = default_config_yaml()
        if args.out:
            Path(args.out).write_text(text)
            print(f"wrote {args.out}")
        else:
            print(text, end="")
        return EXIT_OK

    try:
        cfg = _effective_config(args)
        run_id = _run_id(args, cfg)
        if args.command == "report":
            run_dir = Path(cfg["run_root"]) / run_id
            result = render_report(run_dir)
            print(f"report: {result['markdown']}")
            return EXIT_OK

        run = PipelineRun(cfg, run_id, force=args.force)
        commands = RUN_ALL_ORDER if args.command == "run-all" else [args.command]
        with run_lock(run.run_dir):
            run.record.save(run.run_dir)
            for command in commands:
                if command == "report":
                    render_report(run.run_dir)
                    continue
                getattr(run, f"cmd_{command.replace('-', '_')}")()
                print(f"{command}: done (run {run_id})")
        if args.command == "run-all":
            print(f"report: {run.run_dir / 'report' / 'report.md'}")
        return EXIT_OK
    except DependencyError as exc:
        print(f"dependency error: {exc}", file=sys.stderr)
        return EXIT_DEPENDENCY
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, DatasetError, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CropganError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: missing file {exc.filename}", file=sys.stderr)
        return EXIT_DEPENDENCY


if __name__ == "__main__":
    sys.exit(main())
