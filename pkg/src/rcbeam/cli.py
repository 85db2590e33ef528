"""Command line entry point.

Subcommands run individual pipeline stages or the whole chain:

    rcbeam simulate --config run.yaml
    rcbeam decode   --config run.yaml
    rcbeam beamform --config run.yaml --threads 4
    rcbeam metrics  --config run.yaml
    rcbeam all      --config run.yaml --seed 7 --output-dir out

--output-dir, --seed, and --threads override the corresponding config
fields. Exit status is 0 on success, 2 for configuration errors, and 1 for
stage failures (the message names the failing stage).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import ConfigError, load_config
from .pipeline import STAGES, PipelineError, run_pipeline


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rcbeam",
        description=(
            "Encoded row-column synthetic aperture imaging: simulate channel "
            "data, decode, beamform, and measure image quality."
        ),
    )
    sub = p.add_subparsers(dest="command", required=True)
    help_by_stage = {
        "simulate": "simulate the encoded acquisition and write encoded.rcrf",
        "decode": "decode encoded.rcrf into per-column transmits",
        "beamform": "reconstruct one volume per configured scheme",
        "metrics": "measure FWHM/gCNR and write the CSV tables",
        "all": "run every stage in order",
    }
    for name in STAGES + ("all",):
        sp = sub.add_parser(name, help=help_by_stage[name])
        sp.add_argument("--config", required=True, help="YAML run configuration")
        sp.add_argument("--output-dir", default=None, help="override output_dir")
        sp.add_argument("--seed", type=int, default=None, help="override seed")
        sp.add_argument(
            "--threads",
            type=int,
            default=None,
            help="kernel worker threads (0 = all available)",
        )
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except OSError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    overrides = {}
    if args.output_dir is not None:
        overrides["output_dir"] = args.output_dir
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.threads is not None:
        overrides["threads"] = args.threads
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    stages = "all" if args.command == "all" else (args.command,)
    try:
        run_pipeline(cfg, stages)
    except PipelineError as e:
        print(f"error in stage '{e.stage}': {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
