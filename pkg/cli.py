#!/usr/bin/env python3
"""
entlab CLI: numerical experiments on quantized cat maps

Usage:
    python cli.py <subcommand> [--config FILE] [--N 64 128] [--seed 1] [--plot] [--out DIR]
    python cli.py list
"""

import argparse
import logging
import os
import sys

from src.pipeline.errors import EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, EXIT_UNEXPECTED, ConfigError, InvariantFailure
from src.pipeline.graph import run
from src.utils.progress import set_verbose
from src.workflows import REGISTRY


def print_banner():
    """Print CLI banner"""
    print("=" * 60)
    print("  entlab - entropy bounds for quantized cat maps")
    print("=" * 60)
    print()


def add_shared_options(parser: argparse.ArgumentParser):
    """Options every experiment subcommand accepts"""
    parser.add_argument("--config", help="JSON config file (keys of ExperimentConfig)")
    parser.add_argument("--N", dest="N_values", type=int, nargs="+", help="Even Hilbert-space dimensions")
    parser.add_argument("--K", type=int, help="Partition cardinality")
    parser.add_argument("--seed", type=int, help="Seed of every random draw (default: 1)")
    parser.add_argument("--out", dest="output_dir", help="Output root; files go to <out>/<subcommand>/ (default: output)")
    parser.add_argument("--workers", type=int, help="Worker threads (default: 1)")
    parser.add_argument("--plot", action="store_true", default=None, help="Also write SVG plots")
    parser.add_argument(
        "--dry-run",
        action="store_true",
        help="Resolve the configuration and write the manifest without running",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--quiet", action="store_true", help="No progress output")
    verbosity.add_argument("--verbose", action="store_true", help="Debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entlab",
        description="Quantized cat maps, refined entropies, the entropic uncertainty principle and KS bounds",
    )
    subparsers = parser.add_subparsers(dest="command", help="Commands")

    for name, experiment in REGISTRY.items():
        sub = subparsers.add_parser(
            name,
            help=experiment.help,
            description=experiment.help,
            epilog=experiment.columns_epilog(),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        add_shared_options(sub)

    subparsers.add_parser("list", help="List experiments and their outputs")
    return parser


def configure_logging(verbose: bool):
    level_name = "DEBUG" if verbose else os.getenv("ENTLAB_LOG_LEVEL", "WARNING")
    logging.basicConfig(
        level=getattr(logging, level_name.upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def list_command():
    """Print every experiment with its CSV columns"""
    print_banner()
    for name, experiment in REGISTRY.items():
        print(f"{name}")
        print(f"  {experiment.help}")
        for line in experiment.columns_epilog().splitlines()[1:]:
            print(f"  {line}")
        print()
    return EXIT_OK


def run_command(args) -> int:
    """
    Run one experiment through the pipeline

    Returns:
        Exit code: 0 pass, 2 config error, 3 invariant failure, 1 unexpected error
    """
    set_verbose(not args.quiet)
    overrides = {
        "N_values": args.N_values,
        "K": args.K,
        "seed": args.seed,
        "output_dir": args.output_dir,
        "workers": args.workers,
        "plot": args.plot,
    }

    try:
        final_state = run(args.command, args.config, overrides, dry_run=args.dry_run)
    except ConfigError as e:
        print(f"\n❌ Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantFailure as e:
        print(f"\n❌ {e}", file=sys.stderr)
        for c in e.failed:
            print(f"   ✗ {c.name}: {c.detail}", file=sys.stderr)
        return EXIT_INVARIANT
    except Exception as e:
        print(f"\n❌ Error: {e}", file=sys.stderr)
        import traceback
        traceback.print_exc()
        return EXIT_UNEXPECTED

    if not args.quiet:
        print(f"✓ Manifest written to {final_state['manifest_path']}")
    return EXIT_OK


def main():
    """Main CLI entry point"""
    parser = build_parser()
    args = parser.parse_args()

    if not args.command:
        parser.print_help()
        return EXIT_CONFIG
    if args.command == "list":
        return list_command()

    configure_logging(args.verbose)
    return run_command(args)


if __name__ == "__main__":
    sys.exit(main())
