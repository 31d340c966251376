"""Command line entry point ``mfhb``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .harness import exact_report, load_config, run_experiment, write_metadata

EXIT_OK, EXIT_ERROR, EXIT_FLAGGED = 0, 1, 2


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.threads is not None:
        cfg = cfg.with_overrides(threads=args.threads)
    table = run_experiment(cfg)
    out_dir = Path(args.out) if args.out else Path(".")
    csv_path = table.write(out_dir / Path(cfg.output).name)
    write_metadata(cfg, table, csv_path.with_suffix(".meta.json"))
    sys.stdout.write(table.to_csv())
    print(f"wrote {csv_path}", file=sys.stderr)
    if table.flagged:
        print("some cells exceeded the skip limit", file=sys.stderr)
        return EXIT_FLAGGED
    return EXIT_OK


def _cmd_exact(args) -> int:
    cfg = load_config(args.config)
    print("statistic,sd,sd_x10")
    for row in exact_report(cfg):
        print(f"{row['statistic']},{row['sd']:.6f},{row['scaled']:.4f}")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    failures = run_selftest(verbose=not args.quiet)
    return EXIT_OK if not failures else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mfhb", description="Multiple frequency hybrid bootstrap experiments"
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a simulation study and write a CSV table")
    run.add_argument("config", help="experiment JSON file")
    run.add_argument("--out", help="output directory (default: current directory)")
    run.add_argument("--threads", type=int, help="worker threads for repetitions")
    run.set_defaults(func=_cmd_run)

    exact = sub.add_parser("exact", help="Monte Carlo standard deviation of each statistic")
    exact.add_argument("config", help="experiment JSON file")
    exact.set_defaults(func=_cmd_exact)

    st = sub.add_parser("selftest", help="run the built-in invariant checks")
    st.add_argument("--quiet", action="store_true")
    st.set_defaults(func=_cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
