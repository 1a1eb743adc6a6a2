"""Command-line interface: dataset extraction and dataset statistics."""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path

from .config import CoqConfig
from .errors import CoqBridgeError
from .extract import ExtractOptions, dataset_stats, extract_workspace, format_stats


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coqbridge",
        description="Extract premise-annotated proof data through a Coq language server.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="extract proof data from a workspace")
    p_extract.add_argument("--workspace", type=Path, required=True)
    p_extract.add_argument("--output", type=Path, required=True)
    p_extract.add_argument("--glob", action="append", default=None,
                           help="file glob, relative to the workspace (repeatable; "
                                "default **/*.v)")
    p_extract.add_argument("--timeout", type=float, default=300.0,
                           help="per-file budget in seconds (default 300)")
    p_extract.add_argument("--jobs", type=int, default=1,
                           help="parallel workers, one server session each")
    p_extract.add_argument("--mock", type=Path, default=None, metavar="FIXTURE_DIR",
                           help="replay recorded fixtures instead of a live server")
    p_extract.add_argument("--server", type=str, default=None,
                           help="server command (overrides COQBRIDGE_SERVER)")
    p_extract.add_argument("--installed-root", action="append", type=Path, default=[],
                           help="root of installed library sources (repeatable)")
    p_extract.add_argument("--cache-dir", type=Path, default=None,
                           help="cache harvested library contexts here")

    p_stats = sub.add_parser("stats", help="summarize an extracted dataset")
    p_stats.add_argument("--dataset", type=Path, required=True)
    p_stats.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "extract":
        config = CoqConfig(
            server_command=shlex.split(args.server) if args.server else None,
            installed_roots=list(args.installed_root),
            cache_dir=args.cache_dir,
        )
        options = ExtractOptions(
            globs=args.glob or ["**/*.v"],
            timeout=args.timeout,
            jobs=args.jobs,
            config=config,
            mock_dir=args.mock,
        )
        summary = extract_workspace(args.workspace, args.output, options)
        totals = summary["totals"]
        print(f"processed {totals['processed']}, coq-errors {totals['coq_errors']}, "
              f"timeouts {totals['timeouts']}, failed {totals['failed']}")
        return 1 if totals["failed"] else 0
    if args.command == "stats":
        try:
            report = dataset_stats(args.dataset)
        except CoqBridgeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        if args.json:
            print(json.dumps(report, ensure_ascii=False, indent=2))
        else:
            print(format_stats(report))
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
