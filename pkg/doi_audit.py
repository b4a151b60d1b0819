#!/usr/bin/env python3
"""
doi-audit - CLI entry point for the deleted-DOI audit.

Compares two DOI snapshots, gathers evidence for every DOI that disappeared,
classifies the deletions and writes the report tables.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from pydantic import ValidationError

from config import (
    CONCURRENCY, DOI_AUDIT_CACHE, DOI_AUDIT_MAILTO, MAX_REDIRECTS, MAX_RETRIES, RATE_LIMIT_PER_HOST,
    REPORT_FORMATS, SORT_WORKERS, TOOL_NAME, TOOL_VERSION, TOP_K,
)
from model.errors import AuditError, ConfigError, InputError, StageFailure
from pipeline import STAGES, RunConfig, run_pipeline
from utils.core import atomic_write_json, setup_logging

logger = logging.getLogger("doi_audit")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_STAGE = 4


def _formats(values: Optional[List[str]]) -> List[str]:
    if not values:
        return ["csv"]
    out = []
    for value in values:
        out += [v.strip() for v in value.split(",") if v.strip()]
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    inputs = common.add_argument_group("inputs")
    inputs.add_argument('--snapshot-a', help='Earlier DOI dump (plain text or JSON-lines, optionally gzipped)')
    inputs.add_argument('--snapshot-b', help='Later DOI dump')
    inputs.add_argument('--label-a', default='A', help='Label of the earlier snapshot (default: A)')
    inputs.add_argument('--label-b', default='B', help='Label of the later snapshot (default: B)')
    inputs.add_argument('--fixtures', metavar='DIR', help='Fixture store of recorded responses (JSON-lines files)')
    inputs.add_argument('--offline', action='store_true', help='Never touch the network; a fixture miss is fatal')
    inputs.add_argument('--alias-map', metavar='FILE', help='CSV of alias,primary pairs (conflict report export)')

    network = common.add_argument_group("network")
    network.add_argument('--cache-dir', default=DOI_AUDIT_CACHE, help='Response cache directory')
    network.add_argument('--rate-limit', type=float, default=RATE_LIMIT_PER_HOST, metavar='N',
                         help=f'Requests per second per host (default: {RATE_LIMIT_PER_HOST:g})')
    network.add_argument('--concurrency', type=int, default=CONCURRENCY, metavar='N',
                         help=f'Concurrent lookups (default: {CONCURRENCY})')
    network.add_argument('--retries', type=int, default=MAX_RETRIES, metavar='N',
                         help=f'Attempts per request (default: {MAX_RETRIES})')
    network.add_argument('--max-redirects', type=int, default=MAX_REDIRECTS, metavar='N',
                         help=f'Redirect hops followed per DOI link (default: {MAX_REDIRECTS})')
    network.add_argument('--mailto', default=DOI_AUDIT_MAILTO, metavar='ADDR',
                         help='Contact address for the Crossref polite pool')
    network.add_argument('--annotation', help='Free-form note stored with every evidence record')

    output = common.add_argument_group("output")
    output.add_argument('--out', default='doi-audit-out', metavar='DIR', help='Report directory')
    output.add_argument('--workdir', metavar='DIR', help='Intermediate files (default: <out>/work)')
    output.add_argument('--format', action='append', metavar='FMT',
                        help=f'Report format, repeatable or comma-separated: {", ".join(REPORT_FORMATS)} '
                             '(default: csv)')
    output.add_argument('--top-k', type=int, default=TOP_K, metavar='N',
                        help=f'Rows in ranked tables (default: {TOP_K})')
    output.add_argument('--chunk-bytes', type=int, metavar='N',
                        help='Text volume sorted in memory per run during ingest')
    output.add_argument('--sort-workers', type=int, default=SORT_WORKERS, metavar='N',
                        help='Processes sorting ingest runs')
    output.add_argument('--force', action='store_true',
                        help='Rerun the named stage (every stage for run) even if checkpointed')
    output.add_argument('-v', '--verbose', action='count', default=0, help='More logging (repeatable)')
    output.add_argument('-q', '--quiet', action='store_true', help='Warnings only, no progress bars')

    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description='Audit DOIs deleted between two registry snapshots',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  doi_audit.py run --snapshot-a 2017.txt.gz --snapshot-b 2021.jsonl.gz --mailto me@example.org
  doi_audit.py run --snapshot-a fixtures/demo/snapshot_a.txt --snapshot-b fixtures/demo/snapshot_b.jsonl \\
      --fixtures fixtures/demo/evidence --offline --format csv,markdown

Every subcommand runs the stages up to its own, reusing checkpoints of
earlier stages run with the same settings.

Exit codes: 0 success, 2 configuration error, 3 input error, 4 stage failure.
        """,
    )
    parser.add_argument('--version', action='version', version=f'{TOOL_NAME} {TOOL_VERSION}')
    sub = parser.add_subparsers(dest='command', required=True)
    help_text = {
        'ingest': 'Normalize, dedupe and sort both snapshots',
        'diff': 'Compute difference and product sets',
        'resolve': 'Gather RA, redirect and metadata evidence for deletion candidates',
        'classify': 'Assign every candidate a deletion group',
        'analyze': 'Compute document type, alias group, prefix and suffix analyses',
        'report': 'Write the report tables',
        'run': 'Run every stage end to end',
    }
    for name in list(STAGES) + ['run']:
        sub.add_parser(name, parents=[common], help=help_text[name])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    settings = dict(
        snapshot_a=args.snapshot_a,
        snapshot_b=args.snapshot_b,
        label_a=args.label_a,
        label_b=args.label_b,
        out_dir=args.out,
        workdir=args.workdir,
        cache_dir=args.cache_dir,
        fixtures=args.fixtures,
        offline=args.offline,
        alias_map=args.alias_map,
        rate_limit=args.rate_limit,
        concurrency=args.concurrency,
        max_retries=args.retries,
        max_redirects=args.max_redirects,
        mailto=args.mailto,
        formats=tuple(_formats(args.format)),
        top_k=args.top_k,
        sort_workers=args.sort_workers,
        annotation=args.annotation,
        show_progress=not args.quiet,
    )
    if args.chunk_bytes is not None:
        settings["chunk_bytes"] = args.chunk_bytes
    return RunConfig(**settings)


def write_error_report(out_dir: str, error: BaseException, stage: Optional[str] = None):
    """Machine-readable error.json next to the reports."""
    report = {
        "stage": stage or getattr(error, "stage", None),
        "error": type(getattr(error, "cause", None) or error).__name__,
        "message": str(error),
    }
    doi = getattr(error, "doi", None)
    if doi:
        report["doi"] = doi
    try:
        atomic_write_json(os.path.join(out_dir, "error.json"), report)
    except OSError as e:
        logger.error("Could not write error.json: %s", e)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(-1 if args.quiet else args.verbose)

    until = 'report' if args.command == 'run' else args.command
    force = None
    if args.force:
        force = STAGES[0] if args.command == 'run' else args.command
    try:
        cfg = config_from_args(args)
    except ValidationError as e:
        logger.error("Invalid configuration:\n%s", e)
        write_error_report(args.out, e, stage="config")
        return EXIT_CONFIG

    try:
        run_pipeline(cfg, until=until, force=force)
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        return 130
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        write_error_report(cfg.out_dir, e, stage="config")
        return EXIT_CONFIG
    except InputError as e:
        logger.error("Input error: %s", e)
        write_error_report(cfg.out_dir, e)
        return EXIT_INPUT
    except StageFailure as e:
        logger.error("%s", e)
        write_error_report(cfg.out_dir, e)
        return EXIT_STAGE
    except AuditError as e:
        logger.error("Failed: %s", e)
        write_error_report(cfg.out_dir, e)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
