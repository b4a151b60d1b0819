#!/usr/bin/env python3
"""
Generate a pair of synthetic DOI snapshots for load-testing ingest and diff.

Snapshot A is plain text, snapshot B is JSON-lines; both may be gzipped.
A share of A's DOIs is dropped from B (the deletions), some DOIs are added,
and A gets case and percent-encoding duplicates plus a few malformed lines.
"""

import argparse
import gzip
import json
import logging
import os
import random
import sys
from typing import List, Optional, TextIO

from tqdm import tqdm

from utils.core import setup_logging

logger = logging.getLogger("generate_snapshots")

DOC_TYPES = ["journal-article", "proceedings-article", "book-chapter", "dataset", "standard", "report"]
SUFFIX_CHARS = "abcdefghijklmnopqrstuvwxyz0123456789-._"


def _open(path: str, gz: bool) -> TextIO:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    if gz:
        return gzip.open(path, "wt", encoding="utf-8", newline="\n")
    return open(path, "w", encoding="utf-8", newline="\n")


def make_dois(rng: random.Random, count: int, prefixes: int) -> List[str]:
    registrants = [f"10.{rng.randint(1000, 99999)}" for _ in range(prefixes)]
    dois = set()
    while len(dois) < count:
        suffix = "".join(rng.choice(SUFFIX_CHARS) for _ in range(rng.randint(4, 18)))
        if suffix[0] in "-._":
            continue
        dois.add(f"{rng.choice(registrants)}/{suffix}")
    return sorted(dois)


def _variant(rng: random.Random, doi: str) -> str:
    prefix, suffix = doi.split("/", 1)
    choice = rng.randrange(3)
    if choice == 0:
        return f"{prefix}/{suffix.upper()}"
    if choice == 1:
        return f"https://doi.org/{doi}"
    return f"{prefix}/{suffix.replace('-', '%2D', 1)}" if "-" in suffix else f"doi:{doi}"


def generate(out_dir: str, count: int, seed: int, deleted: float, added: float, prefixes: int,
             duplicates: float, malformed: int, gz: bool, show_progress: bool = True):
    rng = random.Random(seed)
    dois_a = make_dois(rng, count, prefixes)
    survivors = [d for d in dois_a if rng.random() >= deleted]
    known = set(dois_a)
    new = [d for d in make_dois(rng, int(count * added) + 1, prefixes) if d not in known]
    dois_b = survivors + new
    rng.shuffle(dois_b)

    ext = ".gz" if gz else ""
    path_a = os.path.join(out_dir, f"snapshot_a.txt{ext}")
    path_b = os.path.join(out_dir, f"snapshot_b.jsonl{ext}")

    order = list(dois_a)
    rng.shuffle(order)
    with _open(path_a, gz) as f:
        for doi in tqdm(order, desc="Snapshot A", unit="doi", disable=not show_progress):
            f.write(doi + "\n")
            if rng.random() < duplicates:
                f.write(_variant(rng, doi) + "\n")
        for i in range(malformed):
            f.write(f"not-a-doi-{i}\n")

    with _open(path_b, gz) as f:
        for doi in tqdm(dois_b, desc="Snapshot B", unit="doi", disable=not show_progress):
            f.write(json.dumps({"DOI": doi, "type": rng.choice(DOC_TYPES)}) + "\n")

    logger.info("[Generate] %s: %d unique DOIs; %s: %d unique DOIs", path_a, len(dois_a), path_b, len(dois_b))
    logger.info("[Generate] %d deleted, %d added, %d kept", len(dois_a) - len(survivors), len(new), len(survivors))
    return path_a, path_b


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        description='Generate synthetic DOI snapshots',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python -m tools.generate_snapshots --out /tmp/snapshots --count 100000 --seed 7
  python -m tools.generate_snapshots --out /tmp/snapshots --count 5000000 --gzip --deleted 0.01
        """,
    )
    parser.add_argument('--out', required=True, metavar='DIR', help='Directory for the two snapshot files')
    parser.add_argument('--count', type=int, default=10000, help='Unique DOIs in snapshot A (default: 10000)')
    parser.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    parser.add_argument('--deleted', type=float, default=0.05, help='Share of A missing from B (default: 0.05)')
    parser.add_argument('--added', type=float, default=0.2, help='New DOIs in B relative to A (default: 0.2)')
    parser.add_argument('--prefixes', type=int, default=50, help='Number of registrant prefixes (default: 50)')
    parser.add_argument('--duplicates', type=float, default=0.01,
                        help='Share of A written a second time in another form (default: 0.01)')
    parser.add_argument('--malformed', type=int, default=3, help='Malformed lines appended to A (default: 3)')
    parser.add_argument('--gzip', action='store_true', help='Gzip both files')
    parser.add_argument('-q', '--quiet', action='store_true', help='Warnings only, no progress bars')
    args = parser.parse_args(argv)
    setup_logging(-1 if args.quiet else 0)

    if args.count < 1 or args.prefixes < 1 or not 0 <= args.deleted <= 1 or args.added < 0:
        parser.error("--count and --prefixes must be positive, --deleted within [0, 1], --added non-negative")
    try:
        generate(args.out, args.count, args.seed, args.deleted, args.added, args.prefixes, args.duplicates,
                 args.malformed, args.gzip, show_progress=not args.quiet)
    except OSError as e:
        logger.error("Could not write snapshots: %s", e)
        return 3
    return 0


if __name__ == '__main__':
    sys.exit(main())
