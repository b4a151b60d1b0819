"""
Snapshot ingest: read a DOI dump, normalize every line, and write a sorted,
duplicate-free store using an external merge sort.

Chunk memory is accounted as the size of the str objects plus their list
slots, so the resident chunk stays near chunk_bytes (times the number of
sort workers) no matter how large the dump is. Runs are sorted in place.
Sorting is by Python string order, which for str values is code point order
and therefore identical to UTF-8 byte order.
"""

import csv
import heapq
import json
import logging
import os
import re
import shutil
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, Iterator, List, Optional, Tuple

from tqdm import tqdm

from config import CHUNK_BYTES, SORT_WORKERS
from model.doi import DIAGNOSTICS, normalize_doi
from model.errors import InputError, MalformedDoi
from utils.core import atomic_write_json, open_text, read_json

logger = logging.getLogger(__name__)

MAX_LOGGED_MALFORMED = 20
LIST_SLOT_BYTES = 8


def safe_label(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", label) or "snapshot"


@dataclass(frozen=True)
class SnapshotHandle:
    label: str
    record_count: int
    unique_count: int
    malformed_count: int
    sorted_store: str
    prefix_counts_path: str
    malformed_path: str
    residual_escapes: int = 0

    def __post_init__(self):
        if self.unique_count > self.record_count:
            raise ValueError(f"{self.label}: unique count exceeds record count")

    def iter_dois(self) -> Iterator[str]:
        """Stream the normalized identifiers in sorted order."""
        with open(self.sorted_store, "r", encoding="utf-8", newline="\n") as f:
            for line in f:
                yield line.rstrip("\n")

    def prefix_counts(self) -> Dict[str, int]:
        return read_json(self.prefix_counts_path)

    def save(self, path: str):
        atomic_write_json(path, asdict(self))

    @classmethod
    def load(cls, path: str) -> "SnapshotHandle":
        try:
            return cls(**read_json(path))
        except (OSError, json.JSONDecodeError, TypeError) as e:
            raise InputError(f"Cannot load snapshot handle {path}: {e}") from e


def extract_identifier(line: str) -> Optional[str]:
    """Return the identifier carried by a dump line (plain or JSON-lines).

    Raises ValueError for JSON lines without a usable "DOI" member.
    """
    text = line.strip()
    if not text:
        return None
    if text.startswith("{"):
        record = json.loads(text)
        doi = record.get("DOI") if isinstance(record, dict) else None
        if not isinstance(doi, str):
            raise ValueError('record has no "DOI" member')
        return doi
    return text


def entry_size(doi: str) -> int:
    """Bytes a chunk entry occupies in memory: the str object plus its list slot."""
    return sys.getsizeof(doi) + LIST_SLOT_BYTES


def _write_run(chunk: List[str], path: str) -> str:
    """Sort one chunk in place and write it without duplicates (runs in a worker process)."""
    chunk.sort()
    previous = None
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for doi in chunk:
            if doi == previous:
                continue
            f.write(doi)
            f.write("\n")
            previous = doi
    return path


def _read_run(path: str) -> Iterator[str]:
    with open(path, "r", encoding="utf-8", newline="\n") as f:
        for line in f:
            yield line.rstrip("\n")


def _merge_runs(run_paths: List[str], store_path: str) -> Tuple[int, Counter]:
    """k-way merge of sorted runs into the store; returns (unique count, prefix counts)."""
    unique = 0
    prefixes: Counter = Counter()
    previous = None
    with open(store_path, "w", encoding="utf-8", newline="\n") as out:
        for doi in heapq.merge(*(_read_run(p) for p in run_paths)):
            if doi == previous:
                continue
            out.write(doi)
            out.write("\n")
            prefixes[doi.partition("/")[0]] += 1
            unique += 1
            previous = doi
    return unique, prefixes


def ingest_snapshot(
    source: str,
    label: str,
    workdir: str,
    chunk_bytes: int = CHUNK_BYTES,
    sort_workers: int = SORT_WORKERS,
    show_progress: bool = True,
) -> SnapshotHandle:
    """
    Normalize, dedupe and sort a DOI dump into <workdir>/snapshots/.

    Args:
        source: Path to a plain-text or JSON-lines dump, optionally gzip-compressed
        label: Snapshot label (e.g. "2017-03"), used for file names and reports
        workdir: Pipeline working directory
        chunk_bytes: Memory held by the in-memory chunk before it is sorted into a run
        sort_workers: Processes used to sort runs (1 sorts in-process)
        show_progress: Show a tqdm line counter

    Returns:
        The handle of the sorted store, also saved as <label>.handle.json

    Raises:
        InputError: if the source cannot be read
    """
    if not os.path.isfile(source):
        raise InputError(f"Snapshot not found: {source}")
    if chunk_bytes <= 0:
        raise ValueError("chunk_bytes must be positive")

    name = safe_label(label)
    out_dir = os.path.join(workdir, "snapshots")
    runs_dir = os.path.join(out_dir, f".runs-{name}")
    shutil.rmtree(runs_dir, ignore_errors=True)
    os.makedirs(runs_dir, exist_ok=True)

    store_path = os.path.join(out_dir, f"{name}.sorted.txt")
    prefix_path = os.path.join(out_dir, f"{name}.prefix_counts.json")
    malformed_path = os.path.join(out_dir, f"{name}.malformed.tsv")
    escapes_before = DIAGNOSTICS["residual_percent_escape"]

    logger.info("[Ingest] %s: reading %s", label, source)
    record_count = 0
    malformed_count = 0
    run_paths: List[str] = []
    pending = []
    chunk: List[str] = []
    chunk_size = 0
    executor = ProcessPoolExecutor(max_workers=sort_workers) if sort_workers > 1 else None

    def flush():
        nonlocal chunk, chunk_size
        if not chunk:
            return
        path = os.path.join(runs_dir, f"run-{len(run_paths):06d}.txt")
        run_paths.append(path)
        if executor is None:
            _write_run(chunk, path)
        else:
            # Bound the chunks held in memory to one per worker.
            if len(pending) >= sort_workers:
                pending.pop(0).result()
            pending.append(executor.submit(_write_run, chunk, path))
        chunk = []
        chunk_size = 0

    try:
        with open_text(source) as dump, \
                open(malformed_path, "w", encoding="utf-8", newline="") as bad:
            bad_writer = csv.writer(bad, delimiter="\t", lineterminator="\n")
            bad_writer.writerow(["line", "text", "reason"])
            for line_number, line in enumerate(tqdm(dump, desc=f"Ingest {label}", unit=" lines",
                                                     disable=not show_progress), start=1):
                try:
                    identifier = extract_identifier(line)
                    if identifier is None:
                        continue
                    doi = normalize_doi(identifier)
                except (MalformedDoi, ValueError) as e:
                    malformed_count += 1
                    reason = e.reason if isinstance(e, MalformedDoi) else str(e)
                    bad_writer.writerow([line_number, line.rstrip("\r\n"), reason])
                    if malformed_count <= MAX_LOGGED_MALFORMED:
                        logger.warning("[Ingest] %s line %d skipped: %s", label, line_number, reason)
                    continue

                record_count += 1
                chunk.append(doi.full)
                chunk_size += entry_size(doi.full)
                if chunk_size >= chunk_bytes:
                    flush()
            flush()
            for future in pending:
                future.result()
    except OSError as e:
        raise InputError(f"Cannot read snapshot {source}: {e}") from e
    finally:
        if executor is not None:
            executor.shutdown()

    if malformed_count > MAX_LOGGED_MALFORMED:
        logger.warning("[Ingest] %s: %d malformed lines in total, see %s", label, malformed_count, malformed_path)

    unique_count, prefixes = _merge_runs(run_paths, store_path)
    shutil.rmtree(runs_dir, ignore_errors=True)
    atomic_write_json(prefix_path, dict(sorted(prefixes.items())))

    handle = SnapshotHandle(
        label=label,
        record_count=record_count,
        unique_count=unique_count,
        malformed_count=malformed_count,
        sorted_store=store_path,
        prefix_counts_path=prefix_path,
        malformed_path=malformed_path,
        residual_escapes=DIAGNOSTICS["residual_percent_escape"] - escapes_before,
    )
    handle.save(os.path.join(out_dir, f"{name}.handle.json"))
    logger.info("[Ingest] %s: %d records, %d unique, %d malformed, %d runs",
                label, record_count, unique_count, malformed_count, len(run_paths))
    return handle
