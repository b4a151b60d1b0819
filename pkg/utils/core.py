"""Core utility functions: logging setup, input opening and atomic file writes."""

import gzip
import hashlib
import io
import json
import logging
import os
import tempfile
from typing import Any, Optional, TextIO

from rich.console import Console
from rich.logging import RichHandler

GZIP_MAGIC = b"\x1f\x8b"


def setup_logging(verbosity: int = 0):
    """Route all pipeline loggers through a rich handler on stderr.

    verbosity: -1 quiet (warnings only), 0 normal, 1+ debug.
    """
    if verbosity < 0:
        level = logging.WARNING
    elif verbosity == 0:
        level = logging.INFO
    else:
        level = logging.DEBUG

    handler = RichHandler(
        console=Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
        markup=False,
    )
    logging.basicConfig(level=level, format="%(message)s", datefmt="[%X]", handlers=[handler], force=True)
    # urllib3 logs every connection at DEBUG; keep it at WARNING unless asked twice.
    logging.getLogger("urllib3").setLevel(logging.DEBUG if verbosity > 1 else logging.WARNING)


def is_gzip(path: str) -> bool:
    with open(path, "rb") as f:
        return f.read(2) == GZIP_MAGIC


def open_text(path: str) -> TextIO:
    """Open a UTF-8 text input, transparently decompressing gzip (by magic bytes).

    Universal newlines, so LF and CRLF dumps read the same.
    """
    if is_gzip(path):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8", errors="replace", newline=None)
    return open(path, "r", encoding="utf-8", errors="replace", newline=None)


def atomic_write_text(path: str, text: str, encoding: str = "utf-8", newline: Optional[str] = "\n"):
    """Write text to path via a temp file in the same directory and os.replace."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding=encoding, newline=newline) as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def atomic_write_json(path: str, data: Any):
    atomic_write_text(path, json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def stable_hash(data: Any) -> str:
    """SHA-256 of the canonical JSON form of data."""
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
