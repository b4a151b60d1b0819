"""Streaming difference/product sets of two sorted snapshot stores."""

import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, Iterator, Optional

from model.errors import InputError
from snapshots.ingest import SnapshotHandle
from utils.core import atomic_write_json, read_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DoiStream:
    """A sorted, duplicate-free identifier file and its line count."""

    path: str
    count: int

    def __iter__(self) -> Iterator[str]:
        with open(self.path, "r", encoding="utf-8", newline="\n") as f:
            for line in f:
                yield line.rstrip("\n")


@dataclass(frozen=True)
class DiffSets:
    label_a: str
    label_b: str
    unique_a: int
    unique_b: int
    only_in_a: DoiStream
    only_in_b: DoiStream
    in_both: int

    def __post_init__(self):
        if self.only_in_a.count + self.in_both != self.unique_a:
            raise ValueError("only_in_a + in_both does not add up to snapshot A")
        if self.only_in_b.count + self.in_both != self.unique_b:
            raise ValueError("only_in_b + in_both does not add up to snapshot B")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label_a": self.label_a,
            "label_b": self.label_b,
            "unique_a": self.unique_a,
            "unique_b": self.unique_b,
            "only_in_a": {"path": self.only_in_a.path, "count": self.only_in_a.count},
            "only_in_b": {"path": self.only_in_b.path, "count": self.only_in_b.count},
            "in_both": self.in_both,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DiffSets":
        return cls(
            label_a=data["label_a"],
            label_b=data["label_b"],
            unique_a=data["unique_a"],
            unique_b=data["unique_b"],
            only_in_a=DoiStream(**data["only_in_a"]),
            only_in_b=DoiStream(**data["only_in_b"]),
            in_both=data["in_both"],
        )

    def save(self, path: str):
        atomic_write_json(path, self.to_dict())

    @classmethod
    def load(cls, path: str) -> "DiffSets":
        try:
            return cls.from_dict(read_json(path))
        except (OSError, ValueError, KeyError) as e:
            raise InputError(f"Cannot load diff summary {path}: {e}") from e


def _next(iterator: Iterator[str]) -> Optional[str]:
    return next(iterator, None)


def diff_snapshots(a: SnapshotHandle, b: SnapshotHandle, out_dir: str) -> DiffSets:
    """
    Merge-walk two sorted stores in one sequential pass.

    only_in_a holds the deletion candidates; both output files stay sorted and
    duplicate-free because the inputs are.
    """
    os.makedirs(out_dir, exist_ok=True)
    path_a = os.path.join(out_dir, "only_in_a.txt")
    path_b = os.path.join(out_dir, "only_in_b.txt")
    count_a = count_b = both = 0

    logger.info("[Diff] %s (%d) vs %s (%d)", a.label, a.unique_count, b.label, b.unique_count)
    try:
        iter_a, iter_b = a.iter_dois(), b.iter_dois()
        with open(path_a, "w", encoding="utf-8", newline="\n") as out_a, \
                open(path_b, "w", encoding="utf-8", newline="\n") as out_b:
            x, y = _next(iter_a), _next(iter_b)
            while x is not None or y is not None:
                if y is None or (x is not None and x < y):
                    out_a.write(x + "\n")
                    count_a += 1
                    x = _next(iter_a)
                elif x is None or y < x:
                    out_b.write(y + "\n")
                    count_b += 1
                    y = _next(iter_b)
                else:
                    both += 1
                    x, y = _next(iter_a), _next(iter_b)
    except OSError as e:
        raise InputError(f"Cannot diff snapshot stores: {e}") from e

    diff = DiffSets(
        label_a=a.label,
        label_b=b.label,
        unique_a=a.unique_count,
        unique_b=b.unique_count,
        only_in_a=DoiStream(path_a, count_a),
        only_in_b=DoiStream(path_b, count_b),
        in_both=both,
    )
    diff.save(os.path.join(out_dir, "diff.json"))
    logger.info("[Diff] only in %s: %d, only in %s: %d, in both: %d",
                a.label, count_a, b.label, count_b, both)
    return diff
