"""Deleted DOIs per prefix (P1, P2) and prefix changes between aliases and primaries."""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from analytics.suffixes import AliasPair, ChangePattern
from classification.classifier import ClassifiedSet
from model.errors import MissingBaseline
from snapshots.ingest import SnapshotHandle


@dataclass(frozen=True)
class PrefixRow:
    prefix: str
    deleted_count: int
    baseline_count: int
    total_deleted: int

    def __post_init__(self):
        if not 0 < self.deleted_count <= self.baseline_count:
            raise ValueError(f"Prefix {self.prefix}: {self.deleted_count} deleted of {self.baseline_count}")

    @property
    def p1(self) -> float:
        """Share of this prefix among all deleted DOIs, in percent."""
        return self.deleted_count / self.total_deleted * 100

    @property
    def p2(self) -> float:
        """Share of this prefix's snapshot-A DOIs that were deleted, in percent."""
        return self.deleted_count / self.baseline_count * 100


def compute_prefix_rows(deleted_counts: Mapping[str, int], baseline_counts: Mapping[str, int],
                        total_deleted: Optional[int] = None) -> List[PrefixRow]:
    """Rows sorted by deleted count descending, then prefix."""
    total = total_deleted if total_deleted is not None else sum(deleted_counts.values())
    rows = []
    for prefix, count in deleted_counts.items():
        if prefix not in baseline_counts:
            raise MissingBaseline(prefix)
        rows.append(PrefixRow(prefix, count, baseline_counts[prefix], total))
    rows.sort(key=lambda row: (-row.deleted_count, row.prefix))
    return rows


def prefix_table(classified: ClassifiedSet,
                 baseline: Union[SnapshotHandle, Mapping[str, int]]) -> List[PrefixRow]:
    """P1/P2 rows for every prefix among the deleted DOIs; baseline is snapshot A."""
    baseline_counts = baseline.prefix_counts() if isinstance(baseline, SnapshotHandle) else baseline
    deleted = Counter(a.doi.prefix for a in classified.deleted())
    return compute_prefix_rows(deleted, baseline_counts)


def prefix_transitions(pairs: Sequence[AliasPair]) -> List[Tuple[str, str, int]]:
    """(alias prefix, primary prefix, count) for pairs whose prefix changed."""
    counter = Counter(
        (p.alias.prefix, p.primary.prefix) for p in pairs if p.pattern != ChangePattern.SUFFIX_ONLY
    )
    return sorted(((a, b, n) for (a, b), n in counter.items()), key=lambda t: (-t[2], t[0], t[1]))


def prefix_pattern_breakdown(pairs: Sequence[AliasPair]) -> Dict[str, Dict[ChangePattern, int]]:
    """Change-pattern counts per alias prefix, largest prefixes first."""
    by_prefix: Dict[str, Counter] = {}
    for pair in pairs:
        by_prefix.setdefault(pair.alias.prefix, Counter())[pair.pattern] += 1
    ordered = sorted(by_prefix.items(), key=lambda item: (-sum(item[1].values()), item[0]))
    return {prefix: {p: counts.get(p, 0) for p in ChangePattern} for prefix, counts in ordered}
