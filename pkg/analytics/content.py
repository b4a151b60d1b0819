"""Document types of deleted DOIs and the alias groups around each primary."""

import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from analytics.suffixes import AliasPair
from classification.classifier import ClassifiedSet
from model.evidence import MetadataRecord

UNKNOWN_TYPE = "unknown"


def _document_type(assignment) -> str:
    ev = assignment.evidence
    for result in (ev.metadata, ev.primary_metadata):
        if result is not None and result.record is not None and result.record.type:
            return result.record.type
    return UNKNOWN_TYPE


def doc_type_histogram(classified: ClassifiedSet) -> Dict[str, int]:
    """
    Count deleted DOIs by document type.

    The type comes from the DOI's own metadata, else from its primary's
    metadata (aliases have none of their own), else "unknown". Ordered by
    count descending, then type name.
    """
    counter = Counter(_document_type(a) for a in classified.deleted())
    return dict(sorted(counter.items(), key=lambda item: (-item[1], item[0])))


@dataclass(frozen=True)
class GroupStats:
    min: int = 0
    max: int = 0
    median: float = 0.0
    stddev: float = 0.0
    group_sizes: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.group_sizes and not (1 <= self.min <= self.median <= self.max):
            raise ValueError("Group statistics out of order")

    @property
    def group_count(self) -> int:
        return len(self.group_sizes)


def alias_group_stats(pairs: Sequence[AliasPair]) -> GroupStats:
    """Aliases per primary; population standard deviation over group sizes."""
    sizes = Counter(pair.primary.full for pair in pairs)
    if not sizes:
        return GroupStats()
    values = list(sizes.values())
    return GroupStats(
        min=min(values),
        max=max(values),
        median=float(statistics.median(values)),
        stddev=statistics.pstdev(values),
        group_sizes=dict(sorted(sizes.items())),
    )


def top_primaries(stats: GroupStats, k: int) -> List[Tuple[str, int]]:
    if k < 1:
        raise ValueError("k must be at least 1")
    ranked = sorted(stats.group_sizes.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def primary_records(classified: ClassifiedSet) -> Dict[str, MetadataRecord]:
    """Metadata of every resolved primary, taken from the alias evidence."""
    records: Dict[str, MetadataRecord] = {}
    for assignment in classified.deleted():
        ev = assignment.evidence
        if ev.primary is not None and ev.primary_metadata is not None and ev.primary_metadata.record:
            records.setdefault(ev.primary.full, ev.primary_metadata.record)
    return records


def citation_line(record: Optional[MetadataRecord]) -> str:
    """'13, pp. 1-10380' or '37 (2), pp. A220-A304'."""
    if record is None:
        return ""
    text = record.volume
    if record.issue:
        text = f"{text} ({record.issue})" if text else f"({record.issue})"
    if record.page:
        text = f"{text}, pp. {record.page}" if text else f"pp. {record.page}"
    return text
