"""Alias/primary pairs: change patterns, suffix similarity and its distribution."""

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from rapidfuzz.distance import Levenshtein

from analytics.edits import EditScript, edit_script
from classification.classifier import ClassifiedSet, DeletionClass
from model.doi import NormalizedDoi
from model.errors import IdenticalPair


class ChangePattern(str, Enum):
    SUFFIX_ONLY = "SuffixOnly"
    PREFIX_AND_SUFFIX = "PrefixAndSuffix"
    PREFIX_ONLY = "PrefixOnly"

    @property
    def label(self) -> str:
        return {
            ChangePattern.SUFFIX_ONLY: "Only the suffix changed",
            ChangePattern.PREFIX_AND_SUFFIX: "Both the prefix and the suffix changed",
            ChangePattern.PREFIX_ONLY: "Only the prefix changed",
        }[self]


SUFFIX_CHANGED = (ChangePattern.SUFFIX_ONLY, ChangePattern.PREFIX_AND_SUFFIX)

BUCKET_COUNT = 10
BUCKET_LABELS = ["0 <= sim <= 0.1"] + [
    f"0.{k} < sim <= 0.{k + 1}" for k in range(1, BUCKET_COUNT - 1)
] + ["0.9 < sim < 1.0"]


def change_pattern(alias: NormalizedDoi, primary: NormalizedDoi) -> ChangePattern:
    if alias == primary:
        raise IdenticalPair(alias.full)
    if alias.prefix == primary.prefix:
        return ChangePattern.SUFFIX_ONLY
    if alias.suffix == primary.suffix:
        return ChangePattern.PREFIX_ONLY
    return ChangePattern.PREFIX_AND_SUFFIX


def suffix_distance(s1: str, s2: str) -> int:
    """Unit-cost Levenshtein distance, counted in code points."""
    return Levenshtein.distance(s1, s2)


def suffix_similarity(s1: str, s2: str) -> float:
    """1 - Levenshtein(s1, s2) / max(|s1|, |s2|)."""
    if not s1 or not s2:
        raise ValueError("Suffixes must be non-empty")
    return 1 - suffix_distance(s1, s2) / max(len(s1), len(s2))


def similarity_bucket(distance: int, max_len: int) -> int:
    """
    Bucket index 0..9 of sim = (max_len - distance) / max_len.

    Bucket 0 is [0, 0.1]; bucket k > 0 is (k/10, (k+1)/10], and the last one
    ends just below 1.0. Integer arithmetic keeps boundaries such as 0.8 exact.
    """
    numerator = BUCKET_COUNT * (max_len - distance)
    ceil = -(-numerator // max_len)
    return min(max(ceil - 1, 0), BUCKET_COUNT - 1)


@dataclass(frozen=True)
class AliasPair:
    alias: NormalizedDoi
    primary: NormalizedDoi
    pattern: ChangePattern
    sim: Optional[float] = None
    distance: Optional[int] = None
    edits: Optional[EditScript] = None
    source: Optional[str] = None

    def __post_init__(self):
        if self.alias == self.primary:
            raise IdenticalPair(self.alias.full)
        if self.pattern != change_pattern(self.alias, self.primary):
            raise ValueError(f"{self.alias} -> {self.primary} is not {self.pattern.value}")
        if (self.sim is None) != (self.pattern == ChangePattern.PREFIX_ONLY):
            raise ValueError("sim is set exactly for pairs whose suffix changed")

    @classmethod
    def build(cls, alias: NormalizedDoi, primary: NormalizedDoi, source: Optional[str] = None) -> "AliasPair":
        pattern = change_pattern(alias, primary)
        if pattern == ChangePattern.PREFIX_ONLY:
            return cls(alias, primary, pattern, source=source)
        distance = suffix_distance(alias.suffix, primary.suffix)
        sim = 1 - distance / max(len(alias.suffix), len(primary.suffix))
        return cls(alias, primary, pattern, sim=sim, distance=distance,
                   edits=edit_script(alias.suffix, primary.suffix), source=source)

    @property
    def bucket(self) -> Optional[int]:
        if self.distance is None:
            return None
        return similarity_bucket(self.distance, max(len(self.alias.suffix), len(self.primary.suffix)))


def build_alias_pairs(classified: ClassifiedSet) -> Tuple[List[AliasPair], int]:
    """Pairs for every Alias DOI with a resolved primary, plus the count left unpaired."""
    pairs: List[AliasPair] = []
    unpaired = 0
    for assignment in classified.of_class(DeletionClass.ALIAS):
        ev = assignment.evidence
        if ev.primary is None:
            unpaired += 1
            continue
        source = ev.primary_source.value if ev.primary_source else None
        pairs.append(AliasPair.build(ev.doi, ev.primary, source=source))
    return pairs, unpaired


def pattern_counts(pairs: Sequence[AliasPair]) -> Dict[ChangePattern, int]:
    counter = Counter(p.pattern for p in pairs)
    return {pattern: counter.get(pattern, 0) for pattern in ChangePattern}


def similarity_histogram(pairs: Sequence[AliasPair]) -> Dict[ChangePattern, List[int]]:
    """Bucket counts per suffix-changed pattern group; each row sums to its group size."""
    histogram = {pattern: [0] * BUCKET_COUNT for pattern in SUFFIX_CHANGED}
    for pair in pairs:
        if pair.pattern in histogram:
            histogram[pair.pattern][pair.bucket] += 1
    return histogram
