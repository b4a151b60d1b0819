"""
Report assembly.

Every table carries its denominator so each percentage can be recomputed from
the file alone. Percentages are Decimals rounded half-up to two places.
"""

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Dict, List, Optional, Sequence, Tuple

from analytics.content import (
    GroupStats, alias_group_stats, citation_line, doc_type_histogram, primary_records, top_primaries,
)
from analytics.edits import summarize_edits
from analytics.prefixes import prefix_pattern_breakdown, prefix_table, prefix_transitions
from analytics.suffixes import (
    BUCKET_COUNT, BUCKET_LABELS, SUFFIX_CHANGED, AliasPair, ChangePattern, build_alias_pairs, pattern_counts,
    similarity_histogram,
)
from classification.classifier import DELETED_CLASSES, ClassifiedSet, DeletionClass
from config import TOP_K
from model.errors import InputError
from snapshots.diff import DiffSets
from snapshots.ingest import SnapshotHandle
from utils.core import atomic_write_json, read_json

TWO_PLACES = Decimal("0.01")


def percent(count: int, denominator: int) -> Decimal:
    if denominator == 0:
        return Decimal("0.00")
    return (Decimal(count) * 100 / Decimal(denominator)).quantize(TWO_PLACES, rounding=ROUND_HALF_UP)


def two_places(value: float) -> Decimal:
    return Decimal(repr(value)).quantize(TWO_PLACES, rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class Table:
    name: str
    title: str
    columns: Tuple[str, ...]
    rows: Tuple[Tuple[Any, ...], ...] = ()
    n: Optional[int] = None
    note: str = ""

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"Table {self.name}: row {row!r} does not match columns {self.columns!r}")

    @property
    def heading(self) -> str:
        return f"{self.title} (n={self.n:,})" if self.n is not None else self.title

    def to_state(self) -> Dict[str, Any]:
        """Lossless JSON form; Decimal cells are kept as {"decimal": "12.34"}."""
        rows = [[{"decimal": str(v)} if isinstance(v, Decimal) else v for v in row] for row in self.rows]
        return {"name": self.name, "title": self.title, "columns": list(self.columns), "rows": rows,
                "n": self.n, "note": self.note}

    @classmethod
    def from_state(cls, data: Dict[str, Any]) -> "Table":
        rows = tuple(
            tuple(Decimal(v["decimal"]) if isinstance(v, dict) else v for v in row) for row in data["rows"]
        )
        return cls(data["name"], data["title"], tuple(data["columns"]), rows, data.get("n"), data.get("note", ""))


@dataclass
class ReportBundle:
    tables: Dict[str, Table] = field(default_factory=dict)
    manifest: Dict[str, Any] = field(default_factory=dict)

    def add(self, table: Table):
        if table.name in self.tables:
            raise ValueError(f"Duplicate table {table.name}")
        self.tables[table.name] = table

    def __getitem__(self, name: str) -> Table:
        return self.tables[name]

    def save(self, path: str):
        atomic_write_json(path, {"tables": [t.to_state() for t in self.tables.values()]})

    @classmethod
    def load(cls, path: str) -> "ReportBundle":
        try:
            data = read_json(path)
            bundle = cls()
            for state in data["tables"]:
                bundle.add(Table.from_state(state))
        except (OSError, ValueError, KeyError) as e:
            raise InputError(f"Cannot load analysis results {path}: {e}") from e
        return bundle


def diff_census_table(diff: DiffSets, deleted_total: int) -> Table:
    a, b = diff.unique_a, diff.unique_b
    rows = (
        ("Difference set", diff.only_in_a.count, percent(diff.only_in_a.count, a),
         diff.only_in_b.count, percent(diff.only_in_b.count, b)),
        ("Product set", diff.in_both, percent(diff.in_both, a), diff.in_both, percent(diff.in_both, b)),
        ("Overall", a, percent(a, a), b, percent(b, b)),
        ("Deleted DOIs", deleted_total, percent(deleted_total, a), deleted_total, percent(deleted_total, b)),
    )
    return Table(
        "diff_census", "Basic statistics of the snapshots",
        ("Set", f"# of DOIs ({diff.label_a})", "%", f"# of DOIs ({diff.label_b})", "%"),
        rows, n=a, note=f"denominators: {a} DOIs in {diff.label_a}, {b} DOIs in {diff.label_b}",
    )


def class_counts_table(classified: ClassifiedSet) -> Table:
    counts = classified.counts
    total = classified.deleted_total
    rows = tuple(
        (i, cls.label, counts[cls], percent(counts[cls], total))
        for i, cls in enumerate(DELETED_CLASSES, start=1)
    )
    excluded = counts[DeletionClass.EXCLUDED_NON_CROSSREF]
    note = (f"{classified.candidate_count} candidates; {excluded} non-Crossref DOIs excluded; "
            f"{len(classified.unclassifiable)} unclassifiable")
    return Table("class_counts", "Number of deleted DOIs in each group", ("#", "Group", "Count", "%"),
                 rows, n=total, note=note)


def doc_types_table(classified: ClassifiedSet) -> Table:
    total = classified.deleted_total
    histogram = doc_type_histogram(classified)
    rows = tuple((i, t, n, percent(n, total)) for i, (t, n) in enumerate(histogram.items(), start=1))
    return Table("doc_types", "Document types of deleted DOIs", ("#", "Type", "Count", "%"), rows, n=total)


def top_primaries_table(classified: ClassifiedSet, stats: GroupStats, pair_count: int, top_k: int) -> Table:
    records = primary_records(classified)
    rows = []
    for i, (primary, count) in enumerate(top_primaries(stats, top_k), start=1):
        record = records.get(primary)
        rows.append((i, primary, count, record.title if record else "", citation_line(record),
                     record.container_title if record else ""))
    return Table(
        "top_primaries", f"{top_k} Primary DOIs with the largest numbers of associated Alias DOIs",
        ("#", "Primary DOI", "Count", "Title", "Volume (Issue), Page", "Container title"),
        tuple(rows), n=pair_count,
    )


def prefixes_table(classified: ClassifiedSet, baseline: SnapshotHandle) -> Table:
    rows = tuple(
        (i, row.prefix, row.deleted_count, row.baseline_count,
         percent(row.deleted_count, row.total_deleted), percent(row.deleted_count, row.baseline_count))
        for i, row in enumerate(prefix_table(classified, baseline), start=1)
    )
    return Table("prefixes", "Prefixes of deleted DOIs", ("#", "Prefix", "Count", "Baseline", "P1 (%)", "P2 (%)"),
                 rows, n=classified.deleted_total,
                 note=f"P1 = count / all deleted; P2 = count / DOIs with the prefix in {baseline.label}")


def change_patterns_table(pairs: Sequence[AliasPair]) -> Table:
    counts = pattern_counts(pairs)
    rows = tuple((p.label, counts[p], percent(counts[p], len(pairs))) for p in ChangePattern)
    return Table("change_patterns", "DOI name change patterns", ("Pattern", "Count", "%"), rows, n=len(pairs))


def similarity_buckets_table(pairs: Sequence[AliasPair]) -> Table:
    histogram = similarity_histogram(pairs)
    sizes = {p: sum(histogram[p]) for p in SUFFIX_CHANGED}
    rows = []
    for k in range(BUCKET_COUNT):
        row: List[Any] = [BUCKET_LABELS[k]]
        for p in SUFFIX_CHANGED:
            row += [histogram[p][k], percent(histogram[p][k], sizes[p])]
        rows.append(tuple(row))
    overall: List[Any] = ["Overall"]
    for p in SUFFIX_CHANGED:
        overall += [sizes[p], percent(sizes[p], sizes[p])]
    rows.append(tuple(overall))
    columns = ("Similarity",)
    for p in SUFFIX_CHANGED:
        columns += (f"{p.label}: count", f"{p.label}: %")
    return Table("similarity_buckets", "Distribution of similarity scores between alias and primary suffixes",
                 columns, tuple(rows), n=sum(sizes.values()))


def edit_signatures_table(pairs: Sequence[AliasPair], top_k: int) -> Table:
    group = [p for p in pairs if p.pattern == ChangePattern.SUFFIX_ONLY]
    scripts = [(p.alias.suffix, p.primary.suffix, p.edits) for p in group]
    rows = tuple(
        (i, s.description, s.count, percent(s.count, len(group)), f"{s.example_alias} -> {s.example_primary}")
        for i, s in enumerate(summarize_edits(scripts)[:top_k], start=1)
    )
    return Table("edit_signatures", "Most frequent patterns for 'only the suffix changed'",
                 ("#", "Pattern of changes in the suffix", "Count", "%", "Example"), rows, n=len(group))


def prefix_transitions_table(pairs: Sequence[AliasPair]) -> Table:
    transitions = prefix_transitions(pairs)
    changed = sum(n for _, _, n in transitions)
    rows = tuple((i, a, b, n, percent(n, changed)) for i, (a, b, n) in enumerate(transitions, start=1))
    return Table("prefix_transitions", "Prefix changes from alias to primary",
                 ("#", "Alias prefix", "Primary prefix", "Count", "%"), rows, n=changed)


def prefix_patterns_table(pairs: Sequence[AliasPair]) -> Table:
    rows = []
    for prefix, counts in prefix_pattern_breakdown(pairs).items():
        total = sum(counts.values())
        row: List[Any] = [prefix, total]
        for p in ChangePattern:
            row += [counts[p], percent(counts[p], total)]
        rows.append(tuple(row))
    columns = ("Alias prefix", "Pairs")
    for p in ChangePattern:
        columns += (f"{p.value}: count", f"{p.value}: %")
    return Table("prefix_patterns", "Change patterns per alias prefix", columns, tuple(rows), n=len(pairs))


def alias_group_stats_table(stats: GroupStats, paired: int, unpaired: int) -> Table:
    rows = (
        ("Primary DOIs", stats.group_count),
        ("Paired Alias DOIs", paired),
        ("Alias DOIs without a resolved primary", unpaired),
        ("Minimum", stats.min),
        ("Maximum", stats.max),
        ("Median", two_places(stats.median)),
        ("Standard deviation (population)", two_places(stats.stddev)),
    )
    return Table("alias_group_stats", "Alias DOIs per Primary DOI", ("Statistic", "Value"), rows,
                 n=stats.group_count)


def review_queue_table(classified: ClassifiedSet) -> Table:
    queue = classified.review_queue
    rows = tuple((item.doi, item.matched_field, item.matched_value, item.landing_uri or "") for item in queue)
    return Table("review_queue", "DOIs with a deletion notice awaiting manual confirmation",
                 ("DOI", "Matched field", "Matched value", "Landing URI"), rows, n=len(queue))


def anomalies_table(classified: ClassifiedSet) -> Table:
    rows = []
    for key, assignment in sorted(classified.assignments.items()):
        if not assignment.flags:
            continue
        ev = assignment.evidence
        detail = ""
        if ev.metadata is not None:
            detail = f"metadata {ev.metadata.outcome.value}"
            if ev.metadata.code is not None:
                detail += f" ({ev.metadata.code})"
        if ev.redirect is not None and ev.redirect.final_uri:
            detail += f"; final URI {ev.redirect.final_uri}" if detail else f"final URI {ev.redirect.final_uri}"
        rows.append((key, assignment.deletion_class.value, ",".join(assignment.flags), detail))
    return Table("anomalies", "Classified DOIs with unexpected evidence", ("DOI", "Class", "Flags", "Detail"),
                 tuple(rows), n=len(rows))


def unclassifiable_table(classified: ClassifiedSet) -> Table:
    rows = tuple((key, reason) for key, (reason, _) in sorted(classified.unclassifiable.items()))
    return Table("unclassifiable", "Candidates left unclassified", ("DOI", "Reason"), rows, n=len(rows))


def build_report(diff: DiffSets, classified: ClassifiedSet, baseline: SnapshotHandle,
                 top_k: int = TOP_K) -> ReportBundle:
    pairs, unpaired = build_alias_pairs(classified)
    stats = alias_group_stats(pairs)

    bundle = ReportBundle()
    bundle.add(diff_census_table(diff, classified.deleted_total))
    bundle.add(class_counts_table(classified))
    bundle.add(doc_types_table(classified))
    bundle.add(top_primaries_table(classified, stats, len(pairs), top_k))
    bundle.add(prefixes_table(classified, baseline))
    bundle.add(change_patterns_table(pairs))
    bundle.add(similarity_buckets_table(pairs))
    bundle.add(edit_signatures_table(pairs, top_k))
    bundle.add(prefix_transitions_table(pairs))
    bundle.add(prefix_patterns_table(pairs))
    bundle.add(alias_group_stats_table(stats, len(pairs), unpaired))
    bundle.add(review_queue_table(classified))
    bundle.add(anomalies_table(classified))
    bundle.add(unclassifiable_table(classified))
    return bundle
