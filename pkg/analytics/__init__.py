"""Analyses over the classified deleted DOIs."""

from analytics.content import (
    GroupStats, alias_group_stats, citation_line, doc_type_histogram, primary_records, top_primaries,
)
from analytics.edits import (
    EditKind, EditOp, EditScript, SignatureSummary, apply_edit_script, describe_signature, edit_script,
    summarize_edits,
)
from analytics.prefixes import (
    PrefixRow, compute_prefix_rows, prefix_pattern_breakdown, prefix_table, prefix_transitions,
)
from analytics.suffixes import (
    BUCKET_LABELS, AliasPair, ChangePattern, build_alias_pairs, change_pattern, pattern_counts,
    similarity_bucket, similarity_histogram, suffix_distance, suffix_similarity,
)

__all__ = [
    'GroupStats', 'alias_group_stats', 'citation_line', 'doc_type_histogram', 'primary_records',
    'top_primaries',
    'EditKind', 'EditOp', 'EditScript', 'SignatureSummary', 'apply_edit_script', 'describe_signature',
    'edit_script', 'summarize_edits',
    'PrefixRow', 'compute_prefix_rows', 'prefix_pattern_breakdown', 'prefix_table', 'prefix_transitions',
    'BUCKET_LABELS', 'AliasPair', 'ChangePattern', 'build_alias_pairs', 'change_pattern', 'pattern_counts',
    'similarity_bucket', 'similarity_histogram', 'suffix_distance', 'suffix_similarity',
]
