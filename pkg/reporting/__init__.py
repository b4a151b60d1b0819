"""Report assembly and emission."""

from reporting.bundle import ReportBundle, Table, build_report, percent
from reporting.emitters import emit_manifest, emit_report, emit_review_queue, table_to_csv, table_to_markdown

__all__ = [
    'ReportBundle',
    'Table',
    'build_report',
    'emit_manifest',
    'emit_report',
    'emit_review_queue',
    'percent',
    'table_to_csv',
    'table_to_markdown',
]
