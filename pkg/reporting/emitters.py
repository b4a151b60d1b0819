"""Write a ReportBundle as CSV, JSON or markdown files."""

import csv
import io
import json
import logging
import os
from decimal import Decimal
from typing import Any, List

from config import REPORT_FORMATS
from model.errors import OutputError
from reporting.bundle import ReportBundle, Table
from utils.core import atomic_write_json, atomic_write_text

logger = logging.getLogger(__name__)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, Decimal):
        return f"{value:.2f}"
    return str(value)


def _json_scalar(value: Any) -> str:
    """JSON text of one cell; Decimals are written as two-place number literals."""
    if isinstance(value, Decimal):
        return f"{value:.2f}"
    return json.dumps(value, ensure_ascii=False)


def table_to_csv(table: Table) -> str:
    """RFC 4180: CRLF line ends, fields quoted only when needed."""
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def _md_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("|", "\\|").replace("\n", " ")


def table_to_markdown(table: Table) -> str:
    lines = [f"## {table.heading}", ""]
    if table.note:
        lines += [f"_{_md_escape(table.note)}_", ""]
    lines.append("| " + " | ".join(_md_escape(c) for c in table.columns) + " |")
    aligns = []
    for i in range(len(table.columns)):
        numeric = table.rows and all(isinstance(row[i], (int, Decimal)) for row in table.rows)
        aligns.append("---:" if numeric else "---")
    lines.append("| " + " | ".join(aligns) + " |")
    for row in table.rows:
        lines.append("| " + " | ".join(_md_escape(_cell(v)) for v in row) + " |")
    return "\n".join(lines) + "\n"


def table_to_json(table: Table, indent: str = "  ") -> str:
    inner = indent * 2
    fields = [
        f'{inner}"title": {_json_scalar(table.title)}',
        f'{inner}"n": {_json_scalar(table.n)}',
        f'{inner}"note": {_json_scalar(table.note)}',
        f'{inner}"columns": {json.dumps(list(table.columns), ensure_ascii=False)}',
    ]
    rows = [f"{inner}{indent}[" + ", ".join(_json_scalar(v) for v in row) + "]" for row in table.rows]
    if rows:
        fields.append(f'{inner}"rows": [\n' + ",\n".join(rows) + f"\n{inner}]")
    else:
        fields.append(f'{inner}"rows": []')
    return "{\n" + ",\n".join(fields) + f"\n{indent}}}"


def report_to_json(bundle: ReportBundle) -> str:
    """The whole bundle as one JSON document keyed by table name."""
    entries = [f"  {json.dumps(name)}: {table_to_json(bundle.tables[name])}" for name in sorted(bundle.tables)]
    if not entries:
        return "{}\n"
    return "{\n" + ",\n".join(entries) + "\n}\n"


def emit_report(bundle: ReportBundle, fmt: str, out_dir: str) -> List[str]:
    """Write the bundle in one format; returns the written paths."""
    if fmt not in REPORT_FORMATS:
        raise ValueError(f"Unknown report format {fmt!r}")
    paths = []
    try:
        if fmt == "json":
            path = os.path.join(out_dir, "report.json")
            atomic_write_text(path, report_to_json(bundle))
            paths.append(path)
        else:
            ext, render = ("csv", table_to_csv) if fmt == "csv" else ("md", table_to_markdown)
            for name, table in bundle.tables.items():
                path = os.path.join(out_dir, f"{name}.{ext}")
                atomic_write_text(path, render(table), newline="")
                paths.append(path)
    except OSError as e:
        raise OutputError(f"Cannot write report to {out_dir}: {e}") from e
    logger.info("[Report] Wrote %d %s file(s) to %s", len(paths), fmt, out_dir)
    return paths


def emit_review_queue(bundle: ReportBundle, out_dir: str) -> str:
    """The review queue is always exported as CSV, whatever the report formats."""
    path = os.path.join(out_dir, "review_queue.csv")
    atomic_write_text(path, table_to_csv(bundle["review_queue"]), newline="")
    return path


def emit_manifest(bundle: ReportBundle, out_dir: str) -> str:
    path = os.path.join(out_dir, "manifest.json")
    atomic_write_json(path, bundle.manifest)
    return path
