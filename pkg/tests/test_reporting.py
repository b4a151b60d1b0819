import json
import os
from decimal import Decimal

import pytest

from model.errors import InputError, OutputError
from reporting.bundle import ReportBundle, Table, percent, two_places
from reporting.emitters import emit_report, emit_review_queue, table_to_csv, table_to_markdown


def sample_table():
    return Table("sample", "Sample table", ("#", "Name", "Count", "%"),
                 ((1, "alpha, beta", 2, Decimal("66.67")), (2, "pipe|name", 1, Decimal("33.33"))),
                 n=3, note="denominator: 3")


@pytest.mark.parametrize("count, denominator, expected", [
    (26, 43, "60.47"),
    (1, 8, "12.50"),
    (1, 200, "0.50"),
    (1, 7, "14.29"),
    (1, 3, "33.33"),
    (2, 3, "66.67"),
    (1, 400, "0.25"),
    (1, 800, "0.13"),   # 0.125 rounds half up
    (0, 0, "0.00"),
])
def test_percent(count, denominator, expected):
    assert percent(count, denominator) == Decimal(expected)


def test_two_places_rounds_half_up():
    assert two_places(0.125) == Decimal("0.13")
    assert two_places((32 ** 0.5) / 9) == Decimal("0.63")


def test_table_rows_must_match_columns():
    with pytest.raises(ValueError):
        Table("bad", "Bad", ("a", "b"), ((1,),))


def test_heading_carries_denominator():
    assert Table("t", "Groups", ("a",), n=12345).heading == "Groups (n=12,345)"
    assert Table("t", "Groups", ("a",)).heading == "Groups"


def test_table_state_keeps_decimals():
    table = sample_table()
    assert Table.from_state(json.loads(json.dumps(table.to_state()))) == table


def test_bundle_save_and_load(tmp_path):
    bundle = ReportBundle()
    bundle.add(sample_table())
    path = str(tmp_path / "analysis.json")
    bundle.save(path)
    assert ReportBundle.load(path)["sample"] == sample_table()


def test_bundle_rejects_duplicate_tables():
    bundle = ReportBundle()
    bundle.add(sample_table())
    with pytest.raises(ValueError):
        bundle.add(sample_table())


def test_loading_a_broken_bundle_is_input_error(tmp_path):
    path = tmp_path / "analysis.json"
    path.write_text('{"tables": [{"name": "x"}]}', encoding="utf-8")
    with pytest.raises(InputError):
        ReportBundle.load(str(path))


def test_csv_uses_crlf_and_minimal_quoting():
    text = table_to_csv(sample_table())
    assert text == '#,Name,Count,%\r\n1,"alpha, beta",2,66.67\r\n2,pipe|name,1,33.33\r\n'


def test_markdown_escapes_and_aligns():
    text = table_to_markdown(sample_table())
    lines = text.splitlines()
    assert lines[0] == "## Sample table (n=3)"
    assert "_denominator: 3_" in lines
    assert "| ---: | --- | ---: | ---: |" in lines
    assert "| 2 | pipe\\|name | 1 | 33.33 |" in lines


def test_emit_each_format(tmp_path):
    bundle = ReportBundle()
    bundle.add(sample_table())
    out = str(tmp_path)
    assert emit_report(bundle, "csv", out) == [os.path.join(out, "sample.csv")]
    assert emit_report(bundle, "markdown", out) == [os.path.join(out, "sample.md")]
    [json_path] = emit_report(bundle, "json", out)
    with open(json_path, encoding="utf-8") as f:
        data = json.load(f)
    assert data["sample"]["rows"][0] == [1, "alpha, beta", 2, 66.67]
    assert data["sample"]["n"] == 3
    with open(os.path.join(out, "sample.csv"), "rb") as f:
        assert f.read().count(b"\r\n") == 3


def test_json_keeps_two_places(tmp_path):
    bundle = ReportBundle()
    bundle.add(Table("shares", "Shares", ("Group", "Count", "%"),
                     (("a", 6, percent(6, 10)), ("b", 6, percent(6, 22)), ("none", 0, None)), n=10))
    [json_path] = emit_report(bundle, "json", str(tmp_path))
    with open(json_path, encoding="utf-8") as f:
        text = f.read()
    assert '["a", 6, 60.00]' in text
    assert '["b", 6, 27.27]' in text
    assert '["none", 0, null]' in text
    data = json.loads(text)
    assert data["shares"]["rows"][0] == ["a", 6, 60.0]
    assert data["shares"]["columns"] == ["Group", "Count", "%"]


def test_json_for_an_empty_bundle(tmp_path):
    [json_path] = emit_report(ReportBundle(), "json", str(tmp_path))
    with open(json_path, encoding="utf-8") as f:
        assert json.load(f) == {}


def test_unwritable_report_directory_is_output_error(tmp_path):
    blocker = tmp_path / "taken"
    blocker.write_text("not a directory", encoding="utf-8")
    bundle = ReportBundle()
    bundle.add(sample_table())
    with pytest.raises(OutputError):
        emit_report(bundle, "csv", str(blocker / "out"))


def test_unknown_format():
    with pytest.raises(ValueError):
        emit_report(ReportBundle(), "xlsx", ".")


def test_review_queue_is_always_csv(tmp_path):
    bundle = ReportBundle()
    bundle.add(Table("review_queue", "Review", ("DOI", "Matched field", "Matched value", "Landing URI"),
                     (("10.1/a", "title", "Deleted", ""),), n=1))
    path = emit_review_queue(bundle, str(tmp_path))
    with open(path, newline="", encoding="utf-8") as f:
        assert f.read().startswith("DOI,Matched field,Matched value,Landing URI\r\n10.1/a,title,Deleted,\r\n")
