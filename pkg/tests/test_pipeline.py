import csv
import json
import os
from decimal import Decimal

import pytest
from pydantic import ValidationError

import pipeline
from model.errors import ConfigError, InputError, StageFailure
from pipeline import RunConfig, run_pipeline
from tests.conftest import DEMO_DIR

D = Decimal


def demo_config(out_dir, **overrides):
    settings = dict(
        snapshot_a=os.path.join(DEMO_DIR, "snapshot_a.txt"),
        snapshot_b=os.path.join(DEMO_DIR, "snapshot_b.jsonl"),
        label_a="2017",
        label_b="2021",
        fixtures=os.path.join(DEMO_DIR, "evidence"),
        offline=True,
        out_dir=str(out_dir),
        formats=("csv", "json", "markdown"),
        show_progress=False,
    )
    settings.update(overrides)
    return RunConfig(**settings)


@pytest.fixture(scope="module")
def demo_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo") / "out"
    cfg = demo_config(out)
    return cfg, run_pipeline(cfg)


def rows(bundle, name):
    return list(bundle[name].rows)


def test_census(demo_run):
    _, bundle = demo_run
    assert rows(bundle, "diff_census") == [
        ("Difference set", 43, D("71.67"), 28, D("62.22")),
        ("Product set", 17, D("28.33"), 17, D("37.78")),
        ("Overall", 60, D("100.00"), 45, D("100.00")),
        ("Deleted DOIs", 36, D("60.00"), 36, D("80.00")),
    ]
    assert bundle["diff_census"].columns[1] == "# of DOIs (2017)"


def test_class_counts(demo_run):
    _, bundle = demo_run
    table = bundle["class_counts"]
    assert table.n == 36
    assert [(r[1], r[2], r[3]) for r in table.rows] == [
        ("Non-existing DOIs", 3, D("8.33")),
        ("Defunct DOIs", 3, D("8.33")),
        ("DOIs without redirects", 3, D("8.33")),
        ("Alias DOIs", 22, D("61.11")),
        ("DOIs with deleted description on metadata", 3, D("8.33")),
        ("Other DOIs", 2, D("5.56")),
    ]
    assert "4 non-Crossref DOIs excluded" in table.note
    assert "3 unclassifiable" in table.note


def test_doc_types(demo_run):
    _, bundle = demo_run
    assert [r[1:] for r in rows(bundle, "doc_types")] == [
        ("journal-article", 11, D("30.56")),
        ("unknown", 11, D("30.56")),
        ("proceedings-article", 8, D("22.22")),
        ("book-chapter", 3, D("8.33")),
        ("standard", 2, D("5.56")),
        ("reference-entry", 1, D("2.78")),
    ]


def test_prefixes(demo_run):
    _, bundle = demo_run
    table = rows(bundle, "prefixes")
    assert table[0] == (1, "10.1234", 8, 13, D("22.22"), D("61.54"))
    assert table[1] == (2, "10.14359", 7, 10, D("19.44"), D("70.00"))
    assert table[2] == (3, "10.1007", 4, 5, D("11.11"), D("80.00"))
    assert table[3][1:] == ("10.2523", 3, 3, D("8.33"), D("100.00"))
    assert table[-1][1:] == ("10.4018", 1, 1, D("2.78"), D("100.00"))
    assert len(table) == 11


def test_change_patterns_and_buckets(demo_run):
    _, bundle = demo_run
    assert [r[1:] for r in rows(bundle, "change_patterns")] == [
        (16, D("76.19")), (2, D("9.52")), (3, D("14.29")),
    ]
    buckets = rows(bundle, "similarity_buckets")
    assert buckets[5] == ("0.5 < sim <= 0.6", 1, D("6.25"), 0, D("0.00"))
    assert buckets[7] == ("0.7 < sim <= 0.8", 6, D("37.50"), 0, D("0.00"))
    assert buckets[8] == ("0.8 < sim <= 0.9", 5, D("31.25"), 1, D("50.00"))
    assert buckets[9] == ("0.9 < sim < 1.0", 4, D("25.00"), 0, D("0.00"))
    assert buckets[0][3:] == (1, D("50.00"))
    assert buckets[-1] == ("Overall", 16, D("100.00"), 2, D("100.00"))


def test_edit_signatures(demo_run):
    _, bundle = demo_run
    table = bundle["edit_signatures"]
    assert table.n == 16
    assert [r[1:4] for r in table.rows] == [
        ("Delete a slash (/) once", 4, D("25.00")),
        ("Add a hyphen (-) twice", 3, D("18.75")),
        ("Add a hyphen (-) four times", 1, D("6.25")),
        ('Delete "2" twice, add "5" once, add "7" once, replace "6" with "3" once, replace "8" with "9" once',
         1, D("6.25")),
        ('Delete "2" twice, delete "5" once, delete "f" once, replace "%" with a slash (/) once', 1, D("6.25")),
        ('Replace "3" with "0" once', 1, D("6.25")),
        ('Replace "3" with "6" once', 1, D("6.25")),
        ('Replace "4" with "0" once', 1, D("6.25")),
        ('Replace "4" with "6" once', 1, D("6.25")),
        ('Replace "5" with "6" once', 1, D("6.25")),
    ]
    assert table.rows[0][4] == "/s12445-012-0033-7 -> s12445-012-0033-7"
    assert table.rows[1][4] == "gc20010101 -> gc2001-01-01"


def test_prefix_transitions(demo_run):
    _, bundle = demo_run
    assert rows(bundle, "prefix_transitions") == [
        (1, "10.2523", "10.2118", 3, D("60.00")),
        (2, "10.3403", "10.3406", 2, D("40.00")),
    ]


def test_alias_groups(demo_run):
    _, bundle = demo_run
    stats = dict(rows(bundle, "alias_group_stats"))
    assert stats["Primary DOIs"] == 16
    assert stats["Paired Alias DOIs"] == 21
    assert stats["Alias DOIs without a resolved primary"] == 1
    assert stats["Median"] == D("1.00")
    assert stats["Standard deviation (population)"] == D("0.58")
    top = rows(bundle, "top_primaries")
    assert top[0] == (1, "10.14359/15306", 3, "Shear Strength of Deep Beams", "230, pp. 1-12",
                      "Special Publication")
    assert top[1] == (2, "10.1007/s12445-012-0033-7", 2, "Fatigue of Bonded Joints", "12, pp. 33-41",
                      "Journal of Adhesion Studies")
    assert [r[1] for r in top[2:5]] == ["10.14359/15310", "10.2307/123/456", "10.1007/978-3-54012345"]
    assert len(top) == 10
    assert top[-1][1:3] == ("10.2118/114035-ms", 1)


def test_review_anomalies_and_unclassifiable(demo_run):
    _, bundle = demo_run
    assert [r[:3] for r in rows(bundle, "review_queue")] == [
        ("10.1234/dd.1", "title", "This DOI has been deleted"),
        ("10.1234/dd.2", "container-title", "Deleted DOIs"),
        ("10.14359/15400", "primary.title", "DELETED"),
    ]
    assert [(r[0], r[2]) for r in rows(bundle, "anomalies")] == [
        ("10.1007/s12445-012-0033-7/", "trace_incomplete"),
        ("10.1234/other.1", "anomalous_metadata"),
        ("10.1234/other.2", "metadata_error"),
        ("10.14359/99999", "primary_unresolved"),
    ]
    assert [r[0] for r in rows(bundle, "unclassifiable")] == [
        "10.1234/unavail.1", "10.1234/unreach.1", "10.1234/unreach.2",
    ]



def test_output_files(demo_run):
    cfg, bundle = demo_run
    out = cfg.out_dir
    for name in bundle.tables:
        assert os.path.exists(os.path.join(out, f"{name}.csv"))
        assert os.path.exists(os.path.join(out, f"{name}.md"))
    with open(os.path.join(out, "review_queue.csv"), newline="", encoding="utf-8") as f:
        queue = list(csv.reader(f))
    assert queue[0] == ["DOI", "Matched field", "Matched value", "Landing URI"]
    assert len(queue) == 4
    with open(os.path.join(out, "manifest.json"), encoding="utf-8") as f:
        manifest = json.load(f)
    assert manifest["config_hash"] == cfg.config_hash()
    assert manifest["labels"] == ["2017", "2021"]
    assert "report.json" in manifest["outputs"]
    with open(os.path.join(out, "classification.jsonl"), encoding="utf-8") as f:
        assert sum(1 for _ in f) == 43


def test_rerun_reuses_checkpoints(tmp_path, mocker):
    cfg = demo_config(tmp_path / "out", formats=("csv",))
    first = run_pipeline(cfg)
    ingest = mocker.patch("pipeline.ingest_snapshot", side_effect=AssertionError("ingest reran"))
    resolve = mocker.patch("pipeline.run_classification", side_effect=AssertionError("resolve reran"))
    second = run_pipeline(cfg)
    ingest.assert_not_called()
    resolve.assert_not_called()
    assert second.tables == first.tables


def test_changing_report_settings_keeps_evidence(tmp_path, mocker):
    run_pipeline(demo_config(tmp_path / "out", formats=("csv",)))
    resolve = mocker.patch("pipeline.run_classification", side_effect=AssertionError("resolve reran"))
    bundle = run_pipeline(demo_config(tmp_path / "out", formats=("json",), top_k=2))
    resolve.assert_not_called()
    assert len(bundle["top_primaries"].rows) == 2
    assert os.path.exists(tmp_path / "out" / "report.json")
    assert os.path.exists(tmp_path / "out" / "review_queue.csv")


def test_force_reruns_the_stage(tmp_path, mocker):
    cfg = demo_config(tmp_path / "out", formats=("csv",))
    run_pipeline(cfg)
    spy = mocker.spy(pipeline, "diff_snapshots")
    run_pipeline(cfg, force="diff")
    assert spy.call_count == 1


def test_until_stops_early(tmp_path):
    cfg = demo_config(tmp_path / "out")
    assert run_pipeline(cfg, until="diff") is None
    assert os.path.exists(os.path.join(cfg.work_path, "diff", "diff.json"))
    assert not os.path.exists(os.path.join(cfg.out_dir, "classification.jsonl"))


def test_unknown_stage(tmp_path):
    with pytest.raises(ConfigError):
        run_pipeline(demo_config(tmp_path / "out"), until="publish")


def test_missing_snapshot_setting(tmp_path):
    with pytest.raises(ConfigError):
        run_pipeline(demo_config(tmp_path / "out", snapshot_b=None))


def test_labels_must_differ_as_file_names(tmp_path):
    with pytest.raises(ConfigError):
        run_pipeline(demo_config(tmp_path / "out", label_a="a b", label_b="a/b"))


def test_missing_snapshot_file(tmp_path):
    with pytest.raises(InputError):
        run_pipeline(demo_config(tmp_path / "out", snapshot_a=str(tmp_path / "missing.txt")))


def test_fixture_miss_fails_the_resolve_stage(tmp_path):
    fixtures = tmp_path / "fixtures"
    fixtures.mkdir()
    (fixtures / "only.jsonl").write_text(
        '{"doi": "10.5555/ghost-001", "ra_response": [{"DOI": "10.5555/ghost-001", "status": "DOI does not exist"}]}\n',
        encoding="utf-8")
    with pytest.raises(StageFailure) as excinfo:
        run_pipeline(demo_config(tmp_path / "out", fixtures=str(fixtures)))
    assert excinfo.value.stage == "resolve"
    assert excinfo.value.doi is not None


@pytest.mark.parametrize("overrides", [
    {"fixtures": None},
    {"rate_limit": 0},
    {"formats": ("xlsx",)},
    {"formats": ()},
    {"top_k": 0},
    {"unknown_setting": 1},
])
def test_invalid_config(tmp_path, overrides):
    with pytest.raises(ValidationError):
        demo_config(tmp_path / "out", **overrides)


def test_formats_are_deduplicated(tmp_path):
    assert demo_config(tmp_path, formats=("csv", "json", "csv")).formats == ("csv", "json")


def test_stage_hash_covers_only_earlier_settings(tmp_path):
    a = demo_config(tmp_path, top_k=5)
    b = demo_config(tmp_path, top_k=6)
    assert a.stage_hash("resolve") == b.stage_hash("resolve")
    assert a.stage_hash("analyze") != b.stage_hash("analyze")
    c = demo_config(tmp_path, annotation="rerun")
    assert a.stage_hash("diff") == c.stage_hash("diff")
    assert a.stage_hash("resolve") != c.stage_hash("resolve")
