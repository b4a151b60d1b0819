import gzip
import json
import os
import random
import tempfile
import tracemalloc

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from model.errors import InputError
from snapshots.diff import DiffSets, DoiStream, diff_snapshots
from snapshots.ingest import SnapshotHandle, entry_size, extract_identifier, ingest_snapshot, safe_label


def write_dump(path, lines):
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    return str(path)


def ingest(path, label, workdir, **kwargs):
    kwargs.setdefault("show_progress", False)
    return ingest_snapshot(str(path), label, str(workdir), **kwargs)


def test_demo_snapshot_a(demo_dir, tmp_path):
    handle = ingest(os.path.join(demo_dir, "snapshot_a.txt"), "2017", tmp_path)
    assert handle.record_count == 63
    assert handle.unique_count == 60
    assert handle.malformed_count == 2
    assert handle.residual_escapes == 1
    dois = list(handle.iter_dois())
    assert dois == sorted(dois)
    assert len(set(dois)) == len(dois)
    assert "10.1007/978-3-540/12345" in dois
    assert "10.1234/defunct.1" in dois
    assert "10.2307/123%252f456" in dois
    assert handle.prefix_counts()["10.1234"] == 13
    assert handle.prefix_counts()["10.14359"] == 10


def test_demo_snapshot_b_jsonl(demo_dir, tmp_path):
    handle = ingest(os.path.join(demo_dir, "snapshot_b.jsonl"), "2021", tmp_path)
    assert handle.unique_count == 45
    assert handle.record_count == 46
    assert handle.malformed_count == 0
    assert "10.3406/30012345u" in set(handle.iter_dois())


def test_malformed_lines_go_to_sidecar(tmp_path):
    path = write_dump(tmp_path / "dump.txt", ["10.1/a", "garbage", '{"title": "no doi"}', "10.1/b"])
    handle = ingest(path, "x", tmp_path / "work")
    assert handle.malformed_count == 2
    with open(handle.malformed_path, encoding="utf-8") as f:
        rows = [line.rstrip("\n").split("\t") for line in f]
    assert rows[0] == ["line", "text", "reason"]
    assert [row[0] for row in rows[1:]] == ["2", "3"]
    assert rows[1][1] == "garbage"


def test_encoded_newline_does_not_split_a_store_entry(tmp_path):
    path = write_dump(tmp_path / "dump.txt", ["10.1/a%0Ab", "10.1/x", "10.1/x", "10.1/y"])
    handle = ingest(path, "nl", tmp_path / "work")
    assert handle.malformed_count == 1
    assert list(handle.iter_dois()) == ["10.1/x", "10.1/y"]
    assert handle.prefix_counts() == {"10.1": 2}

    only_bad = ingest(write_dump(tmp_path / "bad.txt", ["10.1/a%0Ab"]), "bad", tmp_path / "work")
    assert (only_bad.record_count, only_bad.unique_count) == (0, 0)
    assert list(only_bad.iter_dois()) == []


def test_gzip_input_is_detected_by_magic(tmp_path):
    path = tmp_path / "dump.data"
    with gzip.open(path, "wt", encoding="utf-8") as f:
        f.write("10.1/B\r\n10.1/a\r\n10.1/b\r\n")
    handle = ingest(path, "gz", tmp_path / "work")
    assert list(handle.iter_dois()) == ["10.1/a", "10.1/b"]


def test_small_chunks_and_worker_processes_give_the_same_store(tmp_path):
    rng = random.Random(7)
    lines = [f"10.{rng.randint(1000, 1010)}/{rng.randint(0, 300)}" for _ in range(500)]
    path = write_dump(tmp_path / "dump.txt", lines)
    single = ingest(path, "single", tmp_path / "w1")
    chunked = ingest(path, "chunked", tmp_path / "w2", chunk_bytes=64, sort_workers=2)
    assert list(single.iter_dois()) == list(chunked.iter_dois())
    assert single.prefix_counts() == chunked.prefix_counts()


def traced_peak(fn):
    tracemalloc.start()
    try:
        fn()
        return tracemalloc.get_traced_memory()[1]
    finally:
        tracemalloc.stop()


def test_chunk_memory_stays_near_chunk_bytes(tmp_path):
    lines = [f"10.1234/item-{i:06d}" for i in range(40_000)]
    random.Random(3).shuffle(lines)
    path = write_dump(tmp_path / "dump.txt", lines)

    bounded = traced_peak(lambda: ingest(path, "small", tmp_path / "w1", chunk_bytes=256 * 1024, sort_workers=1))
    unbounded = traced_peak(lambda: ingest(path, "large", tmp_path / "w2", chunk_bytes=1024 ** 3, sort_workers=1))

    assert bounded < 1.5 * 1024 ** 2
    assert unbounded > 2.5 * 1024 ** 2
    assert entry_size(lines[0]) > len(lines[0])


def test_handle_is_saved_and_reloadable(tmp_path):
    path = write_dump(tmp_path / "dump.txt", ["10.1/a"])
    handle = ingest(path, "2017/03", tmp_path)
    saved = os.path.join(tmp_path, "snapshots", f"{safe_label('2017/03')}.handle.json")
    assert SnapshotHandle.load(saved) == handle


def test_missing_snapshot_is_input_error(tmp_path):
    with pytest.raises(InputError):
        ingest(tmp_path / "nope.txt", "a", tmp_path)


def test_extract_identifier():
    assert extract_identifier('{"DOI": "10.1/X", "type": "dataset"}') == "10.1/X"
    assert extract_identifier("  10.1/x \n") == "10.1/x"
    assert extract_identifier("\n") is None
    with pytest.raises(ValueError):
        extract_identifier('{"doi": "10.1/x"}')


def test_safe_label():
    assert safe_label("2017-03") == "2017-03"
    assert safe_label("a b/c") == "a_b_c"


def test_demo_diff(demo_dir, tmp_path):
    a = ingest(os.path.join(demo_dir, "snapshot_a.txt"), "A", tmp_path)
    b = ingest(os.path.join(demo_dir, "snapshot_b.jsonl"), "B", tmp_path)
    diff = diff_snapshots(a, b, str(tmp_path / "diff"))
    assert (diff.only_in_a.count, diff.only_in_b.count, diff.in_both) == (43, 28, 17)
    assert "10.14359/15303" in set(diff.only_in_a)
    assert DiffSets.load(str(tmp_path / "diff" / "diff.json")) == diff


def test_diff_sets_check_their_counts():
    with pytest.raises(ValueError):
        DiffSets("A", "B", 3, 3, DoiStream("a", 1), DoiStream("b", 1), 1)


def diff_oracle(set_a, set_b):
    with tempfile.TemporaryDirectory() as tmp:
        a = ingest(write_dump(os.path.join(tmp, "a.txt"), sorted(set_a) or [""]), "A", tmp)
        b = ingest(write_dump(os.path.join(tmp, "b.txt"), sorted(set_b) or [""]), "B", tmp)
        diff = diff_snapshots(a, b, os.path.join(tmp, "diff"))
        only_a, only_b = list(diff.only_in_a), list(diff.only_in_b)
        both = diff.in_both
    return only_a, only_b, both


dois = st.sets(st.builds(lambda p, s: f"10.{p}/{s}", st.integers(1000, 1003), st.integers(0, 40)), max_size=40)


@settings(max_examples=50, deadline=None)
@given(dois, dois)
def test_diff_matches_set_operations(set_a, set_b):
    only_a, only_b, both = diff_oracle(set_a, set_b)
    assert only_a == sorted(set_a - set_b)
    assert only_b == sorted(set_b - set_a)
    assert both == len(set_a & set_b)


@pytest.mark.slow
def test_seeded_diff_grid():
    rng = random.Random(2021)
    for _ in range(100):
        universe = [f"10.{rng.randint(1000, 1020)}/{rng.randint(0, 200)}" for _ in range(120)]
        set_a = set(rng.sample(universe, rng.randint(0, 60)))
        set_b = set(rng.sample(universe, rng.randint(0, 60)))
        only_a, only_b, both = diff_oracle(set_a, set_b)
        assert only_a == sorted(set_a - set_b)
        assert only_b == sorted(set_b - set_a)
        assert both == len(set_a & set_b)


def test_handle_round_trip_through_json(tmp_path):
    path = write_dump(tmp_path / "dump.txt", ["10.1/a", "10.2/b"])
    handle = ingest(path, "L", tmp_path)
    with open(os.path.join(tmp_path, "snapshots", "L.handle.json"), encoding="utf-8") as f:
        saved = json.load(f)
    assert saved["unique_count"] == handle.unique_count == 2
    assert saved["label"] == "L"
