import logging
import os

from persistence.checkpoints import CheckpointStore
from persistence.response_cache import ResponseCache


def test_cache_round_trip_and_counters(tmp_path):
    cache = ResponseCache(str(tmp_path))
    assert cache.get("ra", "10.1/a") is None
    cache.put("ra", "10.1/a", {"outcome": "Crossref"})
    assert cache.get("ra", "10.1/a") == {"outcome": "Crossref"}
    assert cache.get("metadata", "10.1/a") is None
    assert (cache.hits, cache.misses) == (1, 2)


def test_cache_reads_back_from_disk(tmp_path):
    ResponseCache(str(tmp_path)).put("redirect", "10.1/a", {"hops": []})
    fresh = ResponseCache(str(tmp_path))
    assert fresh.get("redirect", "10.1/a") == {"hops": []}
    key = ResponseCache.key_for("redirect", "10.1/a")
    assert os.path.exists(tmp_path / key[:2] / f"{key}.json")


def test_unreadable_cache_entry_is_a_miss(tmp_path, caplog):
    key = ResponseCache.key_for("ra", "10.1/a")
    (tmp_path / key[:2]).mkdir()
    (tmp_path / key[:2] / f"{key}.json").write_text("{truncated", encoding="utf-8")
    with caplog.at_level(logging.WARNING):
        assert ResponseCache(str(tmp_path)).get("ra", "10.1/a") is None
    assert "unreadable" in caplog.text


def test_checkpoint_requires_matching_hash(tmp_path):
    store = CheckpointStore(str(tmp_path))
    output = tmp_path / "out.txt"
    output.write_text("x", encoding="utf-8")
    store.save("diff", "abc", {"files": [str(output)]})
    assert store.load("diff", "abc") == {"files": [str(output)]}
    assert store.load("diff", "other") is None
    assert store.load("ingest", "abc") is None


def test_checkpoint_with_missing_output_reruns(tmp_path):
    store = CheckpointStore(str(tmp_path))
    store.save("diff", "abc", {"files": [str(tmp_path / "gone.txt")]})
    assert store.load("diff", "abc") is None


def test_invalidate(tmp_path):
    store = CheckpointStore(str(tmp_path))
    store.save("diff", "abc", {})
    store.save("resolve", "abc", {})
    store.invalidate(["resolve", "classify"])
    assert store.load("diff", "abc") == {}
    assert store.load("resolve", "abc") is None
