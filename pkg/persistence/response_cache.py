"""
Content-addressed response cache for resolver lookups.

Entries are keyed by (endpoint, normalized DOI) and stored as one JSON file
each under <cache_dir>/<kk>/<key>.json, where key is the SHA-256 of the pair.
Writes are serialized and atomic; readers never take the lock. Entries never
expire: an audit is a snapshot in time.
"""

import json
import logging
import os
import threading
from typing import Any, Dict, Optional

from cachetools import LRUCache

from utils.core import atomic_write_json, stable_hash

logger = logging.getLogger(__name__)


class ResponseCache:
    """Thread-safe disk cache with a small in-memory front."""

    def __init__(self, cache_dir: str, memory_entries: int = 4096):
        self._cache_dir = cache_dir
        self._lock = threading.RLock()
        self._memory: LRUCache = LRUCache(maxsize=memory_entries)
        self.hits = 0
        self.misses = 0
        os.makedirs(cache_dir, exist_ok=True)

    @staticmethod
    def key_for(endpoint: str, doi: str) -> str:
        return stable_hash([endpoint, doi])

    def _path_for(self, key: str) -> str:
        return os.path.join(self._cache_dir, key[:2], f"{key}.json")

    def get(self, endpoint: str, doi: str) -> Optional[Dict[str, Any]]:
        """Return the stored value, or None on a miss."""
        key = self.key_for(endpoint, doi)
        value = self._memory.get(key)
        if value is not None:
            self.hits += 1
            return value

        path = self._path_for(key)
        if not os.path.exists(path):
            self.misses += 1
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                entry = json.load(f)
        except (json.JSONDecodeError, IOError) as e:
            logger.warning("[Cache] Ignoring unreadable entry %s: %s", path, e)
            self.misses += 1
            return None

        value = entry.get("value")
        with self._lock:
            self._memory[key] = value
        self.hits += 1
        return value

    def put(self, endpoint: str, doi: str, value: Dict[str, Any]):
        key = self.key_for(endpoint, doi)
        entry = {"endpoint": endpoint, "doi": doi, "value": value}
        with self._lock:
            atomic_write_json(self._path_for(key), entry)
            self._memory[key] = value
