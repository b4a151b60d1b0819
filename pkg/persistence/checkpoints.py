"""
Stage checkpoints for resumable pipeline runs.

Each completed stage leaves <workdir>/checkpoints/<stage>.json holding the
hash of the configuration it ran under (only the settings that stage depends
on) and whatever outputs later stages need. A rerun with the same hash reuses
the outputs instead of redoing the stage.
"""

import json
import logging
import os
import threading
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from utils.core import atomic_write_json

logger = logging.getLogger(__name__)


class CheckpointStore:

    def __init__(self, workdir: str):
        self._dir = os.path.join(workdir, "checkpoints")
        self._lock = threading.RLock()
        os.makedirs(self._dir, exist_ok=True)

    def _path(self, stage: str) -> str:
        return os.path.join(self._dir, f"{stage}.json")

    def load(self, stage: str, config_hash: str) -> Optional[Dict[str, Any]]:
        """Return the outputs of a completed stage, or None if it must run."""
        path = self._path(stage)
        if not os.path.exists(path):
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (json.JSONDecodeError, IOError) as e:
            logger.warning("[Checkpoint] Ignoring unreadable checkpoint %s: %s", path, e)
            return None
        if data.get("config_hash") != config_hash:
            logger.info("[Checkpoint] Stage '%s' ran under a different configuration; rerunning", stage)
            return None
        outputs = data.get("outputs", {})
        missing = [p for p in outputs.get("files", []) if not os.path.exists(p)]
        if missing:
            logger.info("[Checkpoint] Stage '%s' outputs missing (%s); rerunning", stage, missing[0])
            return None
        return outputs

    def save(self, stage: str, config_hash: str, outputs: Dict[str, Any]):
        with self._lock:
            atomic_write_json(self._path(stage), {
                "stage": stage,
                "config_hash": config_hash,
                "completed_at": datetime.now(timezone.utc).isoformat(),
                "outputs": outputs,
            })

    def invalidate(self, stages: List[str]):
        with self._lock:
            for stage in stages:
                path = self._path(stage)
                if os.path.exists(path):
                    os.remove(path)
