"""Data persistence layer: response cache and stage checkpoints."""

from persistence.checkpoints import CheckpointStore
from persistence.response_cache import ResponseCache

__all__ = ['CheckpointStore', 'ResponseCache']
