"""Shared utilities.

- http: retrying request helper and per-host rate limiter
- core: logging setup, file helpers, hashing
"""

from utils.core import atomic_write_json, atomic_write_text, open_text, read_json, setup_logging, stable_hash
from utils.http import HostRateLimiter, async_make_request_with_retries

__all__ = [
    # HTTP
    'HostRateLimiter',
    'async_make_request_with_retries',
    # Core
    'atomic_write_json',
    'atomic_write_text',
    'open_text',
    'read_json',
    'setup_logging',
    'stable_hash',
]
