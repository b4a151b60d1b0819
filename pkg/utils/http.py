"""
Shared HTTP utilities for the resolver clients.

One retry policy for every service (RA lookup, DOI proxy, metadata API):
connection errors, timeouts and 5xx/429 responses are retried with exponential
backoff; any other response, including 4xx, is returned to the caller to map.
"""

import asyncio
import functools
import logging
from typing import Any, Callable, Dict, Optional
from urllib.parse import urlsplit

import requests
from aiolimiter import AsyncLimiter

logger = logging.getLogger(__name__)

RETRY_STATUSES = frozenset({429, 500, 502, 503, 504})


def _backoff_delay(attempt: int, initial_delay: float) -> float:
    return initial_delay * (2 ** attempt)


RequestHook = Callable[[str, Any, str, str], None]


def attempt_hook(on_request: Optional[RequestHook], kind: str, doi: Any) -> Optional[Callable[[str, str], None]]:
    """Bind a client's on_request(kind, doi, method, url) callback to one lookup."""
    if on_request is None:
        return None
    return functools.partial(on_request, kind, doi)


class HostRateLimiter:
    """Per-host token buckets shared by every worker of one event loop."""

    def __init__(self, rate_per_second: float):
        if rate_per_second <= 0:
            raise ValueError("rate limit must be positive")
        self._rate = rate_per_second
        self._limiters: Dict[str, AsyncLimiter] = {}

    def for_url(self, url: str) -> AsyncLimiter:
        host = urlsplit(url).netloc.lower()
        if host not in self._limiters:
            # Bucket size 1 so a burst never exceeds the per-second rate.
            self._limiters[host] = AsyncLimiter(1, 1.0 / self._rate)
        return self._limiters[host]


async def async_make_request_with_retries(
    method: str,
    url: str,
    session: Optional[requests.Session] = None,
    limiter: Optional[HostRateLimiter] = None,
    headers: Optional[Dict[str, str]] = None,
    params: Optional[Dict[str, Any]] = None,
    allow_redirects: bool = True,
    max_retries: int = 3,
    initial_delay: float = 1,
    timeout: int = 30,
    service_name: str = "HTTP",
    on_attempt: Optional[Callable[[str, str], None]] = None,
) -> requests.Response:
    """
    Makes an HTTP request with retry logic, designed for async contexts.

    The blocking requests call runs in the default executor so many requests
    can be in flight at once. Every attempt first takes a token from the
    host's rate limiter, so retries are rate limited too.

    Args:
        method: HTTP method ('GET' or 'HEAD')
        url: The URL to request
        session: Session to issue the request on (a new one, closed on return, if omitted)
        limiter: Per-host rate limiter shared across workers
        headers: Optional request headers
        params: Optional query parameters
        allow_redirects: Whether requests should follow redirects itself
        max_retries: Total number of attempts
        initial_delay: First backoff delay; doubles after every failed attempt
        timeout: Request timeout in seconds
        service_name: Name of the service for log messages
        on_attempt: Called with (method, url) as each attempt goes out, after its rate-limit token

    Returns:
        The last response. A 5xx response is returned once attempts run out.

    Raises:
        requests.exceptions.ConnectionError / Timeout: after all attempts failed
    """
    if method.upper() not in ("GET", "HEAD"):
        raise ValueError(f"Unsupported HTTP method: {method}")

    loop = asyncio.get_running_loop()
    owned = session is None
    http = session or requests.Session()
    response = None

    try:
        for attempt in range(max_retries):
            try:
                if limiter is not None:
                    async with limiter.for_url(url):
                        pass
                if on_attempt is not None:
                    on_attempt(method.upper(), url)
                response = await loop.run_in_executor(
                    None,
                    lambda: http.request(
                        method.upper(), url,
                        headers=headers, params=params,
                        allow_redirects=allow_redirects, timeout=timeout,
                    ),
                )
            except (requests.exceptions.ConnectionError, requests.exceptions.Timeout) as e:
                logger.warning("%s: %s on attempt %d/%d to %s: %s",
                               service_name, type(e).__name__, attempt + 1, max_retries, url, e)
                if attempt < max_retries - 1:
                    await asyncio.sleep(_backoff_delay(attempt, initial_delay))
                    continue
                raise

            if response.status_code in RETRY_STATUSES and attempt < max_retries - 1:
                logger.warning("%s: HTTP %d on attempt %d/%d to %s",
                               service_name, response.status_code, attempt + 1, max_retries, url)
                await asyncio.sleep(_backoff_delay(attempt, initial_delay))
                continue
            return response
    finally:
        if owned:
            http.close()

    return response
