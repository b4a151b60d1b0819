import logging
from typing import Any, Optional
from urllib.parse import quote

import requests

from config import (
    CROSSREF_API_BASE, DOI_AUDIT_MAILTO, INITIAL_RETRY_DELAY, MAX_RETRIES, REQUEST_TIMEOUT,
    TOOL_NAME, TOOL_VERSION,
)
from model.doi import NormalizedDoi
from model.evidence import MetadataRecord, MetadataResult
from utils.http import HostRateLimiter, RequestHook, async_make_request_with_retries, attempt_hook

logger = logging.getLogger(__name__)


def _first(value: Any) -> str:
    """Crossref returns most text fields as lists; take the first entry."""
    if isinstance(value, list):
        return str(value[0]) if value else ""
    return "" if value is None else str(value)


def parse_work(message: dict) -> MetadataRecord:
    return MetadataRecord(
        type=_first(message.get("type")),
        title=_first(message.get("title")),
        container_title=_first(message.get("container-title")),
        volume=_first(message.get("volume")),
        issue=_first(message.get("issue")),
        page=_first(message.get("page")),
    )


def parse_metadata_response(status_code: int, body: Any) -> MetadataResult:
    """Map a works-endpoint response to a MetadataResult."""
    if status_code == 404:
        return MetadataResult.not_found()
    if status_code == 200 and isinstance(body, dict):
        message = body.get("message", body)
        if isinstance(message, dict):
            return MetadataResult.found(parse_work(message))
    if status_code == 200:
        # A 200 without a work record is still an error from our point of view.
        return MetadataResult.other_error(200)
    return MetadataResult.other_error(status_code)


class CrossrefAPI:
    """Client for the Crossref REST API works endpoint."""

    def __init__(self, base_url=CROSSREF_API_BASE, mailto=DOI_AUDIT_MAILTO, session=None,
                 limiter: Optional[HostRateLimiter] = None, max_retries=MAX_RETRIES,
                 initial_delay=INITIAL_RETRY_DELAY, timeout=REQUEST_TIMEOUT,
                 on_request: Optional[RequestHook] = None):
        self._base_url = base_url.rstrip("/")
        self._mailto = mailto
        self._session = session or requests.Session()
        self._limiter = limiter
        self._max_retries = max_retries
        self._initial_delay = initial_delay
        self._timeout = timeout
        self._on_request = on_request

    @property
    def headers(self):
        agent = f"{TOOL_NAME}/{TOOL_VERSION}"
        if self._mailto:
            agent += f" (mailto:{self._mailto})"
        return {"User-Agent": agent}

    async def fetch_metadata(self, doi: NormalizedDoi) -> MetadataResult:
        """Fetch /works/{doi}; 'Resource not found' maps to ResourceNotFound."""
        url = f"{self._base_url}/works/{quote(doi.full, safe='/')}"
        params = {"mailto": self._mailto} if self._mailto else None
        try:
            response = await async_make_request_with_retries(
                method="GET",
                url=url,
                session=self._session,
                limiter=self._limiter,
                headers=self.headers,
                params=params,
                max_retries=self._max_retries,
                initial_delay=self._initial_delay,
                timeout=self._timeout,
                service_name="Crossref API",
                on_attempt=attempt_hook(self._on_request, "metadata", doi),
            )
        except requests.exceptions.RequestException as e:
            logger.warning("[Crossref] %s: giving up after retries: %s", doi, e)
            return MetadataResult.other_error(0)

        body = None
        if response.status_code == 200:
            try:
                body = response.json()
            except ValueError:
                body = None
        return parse_metadata_response(response.status_code, body)
