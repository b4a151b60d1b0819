import logging
from datetime import datetime, timezone
from typing import Any, Optional
from urllib.parse import quote

import requests

from config import DOI_RA_BASE, INITIAL_RETRY_DELAY, MAX_RETRIES, REQUEST_TIMEOUT
from model.doi import NormalizedDoi
from model.evidence import RaOutcome, RaResult
from utils.http import HostRateLimiter, RequestHook, async_make_request_with_retries, attempt_hook

logger = logging.getLogger(__name__)

# Statuses the service returns instead of an RA name.
NONEXISTENT_STATUSES = {"doi does not exist", "invalid doi"}


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def parse_ra_response(doi: NormalizedDoi, body: Any, fetched_at: Optional[str] = None) -> RaResult:
    """Map a "Which RA?" response body (a JSON array) to an RaResult."""
    entries = body if isinstance(body, list) else [body]
    for entry in entries:
        if not isinstance(entry, dict):
            continue
        ra_name = (entry.get("RA") or "").strip()
        if ra_name:
            if ra_name.lower() == "crossref":
                return RaResult(RaOutcome.CROSSREF, ra_name="Crossref", fetched_at=fetched_at)
            return RaResult(RaOutcome.OTHER_RA, ra_name=ra_name, fetched_at=fetched_at)
        status = (entry.get("status") or "").strip()
        if status.lower() in NONEXISTENT_STATUSES:
            return RaResult(RaOutcome.DOES_NOT_EXIST, fetched_at=fetched_at, detail=status)
        if status:
            return RaResult(RaOutcome.INDETERMINATE, fetched_at=fetched_at, detail=f"status: {status}")
    logger.debug("[WhichRA] %s: unrecognized response %r", doi, body)
    return RaResult(RaOutcome.INDETERMINATE, fetched_at=fetched_at, detail="unrecognized response")


class WhichRaAPI:
    """Client for the DOI registration agency lookup ("Which RA?")."""

    def __init__(self, base_url=DOI_RA_BASE, session=None, limiter: Optional[HostRateLimiter] = None,
                 max_retries=MAX_RETRIES, initial_delay=INITIAL_RETRY_DELAY, timeout=REQUEST_TIMEOUT,
                 on_request: Optional[RequestHook] = None):
        self._base_url = base_url.rstrip("/")
        self._session = session or requests.Session()
        self._limiter = limiter
        self._max_retries = max_retries
        self._initial_delay = initial_delay
        self._timeout = timeout
        self._on_request = on_request

    def url_for(self, doi: NormalizedDoi) -> str:
        return f"{self._base_url}/{quote(doi.full, safe='/')}"

    async def lookup_ra(self, doi: NormalizedDoi) -> RaResult:
        """Return the RA of a DOI; transport failures after retries become Indeterminate."""
        url = self.url_for(doi)
        try:
            response = await async_make_request_with_retries(
                method="GET",
                url=url,
                session=self._session,
                limiter=self._limiter,
                max_retries=self._max_retries,
                initial_delay=self._initial_delay,
                timeout=self._timeout,
                service_name="Which RA",
                on_attempt=attempt_hook(self._on_request, "ra", doi),
            )
        except requests.exceptions.RequestException as e:
            logger.warning("[WhichRA] %s: giving up after retries: %s", doi, e)
            return RaResult(RaOutcome.INDETERMINATE, fetched_at=now_iso(), detail=f"transport: {e}")

        if response.status_code >= 500 or response.status_code == 429:
            return RaResult(RaOutcome.INDETERMINATE, fetched_at=now_iso(),
                            detail=f"HTTP {response.status_code}")
        try:
            body = response.json()
        except ValueError:
            return RaResult(RaOutcome.INDETERMINATE, fetched_at=now_iso(),
                            detail=f"HTTP {response.status_code}: body is not JSON")
        return parse_ra_response(doi, body, fetched_at=now_iso())
