import logging
from typing import Any, Iterable, List, Optional
from urllib.parse import quote, unquote, urljoin, urlsplit

import requests

from config import DOI_PROXY_BASE, INITIAL_RETRY_DELAY, MAX_REDIRECTS, MAX_RETRIES, REQUEST_TIMEOUT
from model.doi import NormalizedDoi, normalize_doi
from model.errors import MalformedDoi
from model.evidence import RedirectHop, RedirectTrace
from utils.http import HostRateLimiter, RequestHook, async_make_request_with_retries, attempt_hook

logger = logging.getLogger(__name__)

PROXY_HOSTS = {"doi.org", "dx.doi.org", "www.doi.org"}
UNAVAILABLE_STATUSES = frozenset({429})


def doi_from_proxy_link(url: Optional[str]) -> Optional[NormalizedDoi]:
    """Return the DOI a proxy link (https://doi.org/<doi>) points at, if it is one."""
    if not url:
        return None
    parts = urlsplit(url)
    if parts.netloc.lower() not in PROXY_HOSTS:
        return None
    path = unquote(parts.path.lstrip("/"))
    if not path or path.startswith(("api/", "doiRA/")):
        return None
    try:
        return normalize_doi(path)
    except MalformedDoi:
        return None


def make_hop(status: int, location: Optional[str], error: Optional[str] = None) -> RedirectHop:
    """
    Build a hop. A redirect without a location, and a server error or 429 that
    outlasted the retries, become failed (status 0) hops: neither says anything
    about where the DOI points.
    """
    if status in UNAVAILABLE_STATUSES or status >= 500:
        return RedirectHop(0, error=error or f"HTTP {status} after retries")
    if 300 <= status < 400 and not location:
        return RedirectHop(0, error=error or f"HTTP {status} without Location header")
    return RedirectHop(status, location if 300 <= status < 400 else None, error)


def trace_from_chain(chain: Iterable[dict], max_redirects: int = MAX_REDIRECTS,
                     method_used: str = "HEAD") -> RedirectTrace:
    """Replay a recorded chain of {status, location[, error]} responses with the live limits."""
    hops: List[RedirectHop] = []
    incomplete = False
    for entry in chain:
        hop = make_hop(int(entry.get("status", 0)), entry.get("location"), entry.get("error"))
        hops.append(hop)
        if hop.status == 0:
            incomplete = True
            break
        if not hop.is_redirect:
            break
        if sum(1 for h in hops if h.is_redirect) >= max_redirects:
            incomplete = True
            break
    return RedirectTrace.from_hops(hops, method_used=method_used, incomplete=incomplete)


def parse_handle_response(body: Any) -> Optional[str]:
    """Return the URL value of a handle record, if any."""
    if not isinstance(body, dict) or body.get("responseCode") != 1:
        return None
    for value in body.get("values", []):
        if value.get("type") == "URL":
            data = value.get("data", {})
            return data.get("value") if isinstance(data, dict) else None
    return None


class DoiProxyAPI:
    """Traces DOI link redirects hop by hop and reads handle records."""

    def __init__(self, base_url=DOI_PROXY_BASE, session=None, limiter: Optional[HostRateLimiter] = None,
                 max_redirects=MAX_REDIRECTS, max_retries=MAX_RETRIES,
                 initial_delay=INITIAL_RETRY_DELAY, timeout=REQUEST_TIMEOUT,
                 on_request: Optional[RequestHook] = None):
        self._base_url = base_url.rstrip("/")
        self._session = session or requests.Session()
        self._limiter = limiter
        self._max_redirects = max_redirects
        self._max_retries = max_retries
        self._initial_delay = initial_delay
        self._timeout = timeout
        self._on_request = on_request

    def link_for(self, doi: NormalizedDoi) -> str:
        return f"{self._base_url}/{quote(doi.full, safe='/')}"

    async def _request(self, method: str, url: str, kind: str, doi: NormalizedDoi, params=None) -> requests.Response:
        return await async_make_request_with_retries(
            method=method,
            url=url,
            session=self._session,
            limiter=self._limiter,
            params=params,
            allow_redirects=False,
            max_retries=self._max_retries,
            initial_delay=self._initial_delay,
            timeout=self._timeout,
            service_name="DOI proxy",
            on_attempt=attempt_hook(self._on_request, kind, doi),
        )

    async def trace_redirects(self, doi: NormalizedDoi) -> RedirectTrace:
        """
        Follow the DOI link manually, recording every response.

        Each hop is tried with HEAD first; a 4xx answer is retried once with GET
        because some landing servers reject HEAD. Transport failures and server
        errors that outlast the retries end the chain with a status-0 hop
        instead of raising.
        """
        url = self.link_for(doi)
        hops: List[RedirectHop] = []
        method_used = "HEAD"
        incomplete = False

        while True:
            try:
                response = await self._request("HEAD", url, "redirect", doi)
                if 400 <= response.status_code < 500:
                    response = await self._request("GET", url, "redirect", doi)
                    method_used = "GET"
            except requests.exceptions.RequestException as e:
                logger.debug("[Proxy] %s: transport failure at %s: %s", doi, url, e)
                hops.append(RedirectHop(0, error=f"{type(e).__name__}: {e}"))
                incomplete = True
                break

            location = response.headers.get("Location")
            hop = make_hop(response.status_code, urljoin(url, location) if location else None)
            hops.append(hop)
            if hop.status == 0:
                incomplete = True
                break
            if not hop.is_redirect:
                break
            if sum(1 for h in hops if h.is_redirect) >= self._max_redirects:
                logger.debug("[Proxy] %s: stopped after %d redirects", doi, self._max_redirects)
                incomplete = True
                break
            url = hop.location

        return RedirectTrace.from_hops(hops, method_used=method_used, incomplete=incomplete)

    async def get_handle_url(self, doi: NormalizedDoi) -> Optional[str]:
        """Return the URL value registered in the DOI's handle record."""
        url = f"{self._base_url}/api/handles/{quote(doi.full, safe='/')}"
        try:
            response = await self._request("GET", url, "handle", doi, params={"type": "URL"})
        except requests.exceptions.RequestException as e:
            logger.debug("[Proxy] %s: handle lookup failed: %s", doi, e)
            return None
        if response.status_code != 200:
            return None
        try:
            return parse_handle_response(response.json())
        except ValueError:
            return None
