"""
Lazy per-DOI evidence gathering.

The RA is looked up first; the redirect chain is traced only for Crossref
DOIs; metadata is fetched only when the chain redirected somewhere other than
the deleted-content page; the primary of an alias (and its metadata) only
when the DOI's own metadata answered "Resource not found".

Answers come from the fixture store when one is configured, otherwise from
the live services through the on-disk response cache. In offline mode a
fixture miss is fatal.
"""

import asyncio
import csv
import logging
import time
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple
from urllib.parse import urlsplit

import requests
from tqdm import tqdm

import config
from apis.crossref_api import CrossrefAPI
from apis.doi_proxy_api import DoiProxyAPI, doi_from_proxy_link
from apis.fixture_store import FixtureStore
from apis.which_ra_api import WhichRaAPI
from model.doi import NormalizedDoi, normalize_doi
from model.errors import ConfigError, InputError, MalformedDoi
from model.evidence import (
    MetadataOutcome, MetadataResult, PrimarySource, RaOutcome, RaResult, RedirectTrace, ResolutionEvidence,
)
from persistence.response_cache import ResponseCache
from utils.http import HostRateLimiter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RequestLogEntry:
    """One outgoing HTTP attempt, or one fixture replay (method and url empty)."""
    timestamp: float
    host: str
    kind: str
    doi: str
    method: str = ""
    url: str = ""


def load_alias_map(path: str) -> Dict[str, NormalizedDoi]:
    """Read an alias,primary CSV (the conflict report export) into {alias: primary}."""
    mapping: Dict[str, NormalizedDoi] = {}
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            for row_no, row in enumerate(csv.reader(f), start=1):
                if not row or (row_no == 1 and row[0].strip().lower() == "alias"):
                    continue
                if len(row) < 2:
                    logger.warning("[Resolver] %s:%d: expected alias,primary", path, row_no)
                    continue
                try:
                    alias, primary = normalize_doi(row[0]), normalize_doi(row[1])
                except MalformedDoi as e:
                    logger.warning("[Resolver] %s:%d: %s", path, row_no, e)
                    continue
                mapping[alias.full] = primary
    except OSError as e:
        raise InputError(f"Cannot read alias map {path}: {e}") from e
    logger.info("[Resolver] Loaded %d alias mappings from %s", len(mapping), path)
    return mapping


class Resolver:
    """Gathers ResolutionEvidence for DOIs from fixtures or the live services."""

    def __init__(self, fixtures: Optional[FixtureStore] = None, offline: bool = False,
                 cache: Optional[ResponseCache] = None, alias_map: Optional[Dict[str, NormalizedDoi]] = None,
                 rate_limit: float = config.RATE_LIMIT_PER_HOST, concurrency: int = config.CONCURRENCY,
                 max_redirects: int = config.MAX_REDIRECTS, max_retries: int = config.MAX_RETRIES,
                 initial_delay: float = config.INITIAL_RETRY_DELAY, timeout: int = config.REQUEST_TIMEOUT,
                 mailto: str = config.DOI_AUDIT_MAILTO, ra_base: str = config.DOI_RA_BASE,
                 crossref_base: str = config.CROSSREF_API_BASE, proxy_base: str = config.DOI_PROXY_BASE,
                 annotation: Optional[str] = None, session: Optional[requests.Session] = None):
        if offline and fixtures is None:
            raise ConfigError("Offline mode needs a fixture store")
        self.fixtures = fixtures
        self.offline = offline
        self.cache = cache
        self.alias_map = alias_map or {}
        self.concurrency = concurrency
        self.max_redirects = max_redirects
        self.annotation = annotation
        self.request_log: List[RequestLogEntry] = []

        self._hosts = {
            "ra": urlsplit(ra_base).netloc,
            "redirect": urlsplit(proxy_base).netloc,
            "handle": urlsplit(proxy_base).netloc,
            "metadata": urlsplit(crossref_base).netloc,
        }

        self.ra_api = self.proxy_api = self.crossref_api = None
        if not offline:
            session = session or requests.Session()
            limiter = HostRateLimiter(rate_limit)
            retry = dict(max_retries=max_retries, initial_delay=initial_delay, timeout=timeout,
                         on_request=self._log_attempt)
            self.ra_api = WhichRaAPI(ra_base, session=session, limiter=limiter, **retry)
            self.proxy_api = DoiProxyAPI(proxy_base, session=session, limiter=limiter,
                                         max_redirects=max_redirects, **retry)
            self.crossref_api = CrossrefAPI(crossref_base, mailto=mailto, session=session,
                                            limiter=limiter, **retry)

    def _log_request(self, kind: str, doi: NormalizedDoi):
        self.request_log.append(RequestLogEntry(time.monotonic(), self._hosts[kind], kind, doi.full))

    def _log_attempt(self, kind: str, doi: NormalizedDoi, method: str, url: str):
        self.request_log.append(
            RequestLogEntry(time.monotonic(), urlsplit(url).netloc, kind, doi.full, method, url))

    def _replays(self, doi: NormalizedDoi, kind: str) -> bool:
        """True when this lookup is answered from fixtures (always, offline)."""
        if self.fixtures is None:
            return False
        return self.offline or self.fixtures.has(doi, kind)

    def _cached(self, kind: str, doi: NormalizedDoi) -> Optional[dict]:
        return self.cache.get(kind, doi.full) if self.cache is not None else None

    def _store(self, kind: str, doi: NormalizedDoi, value: dict):
        if self.cache is not None:
            self.cache.put(kind, doi.full, value)

    async def lookup_ra(self, doi: NormalizedDoi) -> RaResult:
        if self._replays(doi, "ra_response"):
            self._log_request("ra", doi)
            return self.fixtures.ra_result(doi)
        cached = self._cached("ra", doi)
        if cached is not None:
            return RaResult.from_dict(cached)
        result = await self.ra_api.lookup_ra(doi)
        # Indeterminate answers are retried on the next run, never cached.
        if result.outcome != RaOutcome.INDETERMINATE:
            self._store("ra", doi, result.to_dict())
        return result

    async def trace_redirects(self, doi: NormalizedDoi) -> RedirectTrace:
        if self._replays(doi, "redirect_chain"):
            self._log_request("redirect", doi)
            return self.fixtures.redirect_trace(doi, self.max_redirects)
        cached = self._cached("redirect", doi)
        if cached is not None:
            return RedirectTrace.from_dict(cached)
        trace = await self.proxy_api.trace_redirects(doi)
        if not any(hop.status == 0 for hop in trace.hops):
            self._store("redirect", doi, trace.to_dict())
        return trace

    async def fetch_metadata(self, doi: NormalizedDoi) -> MetadataResult:
        if self._replays(doi, "metadata_response"):
            self._log_request("metadata", doi)
            return self.fixtures.metadata_result(doi)
        cached = self._cached("metadata", doi)
        if cached is not None:
            return MetadataResult.from_dict(cached)
        result = await self.crossref_api.fetch_metadata(doi)
        if result.outcome != MetadataOutcome.OTHER_ERROR:
            self._store("metadata", doi, result.to_dict())
        return result

    async def _handle_url(self, doi: NormalizedDoi) -> Optional[str]:
        if self.fixtures is not None and (self.offline or self.fixtures.has(doi, "handle_response")):
            if self.fixtures.has(doi, "handle_response"):
                self._log_request("handle", doi)
            return self.fixtures.handle_url(doi)
        cached = self._cached("handle", doi)
        if cached is not None:
            return cached.get("url")
        url = await self.proxy_api.get_handle_url(doi)
        self._store("handle", doi, {"url": url})
        return url

    async def find_primary(self, alias: NormalizedDoi,
                           trace: Optional[RedirectTrace] = None) -> Tuple[Optional[NormalizedDoi], Optional[PrimarySource]]:
        """Return (primary, source); the first source that names a different DOI wins."""
        for hop in (trace.hops if trace else ()):
            target = doi_from_proxy_link(hop.location)
            if target is not None and target != alias:
                return target, PrimarySource.REDIRECT

        target = doi_from_proxy_link(await self._handle_url(alias))
        if target is not None and target != alias:
            return target, PrimarySource.HANDLE

        target = self.alias_map.get(alias.full)
        if target is None and self.fixtures is not None:
            target = self.fixtures.alias_of(alias)
        if target is not None and target != alias:
            return target, PrimarySource.CONFLICT_REPORT
        return None, None

    async def resolve_primary(self, alias: NormalizedDoi,
                              trace: Optional[RedirectTrace] = None) -> Optional[NormalizedDoi]:
        primary, _ = await self.find_primary(alias, trace)
        return primary

    async def gather_evidence(self, doi: NormalizedDoi) -> ResolutionEvidence:
        ra = await self.lookup_ra(doi)
        if ra.outcome != RaOutcome.CROSSREF:
            return ResolutionEvidence(doi=doi, ra=ra, annotation=self.annotation)

        trace = await self.trace_redirects(doi)
        if not trace.has_redirect or trace.reaches_deleted_content:
            return ResolutionEvidence(doi=doi, ra=ra, redirect=trace, annotation=self.annotation)

        metadata = await self.fetch_metadata(doi)
        primary = source = primary_metadata = None
        if metadata.outcome == MetadataOutcome.RESOURCE_NOT_FOUND:
            primary, source = await self.find_primary(doi, trace)
            if primary is not None:
                primary_metadata = await self.fetch_metadata(primary)
            else:
                logger.debug("[Resolver] %s: no primary found", doi)

        return ResolutionEvidence(
            doi=doi,
            ra=ra,
            redirect=trace,
            metadata=metadata,
            primary=primary,
            primary_source=source,
            primary_metadata=primary_metadata,
            annotation=self.annotation,
        )

    async def gather_all(self, dois: Iterable[NormalizedDoi], show_progress: bool = True) -> List[ResolutionEvidence]:
        """Gather evidence for many DOIs concurrently; results keep the input order."""
        dois = list(dois)
        semaphore = asyncio.Semaphore(self.concurrency)
        progress = tqdm(total=len(dois), desc="Resolving", unit="doi", disable=not show_progress)

        async def _one(doi: NormalizedDoi) -> ResolutionEvidence:
            async with semaphore:
                evidence = await self.gather_evidence(doi)
            progress.update(1)
            return evidence

        try:
            results = await asyncio.gather(*(_one(doi) for doi in dois))
        finally:
            progress.close()
        if self.cache is not None:
            logger.info("[Cache] %d hits, %d misses", self.cache.hits, self.cache.misses)
        return list(results)
