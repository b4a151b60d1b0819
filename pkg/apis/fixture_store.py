"""
Offline evidence replay.

A fixture store is a directory of JSON-lines files. Each line records what the
three services answered for one DOI:

    {"doi": "10.14359/15303",
     "ra_response": [{"DOI": "10.14359/15303", "RA": "Crossref"}],
     "redirect_chain": [{"status": 302, "location": "https://..."}, {"status": 200}],
     "metadata_response": {"status_code": 404, "body": "Resource not found."},
     "alias_of": "10.14359/15306"}

Optional members: alias_of, handle_response, fetched_at. A service that could
not be reached is recorded as {"transport_error": "..."}.
"""

import glob
import json
import logging
import os
from typing import Any, Dict, Optional

from apis.crossref_api import parse_metadata_response
from apis.doi_proxy_api import parse_handle_response, trace_from_chain
from apis.which_ra_api import parse_ra_response
from config import MAX_REDIRECTS
from model.doi import NormalizedDoi, normalize_doi
from model.errors import FixtureMiss, InputError, MalformedDoi
from model.evidence import MetadataResult, RaOutcome, RaResult, RedirectTrace

logger = logging.getLogger(__name__)


class FixtureStore:
    def __init__(self, directory: str):
        if not os.path.isdir(directory):
            raise InputError(f"Fixture directory not found: {directory}")
        self.directory = directory
        self._entries: Dict[str, Dict[str, Any]] = {}
        self._load()

    def _load(self):
        paths = sorted(glob.glob(os.path.join(self.directory, "*.jsonl")))
        if not paths:
            raise InputError(f"No *.jsonl fixture files in {self.directory}")
        for path in paths:
            with open(path, "r", encoding="utf-8") as f:
                for line_no, line in enumerate(f, start=1):
                    if not line.strip():
                        continue
                    try:
                        entry = json.loads(line)
                        doi = normalize_doi(entry["doi"])
                    except (ValueError, KeyError, TypeError, MalformedDoi) as e:
                        raise InputError(f"{path}:{line_no}: bad fixture line: {e}") from e
                    if doi.full in self._entries:
                        logger.warning("[Fixtures] %s:%d: duplicate entry for %s, keeping the later one",
                                       path, line_no, doi)
                    self._entries[doi.full] = entry
        logger.info("[Fixtures] Loaded %d entries from %d files in %s",
                    len(self._entries), len(paths), self.directory)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, doi: NormalizedDoi) -> bool:
        return doi.full in self._entries

    def _require(self, doi: NormalizedDoi, kind: str) -> Any:
        entry = self._entries.get(doi.full)
        if entry is None or kind not in entry:
            raise FixtureMiss(doi.full, kind)
        return entry[kind]

    def has(self, doi: NormalizedDoi, kind: str) -> bool:
        return kind in self._entries.get(doi.full, {})

    def ra_result(self, doi: NormalizedDoi) -> RaResult:
        body = self._require(doi, "ra_response")
        fetched_at = self._entries[doi.full].get("fetched_at")
        if isinstance(body, dict) and "transport_error" in body:
            return RaResult(RaOutcome.INDETERMINATE, fetched_at=fetched_at,
                            detail=f"transport: {body['transport_error']}")
        return parse_ra_response(doi, body, fetched_at=fetched_at)

    def redirect_trace(self, doi: NormalizedDoi, max_redirects: int = MAX_REDIRECTS) -> RedirectTrace:
        chain = self._require(doi, "redirect_chain")
        method = self._entries[doi.full].get("method_used", "HEAD")
        return trace_from_chain(chain, max_redirects=max_redirects, method_used=method)

    def metadata_result(self, doi: NormalizedDoi) -> MetadataResult:
        response = self._require(doi, "metadata_response")
        if "transport_error" in response:
            return MetadataResult.other_error(0)
        return parse_metadata_response(int(response.get("status_code", 0)), response.get("body"))

    def handle_url(self, doi: NormalizedDoi) -> Optional[str]:
        entry = self._entries.get(doi.full, {})
        if "handle_response" not in entry:
            return None
        return parse_handle_response(entry["handle_response"])

    def alias_of(self, doi: NormalizedDoi) -> Optional[NormalizedDoi]:
        target = self._entries.get(doi.full, {}).get("alias_of")
        if not target:
            return None
        try:
            return normalize_doi(target)
        except MalformedDoi as e:
            logger.warning("[Fixtures] %s: ignoring alias_of: %s", doi, e)
            return None
