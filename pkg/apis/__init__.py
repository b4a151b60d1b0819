"""Clients for the RA lookup, the DOI proxy and the Crossref metadata API."""

from apis.crossref_api import CrossrefAPI, parse_metadata_response
from apis.doi_proxy_api import DoiProxyAPI, doi_from_proxy_link, parse_handle_response, trace_from_chain
from apis.fixture_store import FixtureStore
from apis.resolver import RequestLogEntry, Resolver, load_alias_map
from apis.which_ra_api import WhichRaAPI, parse_ra_response

__all__ = [
    'CrossrefAPI',
    'DoiProxyAPI',
    'FixtureStore',
    'RequestLogEntry',
    'Resolver',
    'WhichRaAPI',
    'doi_from_proxy_link',
    'load_alias_map',
    'parse_handle_response',
    'parse_metadata_response',
    'parse_ra_response',
    'trace_from_chain',
]
