import json
import os

import pytest

from analytics.suffixes import build_alias_pairs
from apis.fixture_store import FixtureStore
from apis.resolver import Resolver
from classification.classifier import run_classification
from model.doi import normalize_doi
from model.evidence import (
    MetadataRecord, MetadataResult, PrimarySource, RaOutcome, RaResult, RedirectHop, RedirectTrace,
    ResolutionEvidence,
)

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DEMO_DIR = os.path.join(ROOT, "fixtures", "demo")

LANDING = "https://publisher.example.org/landing"
DELETED = "https://www.crossref.org/_deleted-doi/"


@pytest.fixture
def demo_dir():
    return DEMO_DIR


@pytest.fixture
def demo_fixtures():
    return os.path.join(DEMO_DIR, "evidence")


def record(title="An article", type="journal-article", container_title="Journal of Examples", **extra):
    return MetadataRecord(type=type, title=title, container_title=container_title, **extra)


def build_evidence(doi, ra=RaOutcome.CROSSREF, ra_name=None, hops=None, incomplete=False,
                   metadata=None, primary=None, primary_source=None, primary_metadata=None):
    """Evidence for tests; hops are (status, location) pairs or (0, None, error) triples."""
    doi = normalize_doi(doi)
    if ra == RaOutcome.CROSSREF:
        ra_result = RaResult(ra, ra_name="Crossref")
    else:
        ra_result = RaResult(ra, ra_name=ra_name)
    trace = None
    if hops is not None:
        trace = RedirectTrace.from_hops([RedirectHop(*hop) for hop in hops], incomplete=incomplete)
    if primary is not None:
        primary = normalize_doi(primary)
        primary_source = primary_source or PrimarySource.CONFLICT_REPORT
    return ResolutionEvidence(doi=doi, ra=ra_result, redirect=trace, metadata=metadata,
                              primary=primary, primary_source=primary_source,
                              primary_metadata=primary_metadata)


def alias_evidence(doi, primary=None, primary_record=None):
    primary_metadata = MetadataResult.found(primary_record or record()) if primary else None
    return build_evidence(doi, hops=[(302, LANDING), (200, None)], metadata=MetadataResult.not_found(),
                          primary=primary, primary_metadata=primary_metadata)


@pytest.fixture
def make_evidence():
    return build_evidence


@pytest.fixture
def make_alias():
    return alias_evidence


@pytest.fixture
def make_record():
    return record


def demo_candidates():
    with open(os.path.join(DEMO_DIR, "evidence", "candidates.jsonl"), encoding="utf-8") as f:
        return sorted(normalize_doi(json.loads(line)["doi"]).full for line in f if line.strip())


@pytest.fixture
async def demo_classified(demo_fixtures):
    resolver = Resolver(fixtures=FixtureStore(demo_fixtures), offline=True)
    return await run_classification(demo_candidates(), resolver, show_progress=False)


@pytest.fixture
def demo_pairs(demo_classified):
    pairs, unpaired = build_alias_pairs(demo_classified)
    assert unpaired == 1
    return pairs
