"""Identifier and evidence data model."""

from model.doi import DIAGNOSTICS, NormalizedDoi, RawDoi, normalize_doi, split_doi
from model.errors import (
    AuditError,
    ConfigError,
    FixtureMiss,
    IdenticalPair,
    InputError,
    OutputError,
    MalformedDoi,
    MissingBaseline,
    StageFailure,
    Unclassifiable,
)
from model.evidence import (
    DELETED_CONTENT_PATTERN,
    is_deleted_content_uri,
    MetadataOutcome,
    MetadataRecord,
    MetadataResult,
    PrimarySource,
    RaOutcome,
    RaResult,
    RedirectHop,
    RedirectTrace,
    ResolutionEvidence,
)

__all__ = [
    'DIAGNOSTICS',
    'NormalizedDoi',
    'RawDoi',
    'normalize_doi',
    'split_doi',
    'AuditError',
    'ConfigError',
    'FixtureMiss',
    'IdenticalPair',
    'InputError',
    'OutputError',
    'MalformedDoi',
    'MissingBaseline',
    'StageFailure',
    'Unclassifiable',
    'DELETED_CONTENT_PATTERN',
    'is_deleted_content_uri',
    'MetadataOutcome',
    'MetadataRecord',
    'MetadataResult',
    'PrimarySource',
    'RaOutcome',
    'RaResult',
    'RedirectHop',
    'RedirectTrace',
    'ResolutionEvidence',
]
