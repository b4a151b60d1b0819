"""Per-DOI evidence records gathered from the RA lookup, the DOI proxy and the metadata API."""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from config import DELETED_DOI_URI
from model.doi import NormalizedDoi

# Prefix match on the deleted-content landing URI; trailing segments and queries are tolerated.
DELETED_CONTENT_PATTERN = re.compile("^" + re.escape(DELETED_DOI_URI.rstrip("/")).replace("https", "https?") + r"(/|$|\?)")


def is_deleted_content_uri(uri: Optional[str]) -> bool:
    return bool(uri) and DELETED_CONTENT_PATTERN.match(uri) is not None


class RaOutcome(str, Enum):
    CROSSREF = "Crossref"
    OTHER_RA = "OtherRa"
    DOES_NOT_EXIST = "DoesNotExist"
    INDETERMINATE = "Indeterminate"


class MetadataOutcome(str, Enum):
    FOUND = "Found"
    RESOURCE_NOT_FOUND = "ResourceNotFound"
    OTHER_ERROR = "OtherError"


class PrimarySource(str, Enum):
    REDIRECT = "redirect"
    HANDLE = "handle"
    CONFLICT_REPORT = "conflict_report"


@dataclass(frozen=True)
class RaResult:
    outcome: RaOutcome
    ra_name: Optional[str] = None
    fetched_at: Optional[str] = None
    detail: Optional[str] = None

    def __post_init__(self):
        if self.outcome == RaOutcome.OTHER_RA and not self.ra_name:
            raise ValueError("OtherRa result needs a registration agency name")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "ra_name": self.ra_name,
            "fetched_at": self.fetched_at,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RaResult":
        return cls(
            outcome=RaOutcome(data["outcome"]),
            ra_name=data.get("ra_name"),
            fetched_at=data.get("fetched_at"),
            detail=data.get("detail"),
        )


@dataclass(frozen=True)
class RedirectHop:
    """One response in a redirect chain. Status 0 marks a transport failure."""

    status: int
    location: Optional[str] = None
    error: Optional[str] = None

    def __post_init__(self):
        if self.is_redirect and not self.location:
            raise ValueError(f"Redirect hop with status {self.status} has no location")

    @property
    def is_redirect(self) -> bool:
        return 300 <= self.status < 400

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"status": self.status, "location": self.location}
        if self.error:
            data["error"] = self.error
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RedirectHop":
        return cls(status=int(data["status"]), location=data.get("location"), error=data.get("error"))


@dataclass(frozen=True)
class RedirectTrace:
    hops: Tuple[RedirectHop, ...] = ()
    final_uri: Optional[str] = None
    method_used: str = "HEAD"
    # Set when the chain stopped on a transport failure or hit the hop limit.
    incomplete: bool = False

    @property
    def has_redirect(self) -> bool:
        return any(hop.is_redirect for hop in self.hops)

    @property
    def reaches_deleted_content(self) -> bool:
        return is_deleted_content_uri(self.final_uri)

    @property
    def failed_before_first_response(self) -> bool:
        return len(self.hops) == 1 and self.hops[0].status == 0

    @classmethod
    def from_hops(cls, hops, method_used: str = "HEAD", incomplete: bool = False) -> "RedirectTrace":
        """Build a trace; final_uri is the last location reached through a redirect."""
        hops = tuple(hops)
        final_uri = None
        for hop in hops:
            if hop.is_redirect:
                final_uri = hop.location
        return cls(hops=hops, final_uri=final_uri, method_used=method_used, incomplete=incomplete)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "hops": [hop.to_dict() for hop in self.hops],
            "final_uri": self.final_uri,
            "method_used": self.method_used,
            "incomplete": self.incomplete,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RedirectTrace":
        return cls(
            hops=tuple(RedirectHop.from_dict(h) for h in data.get("hops", [])),
            final_uri=data.get("final_uri"),
            method_used=data.get("method_used", "HEAD"),
            incomplete=bool(data.get("incomplete", False)),
        )


@dataclass(frozen=True)
class MetadataRecord:
    type: str = ""
    title: str = ""
    container_title: str = ""
    volume: str = ""
    issue: str = ""
    page: str = ""
    primary_of_alias: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.type,
            "title": self.title,
            "container_title": self.container_title,
            "volume": self.volume,
            "issue": self.issue,
            "page": self.page,
            "primary_of_alias": self.primary_of_alias,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MetadataRecord":
        return cls(**{k: data.get(k, "") for k in ("type", "title", "container_title", "volume", "issue", "page")},
                   primary_of_alias=data.get("primary_of_alias"))


@dataclass(frozen=True)
class MetadataResult:
    outcome: MetadataOutcome
    record: Optional[MetadataRecord] = None
    code: Optional[int] = None

    def __post_init__(self):
        if (self.record is not None) != (self.outcome == MetadataOutcome.FOUND):
            raise ValueError("Metadata record is present only for Found outcomes")

    @classmethod
    def found(cls, record: MetadataRecord) -> "MetadataResult":
        return cls(MetadataOutcome.FOUND, record=record, code=200)

    @classmethod
    def not_found(cls) -> "MetadataResult":
        return cls(MetadataOutcome.RESOURCE_NOT_FOUND, code=404)

    @classmethod
    def other_error(cls, code: int) -> "MetadataResult":
        return cls(MetadataOutcome.OTHER_ERROR, code=code)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "record": self.record.to_dict() if self.record else None,
            "code": self.code,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MetadataResult":
        record = data.get("record")
        return cls(
            outcome=MetadataOutcome(data["outcome"]),
            record=MetadataRecord.from_dict(record) if record else None,
            code=data.get("code"),
        )


@dataclass(frozen=True)
class ResolutionEvidence:
    doi: NormalizedDoi
    ra: RaResult
    redirect: Optional[RedirectTrace] = None
    metadata: Optional[MetadataResult] = None
    primary: Optional[NormalizedDoi] = None
    primary_source: Optional[PrimarySource] = None
    primary_metadata: Optional[MetadataResult] = None
    annotation: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.ra.outcome != RaOutcome.CROSSREF and (self.redirect is not None or self.metadata is not None):
            raise ValueError(f"{self.doi}: redirect/metadata evidence exists only for Crossref DOIs")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "doi": self.doi.full,
            "ra": self.ra.to_dict(),
            "redirect": self.redirect.to_dict() if self.redirect else None,
            "metadata": self.metadata.to_dict() if self.metadata else None,
            "primary": self.primary.full if self.primary else None,
            "primary_source": self.primary_source.value if self.primary_source else None,
            "primary_metadata": self.primary_metadata.to_dict() if self.primary_metadata else None,
            "annotation": self.annotation,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ResolutionEvidence":
        return cls(
            doi=NormalizedDoi.from_normalized(data["doi"]),
            ra=RaResult.from_dict(data["ra"]),
            redirect=RedirectTrace.from_dict(data["redirect"]) if data.get("redirect") else None,
            metadata=MetadataResult.from_dict(data["metadata"]) if data.get("metadata") else None,
            primary=NormalizedDoi.from_normalized(data["primary"]) if data.get("primary") else None,
            primary_source=PrimarySource(data["primary_source"]) if data.get("primary_source") else None,
            primary_metadata=(MetadataResult.from_dict(data["primary_metadata"])
                              if data.get("primary_metadata") else None),
            annotation=data.get("annotation"),
        )
