"""
DOI identifier model and normalization rules.

Every comparison in the pipeline (snapshot diffing, alias pairing, prefix
counts) happens on NormalizedDoi values, never on raw dump text.
"""

import re
from collections import Counter
from dataclasses import dataclass
from typing import Tuple
from urllib.parse import unquote

from model.errors import MalformedDoi

# A line exactly as read from a dump (UTF-8 text).
RawDoi = str

# Counts of oddities seen while normalizing (e.g. residual escapes after the
# single decode). Ingest reports the delta per snapshot.
DIAGNOSTICS: Counter = Counter()

_RESOLVER_FORMS = re.compile(
    r"^(?:doi:|https?://(?:dx\.)?doi\.org/|https?://hdl\.handle\.net/)",
    re.IGNORECASE,
)
_PERCENT_TRIPLET = re.compile(r"%(?=[0-9A-Fa-f]{2})")
_CONTROL_CHARS = re.compile(r"[\x00-\x1f\x7f-\x9f]")


@dataclass(frozen=True, order=True)
class NormalizedDoi:
    """Canonical DOI: lowercase, unescaped once, split at the first slash."""

    full: str
    prefix: str
    suffix: str

    def __post_init__(self):
        if self.full != f"{self.prefix}/{self.suffix}":
            raise ValueError(f"Inconsistent DOI parts for {self.full!r}")

    def __str__(self) -> str:
        return self.full

    @classmethod
    def from_normalized(cls, full: str) -> "NormalizedDoi":
        """Rebuild a value from text that is already in normalized form
        (sorted stores, evidence files). Only the split is performed."""
        prefix, _, suffix = full.partition("/")
        return cls(full=full, prefix=prefix, suffix=suffix)


def _lower_per_char(text: str) -> str:
    if text.isascii():
        return text.lower()
    out = []
    for c in text:
        lowered = c.lower()
        if len(lowered) != 1:
            # e.g. U+0130 lowercases to "i" plus a combining dot; keep the base letter
            DIAGNOSTICS["expanding_lowercase"] += 1
            lowered = lowered[0]
        out.append(lowered)
    return "".join(out)


def normalize_doi(raw: RawDoi) -> NormalizedDoi:
    """
    Normalize a raw DOI string.

    Percent escapes are decoded exactly once. A literal '%' that still precedes
    two hex digits after decoding is re-escaped as '%25' so the result cannot be
    read as an escape again, which keeps the operation idempotent.

    Raises:
        MalformedDoi: if there is no '/', the prefix does not start with '10.',
            or the decoded text contains a control character
    """
    text = raw.strip()
    if not text:
        raise MalformedDoi(raw, "empty")

    text = _RESOLVER_FORMS.sub("", text, count=1)
    decoded = unquote(text)
    if _CONTROL_CHARS.search(decoded):
        raise MalformedDoi(raw, "control character in identifier")
    if _PERCENT_TRIPLET.search(decoded):
        DIAGNOSTICS["residual_percent_escape"] += 1
        decoded = _PERCENT_TRIPLET.sub("%25", decoded)

    full = _lower_per_char(decoded.strip())
    prefix, slash, suffix = full.partition("/")
    if not slash:
        raise MalformedDoi(raw, "no '/' separating prefix and suffix")
    if not prefix.startswith("10.") or len(prefix) == 3:
        raise MalformedDoi(raw, "prefix does not start with '10.'")
    if not suffix:
        raise MalformedDoi(raw, "empty suffix")
    return NormalizedDoi(full=full, prefix=prefix, suffix=suffix)


def split_doi(doi: NormalizedDoi) -> Tuple[str, str]:
    """Return (prefix, suffix); only the first slash splits."""
    return doi.prefix, doi.suffix
