"""Exception hierarchy for the deleted-DOI audit pipeline."""

from typing import Optional


class AuditError(Exception):
    """Base class for every error raised by the pipeline."""


class MalformedDoi(AuditError):
    def __init__(self, text: str, reason: str):
        super().__init__(f"Malformed DOI {text!r}: {reason}")
        self.text = text
        self.reason = reason


class ConfigError(AuditError):
    """Invalid run configuration (exit code 2)."""


class InputError(AuditError):
    """Unreadable or missing input files (exit code 3)."""


class OutputError(AuditError):
    """Report files could not be written."""


class FixtureMiss(AuditError):
    """Offline mode was asked for evidence the fixture store does not hold."""

    def __init__(self, doi: str, kind: str):
        super().__init__(f"No fixture entry for {doi} ({kind}) and network use is disabled")
        self.doi = doi
        self.kind = kind


class MissingBaseline(AuditError):
    def __init__(self, prefix: str):
        super().__init__(f"Prefix {prefix} has deleted DOIs but no baseline count in snapshot A")
        self.prefix = prefix


class IdenticalPair(AuditError):
    def __init__(self, doi: str):
        super().__init__(f"Alias and primary are the same DOI: {doi}")
        self.doi = doi


class Unclassifiable(AuditError):
    """Evidence is too incomplete (transport failures) to place a DOI in a group."""

    def __init__(self, doi: str, reason: str):
        super().__init__(f"{doi} is unclassifiable: {reason}")
        self.doi = doi
        self.reason = reason


class StageFailure(AuditError):
    def __init__(self, stage: str, cause: BaseException, doi: Optional[str] = None):
        super().__init__(f"Stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.doi = doi if doi is not None else getattr(cause, "doi", None)
