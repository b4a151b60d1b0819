"""
Deletion groups of the DOIs that disappeared between two snapshots.

The decision tree runs on already gathered evidence:

    RA lookup      DoesNotExist -> NonExisting, other RA -> ExcludedNonCrossref
    redirects      deleted-content page -> Defunct, no redirect -> NoRedirect
    metadata       "delete" in title/container title (own or primary) -> DeletedDescription
                   Resource not found -> Alias
                   anything else -> Other

Transport-indeterminate evidence raises Unclassifiable; those DOIs are kept
apart from every count.
"""

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Tuple

from model.doi import NormalizedDoi
from model.errors import InputError, Unclassifiable
from model.evidence import MetadataOutcome, RaOutcome, ResolutionEvidence
from utils.core import atomic_write_text

logger = logging.getLogger(__name__)

DELETE_WORD = "delete"

FLAG_ANOMALOUS_METADATA = "anomalous_metadata"
FLAG_METADATA_ERROR = "metadata_error"
FLAG_TRACE_INCOMPLETE = "trace_incomplete"
FLAG_PRIMARY_UNRESOLVED = "primary_unresolved"


class DeletionClass(str, Enum):
    NON_EXISTING = "NonExisting"
    DEFUNCT = "Defunct"
    NO_REDIRECT = "NoRedirect"
    ALIAS = "Alias"
    DELETED_DESCRIPTION = "DeletedDescription"
    OTHER = "Other"
    EXCLUDED_NON_CROSSREF = "ExcludedNonCrossref"

    @property
    def is_deleted(self) -> bool:
        return self is not DeletionClass.EXCLUDED_NON_CROSSREF

    @property
    def label(self) -> str:
        return CLASS_LABELS[self]


CLASS_LABELS = {
    DeletionClass.NON_EXISTING: "Non-existing DOIs",
    DeletionClass.DEFUNCT: "Defunct DOIs",
    DeletionClass.NO_REDIRECT: "DOIs without redirects",
    DeletionClass.ALIAS: "Alias DOIs",
    DeletionClass.DELETED_DESCRIPTION: "DOIs with deleted description on metadata",
    DeletionClass.OTHER: "Other DOIs",
    DeletionClass.EXCLUDED_NON_CROSSREF: "Non-Crossref DOIs (not deleted)",
}

DELETED_CLASSES = tuple(c for c in DeletionClass if c.is_deleted)


@dataclass(frozen=True)
class Assignment:
    doi: NormalizedDoi
    deletion_class: DeletionClass
    evidence: ResolutionEvidence
    flags: Tuple[str, ...] = ()
    matched_field: Optional[str] = None
    matched_value: Optional[str] = None

    def summary(self) -> Dict[str, Any]:
        return evidence_summary(self.evidence)


@dataclass(frozen=True)
class ReviewItem:
    """A DeletedDescription DOI waiting for a person to confirm the landing page."""

    doi: str
    matched_field: str
    matched_value: str
    landing_uri: Optional[str]


def evidence_summary(ev: ResolutionEvidence) -> Dict[str, Any]:
    summary: Dict[str, Any] = {"ra": ev.ra.outcome.value}
    if ev.ra.ra_name:
        summary["ra_name"] = ev.ra.ra_name
    if ev.redirect is not None:
        summary["hops"] = len(ev.redirect.hops)
        summary["final_uri"] = ev.redirect.final_uri
        summary["method"] = ev.redirect.method_used
    if ev.metadata is not None:
        summary["metadata"] = ev.metadata.outcome.value
        summary["metadata_code"] = ev.metadata.code
    if ev.primary is not None:
        summary["primary"] = ev.primary.full
        summary["primary_source"] = ev.primary_source.value if ev.primary_source else None
    return summary


def _delete_word_match(ev: ResolutionEvidence) -> Optional[Tuple[str, str]]:
    """Return (field, value) of the first title or container title mentioning deletion."""
    sources = (("", ev.metadata), ("primary.", ev.primary_metadata))
    for prefix, result in sources:
        if result is None or result.record is None:
            continue
        for name, value in (("title", result.record.title), ("container-title", result.record.container_title)):
            if value and DELETE_WORD in value.lower():
                return prefix + name, value
    return None


def assess(ev: ResolutionEvidence) -> Assignment:
    """Place one DOI in its deletion group, with flags for anything unexpected."""
    doi = ev.doi
    if ev.ra.outcome == RaOutcome.INDETERMINATE:
        raise Unclassifiable(doi.full, f"RA lookup indeterminate ({ev.ra.detail or 'no detail'})")
    if ev.ra.outcome == RaOutcome.DOES_NOT_EXIST:
        return Assignment(doi, DeletionClass.NON_EXISTING, ev)
    if ev.ra.outcome == RaOutcome.OTHER_RA:
        return Assignment(doi, DeletionClass.EXCLUDED_NON_CROSSREF, ev)

    trace = ev.redirect
    if trace is None:
        raise Unclassifiable(doi.full, "no redirect evidence")
    if trace.failed_before_first_response:
        raise Unclassifiable(doi.full, f"DOI link unreachable ({trace.hops[0].error or 'transport failure'})")

    flags: List[str] = []
    if trace.incomplete:
        flags.append(FLAG_TRACE_INCOMPLETE)
    if trace.reaches_deleted_content:
        return Assignment(doi, DeletionClass.DEFUNCT, ev, tuple(flags))
    if not trace.has_redirect:
        return Assignment(doi, DeletionClass.NO_REDIRECT, ev, tuple(flags))

    if ev.metadata is None:
        raise Unclassifiable(doi.full, "no metadata evidence")

    match = _delete_word_match(ev)
    if match is not None:
        return Assignment(doi, DeletionClass.DELETED_DESCRIPTION, ev, tuple(flags),
                          matched_field=match[0], matched_value=match[1])

    if ev.metadata.outcome == MetadataOutcome.RESOURCE_NOT_FOUND:
        if ev.primary is None:
            flags.append(FLAG_PRIMARY_UNRESOLVED)
        return Assignment(doi, DeletionClass.ALIAS, ev, tuple(flags))

    if ev.metadata.outcome == MetadataOutcome.FOUND:
        flags.append(FLAG_ANOMALOUS_METADATA)
    else:
        flags.append(FLAG_METADATA_ERROR)
    return Assignment(doi, DeletionClass.OTHER, ev, tuple(flags))


def classify(doi: NormalizedDoi, ev: ResolutionEvidence) -> DeletionClass:
    if ev.doi != doi:
        raise ValueError(f"Evidence for {ev.doi} passed for {doi}")
    return assess(ev).deletion_class


@dataclass
class ClassifiedSet:
    assignments: Dict[str, Assignment] = field(default_factory=dict)
    unclassifiable: Dict[str, Tuple[str, ResolutionEvidence]] = field(default_factory=dict)

    def add(self, ev: ResolutionEvidence):
        key = ev.doi.full
        if key in self.assignments or key in self.unclassifiable:
            raise ValueError(f"{key} classified twice")
        try:
            self.assignments[key] = assess(ev)
        except Unclassifiable as e:
            logger.debug("[Classifier] %s", e)
            self.unclassifiable[key] = (e.reason, ev)

    @property
    def candidate_count(self) -> int:
        return len(self.assignments) + len(self.unclassifiable)

    @property
    def counts(self) -> Dict[DeletionClass, int]:
        counter = Counter(a.deletion_class for a in self.assignments.values())
        return {c: counter.get(c, 0) for c in DeletionClass}

    @property
    def deleted_total(self) -> int:
        return sum(n for c, n in self.counts.items() if c.is_deleted)

    def of_class(self, *classes: DeletionClass) -> List[Assignment]:
        return [a for _, a in sorted(self.assignments.items()) if a.deletion_class in classes]

    def deleted(self) -> List[Assignment]:
        return self.of_class(*DELETED_CLASSES)

    @property
    def review_queue(self) -> List[ReviewItem]:
        return [
            ReviewItem(a.doi.full, a.matched_field, a.matched_value, a.evidence.redirect.final_uri)
            for a in self.of_class(DeletionClass.DELETED_DESCRIPTION)
        ]

    def flagged(self, flag: str) -> List[Assignment]:
        return [a for _, a in sorted(self.assignments.items()) if flag in a.flags]

    def evidence_by_doi(self) -> Dict[str, ResolutionEvidence]:
        evidence = {k: a.evidence for k, a in self.assignments.items()}
        evidence.update({k: ev for k, (_, ev) in self.unclassifiable.items()})
        return evidence

    def check_partition(self, candidate_count: int):
        deleted = self.deleted_total
        excluded = self.counts[DeletionClass.EXCLUDED_NON_CROSSREF]
        if deleted + excluded + len(self.unclassifiable) != candidate_count:
            raise ValueError(
                f"Partition mismatch: {deleted} deleted + {excluded} excluded + "
                f"{len(self.unclassifiable)} unclassifiable != {candidate_count} candidates"
            )


def classify_evidence(evidence: Iterable[ResolutionEvidence]) -> ClassifiedSet:
    classified = ClassifiedSet()
    for ev in evidence:
        classified.add(ev)
    logger.info("[Classifier] %d candidates: %d deleted, %d excluded, %d unclassifiable",
                classified.candidate_count, classified.deleted_total,
                classified.counts[DeletionClass.EXCLUDED_NON_CROSSREF], len(classified.unclassifiable))
    return classified


async def run_classification(candidates: Iterable[str], resolver, show_progress: bool = True) -> ClassifiedSet:
    """Gather evidence for every candidate (normalized DOI strings) and classify it."""
    dois = [NormalizedDoi.from_normalized(c) for c in candidates]
    evidence = await resolver.gather_all(dois, show_progress=show_progress)
    classified = classify_evidence(evidence)
    classified.check_partition(len(dois))
    return classified


def write_classification(classified: ClassifiedSet, path: str):
    """One JSON object per candidate, sorted by DOI: {doi, class, flags, evidence_summary, evidence}."""
    lines = []
    for key in sorted(set(classified.assignments) | set(classified.unclassifiable)):
        if key in classified.assignments:
            a = classified.assignments[key]
            record = {"doi": key, "class": a.deletion_class.value, "flags": list(a.flags),
                      "evidence_summary": a.summary(), "evidence": a.evidence.to_dict()}
            if a.matched_field:
                record["matched_field"] = a.matched_field
                record["matched_value"] = a.matched_value
        else:
            reason, ev = classified.unclassifiable[key]
            record = {"doi": key, "class": "Unclassifiable", "reason": reason,
                      "evidence_summary": evidence_summary(ev), "evidence": ev.to_dict()}
        lines.append(json.dumps(record, sort_keys=True, ensure_ascii=False))
    atomic_write_text(path, "".join(line + "\n" for line in lines))


def read_evidence(path: str) -> List[ResolutionEvidence]:
    """Read evidence back from a classification or evidence JSON-lines file."""
    evidence = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                data = json.loads(line)
                evidence.append(ResolutionEvidence.from_dict(data.get("evidence", data)))
    except (OSError, ValueError, KeyError) as e:
        raise InputError(f"Cannot read evidence from {path}: {e}") from e
    return evidence


def write_evidence(evidence: Iterable[ResolutionEvidence], path: str):
    ordered = sorted(evidence, key=lambda ev: ev.doi.full)
    lines = [json.dumps(ev.to_dict(), sort_keys=True, ensure_ascii=False) for ev in ordered]
    atomic_write_text(path, "".join(line + "\n" for line in lines))


def load_classification(path: str) -> ClassifiedSet:
    """Rebuild a ClassifiedSet from classification.jsonl; classes are recomputed from the evidence."""
    return classify_evidence(read_evidence(path))
