"""Deletion-group classification of candidate DOIs."""

from classification.classifier import (
    CLASS_LABELS,
    DELETED_CLASSES,
    Assignment,
    ClassifiedSet,
    DeletionClass,
    ReviewItem,
    assess,
    classify,
    classify_evidence,
    load_classification,
    read_evidence,
    run_classification,
    write_classification,
    write_evidence,
)

__all__ = [
    'CLASS_LABELS',
    'DELETED_CLASSES',
    'Assignment',
    'ClassifiedSet',
    'DeletionClass',
    'ReviewItem',
    'assess',
    'classify',
    'classify_evidence',
    'load_classification',
    'read_evidence',
    'run_classification',
    'write_classification',
    'write_evidence',
]
