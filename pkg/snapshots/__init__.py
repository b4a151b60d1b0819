"""Snapshot ingest and differencing."""

from snapshots.diff import DiffSets, DoiStream, diff_snapshots
from snapshots.ingest import SnapshotHandle, ingest_snapshot

__all__ = ['DiffSets', 'DoiStream', 'diff_snapshots', 'SnapshotHandle', 'ingest_snapshot']
