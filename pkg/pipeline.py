"""
Stage orchestration: ingest -> diff -> resolve -> classify -> analyze -> report.

Each stage checkpoints its outputs under <workdir>/checkpoints. A stage's
checkpoint hash covers the settings it and every earlier stage depend on, so
changing, say, the report formats reruns only the report stage.
"""

import asyncio
import logging
import os
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

import config
from apis.fixture_store import FixtureStore
from apis.resolver import Resolver, load_alias_map
from classification.classifier import (
    ClassifiedSet, classify_evidence, read_evidence, run_classification, write_classification, write_evidence,
)
from model.errors import ConfigError, InputError, StageFailure
from persistence.checkpoints import CheckpointStore
from persistence.response_cache import ResponseCache
from reporting.bundle import ReportBundle, build_report
from reporting.emitters import emit_manifest, emit_report, emit_review_queue
from snapshots.diff import DiffSets, diff_snapshots
from snapshots.ingest import SnapshotHandle, ingest_snapshot, safe_label
from utils.core import stable_hash

logger = logging.getLogger(__name__)

STAGES = ("ingest", "diff", "resolve", "classify", "analyze", "report")

# Settings each stage adds to the hash of the stages before it.
STAGE_FIELDS = {
    "ingest": ("snapshot_a", "snapshot_b", "label_a", "label_b"),
    "diff": (),
    "resolve": ("fixtures", "offline", "alias_map", "max_redirects", "max_retries", "initial_retry_delay",
                "timeout", "mailto", "ra_base", "crossref_base", "proxy_base", "annotation"),
    "classify": (),
    "analyze": ("top_k",),
    "report": ("formats", "out_dir"),
}


def _fingerprint(path: Optional[str]) -> Any:
    """Size and mtime of a file, or of every file in a directory."""
    if not path or not os.path.exists(path):
        return None
    if os.path.isdir(path):
        return sorted((name, _fingerprint(os.path.join(path, name))) for name in os.listdir(path))
    stat = os.stat(path)
    return [stat.st_size, stat.st_mtime_ns]


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    snapshot_a: Optional[str] = None
    snapshot_b: Optional[str] = None
    label_a: str = "A"
    label_b: str = "B"
    out_dir: str = "doi-audit-out"
    workdir: Optional[str] = None
    cache_dir: str = config.DOI_AUDIT_CACHE
    fixtures: Optional[str] = None
    offline: bool = False
    alias_map: Optional[str] = None
    rate_limit: float = config.RATE_LIMIT_PER_HOST
    concurrency: int = config.CONCURRENCY
    max_retries: int = config.MAX_RETRIES
    initial_retry_delay: float = config.INITIAL_RETRY_DELAY
    timeout: int = config.REQUEST_TIMEOUT
    max_redirects: int = config.MAX_REDIRECTS
    mailto: str = config.DOI_AUDIT_MAILTO
    ra_base: str = config.DOI_RA_BASE
    crossref_base: str = config.CROSSREF_API_BASE
    proxy_base: str = config.DOI_PROXY_BASE
    formats: Tuple[str, ...] = ("csv",)
    top_k: int = config.TOP_K
    chunk_bytes: int = config.CHUNK_BYTES
    sort_workers: int = config.SORT_WORKERS
    annotation: Optional[str] = None
    show_progress: bool = True

    @field_validator("rate_limit")
    @classmethod
    def _positive_rate(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("rate limit must be greater than 0")
        return value

    @field_validator("concurrency", "top_k", "max_retries", "sort_workers", "chunk_bytes", "max_redirects")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be at least 1")
        return value

    @field_validator("formats")
    @classmethod
    def _known_formats(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        unknown = [f for f in value if f not in config.REPORT_FORMATS]
        if unknown or not value:
            raise ValueError(f"formats must be among {', '.join(config.REPORT_FORMATS)}")
        return tuple(dict.fromkeys(value))

    @model_validator(mode="after")
    def _offline_needs_fixtures(self) -> "RunConfig":
        if self.offline and not self.fixtures:
            raise ValueError("--offline requires --fixtures")
        return self

    @property
    def work_path(self) -> str:
        return self.workdir or os.path.join(self.out_dir, "work")

    def stage_hash(self, stage: str) -> str:
        settings: Dict[str, Any] = {}
        for name in STAGES[:STAGES.index(stage) + 1]:
            for key in STAGE_FIELDS[name]:
                settings[key] = getattr(self, key)
        settings["inputs"] = {
            "snapshot_a": _fingerprint(self.snapshot_a),
            "snapshot_b": _fingerprint(self.snapshot_b),
        }
        if STAGES.index(stage) >= STAGES.index("resolve"):
            settings["inputs"]["fixtures"] = _fingerprint(self.fixtures)
            settings["inputs"]["alias_map"] = _fingerprint(self.alias_map)
        return stable_hash([config.TOOL_VERSION, stage, settings])

    def config_hash(self) -> str:
        return self.stage_hash(STAGES[-1])


@contextmanager
def _stage(name: str):
    """Log the stage and wrap unexpected failures in StageFailure."""
    logger.info("[Pipeline] Stage '%s'", name)
    try:
        yield
    except (ConfigError, InputError, StageFailure):
        raise
    except Exception as e:
        raise StageFailure(name, e) from e


def stage_ingest(cfg: RunConfig, checkpoints: CheckpointStore) -> Tuple[SnapshotHandle, SnapshotHandle]:
    if not cfg.snapshot_a or not cfg.snapshot_b:
        raise ConfigError("Both --snapshot-a and --snapshot-b are required")
    if safe_label(cfg.label_a) == safe_label(cfg.label_b):
        raise ConfigError("Snapshot labels must differ (after replacing characters unsafe in file names)")
    config_hash = cfg.stage_hash("ingest")
    done = checkpoints.load("ingest", config_hash)
    if done:
        logger.info("[Pipeline] Reusing ingested snapshots")
        return SnapshotHandle.load(done["handle_a"]), SnapshotHandle.load(done["handle_b"])

    with _stage("ingest"):
        handles = []
        for source, label in ((cfg.snapshot_a, cfg.label_a), (cfg.snapshot_b, cfg.label_b)):
            handles.append(ingest_snapshot(source, label, cfg.work_path, chunk_bytes=cfg.chunk_bytes,
                                           sort_workers=cfg.sort_workers, show_progress=cfg.show_progress))
        a, b = handles
    paths = [os.path.join(cfg.work_path, "snapshots", f"{safe_label(h.label)}.handle.json") for h in handles]
    checkpoints.save("ingest", config_hash, {
        "handle_a": paths[0],
        "handle_b": paths[1],
        "files": paths + [a.sorted_store, b.sorted_store, a.prefix_counts_path, b.prefix_counts_path],
    })
    return a, b


def stage_diff(cfg: RunConfig, checkpoints: CheckpointStore, a: SnapshotHandle, b: SnapshotHandle) -> DiffSets:
    config_hash = cfg.stage_hash("diff")
    summary_path = os.path.join(cfg.work_path, "diff", "diff.json")
    done = checkpoints.load("diff", config_hash)
    if done:
        logger.info("[Pipeline] Reusing snapshot diff")
        return DiffSets.load(summary_path)

    with _stage("diff"):
        diff = diff_snapshots(a, b, os.path.join(cfg.work_path, "diff"))
    checkpoints.save("diff", config_hash, {"files": [summary_path, diff.only_in_a.path, diff.only_in_b.path]})
    return diff


def build_resolver(cfg: RunConfig) -> Resolver:
    fixtures = FixtureStore(cfg.fixtures) if cfg.fixtures else None
    alias_map = load_alias_map(cfg.alias_map) if cfg.alias_map else None
    cache = None if cfg.offline else ResponseCache(cfg.cache_dir)
    return Resolver(
        fixtures=fixtures,
        offline=cfg.offline,
        cache=cache,
        alias_map=alias_map,
        rate_limit=cfg.rate_limit,
        concurrency=cfg.concurrency,
        max_redirects=cfg.max_redirects,
        max_retries=cfg.max_retries,
        initial_delay=cfg.initial_retry_delay,
        timeout=cfg.timeout,
        mailto=cfg.mailto,
        ra_base=cfg.ra_base,
        crossref_base=cfg.crossref_base,
        proxy_base=cfg.proxy_base,
        annotation=cfg.annotation,
    )


def stage_resolve(cfg: RunConfig, checkpoints: CheckpointStore, diff: DiffSets) -> str:
    """Gather evidence for every deletion candidate; returns the evidence file path."""
    config_hash = cfg.stage_hash("resolve")
    evidence_path = os.path.join(cfg.work_path, "evidence.jsonl")
    if checkpoints.load("resolve", config_hash):
        logger.info("[Pipeline] Reusing gathered evidence")
        return evidence_path

    resolver = build_resolver(cfg)
    with _stage("resolve"):
        classified = asyncio.run(run_classification(diff.only_in_a, resolver, show_progress=cfg.show_progress))
        write_evidence(classified.evidence_by_doi().values(), evidence_path)
    logger.info("[Pipeline] %d requests or replays for %d candidates", len(resolver.request_log), diff.only_in_a.count)
    checkpoints.save("resolve", config_hash, {"files": [evidence_path]})
    return evidence_path


def stage_classify(cfg: RunConfig, checkpoints: CheckpointStore, diff: DiffSets, evidence_path: str) -> ClassifiedSet:
    config_hash = cfg.stage_hash("classify")
    output = os.path.join(cfg.out_dir, "classification.jsonl")
    done = checkpoints.load("classify", config_hash) is not None

    with _stage("classify"):
        classified = classify_evidence(read_evidence(output if done else evidence_path))
        classified.check_partition(diff.only_in_a.count)
        if not done:
            write_classification(classified, output)
    if not done:
        checkpoints.save("classify", config_hash, {"files": [output]})
    return classified


def stage_analyze(cfg: RunConfig, checkpoints: CheckpointStore, diff: DiffSets, classified: ClassifiedSet,
                  baseline: SnapshotHandle) -> ReportBundle:
    config_hash = cfg.stage_hash("analyze")
    path = os.path.join(cfg.work_path, "analysis.json")
    if checkpoints.load("analyze", config_hash):
        logger.info("[Pipeline] Reusing analysis results")
        return ReportBundle.load(path)

    with _stage("analyze"):
        bundle = build_report(diff, classified, baseline, top_k=cfg.top_k)
        bundle.save(path)
    checkpoints.save("analyze", config_hash, {"files": [path]})
    return bundle


def stage_report(cfg: RunConfig, checkpoints: CheckpointStore, bundle: ReportBundle,
                 started_at: str) -> List[str]:
    config_hash = cfg.stage_hash("report")
    with _stage("report"):
        paths = []
        for fmt in cfg.formats:
            paths += emit_report(bundle, fmt, cfg.out_dir)
        if "csv" not in cfg.formats:
            paths.append(emit_review_queue(bundle, cfg.out_dir))
        bundle.manifest = {
            "tool": config.TOOL_NAME,
            "version": config.TOOL_VERSION,
            "config_hash": cfg.config_hash(),
            "started_at": started_at,
            "finished_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "labels": [cfg.label_a, cfg.label_b],
            "offline": cfg.offline,
            "formats": list(cfg.formats),
            "annotation": cfg.annotation,
            "outputs": sorted(os.path.relpath(p, cfg.out_dir) for p in paths),
        }
        paths.append(emit_manifest(bundle, cfg.out_dir))
    checkpoints.save("report", config_hash, {"files": paths})
    return paths


def run_pipeline(cfg: RunConfig, until: str = "report", force: Optional[str] = None) -> Optional[ReportBundle]:
    """
    Run every stage up to and including `until`, reusing checkpoints.

    force names a stage to rerun together with everything after it.
    Returns the ReportBundle once the analyze stage has run, else None.
    """
    if until not in STAGES or (force is not None and force not in STAGES):
        raise ConfigError(f"Unknown stage; expected one of {', '.join(STAGES)}")
    started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    os.makedirs(cfg.out_dir, exist_ok=True)
    checkpoints = CheckpointStore(cfg.work_path)
    if force is not None:
        checkpoints.invalidate(list(STAGES[STAGES.index(force):]))

    def beyond(stage: str) -> bool:
        return STAGES.index(until) < STAGES.index(stage)

    a, b = stage_ingest(cfg, checkpoints)
    if beyond("diff"):
        return None
    diff = stage_diff(cfg, checkpoints, a, b)
    if beyond("resolve"):
        return None
    evidence_path = stage_resolve(cfg, checkpoints, diff)
    if beyond("classify"):
        return None
    classified = stage_classify(cfg, checkpoints, diff, evidence_path)
    if beyond("analyze"):
        return None
    bundle = stage_analyze(cfg, checkpoints, diff, classified, a)
    if beyond("report"):
        return bundle
    stage_report(cfg, checkpoints, bundle, started_at)
    logger.info("[Pipeline] Done: %d deleted DOIs among %d candidates, reports in %s",
                classified.deleted_total, classified.candidate_count, cfg.out_dir)
    return bundle
