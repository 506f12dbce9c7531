"""Directory-per-job persistence with atomic status updates."""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .config import PipelineConfig
from .pipeline import run_pipeline

STAGES = ("QUEUED", "PARSING", "STRUCTURING", "KEYINFO", "NOTEGEN", "DONE", "FAILED")
ACTIVE_STAGES = STAGES[:5]


@dataclass
class Job:
    job_id: str
    source_uri: str
    status: str = "QUEUED"
    created_at: float = 0.0
    stage_times: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    error: str | None = None
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "source_uri": self.source_uri,
            "status": self.status,
            "created_at": self.created_at,
            "stage_times": self.stage_times,
            "warnings": self.warnings,
            "error": self.error,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Job":
        return cls(**data)


class JobStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def job_dir(self, job_id: str) -> Path:
        return self.root / job_id

    def scheme_path(self, job_id: str) -> Path:
        return self.job_dir(job_id) / "scheme"

    def assets_dir(self, job_id: str) -> Path:
        return self.job_dir(job_id) / "assets"

    def transcript_path(self, job_id: str) -> Path:
        return self.job_dir(job_id) / "transcript.json"

    def create(self, source_uri: str, config: PipelineConfig) -> Job:
        job = Job(job_id=uuid.uuid4().hex[:12], source_uri=source_uri,
                  created_at=time.time(), config=config.to_dict())
        self.job_dir(job.job_id).mkdir(parents=True)
        self.write_status(job)
        return job

    def write_status(self, job: Job) -> None:
        """Atomic snapshot write; concurrent readers always see a full record."""
        target = self.job_dir(job.job_id) / "status.json"
        tmp = target.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(job.to_dict(), sort_keys=True), encoding="utf-8")
        tmp.rename(target)

    def read(self, job_id: str) -> Job | None:
        target = self.job_dir(job_id) / "status.json"
        if not target.exists():
            return None
        return Job.from_dict(json.loads(target.read_text(encoding="utf-8")))

    def list_ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir()
                      if (p / "status.json").exists())

    def advance(self, job: Job, stage: str) -> None:
        """Move the job forward; stages only ever progress left to right
        (FAILED is reachable from anywhere)."""
        if stage != "FAILED" and STAGES.index(stage) < STAGES.index(job.status):
            raise ValueError(f"cannot move {job.status} -> {stage}")
        job.status = stage
        job.stage_times[stage] = time.time()
        self.write_status(job)


def execute_job(store: JobStore, job: Job, config: PipelineConfig,
                providers=None) -> Job:
    """Run the full pipeline for one job, tracking stage-by-stage status."""
    try:
        ctx = run_pipeline(job.source_uri, store.job_dir(job.job_id), config,
                           providers=providers,
                           status_cb=lambda stage: store.advance(job, stage))
        job.warnings = ctx.warnings
        store.advance(job, "DONE")
    except Exception as exc:  # every failure lands in the job record
        job.error = f"{type(exc).__name__}: {exc}"
        store.advance(job, "FAILED")
    return job
