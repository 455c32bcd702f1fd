"""Threaded batch extraction jobs.

A job takes 1 to 5,000 uploaded files, writes them to a per-job
directory, and works through them on a small thread pool. Progress is a
set of per-file statuses whose terminal counts only ever grow.
Cancellation stops new files from starting; files already being
processed finish, then the job lands in the cancelled state. Job state
is snapshotted to disk so an interrupted service can resume the pending
remainder.
"""

from __future__ import annotations

import json
import threading
import uuid
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .errors import (
    AlreadyTerminal,
    BatchLimitExceeded,
    EmptyBatch,
    UnknownCohort,
    UnknownJob,
)
from .pipeline import PipelineResult
from .store import utc_now

MAX_BATCH_FILES = 5000

FILE_PENDING = "pending"
FILE_RUNNING = "running"
FILE_DONE = "done"
FILE_FAILED = "failed"
FILE_SKIPPED = "skipped"
FILE_CANCELLED = "cancelled"
FILE_STATUSES = (
    FILE_PENDING,
    FILE_RUNNING,
    FILE_DONE,
    FILE_FAILED,
    FILE_SKIPPED,
    FILE_CANCELLED,
)

JOB_RUNNING = "running"
JOB_COMPLETED = "completed"
JOB_CANCELLED = "cancelled"

_PERSIST_EVERY = 25


@dataclass
class JobFile:
    index: int
    filename: str
    stored_path: str
    status: str = FILE_PENDING
    report_id: str | None = None
    error: str | None = None


@dataclass
class Job:
    job_id: str
    schema_id: str
    cohort: str
    state: str
    created_at: str
    files: list[JobFile]
    started_at: str | None = None
    finished_at: str | None = None
    cancel_requested: bool = False
    cursor: int = 0
    active_threads: int = 0
    dirty: int = 0
    done_event: threading.Event = field(default_factory=threading.Event, repr=False)


Processor = Callable[[Path, str, str, str], PipelineResult]


class JobManager:
    def __init__(
        self,
        jobs_dir: Path | str,
        processor: Processor,
        on_job_finished: Callable[[str], None] | None = None,
        workers: int = 4,
    ):
        self.jobs_dir = Path(jobs_dir)
        self.jobs_dir.mkdir(parents=True, exist_ok=True)
        self.processor = processor
        self.on_job_finished = on_job_finished
        self.workers = max(1, workers)
        self._jobs: dict[str, Job] = {}
        self._lock = threading.RLock()
        self._stopping = False

    # -- submission ------------------------------------------------------

    def submit(
        self,
        uploads: Iterable[tuple[str, bytes]],
        schema_id: str,
        cohort: str | None = None,
    ) -> Job:
        items = list(uploads)
        if not items:
            raise EmptyBatch("a batch needs at least one file")
        if len(items) > MAX_BATCH_FILES:
            raise BatchLimitExceeded(
                f"{len(items)} files exceeds the batch limit of {MAX_BATCH_FILES}"
            )
        job_id = "j" + uuid.uuid4().hex[:12]
        upload_dir = self.jobs_dir / f"{job_id}_files"
        upload_dir.mkdir(parents=True, exist_ok=True)
        files = []
        for index, (filename, data) in enumerate(items):
            safe_name = Path(filename).name or f"file_{index:05d}"
            stored = upload_dir / f"{index:05d}_{safe_name}"
            stored.write_bytes(data)
            files.append(
                JobFile(index=index, filename=safe_name, stored_path=str(stored))
            )
        job = Job(
            job_id=job_id,
            schema_id=schema_id,
            cohort=cohort or job_id,
            state=JOB_RUNNING,
            created_at=utc_now(),
            started_at=utc_now(),
            files=files,
        )
        with self._lock:
            self._jobs[job_id] = job
        self._persist(job)
        self._spawn_workers(job)
        return job

    def _spawn_workers(self, job: Job) -> None:
        count = min(self.workers, len(job.files)) or 1
        with self._lock:
            job.active_threads = count
        for _ in range(count):
            thread = threading.Thread(
                target=self._worker, args=(job,), daemon=True, name=f"job-{job.job_id}"
            )
            thread.start()

    # -- worker loop -----------------------------------------------------

    def _next_file(self, job: Job) -> JobFile | None:
        with self._lock:
            while job.cursor < len(job.files):
                candidate = job.files[job.cursor]
                job.cursor += 1
                if candidate.status != FILE_PENDING:
                    continue
                if self._stopping:
                    job.cursor -= 1
                    return None
                if job.cancel_requested:
                    candidate.status = FILE_CANCELLED
                    self._mark_dirty(job)
                    continue
                candidate.status = FILE_RUNNING
                return candidate
            return None

    def _worker(self, job: Job) -> None:
        try:
            while True:
                job_file = self._next_file(job)
                if job_file is None:
                    break
                try:
                    result = self.processor(
                        Path(job_file.stored_path),
                        job_file.filename,
                        job.schema_id,
                        job.cohort,
                    )
                except Exception as exc:  # a worker must survive any file
                    result = PipelineResult(
                        filename=job_file.filename,
                        status=FILE_FAILED,
                        error=f"unexpected processing error: {exc}",
                    )
                with self._lock:
                    job_file.status = result.status
                    job_file.report_id = result.report_id
                    job_file.error = result.error
                    self._mark_dirty(job)
        finally:
            with self._lock:
                job.active_threads -= 1
                last = job.active_threads == 0
            if last:
                self._finalize(job)

    def _mark_dirty(self, job: Job) -> None:
        job.dirty += 1
        if job.dirty >= _PERSIST_EVERY:
            self._persist(job)

    def _finalize(self, job: Job) -> None:
        with self._lock:
            unfinished = any(
                f.status in (FILE_PENDING, FILE_RUNNING) for f in job.files
            )
            if unfinished:
                # Interrupted by shutdown; leave resumable.
                self._persist(job)
                return
            job.state = JOB_CANCELLED if job.cancel_requested else JOB_COMPLETED
            job.finished_at = utc_now()
            self._persist(job)
            cohort = job.cohort
        if self.on_job_finished is not None:
            try:
                self.on_job_finished(cohort)
            except UnknownCohort:
                pass
        job.done_event.set()

    # -- control ---------------------------------------------------------

    def get(self, job_id: str) -> Job:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise UnknownJob(f"no job {job_id!r}")
        return job

    def cancel(self, job_id: str) -> dict:
        with self._lock:
            job = self.get(job_id)
            if job.state in (JOB_COMPLETED, JOB_CANCELLED):
                raise AlreadyTerminal(f"job {job_id} is already {job.state}")
            job.cancel_requested = True
            self._persist(job)
        return self.snapshot(job_id)

    def wait(self, job_id: str, timeout: float | None = None) -> bool:
        return self.get(job_id).done_event.wait(timeout)

    def snapshot(self, job_id: str) -> dict:
        job = self.get(job_id)
        with self._lock:
            counts = Counter(f.status for f in job.files)
            total = len(job.files)
            processed = sum(
                counts.get(s, 0)
                for s in (FILE_DONE, FILE_FAILED, FILE_SKIPPED, FILE_CANCELLED)
            )
            return {
                "job_id": job.job_id,
                "state": job.state,
                "schema_id": job.schema_id,
                "cohort": job.cohort,
                "created_at": job.created_at,
                "started_at": job.started_at,
                "finished_at": job.finished_at,
                "cancel_requested": job.cancel_requested,
                "total": total,
                "processed": processed,
                "counts": {s: counts.get(s, 0) for s in FILE_STATUSES},
            }

    def file_snapshots(self, job_id: str) -> list[dict]:
        job = self.get(job_id)
        with self._lock:
            return [
                {
                    "index": f.index,
                    "filename": f.filename,
                    "status": f.status,
                    "report_id": f.report_id,
                    "error": f.error,
                }
                for f in job.files
            ]

    def list_jobs(self) -> list[dict]:
        with self._lock:
            ids = list(self._jobs)
        snapshots = [self.snapshot(job_id) for job_id in ids]
        snapshots.sort(key=lambda s: s["created_at"], reverse=True)
        return snapshots

    def shutdown(self) -> None:
        with self._lock:
            self._stopping = True
            jobs = list(self._jobs.values())
        for job in jobs:
            with self._lock:
                active = job.active_threads > 0
            if active:
                job.done_event.wait(timeout=30)

    # -- persistence -----------------------------------------------------

    def _persist_path(self, job_id: str) -> Path:
        return self.jobs_dir / f"{job_id}.json"

    def _persist(self, job: Job) -> None:
        job.dirty = 0
        payload = {
            "job_id": job.job_id,
            "schema_id": job.schema_id,
            "cohort": job.cohort,
            "state": job.state,
            "created_at": job.created_at,
            "started_at": job.started_at,
            "finished_at": job.finished_at,
            "cancel_requested": job.cancel_requested,
            "files": [
                {
                    "index": f.index,
                    "filename": f.filename,
                    "stored_path": f.stored_path,
                    "status": f.status,
                    "report_id": f.report_id,
                    "error": f.error,
                }
                for f in job.files
            ],
        }
        path = self._persist_path(job.job_id)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload), encoding="utf-8")
        tmp.rename(path)

    def resume_pending(self) -> list[str]:
        """Reload snapshots and restart jobs with unfinished files."""
        resumed = []
        for path in sorted(self.jobs_dir.glob("j*.json")):
            try:
                raw = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                continue
            job_id = raw.get("job_id")
            if not job_id:
                continue
            with self._lock:
                if job_id in self._jobs:
                    continue
            files = [
                JobFile(
                    index=f["index"],
                    filename=f["filename"],
                    stored_path=f["stored_path"],
                    status=FILE_PENDING if f["status"] == FILE_RUNNING else f["status"],
                    report_id=f.get("report_id"),
                    error=f.get("error"),
                )
                for f in raw.get("files", [])
            ]
            job = Job(
                job_id=job_id,
                schema_id=raw["schema_id"],
                cohort=raw["cohort"],
                state=raw["state"],
                created_at=raw["created_at"],
                started_at=raw.get("started_at"),
                finished_at=raw.get("finished_at"),
                cancel_requested=bool(raw.get("cancel_requested", False)),
                files=files,
            )
            with self._lock:
                self._jobs[job_id] = job
            if job.state in (JOB_COMPLETED, JOB_CANCELLED):
                job.done_event.set()
                continue
            if any(f.status == FILE_PENDING for f in files):
                self._spawn_workers(job)
                resumed.append(job_id)
            else:
                job.active_threads = 0
                self._finalize(job)
        return resumed
