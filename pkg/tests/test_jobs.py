from __future__ import annotations

import json
import threading
import time

import pytest

from sonostruct.errors import (
    AlreadyTerminal,
    BatchLimitExceeded,
    EmptyBatch,
    UnknownCohort,
    UnknownJob,
)
from sonostruct.jobs import (
    FILE_DONE,
    FILE_FAILED,
    FILE_SKIPPED,
    FILE_STATUSES,
    JOB_CANCELLED,
    JOB_COMPLETED,
    JobManager,
    MAX_BATCH_FILES,
)
from sonostruct.pipeline import PipelineResult
from sonostruct.store import utc_now


def ok_processor(path, filename, schema_id, cohort):
    return PipelineResult(filename=filename, status=FILE_DONE, report_id=f"r_{filename}")


def uploads(n, prefix="f"):
    return [(f"{prefix}{i:03d}.txt", f"text {i}".encode()) for i in range(n)]


def make_manager(tmp_path, processor=ok_processor, workers=2, on_job_finished=None):
    return JobManager(
        tmp_path / "jobs",
        processor,
        on_job_finished=on_job_finished,
        workers=workers,
    )


def test_empty_batch_rejected(tmp_path):
    manager = make_manager(tmp_path)
    with pytest.raises(EmptyBatch):
        manager.submit([], "mini")


def test_batch_over_limit_rejected_before_storing(tmp_path):
    manager = make_manager(tmp_path)
    with pytest.raises(BatchLimitExceeded):
        manager.submit(uploads(MAX_BATCH_FILES + 1), "mini")
    assert not list((tmp_path / "jobs").glob("*_files"))


def test_batch_at_limit_is_accepted(tmp_path):
    manager = make_manager(tmp_path, workers=8)
    job = manager.submit(uploads(MAX_BATCH_FILES), "mini")
    assert manager.wait(job.job_id, timeout=120)
    snapshot = manager.snapshot(job.job_id)
    assert snapshot["state"] == JOB_COMPLETED
    assert snapshot["counts"]["done"] == MAX_BATCH_FILES
    manager.shutdown()


def test_small_batch_completes_with_report_ids(tmp_path):
    manager = make_manager(tmp_path)
    job = manager.submit(uploads(10), "mini", cohort="demo")
    assert manager.wait(job.job_id, timeout=10)
    snapshot = manager.snapshot(job.job_id)
    assert snapshot["state"] == JOB_COMPLETED
    assert snapshot["total"] == 10
    assert snapshot["processed"] == 10
    assert snapshot["counts"]["done"] == 10
    assert snapshot["cohort"] == "demo"
    assert set(snapshot["counts"]) == set(FILE_STATUSES)
    files = manager.file_snapshots(job.job_id)
    assert [f["index"] for f in files] == list(range(10))
    assert all(f["report_id"] for f in files)
    manager.shutdown()


def test_cohort_defaults_to_job_id(tmp_path):
    manager = make_manager(tmp_path)
    job = manager.submit(uploads(1), "mini")
    assert job.cohort == job.job_id
    manager.wait(job.job_id, timeout=5)
    manager.shutdown()


def test_uploads_are_stored_under_safe_names(tmp_path):
    manager = make_manager(tmp_path)
    job = manager.submit(
        [("../../evil.txt", b"x"), ("", b"y")], "mini"
    )
    manager.wait(job.job_id, timeout=5)
    names = [f["filename"] for f in manager.file_snapshots(job.job_id)]
    assert names == ["evil.txt", "file_00001"]
    stored = sorted((tmp_path / "jobs" / f"{job.job_id}_files").iterdir())
    assert [p.name for p in stored] == ["00000_evil.txt", "00001_file_00001"]
    manager.shutdown()


def test_statuses_flow_through_from_processor(tmp_path):
    def processor(path, filename, schema_id, cohort):
        if filename.endswith("0.txt"):
            return PipelineResult(filename=filename, status=FILE_SKIPPED, report_id="r0")
        if filename.endswith("1.txt"):
            return PipelineResult(
                filename=filename, status=FILE_FAILED, error="NoTextLayer: empty"
            )
        return PipelineResult(filename=filename, status=FILE_DONE, report_id="rX")

    manager = make_manager(tmp_path, processor)
    job = manager.submit(uploads(3), "mini")
    manager.wait(job.job_id, timeout=5)
    counts = manager.snapshot(job.job_id)["counts"]
    assert counts["skipped"] == 1
    assert counts["failed"] == 1
    assert counts["done"] == 1
    failed = [f for f in manager.file_snapshots(job.job_id) if f["status"] == "failed"]
    assert failed[0]["error"] == "NoTextLayer: empty"
    manager.shutdown()


def test_processor_exception_fails_only_that_file(tmp_path):
    def processor(path, filename, schema_id, cohort):
        if filename == "f001.txt":
            raise RuntimeError("disk on fire")
        return ok_processor(path, filename, schema_id, cohort)

    manager = make_manager(tmp_path, processor)
    job = manager.submit(uploads(4), "mini")
    manager.wait(job.job_id, timeout=5)
    snapshot = manager.snapshot(job.job_id)
    assert snapshot["state"] == JOB_COMPLETED
    assert snapshot["counts"]["failed"] == 1
    assert snapshot["counts"]["done"] == 3
    failed = [f for f in manager.file_snapshots(job.job_id) if f["status"] == "failed"]
    assert "disk on fire" in failed[0]["error"]
    manager.shutdown()


def test_cancel_stops_pending_files_but_finishes_running(tmp_path):
    started = threading.Event()
    release = threading.Event()

    def processor(path, filename, schema_id, cohort):
        started.set()
        release.wait(10)
        return ok_processor(path, filename, schema_id, cohort)

    manager = make_manager(tmp_path, processor, workers=1)
    job = manager.submit(uploads(5), "mini")
    assert started.wait(5)
    receipt = manager.cancel(job.job_id)
    assert receipt["cancel_requested"] is True
    release.set()
    assert manager.wait(job.job_id, timeout=10)
    snapshot = manager.snapshot(job.job_id)
    assert snapshot["state"] == JOB_CANCELLED
    assert snapshot["counts"]["done"] == 1
    assert snapshot["counts"]["cancelled"] == 4
    assert snapshot["counts"]["pending"] == 0
    assert snapshot["processed"] == snapshot["total"]
    manager.shutdown()


def test_cancel_terminal_job_rejected(tmp_path):
    manager = make_manager(tmp_path)
    job = manager.submit(uploads(2), "mini")
    manager.wait(job.job_id, timeout=5)
    with pytest.raises(AlreadyTerminal):
        manager.cancel(job.job_id)
    manager.shutdown()


def test_unknown_job_rejected(tmp_path):
    manager = make_manager(tmp_path)
    with pytest.raises(UnknownJob):
        manager.get("j000000000000")
    with pytest.raises(UnknownJob):
        manager.cancel("j000000000000")


def test_progress_is_monotone_under_polling(tmp_path):
    def processor(path, filename, schema_id, cohort):
        time.sleep(0.004)
        return ok_processor(path, filename, schema_id, cohort)

    manager = make_manager(tmp_path, processor, workers=4)
    job = manager.submit(uploads(40), "mini")
    seen = []
    while True:
        snapshot = manager.snapshot(job.job_id)
        seen.append(snapshot["processed"])
        if snapshot["state"] != "running":
            break
        time.sleep(0.002)
    assert seen == sorted(seen)
    assert seen[-1] == 40
    manager.shutdown()


def test_on_job_finished_gets_cohort_and_survives_unknown_cohort(tmp_path):
    calls = []

    def hook(cohort):
        calls.append(cohort)
        raise UnknownCohort("nothing extracted")

    manager = make_manager(tmp_path, on_job_finished=hook)
    job = manager.submit(uploads(2), "mini", cohort="demo")
    assert manager.wait(job.job_id, timeout=5)
    assert calls == ["demo"]
    assert manager.snapshot(job.job_id)["state"] == JOB_COMPLETED
    manager.shutdown()


def test_resume_processes_interrupted_files(tmp_path):
    jobs_dir = tmp_path / "jobs"
    files_dir = jobs_dir / "jresume000001_files"
    files_dir.mkdir(parents=True)
    stored = []
    for i in range(3):
        path = files_dir / f"{i:05d}_f{i}.txt"
        path.write_bytes(b"text")
        stored.append(path)
    snapshot = {
        "job_id": "jresume000001",
        "schema_id": "mini",
        "cohort": "demo",
        "state": "running",
        "created_at": utc_now(),
        "started_at": utc_now(),
        "finished_at": None,
        "cancel_requested": False,
        "files": [
            {
                "index": 0,
                "filename": "f0.txt",
                "stored_path": str(stored[0]),
                "status": "done",
                "report_id": "r_done",
                "error": None,
            },
            {
                "index": 1,
                "filename": "f1.txt",
                "stored_path": str(stored[1]),
                "status": "running",
                "report_id": None,
                "error": None,
            },
            {
                "index": 2,
                "filename": "f2.txt",
                "stored_path": str(stored[2]),
                "status": "pending",
                "report_id": None,
                "error": None,
            },
        ],
    }
    (jobs_dir / "jresume000001.json").write_text(json.dumps(snapshot))

    processed = []

    def processor(path, filename, schema_id, cohort):
        processed.append(filename)
        return ok_processor(path, filename, schema_id, cohort)

    manager = JobManager(jobs_dir, processor, workers=2)
    resumed = manager.resume_pending()
    assert resumed == ["jresume000001"]
    assert manager.wait("jresume000001", timeout=5)
    final = manager.snapshot("jresume000001")
    assert final["state"] == JOB_COMPLETED
    assert final["counts"]["done"] == 3
    # The finished file is not reprocessed; the interrupted one is.
    assert sorted(processed) == ["f1.txt", "f2.txt"]
    manager.shutdown()


def test_resume_keeps_terminal_jobs_terminal(tmp_path):
    jobs_dir = tmp_path / "jobs"
    jobs_dir.mkdir()
    snapshot = {
        "job_id": "jterminal00001",
        "schema_id": "mini",
        "cohort": "demo",
        "state": "completed",
        "created_at": utc_now(),
        "started_at": utc_now(),
        "finished_at": utc_now(),
        "cancel_requested": False,
        "files": [
            {
                "index": 0,
                "filename": "f0.txt",
                "stored_path": str(jobs_dir / "gone.txt"),
                "status": "done",
                "report_id": "r_done",
                "error": None,
            }
        ],
    }
    (jobs_dir / "jterminal00001.json").write_text(json.dumps(snapshot))

    def explosive(path, filename, schema_id, cohort):
        raise AssertionError("terminal jobs must not reprocess")

    manager = JobManager(jobs_dir, explosive, workers=2)
    assert manager.resume_pending() == []
    assert manager.snapshot("jterminal00001")["state"] == JOB_COMPLETED
    assert manager.wait("jterminal00001", timeout=1)


def test_list_jobs_newest_first(tmp_path):
    manager = make_manager(tmp_path)
    first = manager.submit(uploads(1, "a"), "mini")
    manager.wait(first.job_id, timeout=5)
    time.sleep(0.01)
    second = manager.submit(uploads(1, "b"), "mini")
    manager.wait(second.job_id, timeout=5)
    listed = manager.list_jobs()
    assert [j["job_id"] for j in listed] == [second.job_id, first.job_id]
    manager.shutdown()
