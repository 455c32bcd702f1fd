"""Per-file processing shared by batch jobs, uploads, and the CLI.

One file flows ingest -> duplicate check -> extract -> store. Every
failure mode maps to a per-file outcome; nothing here raises for a bad
input file. A document already extracted under the same schema is
reported as skipped with the existing report id.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import BackendUnreachable, DuplicateReport, EmptyDocument, MalformedPdf, NoTextLayer
from .extraction import extract_report
from .ingest import ingest_bytes
from .normalize import DEFAULT_HEDGE_LEXICON
from .schema import Schema
from .store import DocumentStore, ReviewStore, make_report_id

FILE_DONE = "done"
FILE_SKIPPED = "skipped"
FILE_FAILED = "failed"


@dataclass
class PipelineResult:
    filename: str
    status: str
    report_id: str | None = None
    doc_id: str | None = None
    error: str | None = None


def process_bytes(
    data: bytes,
    filename: str,
    *,
    schema: Schema,
    backend,
    documents: DocumentStore,
    store: ReviewStore,
    cohort: str,
    hedge_lexicon: tuple[str, ...] = DEFAULT_HEDGE_LEXICON,
) -> PipelineResult:
    try:
        document = ingest_bytes(data, filename)
    except (MalformedPdf, NoTextLayer, EmptyDocument) as exc:
        return PipelineResult(
            filename=filename, status=FILE_FAILED, error=f"{exc.code}: {exc.message}"
        )

    report_id = make_report_id(document.doc_id, schema.schema_id)
    if store.exists(document.doc_id, schema.schema_id):
        return PipelineResult(
            filename=filename,
            status=FILE_SKIPPED,
            report_id=report_id,
            doc_id=document.doc_id,
        )

    documents.put(document, data)
    try:
        machine = extract_report(document, schema, backend, hedge_lexicon)
    except BackendUnreachable as exc:
        return PipelineResult(
            filename=filename,
            status=FILE_FAILED,
            doc_id=document.doc_id,
            error=f"{exc.code}: {exc.message}",
        )

    try:
        store.create(machine=machine, cohort=cohort, filename=filename)
    except DuplicateReport:
        return PipelineResult(
            filename=filename,
            status=FILE_SKIPPED,
            report_id=report_id,
            doc_id=document.doc_id,
        )
    return PipelineResult(
        filename=filename,
        status=FILE_DONE,
        report_id=report_id,
        doc_id=document.doc_id,
    )


def process_file(
    path: Path | str,
    *,
    schema: Schema,
    backend,
    documents: DocumentStore,
    store: ReviewStore,
    cohort: str,
    hedge_lexicon: tuple[str, ...] = DEFAULT_HEDGE_LEXICON,
    filename: str | None = None,
) -> PipelineResult:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        return PipelineResult(
            filename=filename or path.name, status=FILE_FAILED, error=f"unreadable file: {exc}"
        )
    return process_bytes(
        data,
        filename or path.name,
        schema=schema,
        backend=backend,
        documents=documents,
        store=store,
        cohort=cohort,
        hedge_lexicon=hedge_lexicon,
    )
