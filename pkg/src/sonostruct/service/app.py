"""FastAPI application wiring the extraction core behind a /v1 API."""

from __future__ import annotations

from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from starlette.datastructures import UploadFile
from starlette.formparsers import MultiPartException

from sonostruct import __version__
from sonostruct.backends import ChatHttpBackend, RuleBasedBackend
from sonostruct.config import ServiceConfig
from sonostruct.defaults import default_schema
from sonostruct.errors import (
    BatchLimitExceeded,
    ConfigInvalid,
    InvalidUpload,
    MissingEvidence,
    ServiceError,
    UnknownField,
)
from sonostruct.evidence import primary_span
from sonostruct.export import CsvExporter
from sonostruct.extraction import STATUS_MISSING, STATUS_PRESENT
from sonostruct.jobs import MAX_BATCH_FILES, JobManager
from sonostruct.pipeline import PipelineResult, process_file
from sonostruct.schema import Schema, SchemaRegistry, load_schema, review_surface
from sonostruct.service import models
from sonostruct.store import (
    REVIEW_UNREVIEWED,
    DocumentStore,
    EditRequest,
    RecordState,
    ReviewStore,
    make_report_id,
    state_snapshot,
)


class Application:
    """Owns the stores, backend, exporter, and job manager for one service."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        data_dir = Path(config.data_dir)
        spool_dir = Path(config.spool_dir)
        if config.create_dirs:
            data_dir.mkdir(parents=True, exist_ok=True)
            spool_dir.mkdir(parents=True, exist_ok=True)
        else:
            for name, path in (("data_dir", data_dir), ("spool_dir", spool_dir)):
                if not path.is_dir():
                    raise ConfigInvalid(f"{name} {path} does not exist")

        self.registry = SchemaRegistry([default_schema()])
        for raw_path in config.schema_paths:
            self.registry.register(load_schema(Path(raw_path).read_bytes()))

        self.documents = DocumentStore(data_dir)
        self.store = ReviewStore(data_dir)
        self.exporter = CsvExporter(spool_dir, self.registry, self.store)
        self.store.on_human_change = self.exporter.on_human_change

        if config.backend.kind == "chat":
            self.backend = ChatHttpBackend(
                base_url=config.backend.base_url,
                model=config.backend.model,
                timeout_s=config.backend.timeout_s,
            )
        elif config.backend.kind == "rules":
            self.backend = RuleBasedBackend()
        else:
            raise ConfigInvalid(f"unknown backend kind {config.backend.kind!r}")

        self.jobs = JobManager(
            data_dir / "jobs",
            processor=self._process_stored,
            on_job_finished=self.exporter.on_records_changed,
            workers=config.workers,
        )
        self.store.load()

    def _process_stored(
        self, path: Path, filename: str, schema_id: str, cohort: str
    ) -> PipelineResult:
        schema = self.registry.get(schema_id)
        return process_file(
            path,
            schema=schema,
            backend=self.backend,
            documents=self.documents,
            store=self.store,
            cohort=cohort,
            hedge_lexicon=self.config.hedge_lexicon,
            filename=filename,
        )

    def close(self) -> None:
        self.jobs.shutdown()
        close = getattr(self.backend, "close", None)
        if close is not None:
            close()


def _highlight_handle(state: RecordState, field_id: str) -> str | None:
    extracted = state.machine.fields.get(field_id)
    if extracted is None or primary_span(extracted.evidence) is None:
        return None
    return f"/v1/reports/{state.report_id}/fields/{field_id}/highlight"


def _field_view(schema: Schema, state: RecordState, field_id: str) -> models.FieldView:
    spec = schema.get(field_id)
    extracted = state.machine.fields.get(field_id)
    if spec is None or extracted is None:
        raise UnknownField(f"report {state.report_id} has no field {field_id!r}")
    return models.FieldView(
        field_id=field_id,
        label=spec.label,
        trust_class=spec.trust_class,
        value_type=spec.value_type,
        canonical_unit=spec.canonical_unit,
        allowed_values=list(spec.allowed_values) if spec.allowed_values else None,
        status=extracted.status,
        missing=extracted.status == STATUS_MISSING,
        raw_value=extracted.raw_value,
        machine_value=extracted.value if extracted.status == STATUS_PRESENT else None,
        unit=extracted.unit,
        effective_value=state.effective_value(field_id),
        review_status=state.review_status.get(field_id, REVIEW_UNREVIEWED),
        requires_review=spec.requires_review,
        needs_review=extracted.needs_review,
        note=extracted.note,
        evidence=[
            models.EvidenceView(
                text=a.text,
                start=a.start,
                end=a.end,
                page_number=a.page_number,
                method=a.method,
            )
            for a in extracted.evidence
        ],
        highlight=_highlight_handle(state, field_id),
    )


def _report_summary(schema: Schema, state: RecordState) -> models.ReportSummary:
    counts: dict[str, int] = {}
    for extracted in state.machine.fields.values():
        counts[extracted.status] = counts.get(extracted.status, 0) + 1
    pending = [
        spec.field_id
        for spec in review_surface(schema)
        if state.review_status.get(spec.field_id, REVIEW_UNREVIEWED)
        == REVIEW_UNREVIEWED
    ]
    flagged = sum(1 for f in state.machine.fields.values() if f.needs_review)
    return models.ReportSummary(
        report_id=state.report_id,
        doc_id=state.doc_id,
        filename=state.filename,
        cohort=state.cohort,
        schema_id=state.schema_id,
        schema_version=state.schema_version,
        backend=state.machine.backend,
        created_at=state.created_at,
        status_counts=counts,
        review_pending=pending,
        review_complete=not pending,
        flagged_count=flagged,
    )


def create_app(app_state: Application) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        app_state.close()

    app = FastAPI(title="sonostruct", version=__version__, lifespan=lifespan)
    app.state.ctx = app_state

    registry = app_state.registry
    store = app_state.store
    documents = app_state.documents
    jobs = app_state.jobs
    exporter = app_state.exporter

    @app.exception_handler(ServiceError)
    async def service_error_handler(_: Request, exc: ServiceError) -> JSONResponse:
        body = {"error": {"code": exc.code, "message": exc.message}}
        if exc.detail:
            body["error"]["detail"] = exc.detail
        return JSONResponse(status_code=exc.http_status, content=body)

    def _schema_for(state: RecordState) -> Schema:
        return registry.get(state.schema_id)

    # -- health and schemas ------------------------------------------------

    @app.get("/v1/health", response_model=models.HealthView)
    def health() -> models.HealthView:
        return models.HealthView(
            status="ok", version=__version__, schema_ids=registry.ids()
        )

    @app.get("/v1/schemas", response_model=list[models.SchemaSummary])
    def list_schemas() -> list[models.SchemaSummary]:
        out = []
        for schema_id in registry.ids():
            schema = registry.get(schema_id)
            out.append(
                models.SchemaSummary(
                    schema_id=schema.schema_id,
                    version=schema.version,
                    field_count=len(schema.fields),
                    review_field_ids=[s.field_id for s in review_surface(schema)],
                )
            )
        return out

    @app.get("/v1/schemas/{schema_id}", response_model=models.SchemaView)
    def get_schema(schema_id: str) -> models.SchemaView:
        schema = registry.get(schema_id)
        return models.SchemaView(
            schema_id=schema.schema_id,
            version=schema.version,
            fields=[
                models.FieldSpecView(
                    field_id=s.field_id,
                    label=s.label,
                    trust_class=s.trust_class,
                    value_type=s.value_type,
                    canonical_unit=s.canonical_unit,
                    allowed_values=list(s.allowed_values) if s.allowed_values else None,
                    requires_review=s.requires_review,
                )
                for s in schema.fields
            ],
        )

    # -- jobs ----------------------------------------------------------------

    # The form parser is given headroom beyond the batch limit so an
    # oversized submission reaches the batch check and fails with 413.
    max_form_parts = MAX_BATCH_FILES * 4

    @app.post("/v1/jobs", response_model=models.JobView, status_code=202)
    async def submit_job(request: Request) -> models.JobView:
        try:
            async with request.form(
                max_files=max_form_parts,
                max_fields=max_form_parts,
                max_part_size=64 * 1024 * 1024,
            ) as form:
                raw_schema = form.get("schema_id")
                raw_cohort = form.get("cohort")
                if raw_schema is not None and not isinstance(raw_schema, str):
                    raise InvalidUpload("schema_id must be a text field")
                if raw_cohort is not None and not isinstance(raw_cohort, str):
                    raise InvalidUpload("cohort must be a text field")
                chosen = raw_schema or default_schema().schema_id
                registry.get(chosen)
                parts = form.getlist("files")
                if any(not isinstance(p, UploadFile) for p in parts):
                    raise InvalidUpload("every files part must be a file upload")
                uploads = [(p.filename or "upload.bin", await p.read()) for p in parts]
        except MultiPartException as exc:
            raise BatchLimitExceeded(f"upload rejected: {exc}") from None
        job = await run_in_threadpool(
            jobs.submit, uploads, schema_id=chosen, cohort=raw_cohort or None
        )
        return models.JobView(**jobs.snapshot(job.job_id))

    @app.get("/v1/jobs", response_model=list[models.JobView])
    def list_jobs() -> list[models.JobView]:
        return [models.JobView(**snap) for snap in jobs.list_jobs()]

    @app.get("/v1/jobs/{job_id}", response_model=models.JobView)
    def get_job(job_id: str, include_files: bool = False) -> models.JobView:
        view = models.JobView(**jobs.snapshot(job_id))
        if include_files:
            view.files = [models.JobFileView(**f) for f in jobs.file_snapshots(job_id)]
        return view

    @app.get("/v1/jobs/{job_id}/files", response_model=list[models.JobFileView])
    def get_job_files(job_id: str) -> list[models.JobFileView]:
        return [models.JobFileView(**f) for f in jobs.file_snapshots(job_id)]

    @app.post("/v1/jobs/{job_id}/cancel", response_model=models.JobView)
    def cancel_job(job_id: str) -> models.JobView:
        return models.JobView(**jobs.cancel(job_id))

    # -- reports and review ----------------------------------------------------

    @app.get("/v1/reports", response_model=models.ReportPage)
    def list_reports(
        cohort: str | None = Query(default=None),
        pending_only: bool = Query(default=False),
        limit: int = Query(default=100, ge=1, le=1000),
        offset: int = Query(default=0, ge=0),
    ) -> models.ReportPage:
        summaries = []
        for state in store.list_records(cohort):
            summary = _report_summary(_schema_for(state), state)
            if pending_only and summary.review_complete:
                continue
            summaries.append(summary)
        return models.ReportPage(
            items=summaries[offset : offset + limit],
            total=len(summaries),
            limit=limit,
            offset=offset,
        )

    @app.get("/v1/reports/{report_id}", response_model=models.ReportSummary)
    def get_report(report_id: str) -> models.ReportSummary:
        state = store.get(report_id)
        return _report_summary(_schema_for(state), state)

    @app.get("/v1/reports/{report_id}/review", response_model=models.ReviewPayload)
    def get_review(report_id: str) -> models.ReviewPayload:
        state = store.get(report_id)
        schema = _schema_for(state)
        return models.ReviewPayload(
            report=_report_summary(schema, state),
            fields=[
                _field_view(schema, state, spec.field_id)
                for spec in review_surface(schema)
            ],
        )

    @app.get("/v1/reports/{report_id}/full", response_model=models.ReviewPayload)
    def get_full(report_id: str) -> models.ReviewPayload:
        state = store.get(report_id)
        schema = _schema_for(state)
        return models.ReviewPayload(
            report=_report_summary(schema, state),
            fields=[
                _field_view(schema, state, spec.field_id) for spec in schema.fields
            ],
        )

    @app.get("/v1/reports/{report_id}/state")
    def get_state(report_id: str) -> dict:
        return state_snapshot(store.get(report_id))

    @app.put(
        "/v1/reports/{report_id}/fields/{field_id}", response_model=models.FieldView
    )
    def edit_field(
        report_id: str, field_id: str, body: models.EditBody
    ) -> models.FieldView:
        state = store.get(report_id)
        schema = _schema_for(state)
        state = store.edit_field(schema, report_id, field_id, body.value, body.editor)
        return _field_view(schema, state, field_id)

    @app.post(
        "/v1/reports/{report_id}/confirm/{field_id}",
        response_model=models.FieldView,
    )
    def confirm_field(
        report_id: str, field_id: str, body: models.ConfirmBody | None = None
    ) -> models.FieldView:
        state = store.get(report_id)
        schema = _schema_for(state)
        editor = body.editor if body is not None else "reviewer"
        state = store.confirm_field(schema, report_id, field_id, editor)
        return _field_view(schema, state, field_id)

    @app.post("/v1/reports/{report_id}/save", response_model=models.SaveReceipt)
    def batch_save(report_id: str, body: models.BatchSaveBody) -> models.SaveReceipt:
        state = store.get(report_id)
        schema = _schema_for(state)
        edits = [EditRequest(e.field_id, e.value) for e in body.edits]
        receipt = store.batch_save(schema, report_id, edits, body.editor)
        return models.SaveReceipt(**receipt)

    def _highlight(state: RecordState, field_id: str) -> models.HighlightPayload:
        extracted = state.machine.fields.get(field_id)
        if extracted is None:
            raise UnknownField(
                f"report {state.report_id} has no field {field_id!r}"
            )
        span = primary_span(extracted.evidence)
        if span is None:
            raise MissingEvidence(
                f"field {field_id!r} has no anchored evidence in report"
                f" {state.report_id}"
            )
        document = documents.get(state.doc_id)
        page = document.page_for_offset(span.start)
        return models.HighlightPayload(
            report_id=state.report_id,
            field_id=field_id,
            doc_id=state.doc_id,
            page_number=page.page_number,
            start=span.start,
            end=span.end,
            start_in_page=span.start - page.start_offset,
            end_in_page=span.end - page.start_offset,
            text=span.text,
            method=span.method,
        )

    @app.get(
        "/v1/reports/{report_id}/fields/{field_id}/highlight",
        response_model=models.HighlightPayload,
    )
    def report_highlight(report_id: str, field_id: str) -> models.HighlightPayload:
        return _highlight(store.get(report_id), field_id)

    # -- documents ---------------------------------------------------------------

    @app.get("/v1/documents/{doc_id}", response_model=models.DocumentView)
    def get_document(doc_id: str) -> models.DocumentView:
        document = documents.get(doc_id)
        return models.DocumentView(
            doc_id=document.doc_id,
            filename=document.filename,
            media_type=document.media_type,
            page_count=len(document.pages),
            pages=[
                models.PageView(
                    page_number=p.page_number,
                    start_offset=p.start_offset,
                    text=p.text,
                )
                for p in document.pages
            ],
        )

    @app.get(
        "/v1/documents/{doc_id}/highlight", response_model=models.HighlightPayload
    )
    def document_highlight(
        doc_id: str,
        field: str = Query(...),
        schema_id: str | None = Query(default=None),
    ) -> models.HighlightPayload:
        chosen = schema_id or default_schema().schema_id
        report_id = make_report_id(doc_id, chosen)
        return _highlight(store.get(report_id), field)

    @app.get("/v1/documents/{doc_id}/raw")
    def get_document_raw(doc_id: str) -> Response:
        document = documents.get(doc_id)
        data = documents.get_raw(doc_id)
        return Response(
            content=data,
            media_type=document.media_type,
            headers={
                "Content-Disposition": f'inline; filename="{document.filename}"'
            },
        )

    # -- exports ---------------------------------------------------------------

    @app.get("/v1/exports", response_model=list[models.ExportEntry])
    def list_exports() -> list[models.ExportEntry]:
        return [models.ExportEntry(**entry) for entry in exporter.list_exports()]

    @app.get("/v1/exports/{cohort}/{version}")
    def get_export(cohort: str, version: str) -> Response:
        path = exporter.write(cohort, version)
        return Response(
            content=path.read_bytes(),
            media_type="text/csv; charset=utf-8",
            headers={"Content-Disposition": f'attachment; filename="{path.name}"'},
        )

    if app_state.config.frontend_dir:
        frontend = Path(app_state.config.frontend_dir)
        if frontend.is_dir():
            app.mount("/", StaticFiles(directory=frontend, html=True), name="ui")

    return app


def create_app_from_config(config: ServiceConfig | None = None) -> FastAPI:
    return create_app(Application(config or ServiceConfig()))
