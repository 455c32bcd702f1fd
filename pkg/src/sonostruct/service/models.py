"""Request and response bodies for the versioned HTTP API."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

EditValue = str | int | float | bool | None


class EditBody(BaseModel):
    value: EditValue = None
    editor: str = "reviewer"


class ConfirmBody(BaseModel):
    editor: str = "reviewer"


class BatchEditBody(BaseModel):
    field_id: str
    value: EditValue = None


class BatchSaveBody(BaseModel):
    edits: list[BatchEditBody] = Field(default_factory=list)
    editor: str = "reviewer"


class HealthView(BaseModel):
    status: str
    version: str
    schema_ids: list[str]


class EvidenceView(BaseModel):
    text: str
    start: int | None
    end: int | None
    page_number: int | None
    method: str


class FieldView(BaseModel):
    field_id: str
    label: str
    trust_class: str
    value_type: str
    canonical_unit: str | None
    allowed_values: list[str] | None
    status: str
    missing: bool
    raw_value: str | None
    machine_value: EditValue
    unit: str | None
    effective_value: EditValue
    review_status: str
    requires_review: bool
    needs_review: bool
    note: str | None
    evidence: list[EvidenceView]
    highlight: str | None


class ReportSummary(BaseModel):
    report_id: str
    doc_id: str
    filename: str
    cohort: str
    schema_id: str
    schema_version: str
    backend: str
    created_at: str
    status_counts: dict[str, int]
    review_pending: list[str]
    review_complete: bool
    flagged_count: int


class ReportPage(BaseModel):
    items: list[ReportSummary]
    total: int
    limit: int
    offset: int


class ReviewPayload(BaseModel):
    report: ReportSummary
    fields: list[FieldView]


class SaveReceipt(BaseModel):
    report_id: str
    saved_count: int
    seq: int


class HighlightPayload(BaseModel):
    report_id: str
    field_id: str
    doc_id: str
    page_number: int
    start: int
    end: int
    start_in_page: int
    end_in_page: int
    text: str
    method: str


class PageView(BaseModel):
    page_number: int
    start_offset: int
    text: str


class DocumentView(BaseModel):
    doc_id: str
    filename: str
    media_type: str
    page_count: int
    pages: list[PageView]


class JobFileView(BaseModel):
    index: int
    filename: str
    status: str
    report_id: str | None
    error: str | None


class JobView(BaseModel):
    job_id: str
    schema_id: str
    cohort: str
    state: str
    created_at: str
    started_at: str | None
    finished_at: str | None
    cancel_requested: bool
    total: int
    processed: int
    counts: dict[str, int]
    files: list[JobFileView] | None = None


class ExportEntry(BaseModel):
    cohort: str
    kind: str
    filename: str
    size_bytes: int


class FieldSpecView(BaseModel):
    field_id: str
    label: str
    trust_class: str
    value_type: str
    canonical_unit: str | None
    allowed_values: list[str] | None
    requires_review: bool


class SchemaSummary(BaseModel):
    schema_id: str
    version: str
    field_count: int
    review_field_ids: list[str]


class SchemaView(BaseModel):
    schema_id: str
    version: str
    fields: list[FieldSpecView]


class ErrorBody(BaseModel):
    code: str
    message: str
    detail: dict[str, Any] | None = None


class ErrorEnvelope(BaseModel):
    error: ErrorBody
