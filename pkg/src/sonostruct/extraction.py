"""Schema-guided report extraction.

A backend proposes, per field, a raw value plus the sentence it came
from. This module turns those claims into a complete machine record: one
entry per schema field with a status (present, missing, ambiguous,
extraction_failed), the normalized value, and anchored evidence.

Field-level problems never abort a report. Hedged wording and vocabulary
misses downgrade the field to ambiguous; malformed numbers and unknown
units mark it extraction_failed; only an unreachable backend fails the
whole report. Long documents are extracted over overlapping text windows
and merged, preferring the most informative status per field. A backend
whose output stays unparseable after one repair attempt yields a record
with every field extraction_failed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ModelOutputUnparseable, NumericParse, UnknownUnit, ValueOutOfVocabulary
from .evidence import EvidenceAnchor, anchor_evidence
from .ingest import SourceDocument
from .normalize import DEFAULT_HEDGE_LEXICON, normalize_value
from .schema import FieldSpec, Schema

STATUS_PRESENT = "present"
STATUS_MISSING = "missing"
STATUS_AMBIGUOUS = "ambiguous"
STATUS_FAILED = "extraction_failed"

FIELD_STATUSES = (STATUS_PRESENT, STATUS_MISSING, STATUS_AMBIGUOUS, STATUS_FAILED)

# Window limit for a single backend request, in characters.
WINDOW_CHARS = 8000
WINDOW_OVERLAP = 800

_MERGE_RANK = {
    STATUS_PRESENT: 3,
    STATUS_AMBIGUOUS: 2,
    STATUS_FAILED: 1,
    STATUS_MISSING: 0,
}


@dataclass(frozen=True)
class FieldClaim:
    """One backend finding: the raw value and its claimed source sentence."""

    raw_value: str
    evidence: str | None = None


@dataclass
class ExtractedField:
    field_id: str
    status: str
    raw_value: str | None = None
    value: float | str | None = None
    unit: str | None = None
    evidence: list[EvidenceAnchor] = field(default_factory=list)
    needs_review: bool = False
    note: str | None = None


@dataclass
class MachineRecord:
    doc_id: str
    schema_id: str
    schema_version: str
    backend: str
    fields: dict[str, ExtractedField]

    def field_list(self) -> list[ExtractedField]:
        return list(self.fields.values())


def _windows(text: str) -> list[str]:
    if len(text) <= WINDOW_CHARS:
        return [text]
    stride = WINDOW_CHARS - WINDOW_OVERLAP
    windows = []
    start = 0
    while start < len(text):
        windows.append(text[start : start + WINDOW_CHARS])
        if start + WINDOW_CHARS >= len(text):
            break
        start += stride
    return windows


def _missing_field(spec: FieldSpec) -> ExtractedField:
    return ExtractedField(field_id=spec.field_id, status=STATUS_MISSING)


def _failed_field(spec: FieldSpec, note: str) -> ExtractedField:
    return ExtractedField(field_id=spec.field_id, status=STATUS_FAILED, note=note)


def _build_field(
    document: SourceDocument,
    spec: FieldSpec,
    claim: FieldClaim,
    hedge_lexicon: tuple[str, ...],
) -> ExtractedField:
    anchors: list[EvidenceAnchor] = []
    if claim.evidence:
        anchors.append(anchor_evidence(document, claim.evidence))
    try:
        normalized = normalize_value(spec, claim.raw_value, hedge_lexicon)
    except ValueOutOfVocabulary as exc:
        return ExtractedField(
            field_id=spec.field_id,
            status=STATUS_AMBIGUOUS,
            raw_value=claim.raw_value,
            evidence=anchors,
            note=str(exc),
        )
    except (NumericParse, UnknownUnit) as exc:
        return ExtractedField(
            field_id=spec.field_id,
            status=STATUS_FAILED,
            raw_value=claim.raw_value,
            evidence=anchors,
            note=str(exc),
        )
    if normalized.ambiguous_reason is not None:
        return ExtractedField(
            field_id=spec.field_id,
            status=STATUS_AMBIGUOUS,
            raw_value=claim.raw_value,
            evidence=anchors,
            note=normalized.ambiguous_reason,
        )
    return ExtractedField(
        field_id=spec.field_id,
        status=STATUS_PRESENT,
        raw_value=claim.raw_value,
        value=normalized.value,
        unit=normalized.unit,
        evidence=anchors,
    )


def _merge(candidates: list[ExtractedField]) -> ExtractedField:
    best = candidates[0]
    for cand in candidates[1:]:
        if _MERGE_RANK[cand.status] > _MERGE_RANK[best.status]:
            best = cand
    return best


def _finalize(spec: FieldSpec, extracted: ExtractedField) -> ExtractedField:
    anchored = any(a.anchored for a in extracted.evidence)
    extracted.needs_review = (
        spec.requires_review
        or extracted.status in (STATUS_AMBIGUOUS, STATUS_FAILED)
        or (extracted.status == STATUS_PRESENT and not anchored)
    )
    return extracted


def _all_failed_record(
    document: SourceDocument, schema: Schema, backend_name: str, note: str
) -> MachineRecord:
    fields = {
        spec.field_id: _finalize(spec, _failed_field(spec, note))
        for spec in schema.fields
    }
    return MachineRecord(
        doc_id=document.doc_id,
        schema_id=schema.schema_id,
        schema_version=schema.version,
        backend=backend_name,
        fields=fields,
    )


def extract_report(
    document: SourceDocument,
    schema: Schema,
    backend,
    hedge_lexicon: tuple[str, ...] = DEFAULT_HEDGE_LEXICON,
) -> MachineRecord:
    """Extract every schema field from one document.

    Raises BackendUnreachable when the backend cannot be reached at all;
    every other problem is recorded on the affected fields.
    """
    text = document.full_text()
    window_claims: list[dict[str, FieldClaim]] = []
    for window in _windows(text):
        try:
            claims = backend.extract(window, schema)
        except ModelOutputUnparseable:
            try:
                claims = backend.extract(window, schema, repair=True)
            except ModelOutputUnparseable as exc:
                return _all_failed_record(
                    document,
                    schema,
                    getattr(backend, "name", "unknown"),
                    f"backend output unparseable after repair attempt: {exc.message}",
                )
        window_claims.append(claims)

    fields: dict[str, ExtractedField] = {}
    for spec in schema.fields:
        candidates = []
        for claims in window_claims:
            claim = claims.get(spec.field_id)
            if claim is None:
                candidates.append(_missing_field(spec))
            else:
                candidates.append(_build_field(document, spec, claim, hedge_lexicon))
        fields[spec.field_id] = _finalize(spec, _merge(candidates))

    return MachineRecord(
        doc_id=document.doc_id,
        schema_id=schema.schema_id,
        schema_version=schema.version,
        backend=getattr(backend, "name", "unknown"),
        fields=fields,
    )


def field_to_dict(extracted: ExtractedField) -> dict:
    return {
        "field_id": extracted.field_id,
        "status": extracted.status,
        "raw_value": extracted.raw_value,
        "value": extracted.value,
        "unit": extracted.unit,
        "evidence": [
            {
                "text": a.text,
                "start": a.start,
                "end": a.end,
                "page_number": a.page_number,
                "method": a.method,
            }
            for a in extracted.evidence
        ],
        "needs_review": extracted.needs_review,
        "note": extracted.note,
    }


def field_from_dict(raw: dict) -> ExtractedField:
    return ExtractedField(
        field_id=raw["field_id"],
        status=raw["status"],
        raw_value=raw.get("raw_value"),
        value=raw.get("value"),
        unit=raw.get("unit"),
        evidence=[
            EvidenceAnchor(
                text=e["text"],
                start=e.get("start"),
                end=e.get("end"),
                page_number=e.get("page_number"),
                method=e.get("method", "unanchored"),
            )
            for e in raw.get("evidence", [])
        ],
        needs_review=bool(raw.get("needs_review", False)),
        note=raw.get("note"),
    )


def record_to_dict(record: MachineRecord) -> dict:
    return {
        "doc_id": record.doc_id,
        "schema_id": record.schema_id,
        "schema_version": record.schema_version,
        "backend": record.backend,
        "fields": [field_to_dict(f) for f in record.field_list()],
    }


def record_from_dict(raw: dict) -> MachineRecord:
    fields = [field_from_dict(f) for f in raw["fields"]]
    return MachineRecord(
        doc_id=raw["doc_id"],
        schema_id=raw["schema_id"],
        schema_version=raw["schema_version"],
        backend=raw.get("backend", "unknown"),
        fields={f.field_id: f for f in fields},
    )
