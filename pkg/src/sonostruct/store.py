"""Persistent stores for documents and review records.

A review record pairs the immutable machine extraction with a human
overlay. Records persist as append-only event logs (one ndjson file per
record): a create line holding the machine record, then one line per
human action. State is rebuilt by replay, so the machine version is
never rewritten and the changelog is the file itself.

The record id is derived from document and schema ids, so re-extracting
the same document against the same schema collides deterministically
regardless of worker scheduling.

Two invariants the mutation paths maintain:
- a field's review status is "edited" exactly when a human overlay entry
  exists for it; confirming an edited field records the confirmation but
  the status stays "edited".
- batch saves are all-or-nothing: every edit is validated before any is
  applied, and the applied batch is appended as one write.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .errors import (
    DuplicateReport,
    UnknownDocument,
    UnknownField,
    UnknownReport,
)
from .extraction import (
    STATUS_PRESENT,
    MachineRecord,
    record_from_dict,
    record_to_dict,
)
from .ingest import PageText, SourceDocument
from .normalize import (
    convert_quantity,
    normalize_boolean,
    normalize_categorical,
    parse_quantity,
)
from .schema import FieldSpec, Schema

REVIEW_UNREVIEWED = "unreviewed"
REVIEW_CONFIRMED = "confirmed"
REVIEW_EDITED = "edited"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def make_report_id(doc_id: str, schema_id: str) -> str:
    digest = hashlib.sha256(f"{doc_id}:{schema_id}".encode("utf-8")).hexdigest()
    return "r" + digest[:16]


@dataclass(frozen=True)
class EditRequest:
    field_id: str
    value: object


@dataclass
class HumanEdit:
    field_id: str
    value: float | str | None
    entered: str | None
    editor: str
    at: str
    seq: int


@dataclass
class RecordState:
    report_id: str
    doc_id: str
    schema_id: str
    schema_version: str
    cohort: str
    filename: str
    created_at: str
    machine: MachineRecord
    overlay: dict[str, HumanEdit] = field(default_factory=dict)
    review_status: dict[str, str] = field(default_factory=dict)
    changelog: list[dict] = field(default_factory=list)
    seq: int = 0

    def effective_value(self, field_id: str) -> float | str | None:
        if field_id in self.overlay:
            return self.overlay[field_id].value
        extracted = self.machine.fields.get(field_id)
        if extracted is not None and extracted.status == STATUS_PRESENT:
            return extracted.value
        return None


def normalize_edit_value(spec: FieldSpec, value: object) -> float | str | None:
    """Validate and normalize a human-entered value; None clears the cell."""
    if value is None:
        return None
    if isinstance(value, bool):
        value = "yes" if value else "no"
    if isinstance(value, (int, float)) and spec.value_type == "numeric":
        return float(value)
    text = str(value).strip()
    if not text:
        return None
    if spec.value_type == "numeric":
        number, unit = parse_quantity(text)
        return convert_quantity(number, unit or spec.canonical_unit, spec.canonical_unit)
    if spec.value_type == "categorical":
        return normalize_categorical(spec, text).value
    if spec.value_type == "boolean":
        return normalize_boolean(spec, text).value
    return text


def state_snapshot(state: RecordState) -> dict:
    """Full JSON-compatible view of one record's review state."""
    return {
        "report_id": state.report_id,
        "doc_id": state.doc_id,
        "schema_id": state.schema_id,
        "schema_version": state.schema_version,
        "cohort": state.cohort,
        "filename": state.filename,
        "created_at": state.created_at,
        "machine": record_to_dict(state.machine),
        "overlay": {
            fid: {
                "value": e.value,
                "entered": e.entered,
                "editor": e.editor,
                "at": e.at,
                "seq": e.seq,
            }
            for fid, e in sorted(state.overlay.items())
        },
        "review_status": dict(sorted(state.review_status.items())),
        "changelog": list(state.changelog),
    }


class ReviewStore:
    """All review records, backed by per-record event logs."""

    def __init__(
        self,
        data_dir: Path | str,
        on_human_change: Callable[[str], None] | None = None,
    ):
        self.records_dir = Path(data_dir) / "records"
        self.records_dir.mkdir(parents=True, exist_ok=True)
        self.on_human_change = on_human_change
        self._records: dict[str, RecordState] = {}
        self._lock = threading.RLock()

    # -- loading ---------------------------------------------------------

    def load(self) -> int:
        with self._lock:
            self._records.clear()
            for path in sorted(self.records_dir.glob("*.ndjson")):
                state = self._replay(path)
                if state is not None:
                    self._records[state.report_id] = state
            return len(self._records)

    def _replay(self, path: Path) -> RecordState | None:
        state: RecordState | None = None
        with path.open("r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                if event.get("kind") == "create":
                    state = RecordState(
                        report_id=event["report_id"],
                        doc_id=event["doc_id"],
                        schema_id=event["schema_id"],
                        schema_version=event["schema_version"],
                        cohort=event["cohort"],
                        filename=event["filename"],
                        created_at=event["created_at"],
                        machine=record_from_dict(event["machine"]),
                    )
                    self._init_review_status(state)
                elif state is not None:
                    self._apply_event(state, event)
        return state

    def _init_review_status(self, state: RecordState) -> None:
        state.review_status = {
            fid: REVIEW_UNREVIEWED for fid in state.machine.fields
        }

    def _apply_event(self, state: RecordState, event: dict) -> None:
        action = event.get("action")
        seq = int(event.get("seq", state.seq + 1))
        state.seq = max(state.seq, seq)
        if action == "edit":
            field_id = event["field_id"]
            state.overlay[field_id] = HumanEdit(
                field_id=field_id,
                value=event.get("new_value"),
                entered=event.get("entered"),
                editor=event.get("editor", ""),
                at=event.get("at", ""),
                seq=seq,
            )
            state.review_status[field_id] = REVIEW_EDITED
            state.changelog.append(event)
        elif action == "confirm":
            field_id = event["field_id"]
            if field_id not in state.overlay:
                state.review_status[field_id] = REVIEW_CONFIRMED
            state.changelog.append(event)
        elif action == "batch_save":
            state.changelog.append(event)

    # -- creation --------------------------------------------------------

    def _path(self, report_id: str) -> Path:
        return self.records_dir / f"{report_id}.ndjson"

    def create(
        self,
        *,
        machine: MachineRecord,
        cohort: str,
        filename: str,
        created_at: str | None = None,
    ) -> RecordState:
        report_id = make_report_id(machine.doc_id, machine.schema_id)
        with self._lock:
            if report_id in self._records or self._path(report_id).exists():
                raise DuplicateReport(
                    f"report {report_id} already exists for this document and schema",
                    report_id=report_id,
                )
            state = RecordState(
                report_id=report_id,
                doc_id=machine.doc_id,
                schema_id=machine.schema_id,
                schema_version=machine.schema_version,
                cohort=cohort,
                filename=filename,
                created_at=created_at or utc_now(),
                machine=machine,
            )
            self._init_review_status(state)
            line = json.dumps(
                {
                    "kind": "create",
                    "report_id": state.report_id,
                    "doc_id": state.doc_id,
                    "schema_id": state.schema_id,
                    "schema_version": state.schema_version,
                    "cohort": state.cohort,
                    "filename": state.filename,
                    "created_at": state.created_at,
                    "machine": record_to_dict(machine),
                },
                ensure_ascii=False,
            )
            with self._path(report_id).open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")
            self._records[report_id] = state
            return state

    # -- lookup ----------------------------------------------------------

    def get(self, report_id: str) -> RecordState:
        with self._lock:
            state = self._records.get(report_id)
        if state is None:
            raise UnknownReport(f"no report {report_id!r}")
        return state

    def exists(self, doc_id: str, schema_id: str) -> bool:
        report_id = make_report_id(doc_id, schema_id)
        with self._lock:
            return report_id in self._records or self._path(report_id).exists()

    def list_records(self, cohort: str | None = None) -> list[RecordState]:
        with self._lock:
            records = list(self._records.values())
        if cohort is not None:
            records = [r for r in records if r.cohort == cohort]
        records.sort(key=lambda r: (r.filename, r.report_id))
        return records

    def cohorts(self) -> list[str]:
        with self._lock:
            return sorted({r.cohort for r in self._records.values()})

    # -- mutation --------------------------------------------------------

    def _require_spec(self, schema: Schema, state: RecordState, field_id: str) -> FieldSpec:
        spec = schema.get(field_id)
        if spec is None or field_id not in state.machine.fields:
            raise UnknownField(f"report {state.report_id} has no field {field_id!r}")
        return spec

    def _append_events(self, state: RecordState, events: list[dict]) -> None:
        payload = "".join(json.dumps(e, ensure_ascii=False) + "\n" for e in events)
        with self._path(state.report_id).open("a", encoding="utf-8") as handle:
            handle.write(payload)
            handle.flush()

    def _edit_event(
        self, state: RecordState, spec: FieldSpec, value: object, editor: str, at: str
    ) -> dict:
        normalized = normalize_edit_value(spec, value)
        old = state.effective_value(spec.field_id)
        state.seq += 1
        entered = None if value is None else str(value)
        return {
            "kind": "event",
            "seq": state.seq,
            "at": at,
            "action": "edit",
            "field_id": spec.field_id,
            "old_value": old,
            "new_value": normalized,
            "entered": entered,
            "editor": editor,
        }

    def edit_field(
        self, schema: Schema, report_id: str, field_id: str, value: object, editor: str
    ) -> RecordState:
        with self._lock:
            state = self.get(report_id)
            spec = self._require_spec(schema, state, field_id)
            event = self._edit_event(state, spec, value, editor, utc_now())
            self._append_events(state, [event])
            self._apply_event(state, event)
        self._notify(state.cohort)
        return state

    def confirm_field(
        self, schema: Schema, report_id: str, field_id: str, editor: str
    ) -> RecordState:
        with self._lock:
            state = self.get(report_id)
            self._require_spec(schema, state, field_id)
            state.seq += 1
            event = {
                "kind": "event",
                "seq": state.seq,
                "at": utc_now(),
                "action": "confirm",
                "field_id": field_id,
                "old_value": state.effective_value(field_id),
                "new_value": state.effective_value(field_id),
                "editor": editor,
            }
            self._append_events(state, [event])
            self._apply_event(state, event)
        self._notify(state.cohort)
        return state

    def batch_save(
        self, schema: Schema, report_id: str, edits: list[EditRequest], editor: str
    ) -> dict:
        """Apply a set of edits atomically; an empty set is a no-op."""
        with self._lock:
            state = self.get(report_id)
            if not edits:
                return {
                    "report_id": report_id,
                    "saved_count": 0,
                    "seq": state.seq,
                }
            # Validate everything before touching state or disk.
            specs = [self._require_spec(schema, state, e.field_id) for e in edits]
            for spec, e in zip(specs, edits):
                normalize_edit_value(spec, e.value)

            at = utc_now()
            events = [
                self._edit_event(state, spec, e.value, editor, at)
                for spec, e in zip(specs, edits)
            ]
            state.seq += 1
            events.append(
                {
                    "kind": "event",
                    "seq": state.seq,
                    "at": at,
                    "action": "batch_save",
                    "count": len(edits),
                    "editor": editor,
                }
            )
            self._append_events(state, events)
            for event in events:
                self._apply_event(state, event)
            receipt = {
                "report_id": report_id,
                "saved_count": len(edits),
                "seq": state.seq,
            }
        self._notify(state.cohort)
        return receipt

    def _notify(self, cohort: str) -> None:
        if self.on_human_change is not None:
            self.on_human_change(cohort)


class DocumentStore:
    """Raw document bytes plus the parsed text layer, by document id."""

    def __init__(self, data_dir: Path | str):
        self.docs_dir = Path(data_dir) / "documents"
        self.docs_dir.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, SourceDocument] = {}
        self._lock = threading.RLock()

    def _meta_path(self, doc_id: str) -> Path:
        return self.docs_dir / f"{doc_id}.json"

    def raw_path(self, doc_id: str) -> Path:
        return self.docs_dir / f"{doc_id}.bin"

    def has(self, doc_id: str) -> bool:
        with self._lock:
            return doc_id in self._cache or self._meta_path(doc_id).exists()

    def put(self, document: SourceDocument, raw: bytes) -> None:
        with self._lock:
            if self.has(document.doc_id):
                return
            tmp = self.raw_path(document.doc_id).with_suffix(".tmp")
            tmp.write_bytes(raw)
            tmp.rename(self.raw_path(document.doc_id))
            meta = {
                "doc_id": document.doc_id,
                "filename": document.filename,
                "media_type": document.media_type,
                "pages": [
                    {
                        "page_number": p.page_number,
                        "text": p.text,
                        "start_offset": p.start_offset,
                    }
                    for p in document.pages
                ],
            }
            meta_tmp = self._meta_path(document.doc_id).with_suffix(".tmpjson")
            meta_tmp.write_text(json.dumps(meta, ensure_ascii=False), encoding="utf-8")
            meta_tmp.rename(self._meta_path(document.doc_id))
            self._cache[document.doc_id] = document

    def get(self, doc_id: str) -> SourceDocument:
        with self._lock:
            cached = self._cache.get(doc_id)
            if cached is not None:
                return cached
            path = self._meta_path(doc_id)
            if not path.exists():
                raise UnknownDocument(f"no document {doc_id!r}")
            meta = json.loads(path.read_text(encoding="utf-8"))
            document = SourceDocument(
                doc_id=meta["doc_id"],
                filename=meta["filename"],
                media_type=meta["media_type"],
                pages=tuple(
                    PageText(
                        page_number=p["page_number"],
                        text=p["text"],
                        start_offset=p["start_offset"],
                    )
                    for p in meta["pages"]
                ),
            )
            self._cache[doc_id] = document
            return document

    def get_raw(self, doc_id: str) -> bytes:
        path = self.raw_path(doc_id)
        if not path.exists():
            raise UnknownDocument(f"no document {doc_id!r}")
        return path.read_bytes()
