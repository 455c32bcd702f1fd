"""Cohort CSV exports.

Every cohort exports as two files with the identical header: report_id,
filename, one column per schema field in schema order, then one
review-status column per mandatory-review field.

The machine version carries the untouched machine values; the human
version carries effective values (human overlay where present, machine
value otherwise). Review-status columns are audit metadata rendered
identically in both versions, so the two files differ in exactly the
value cells where an overlay entry departs from the machine value.
Cells for values a record does not hold (missing, ambiguous, failed, or
cleared by an editor) are empty.
"""

from __future__ import annotations

import csv
import threading
from pathlib import Path

from .errors import SchemaMismatch, UnknownCohort
from .extraction import STATUS_PRESENT
from .schema import Schema, SchemaRegistry, review_surface
from .store import REVIEW_UNREVIEWED, RecordState, ReviewStore

MACHINE_KIND = "machine"
HUMAN_KIND = "human"
EXPORT_KINDS = (MACHINE_KIND, HUMAN_KIND)


def render_cell(value: float | str | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return str(int(value)) if value.is_integer() else repr(value)
    return str(value)


def export_header(schema: Schema) -> list[str]:
    surface = [f.field_id for f in review_surface(schema)]
    return (
        ["report_id", "filename"]
        + schema.field_ids()
        + [f"{fid}_review_status" for fid in surface]
    )


def _review_columns(state: RecordState, schema: Schema) -> list[str]:
    return [
        state.review_status.get(spec.field_id, REVIEW_UNREVIEWED)
        for spec in review_surface(schema)
    ]


def _machine_row(state: RecordState, schema: Schema) -> list[str]:
    row = [state.report_id, state.filename]
    for fid in schema.field_ids():
        extracted = state.machine.fields.get(fid)
        value = (
            extracted.value
            if extracted is not None and extracted.status == STATUS_PRESENT
            else None
        )
        row.append(render_cell(value))
    row.extend(_review_columns(state, schema))
    return row


def _human_row(state: RecordState, schema: Schema) -> list[str]:
    row = [state.report_id, state.filename]
    for fid in schema.field_ids():
        row.append(render_cell(state.effective_value(fid)))
    row.extend(_review_columns(state, schema))
    return row


def render_export(records: list[RecordState], schema: Schema, kind: str) -> str:
    import io

    build_row = _machine_row if kind == MACHINE_KIND else _human_row
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(export_header(schema))
    for state in sorted(records, key=lambda r: (r.filename, r.report_id)):
        writer.writerow(build_row(state, schema))
    return buffer.getvalue()


class CsvExporter:
    """Writes cohort export files into the spool directory."""

    def __init__(self, spool_dir: Path | str, registry: SchemaRegistry, store: ReviewStore):
        self.spool_dir = Path(spool_dir)
        self.spool_dir.mkdir(parents=True, exist_ok=True)
        self.registry = registry
        self.store = store
        self._lock = threading.Lock()

    def path_for(self, cohort: str, kind: str) -> Path:
        return self.spool_dir / f"{cohort}_{kind}.csv"

    def _cohort_schema(self, records: list[RecordState], cohort: str) -> Schema:
        if not records:
            raise UnknownCohort(f"no records in cohort {cohort!r}")
        schema_ids = {r.schema_id for r in records}
        if len(schema_ids) > 1:
            raise SchemaMismatch(
                f"cohort {cohort!r} mixes schemas: {sorted(schema_ids)}"
            )
        return self.registry.get(records[0].schema_id)

    def write(self, cohort: str, kind: str) -> Path:
        if kind not in EXPORT_KINDS:
            raise UnknownCohort(f"unknown export kind {kind!r}")
        with self._lock:
            records = self.store.list_records(cohort)
            schema = self._cohort_schema(records, cohort)
            content = render_export(records, schema, kind)
            target = self.path_for(cohort, kind)
            tmp = target.with_suffix(".tmp")
            tmp.write_text(content, encoding="utf-8")
            tmp.rename(target)
            return target

    def write_machine(self, cohort: str) -> Path:
        return self.write(cohort, MACHINE_KIND)

    def write_human(self, cohort: str) -> Path:
        return self.write(cohort, HUMAN_KIND)

    def write_both(self, cohort: str) -> tuple[Path, Path]:
        return self.write_machine(cohort), self.write_human(cohort)

    def on_records_changed(self, cohort: str) -> None:
        """New extraction landed: both exports gain a row."""
        self.write_both(cohort)

    def on_human_change(self, cohort: str) -> None:
        """Human review action: the human export file is rewritten now;
        the machine version re-renders on demand."""
        self.write_human(cohort)

    def list_exports(self) -> list[dict]:
        out = []
        for path in sorted(self.spool_dir.glob("*_*.csv")):
            stem = path.stem
            cohort, _, kind = stem.rpartition("_")
            if kind not in EXPORT_KINDS or not cohort:
                continue
            out.append(
                {
                    "cohort": cohort,
                    "kind": kind,
                    "filename": path.name,
                    "size_bytes": path.stat().st_size,
                }
            )
        return out
