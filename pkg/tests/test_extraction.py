from __future__ import annotations

import json

import pytest

from sonostruct.errors import BackendUnreachable, ModelOutputUnparseable
from sonostruct.extraction import (
    FIELD_STATUSES,
    STATUS_AMBIGUOUS,
    STATUS_FAILED,
    STATUS_MISSING,
    STATUS_PRESENT,
    WINDOW_CHARS,
    FieldClaim,
    extract_report,
    record_from_dict,
    record_to_dict,
)
from sonostruct.ingest import ingest_text
from sonostruct.schema import load_schema

SCHEMA_DOC = {
    "schema_id": "mini",
    "version": "1.0",
    "synonyms": {},
    "fields": [
        {
            "field_id": "lesion_size",
            "label": "Lesion size",
            "trust_class": "quantitative",
            "value_type": "numeric",
            "canonical_unit": "mm",
        },
        {
            "field_id": "pod_obliteration",
            "label": "POD obliteration",
            "trust_class": "interpretive",
            "value_type": "categorical",
            "allowed_values": ["none", "partial", "complete"],
        },
        {
            "field_id": "free_fluid",
            "label": "Free fluid",
            "trust_class": "quantitative",
            "value_type": "boolean",
        },
    ],
}

TEXT = (
    "The lesion measures 12 mm at its widest point. "
    "The pouch of Douglas shows partial obliteration. "
    "No free fluid is seen."
)


class ScriptedBackend:
    """Returns a fixed claims dict regardless of the window text."""

    name = "scripted"

    def __init__(self, claims):
        self.claims = claims
        self.calls = []

    def extract(self, text, schema, repair=False):
        self.calls.append((text, repair))
        return dict(self.claims)


def make_schema():
    return load_schema(json.dumps(SCHEMA_DOC))


def make_doc(text=TEXT):
    return ingest_text(text.encode(), "note.txt")


def full_claims():
    return {
        "lesion_size": FieldClaim(
            "12 mm", evidence="The lesion measures 12 mm at its widest point."
        ),
        "pod_obliteration": FieldClaim(
            "partial", evidence="The pouch of Douglas shows partial obliteration."
        ),
        "free_fluid": FieldClaim("no", evidence="No free fluid is seen."),
    }


def test_all_fields_present_and_normalized():
    record = extract_report(make_doc(), make_schema(), ScriptedBackend(full_claims()))
    assert set(record.fields) == {"lesion_size", "pod_obliteration", "free_fluid"}
    size = record.fields["lesion_size"]
    assert size.status == STATUS_PRESENT
    assert size.value == pytest.approx(12.0)
    assert size.unit == "mm"
    assert size.evidence[0].method == "exact"
    assert record.fields["pod_obliteration"].value == "partial"
    assert record.fields["free_fluid"].value == "no"
    assert record.backend == "scripted"


def test_every_schema_field_appears_with_known_status():
    record = extract_report(make_doc(), make_schema(), ScriptedBackend({}))
    schema = make_schema()
    assert list(record.fields) == schema.field_ids()
    for f in record.field_list():
        assert f.status in FIELD_STATUSES


def test_unclaimed_field_is_missing():
    claims = {"lesion_size": FieldClaim("12 mm")}
    record = extract_report(make_doc(), make_schema(), ScriptedBackend(claims))
    assert record.fields["pod_obliteration"].status == STATUS_MISSING
    assert record.fields["free_fluid"].status == STATUS_MISSING


def test_unknown_claim_ids_are_ignored():
    claims = full_claims()
    claims["not_in_schema"] = FieldClaim("x")
    record = extract_report(make_doc(), make_schema(), ScriptedBackend(claims))
    assert "not_in_schema" not in record.fields


def test_needs_review_rules():
    record = extract_report(make_doc(), make_schema(), ScriptedBackend(full_claims()))
    # Quantitative, present, anchored: trusted.
    assert record.fields["lesion_size"].needs_review is False
    # Interpretive fields always require review.
    assert record.fields["pod_obliteration"].needs_review is True


def test_missing_quantitative_field_is_not_flagged():
    record = extract_report(make_doc(), make_schema(), ScriptedBackend({}))
    assert record.fields["lesion_size"].needs_review is False
    assert record.fields["pod_obliteration"].needs_review is True


def test_present_without_evidence_is_flagged():
    claims = {"lesion_size": FieldClaim("12 mm")}
    record = extract_report(make_doc(), make_schema(), ScriptedBackend(claims))
    field = record.fields["lesion_size"]
    assert field.status == STATUS_PRESENT
    assert field.evidence == []
    assert field.needs_review is True


def test_fabricated_evidence_keeps_value_but_flags():
    claims = {"lesion_size": FieldClaim("12 mm", evidence="Nothing like this exists.")}
    record = extract_report(make_doc(), make_schema(), ScriptedBackend(claims))
    field = record.fields["lesion_size"]
    assert field.status == STATUS_PRESENT
    assert field.evidence[0].method == "unanchored"
    assert field.needs_review is True


def test_hedged_value_is_ambiguous():
    claims = {"free_fluid": FieldClaim("cannot exclude free fluid")}
    record = extract_report(make_doc(), make_schema(), ScriptedBackend(claims))
    field = record.fields["free_fluid"]
    assert field.status == STATUS_AMBIGUOUS
    assert field.value is None
    assert field.note and "cannot exclude" in field.note
    assert field.needs_review is True


def test_out_of_vocabulary_is_ambiguous():
    claims = {"pod_obliteration": FieldClaim("total")}
    record = extract_report(make_doc(), make_schema(), ScriptedBackend(claims))
    field = record.fields["pod_obliteration"]
    assert field.status == STATUS_AMBIGUOUS
    assert field.raw_value == "total"
    assert field.needs_review is True


def test_bad_number_is_extraction_failed():
    claims = {"lesion_size": FieldClaim("quite large")}
    record = extract_report(make_doc(), make_schema(), ScriptedBackend(claims))
    field = record.fields["lesion_size"]
    assert field.status == STATUS_FAILED
    assert field.needs_review is True


def test_foreign_unit_is_extraction_failed():
    claims = {"lesion_size": FieldClaim("12 ml")}
    record = extract_report(make_doc(), make_schema(), ScriptedBackend(claims))
    assert record.fields["lesion_size"].status == STATUS_FAILED


class WindowAwareBackend:
    """Claims a field only when its sentence is inside the window."""

    name = "windowed"

    def __init__(self):
        self.calls = 0

    def extract(self, text, schema, repair=False):
        self.calls += 1
        claims = {}
        if "lesion measures 12 mm" in text:
            claims["lesion_size"] = FieldClaim("12 mm")
        return claims


def test_long_documents_are_windowed_and_merged():
    filler = "Unremarkable survey line. " * 600
    text = filler + "The lesion measures 12 mm."
    assert len(text) > WINDOW_CHARS
    doc = make_doc(text)
    backend = WindowAwareBackend()
    record = extract_report(doc, make_schema(), backend)
    assert backend.calls >= 2
    assert record.fields["lesion_size"].status == STATUS_PRESENT
    assert record.fields["lesion_size"].value == pytest.approx(12.0)


class PerWindowBackend:
    """Returns a different scripted claims dict per window, in order."""

    name = "per_window"

    def __init__(self, per_window):
        self.per_window = per_window
        self.calls = 0

    def extract(self, text, schema, repair=False):
        claims = self.per_window[min(self.calls, len(self.per_window) - 1)]
        self.calls += 1
        return dict(claims)


def long_doc():
    return make_doc("Unremarkable survey line. " * 700)


def test_merge_prefers_more_informative_status():
    backend = PerWindowBackend(
        [
            {"lesion_size": FieldClaim("fuzzy size")},
            {"lesion_size": FieldClaim("9 mm")},
        ]
    )
    record = extract_report(long_doc(), make_schema(), backend)
    field = record.fields["lesion_size"]
    assert field.status == STATUS_PRESENT
    assert field.value == pytest.approx(9.0)


def test_merge_ties_keep_first_window():
    backend = PerWindowBackend(
        [
            {"lesion_size": FieldClaim("9 mm")},
            {"lesion_size": FieldClaim("21 mm")},
        ]
    )
    record = extract_report(long_doc(), make_schema(), backend)
    assert record.fields["lesion_size"].value == pytest.approx(9.0)


class RepairableBackend:
    """Unparseable on the plain pass, parseable on the repair pass."""

    name = "repairable"

    def __init__(self, claims):
        self.claims = claims
        self.repair_flags = []

    def extract(self, text, schema, repair=False):
        self.repair_flags.append(repair)
        if not repair:
            raise ModelOutputUnparseable("not json")
        return dict(self.claims)


def test_unparseable_output_gets_one_repair_attempt():
    backend = RepairableBackend(full_claims())
    record = extract_report(make_doc(), make_schema(), backend)
    assert backend.repair_flags == [False, True]
    assert record.fields["lesion_size"].status == STATUS_PRESENT


class HopelessBackend:
    name = "hopeless"

    def extract(self, text, schema, repair=False):
        raise ModelOutputUnparseable("still not json")


def test_repair_failure_fails_every_field_without_raising():
    record = extract_report(make_doc(), make_schema(), HopelessBackend())
    assert len(record.fields) == 3
    for field in record.field_list():
        assert field.status == STATUS_FAILED
        assert field.needs_review is True
        assert "unparseable after repair attempt" in field.note


class DownBackend:
    name = "down"

    def extract(self, text, schema, repair=False):
        raise BackendUnreachable("connection refused")


def test_unreachable_backend_aborts_the_report():
    with pytest.raises(BackendUnreachable):
        extract_report(make_doc(), make_schema(), DownBackend())


def test_record_round_trips_through_dicts():
    record = extract_report(make_doc(), make_schema(), ScriptedBackend(full_claims()))
    payload = record_to_dict(record)
    wire = json.dumps(payload, sort_keys=True)
    rebuilt = record_from_dict(json.loads(wire))
    assert json.dumps(record_to_dict(rebuilt), sort_keys=True) == wire


def test_record_has_no_timing_or_confidence_payload():
    record = extract_report(make_doc(), make_schema(), ScriptedBackend(full_claims()))
    payload = record_to_dict(record)
    assert set(payload) == {"doc_id", "schema_id", "schema_version", "backend", "fields"}
    assert "confidence" not in json.dumps(payload)
