"""Error taxonomy shared by every module and mirrored by the HTTP API.

Each error carries a stable ``code`` token (what API clients switch on) and
the HTTP status class it maps to: contract violations are 4xx, backend and
transport problems are 5xx.
"""

from __future__ import annotations

from typing import Any


class ServiceError(Exception):
    """Base class for all domain errors."""

    code = "Internal"
    http_status = 500

    def __init__(self, message: str, detail: Any = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


# -- schema registry ---------------------------------------------------------

class SchemaParse(ServiceError):
    code = "SchemaParse"
    http_status = 400


class SchemaEmpty(ServiceError):
    code = "SchemaEmpty"
    http_status = 400


class DuplicateFieldId(ServiceError):
    code = "DuplicateFieldId"
    http_status = 400


class InvalidFieldSpec(ServiceError):
    code = "InvalidFieldSpec"
    http_status = 400


class UnknownSchema(ServiceError):
    code = "UnknownSchema"
    http_status = 404


# -- document ingest ---------------------------------------------------------

class MalformedPdf(ServiceError):
    code = "MalformedPdf"
    http_status = 400


class NoTextLayer(ServiceError):
    code = "NoTextLayer"
    http_status = 400


class EmptyDocument(ServiceError):
    code = "EmptyDocument"
    http_status = 400


class UnknownDocument(ServiceError):
    code = "UnknownDocument"
    http_status = 404


# -- extraction --------------------------------------------------------------

class ModelOutputUnparseable(ServiceError):
    code = "ModelOutputUnparseable"
    http_status = 502


class BackendUnreachable(ServiceError):
    code = "BackendUnreachable"
    http_status = 502


# -- normalization -----------------------------------------------------------

class UnknownUnit(ServiceError):
    code = "UnknownUnit"
    http_status = 400


class NumericParse(ServiceError):
    code = "NumericParse"
    http_status = 400


class ValueOutOfVocabulary(ServiceError):
    code = "ValueOutOfVocabulary"
    http_status = 400


# -- evidence ----------------------------------------------------------------

class MissingEvidence(ServiceError):
    code = "MissingEvidence"
    http_status = 404


# -- review store ------------------------------------------------------------

class DuplicateReport(ServiceError):
    code = "DuplicateReport"
    http_status = 409

    def __init__(self, message: str, report_id: str):
        super().__init__(message, detail={"report_id": report_id})
        self.report_id = report_id


class UnknownReport(ServiceError):
    code = "UnknownReport"
    http_status = 404


class UnknownField(ServiceError):
    code = "UnknownField"
    http_status = 404


# -- batch jobs --------------------------------------------------------------

class BatchLimitExceeded(ServiceError):
    code = "BatchLimitExceeded"
    http_status = 413


class EmptyBatch(ServiceError):
    code = "EmptyBatch"
    http_status = 400


class InvalidUpload(ServiceError):
    code = "InvalidUpload"
    http_status = 400


class UnknownJob(ServiceError):
    code = "UnknownJob"
    http_status = 404


class AlreadyTerminal(ServiceError):
    code = "AlreadyTerminal"
    http_status = 409


# -- exporter ----------------------------------------------------------------

class SchemaMismatch(ServiceError):
    code = "SchemaMismatch"
    http_status = 400


class UnknownCohort(ServiceError):
    code = "UnknownCohort"
    http_status = 404


# -- service -----------------------------------------------------------------

class ConfigInvalid(ServiceError):
    code = "ConfigInvalid"
    http_status = 400


class AddressInUse(ServiceError):
    code = "AddressInUse"
    http_status = 500
