"""Structured extraction and human verification for ultrasound reports.

The package converts free-text reports (PDF or plain text) into
schema-structured records, anchors every extracted value to an evidence
sentence in the source document, and drives a review workflow in which only
fields that require clinical judgment demand mandatory verification.
"""

__version__ = "0.1.0"
