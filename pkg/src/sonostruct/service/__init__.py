"""HTTP service exposing ingestion, review, and export over a versioned API."""

from sonostruct.service.app import Application, create_app

__all__ = ["Application", "create_app"]
