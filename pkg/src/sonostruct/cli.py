"""Command line front end: serve the API, run extractions, build corpora."""

from __future__ import annotations

import dataclasses
import json
import socket
import sys
from pathlib import Path

import click

from sonostruct import __version__
from sonostruct.backends import ChatHttpBackend, RuleBasedBackend
from sonostruct.config import ServiceConfig, load_config, parse_listen_addr
from sonostruct.corpus import generate_corpus
from sonostruct.defaults import build_default_document, default_schema
from sonostruct.errors import AddressInUse, ServiceError
from sonostruct.export import CsvExporter
from sonostruct.pipeline import FILE_FAILED, process_file
from sonostruct.schema import SchemaRegistry, load_schema
from sonostruct.store import DocumentStore, ReviewStore


def _load_service_config(config_path: str | None, **overrides: object) -> ServiceConfig:
    config = load_config(config_path)
    applied = {k: v for k, v in overrides.items() if v is not None}
    if applied:
        config = dataclasses.replace(config, **applied)
    return config


def _build_registry(config: ServiceConfig) -> SchemaRegistry:
    registry = SchemaRegistry([default_schema()])
    for raw_path in config.schema_paths:
        registry.register(load_schema(Path(raw_path).read_bytes()))
    return registry


def _build_backend(config: ServiceConfig):
    if config.backend.kind == "chat":
        return ChatHttpBackend(
            base_url=config.backend.base_url,
            model=config.backend.model,
            timeout_s=config.backend.timeout_s,
        )
    return RuleBasedBackend()


def _fail(exc: ServiceError) -> click.ClickException:
    return click.ClickException(f"{exc.code}: {exc.message}")


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Structure ultrasound reports into reviewable, exportable records."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON config file.")
@click.option("--listen", "listen_addr", default=None, help="host:port to bind.")
@click.option("--data-dir", default=None, help="Directory for documents, records, and jobs.")
@click.option("--spool-dir", default=None, help="Directory for CSV exports.")
@click.option("--workers", type=int, default=None, help="Concurrent extraction workers.")
@click.option("--frontend-dir", default=None, help="Static UI directory to serve at /.")
def serve(
    config_path: str | None,
    listen_addr: str | None,
    data_dir: str | None,
    spool_dir: str | None,
    workers: int | None,
    frontend_dir: str | None,
) -> None:
    """Run the HTTP service."""
    import uvicorn

    from sonostruct.service.app import Application, create_app

    try:
        config = _load_service_config(
            config_path,
            listen_addr=listen_addr,
            data_dir=data_dir,
            spool_dir=spool_dir,
            workers=workers,
            frontend_dir=frontend_dir,
        )
        host, port = parse_listen_addr(config.listen_addr)
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            probe.bind((host, port))
        except OSError as exc:
            raise AddressInUse(f"cannot bind {config.listen_addr}: {exc}") from None
        finally:
            probe.close()
        app = create_app(Application(config))
    except ServiceError as exc:
        raise _fail(exc) from None
    click.echo(f"listening on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON config file.")
@click.option("--data-dir", default=None, help="Directory for documents and records.")
@click.option("--spool-dir", default=None, help="Directory for CSV exports.")
@click.option("--schema", "schema_path", type=click.Path(dir_okay=False), default=None, help="Schema JSON file to extract against.")
@click.option("--schema-id", default=None, help="Registered schema id to extract against.")
@click.option("--backend", "backend_kind", type=click.Choice(["rules", "chat"]), default=None, help="Override the configured backend kind.")
@click.option("--cohort", default="cli", show_default=True, help="Cohort the records and exports are grouped under.")
def extract(
    paths: tuple[str, ...],
    config_path: str | None,
    data_dir: str | None,
    spool_dir: str | None,
    schema_path: str | None,
    schema_id: str | None,
    backend_kind: str | None,
    cohort: str,
) -> None:
    """Extract each file in-process and print one JSON result line per file.

    Exits non-zero when any file fails outright. Schema problems and
    unreadable paths abort before any extraction runs.
    """
    try:
        config = _load_service_config(config_path, data_dir=data_dir, spool_dir=spool_dir)
        if backend_kind is not None:
            config = dataclasses.replace(
                config,
                backend=dataclasses.replace(config.backend, kind=backend_kind),
            )
        registry = _build_registry(config)
        if schema_path is not None:
            file_schema = load_schema(Path(schema_path).read_bytes())
            registry.register(file_schema)
            schema = registry.get(schema_id or file_schema.schema_id)
        else:
            schema = registry.get(schema_id or default_schema().schema_id)
    except OSError as exc:
        raise click.ClickException(f"cannot read schema file: {exc}") from None
    except ServiceError as exc:
        raise _fail(exc) from None

    documents = DocumentStore(config.data_dir)
    store = ReviewStore(config.data_dir)
    store.load()
    exporter = CsvExporter(config.spool_dir, registry, store)
    backend = _build_backend(config)

    failures = 0
    try:
        for path in paths:
            result = process_file(
                path,
                schema=schema,
                backend=backend,
                documents=documents,
                store=store,
                cohort=cohort,
                hedge_lexicon=config.hedge_lexicon,
            )
            if result.status == FILE_FAILED:
                failures += 1
            click.echo(
                json.dumps(
                    {
                        "filename": result.filename,
                        "status": result.status,
                        "report_id": result.report_id,
                        "doc_id": result.doc_id,
                        "error": result.error,
                    }
                )
            )
        if store.list_records(cohort):
            exporter.write_both(cohort)
    finally:
        close = getattr(backend, "close", None)
        if close is not None:
            close()
    if failures:
        sys.exit(1)


@main.command()
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--count", default=100, show_default=True, type=click.IntRange(1, 5000))
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--format", "fmt", default="pdf", show_default=True, type=click.Choice(["pdf", "txt"]))
def corpus(out_dir: str, count: int, seed: int, fmt: str) -> None:
    """Generate a synthetic report corpus with a ground-truth sidecar."""
    sidecar = generate_corpus(Path(out_dir), count=count, seed=seed, fmt=fmt)
    click.echo(
        json.dumps(
            {
                "out_dir": str(out_dir),
                "count": count,
                "seed": seed,
                "format": fmt,
                "sidecar": str(sidecar),
            }
        )
    )


@main.command("schema-dump")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write to a file instead of stdout.")
def schema_dump(out: str | None) -> None:
    """Print the built-in schema as an editable JSON document."""
    text = json.dumps(build_default_document(), indent=2, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


if __name__ == "__main__":
    main()
