"""Service configuration.

Configuration files are JSON objects. Unknown keys are rejected so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigInvalid
from .normalize import DEFAULT_HEDGE_LEXICON

BACKEND_KINDS = ("rules", "chat")

_TOP_KEYS = {
    "listen_addr",
    "data_dir",
    "spool_dir",
    "workers",
    "create_dirs",
    "backend",
    "hedge_lexicon",
    "schema_paths",
    "frontend_dir",
}
_BACKEND_KEYS = {"kind", "base_url", "model", "timeout_s"}


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "rules"
    base_url: str = "http://127.0.0.1:11434"
    model: str = "llama3"
    timeout_s: float = 60.0


@dataclass(frozen=True)
class ServiceConfig:
    listen_addr: str = "127.0.0.1:8618"
    data_dir: str = "data"
    spool_dir: str = "spool"
    workers: int = 4
    create_dirs: bool = True
    backend: BackendConfig = field(default_factory=BackendConfig)
    hedge_lexicon: tuple[str, ...] = DEFAULT_HEDGE_LEXICON
    schema_paths: tuple[str, ...] = ()
    frontend_dir: str | None = None


def parse_listen_addr(addr: str) -> tuple[str, int]:
    host, sep, port_text = addr.rpartition(":")
    if not sep or not host:
        raise ConfigInvalid(f"listen_addr must be host:port, got {addr!r}")
    try:
        port = int(port_text)
    except ValueError as exc:
        raise ConfigInvalid(f"listen_addr port is not a number: {addr!r}") from exc
    if not 1 <= port <= 65535:
        raise ConfigInvalid(f"listen_addr port out of range: {port}")
    return host, port


def _backend_from_dict(raw: object) -> BackendConfig:
    if not isinstance(raw, dict):
        raise ConfigInvalid("backend must be an object")
    unknown = set(raw) - _BACKEND_KEYS
    if unknown:
        raise ConfigInvalid(f"unknown backend keys: {sorted(unknown)}")
    defaults = BackendConfig()
    kind = raw.get("kind", defaults.kind)
    if kind not in BACKEND_KINDS:
        raise ConfigInvalid(f"backend.kind must be one of {BACKEND_KINDS}")
    base_url = raw.get("base_url", defaults.base_url)
    if not isinstance(base_url, str) or not base_url:
        raise ConfigInvalid("backend.base_url must be a non-empty string")
    model = raw.get("model", defaults.model)
    if not isinstance(model, str) or not model:
        raise ConfigInvalid("backend.model must be a non-empty string")
    timeout_s = raw.get("timeout_s", defaults.timeout_s)
    if not isinstance(timeout_s, (int, float)) or isinstance(timeout_s, bool) or timeout_s <= 0:
        raise ConfigInvalid("backend.timeout_s must be a positive number")
    return BackendConfig(
        kind=kind, base_url=base_url, model=model, timeout_s=float(timeout_s)
    )


def _hedge_lexicon_from(raw: object) -> tuple[str, ...]:
    """Inline list of phrases, or a path to a file with one phrase per line."""
    if raw is None:
        return DEFAULT_HEDGE_LEXICON
    if isinstance(raw, str):
        path = Path(raw)
        if not path.exists():
            raise ConfigInvalid(f"no hedge lexicon file at {path}")
        lines = path.read_text(encoding="utf-8").splitlines()
        phrases = tuple(line.strip() for line in lines if line.strip())
        if not phrases:
            raise ConfigInvalid(f"hedge lexicon file {path} holds no phrases")
        return phrases
    if isinstance(raw, list) and all(isinstance(h, str) and h.strip() for h in raw):
        return tuple(raw)
    raise ConfigInvalid(
        "hedge_lexicon must be a list of non-empty phrases or a file path"
    )


def config_from_dict(raw: object) -> ServiceConfig:
    if not isinstance(raw, dict):
        raise ConfigInvalid("configuration must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigInvalid(f"unknown configuration keys: {sorted(unknown)}")
    defaults = ServiceConfig()

    listen_addr = raw.get("listen_addr", defaults.listen_addr)
    if not isinstance(listen_addr, str):
        raise ConfigInvalid("listen_addr must be a string")
    parse_listen_addr(listen_addr)

    data_dir = raw.get("data_dir", defaults.data_dir)
    spool_dir = raw.get("spool_dir", defaults.spool_dir)
    for key, value in (("data_dir", data_dir), ("spool_dir", spool_dir)):
        if not isinstance(value, str) or not value:
            raise ConfigInvalid(f"{key} must be a non-empty path")

    workers = raw.get("workers", defaults.workers)
    if not isinstance(workers, int) or isinstance(workers, bool) or not 1 <= workers <= 64:
        raise ConfigInvalid("workers must be an integer between 1 and 64")

    create_dirs = raw.get("create_dirs", defaults.create_dirs)
    if not isinstance(create_dirs, bool):
        raise ConfigInvalid("create_dirs must be a boolean")

    hedge_lexicon = _hedge_lexicon_from(raw.get("hedge_lexicon"))

    schema_raw = raw.get("schema_paths", [])
    if not isinstance(schema_raw, list) or not all(isinstance(p, str) for p in schema_raw):
        raise ConfigInvalid("schema_paths must be a list of paths")

    frontend_dir = raw.get("frontend_dir")
    if frontend_dir is not None and not isinstance(frontend_dir, str):
        raise ConfigInvalid("frontend_dir must be a path")

    return ServiceConfig(
        listen_addr=listen_addr,
        data_dir=data_dir,
        spool_dir=spool_dir,
        workers=workers,
        create_dirs=create_dirs,
        backend=_backend_from_dict(raw.get("backend", {})),
        hedge_lexicon=hedge_lexicon,
        schema_paths=tuple(schema_raw),
        frontend_dir=frontend_dir,
    )


def load_config(path: Path | str | None = None) -> ServiceConfig:
    if path is None:
        return ServiceConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigInvalid(f"no configuration file at {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read configuration: {exc}") from exc
    return config_from_dict(raw)
