"""Run manifests: an append-only record sufficient to replay any CLI run.

Each command appends exactly one JSON line holding the parsed argument
vector, a hash of every config input, the seed, the produced artifact
paths, wall time, and the package version. Replaying the stored argv must
reproduce every artifact byte for byte (wall time lives only here, never in
artifacts).
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, asdict, field

from .errors import ConfigError


@dataclass
class RunManifest:
    argv: list[str]
    config_hash: str
    seed: int | None
    artifacts: list[str]
    wall_time_s: float
    version: str
    extra: dict = field(default_factory=dict)

    def to_json_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def hash_files(paths: list[str]) -> str:
    """SHA-256 over the contents of the given files, in order."""
    h = hashlib.sha256()
    for p in paths:
        h.update(p.encode())
        h.update(b"\x00")
        try:
            with open(p, "rb") as f:
                h.update(f.read())
        except OSError as exc:
            raise ConfigError(f"cannot hash config file {p}: {exc}") from exc
        h.update(b"\x01")
    return h.hexdigest()


def append_manifest(path: str, manifest: RunManifest) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "a") as f:
        f.write(manifest.to_json_line() + "\n")


def load_manifests(path: str) -> list[RunManifest]:
    try:
        with open(path) as f:
            lines = [ln for ln in f.read().splitlines() if ln.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    out = []
    for ln in lines:
        try:
            out.append(RunManifest(**json.loads(ln)))
        except (json.JSONDecodeError, TypeError) as exc:
            raise ConfigError(f"malformed manifest line: {exc}") from exc
    return out


def last_manifest(path: str) -> RunManifest:
    manifests = load_manifests(path)
    if not manifests:
        raise ConfigError(f"manifest {path} is empty")
    return manifests[-1]
