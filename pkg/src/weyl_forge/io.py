"""Run manifests and small file helpers shared by the CLI."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

TOOL_NAME = "weyl-forge"


def tool_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def canonical_json(doc) -> str:
    """Stable JSON text (sorted keys, fixed separators) for hashing and output."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=True) + "\n"


def read_json(path):
    return json.loads(Path(path).read_text())


def write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return str(path)


@dataclass
class RunManifest:
    command: str
    config_hash: str
    input_hashes: dict = field(default_factory=dict)
    tool_version: str = field(default_factory=tool_version)
    wall_time: float = 0.0
    outputs: list = field(default_factory=list)
    timestamp: str = ""
    extra: dict = field(default_factory=dict)

    @classmethod
    def start(cls, command, config, inputs=()):
        hashes = {str(p): sha256_file(p) for p in inputs if p is not None}
        m = cls(command, sha256_bytes(canonical_json(config).encode()), hashes)
        m._t0 = time.perf_counter()
        return m

    def add_output(self, path):
        self.outputs.append(str(path))
        return str(path)

    def finish(self):
        self.wall_time = time.perf_counter() - getattr(self, "_t0", time.perf_counter())
        self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return self

    def to_dict(self):
        return asdict(self)

    def write(self, path):
        return write_text(path, canonical_json(self.to_dict()))
