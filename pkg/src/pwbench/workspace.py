"""File-backed workspace: named documents in a directory tree.

Layout under the workspace root:

    datasets/<name>.csv       frequency tables
    policies/<name>.srn       policy sources
    adtrees/<name>.json       attack-defence trees
    pipelines/<name>.json     pipeline documents
    dictionaries/<name>.txt   word lists (one word per line)
    raw/                      free-form input files for pipeline sources
    out/                      execution artifacts

Names are restricted to [A-Za-z0-9_-]+ so they can never traverse out of
their section directory. Writes go through a temp file in the same
directory followed by an atomic rename, so a killed process can leave
stale temp files but never a half-written document.

Locking is in-process only (the HTTP service is a single process):
per-entry write locks plus one exclusive lock for pipeline execution.
"""

from __future__ import annotations

import hashlib
import os
import re
import tempfile
import threading
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

from .errors import WorkbenchError
from .policy import Dictionary, load_dictionary

NAME_RE = re.compile(r"^[A-Za-z0-9_-]+$")
ARTIFACT_RE = re.compile(r"^[A-Za-z0-9_-]+\.[A-Za-z0-9]+$")

SECTIONS = {
    "datasets": "csv",
    "policies": "srn",
    "adtrees": "json",
    "pipelines": "json",
    "dictionaries": "txt",
}


class BadName(WorkbenchError):
    def __init__(self, name: str):
        super().__init__(f"invalid name {name!r}: names must match [A-Za-z0-9_-]+")
        self.name = name


_SINGULAR = {
    "datasets": "dataset",
    "policies": "policy",
    "adtrees": "ADTree",
    "pipelines": "pipeline",
    "dictionaries": "dictionary",
    "artifacts": "artifact",
}


class NotFound(WorkbenchError):
    def __init__(self, section: str, name: str):
        super().__init__(f"no {_SINGULAR.get(section, section)} named {name!r}")
        self.section = section
        self.name = name


def content_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class Workspace:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        for section in SECTIONS:
            (self.root / section).mkdir(parents=True, exist_ok=True)
        (self.root / "raw").mkdir(exist_ok=True)
        (self.root / "out").mkdir(exist_ok=True)
        self._locks: dict[tuple[str, str], threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self.exec_lock = threading.Lock()

    def _path(self, section: str, name: str) -> Path:
        if section not in SECTIONS:
            raise ValueError(f"unknown section {section!r}")
        if not NAME_RE.match(name):
            raise BadName(name)
        return self.root / section / f"{name}.{SECTIONS[section]}"

    def list_names(self, section: str) -> list[str]:
        if section not in SECTIONS:
            raise ValueError(f"unknown section {section!r}")
        suffix = "." + SECTIONS[section]
        return sorted(
            p.name.removesuffix(suffix)
            for p in (self.root / section).iterdir()
            if p.is_file() and p.name.endswith(suffix) and NAME_RE.match(p.name.removesuffix(suffix))
        )

    def exists(self, section: str, name: str) -> bool:
        return self._path(section, name).is_file()

    def read(self, section: str, name: str) -> bytes:
        path = self._path(section, name)
        if not path.is_file():
            raise NotFound(section, name)
        return path.read_bytes()

    def write(self, section: str, name: str, data: bytes) -> str:
        """Atomically replace the document; returns the new content hash."""
        path = self._path(section, name)
        fd, temp = tempfile.mkstemp(dir=path.parent, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
            os.replace(temp, path)
        except BaseException:
            try:
                os.unlink(temp)
            except OSError:
                pass
            raise
        return content_hash(data)

    def delete(self, section: str, name: str) -> None:
        path = self._path(section, name)
        if not path.is_file():
            raise NotFound(section, name)
        path.unlink()

    def etag(self, section: str, name: str) -> str:
        return content_hash(self.read(section, name))

    @contextmanager
    def entry_lock(self, section: str, name: str) -> Iterator[None]:
        key = (section, name)
        with self._locks_guard:
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            yield

    def load_dictionaries(self) -> dict[str, Dictionary]:
        return {
            name: load_dictionary(name, self.read("dictionaries", name))
            for name in self.list_names("dictionaries")
        }

    def artifact_path(self, artifact_id: str) -> Path:
        """Resolve an artifact file under out/; the id is a plain filename."""
        if not ARTIFACT_RE.match(artifact_id):
            raise BadName(artifact_id)
        path = self.root / "out" / artifact_id
        if not path.is_file():
            raise NotFound("artifacts", artifact_id)
        return path
