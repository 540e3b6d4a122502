"""Content-addressed completion cache.

Each completion is stored as one JSON file named by its cache key, so a
second pipeline run over unchanged inputs replays entirely from disk.
Reads are lock-free; writes go through a temp file + atomic rename and are
safe under the annotation worker pool.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from pathlib import Path

from groupscope.digest import stable_digest


def cache_key(task: str, content: str, prompt_version: str) -> str:
    """Stable digest identifying one completion request."""
    return stable_digest("annotation-cache", task, content, prompt_version)


class AnnotationCache:
    def __init__(self, directory: Path | str):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> str | None:
        path = self._path(key)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            with self._lock:
                self.misses += 1
            return None
        with self._lock:
            self.hits += 1
        return doc["response"]

    def put(self, key: str, response: str) -> None:
        path = self._path(key)
        payload = json.dumps({"key": key, "response": response}, ensure_ascii=False)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def reset_counters(self) -> None:
        with self._lock:
            self.hits = 0
            self.misses = 0
