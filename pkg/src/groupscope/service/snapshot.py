"""Immutable, content-addressed snapshot store.

A snapshot is a directory of canonical JSON documents plus a manifest. The
snapshot id is the SHA-256 over the sorted (path, file-digest) pairs, so any
byte change to any document breaks verification. The manifest itself stays
outside the digest: it records the id and non-semantic metadata such as the
creation timestamp.
"""

from __future__ import annotations

import hashlib
import json
import shutil
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from groupscope.digest import stable_digest

MANIFEST_NAME = "manifest.json"
SNAPSHOT_SCHEMA_VERSION = 1


class SnapshotError(RuntimeError):
    pass


def _dump_document(doc: Any) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _file_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def compute_snapshot_id(files: dict[str, str]) -> str:
    """Digest over the sorted relative paths and their content digests."""
    parts: list[str | bytes | int | float] = ["snapshot"]
    for path in sorted(files):
        parts.append(path)
        parts.append(files[path])
    return stable_digest(*parts)


def write_snapshot(
    documents: dict[str, Any],
    out_dir: Path | str,
    meta: dict[str, Any] | None = None,
) -> Path:
    """Write documents under ``out_dir/<snapshot_id>/`` atomically.

    ``documents`` maps relative paths (e.g. ``groups/G10/profile.json``) to
    JSON-able content. Returns the snapshot directory.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rendered = {path: _dump_document(doc) for path, doc in documents.items()}
    files = {path: _file_digest(data) for path, data in rendered.items()}
    snapshot_id = compute_snapshot_id(files)

    final_dir = out_dir / snapshot_id
    if final_dir.exists():
        return final_dir
    staging = out_dir / f".staging-{snapshot_id}"
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True)
    for path, data in rendered.items():
        target = staging / path
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
    manifest = {
        "schema_version": SNAPSHOT_SCHEMA_VERSION,
        "snapshot_id": snapshot_id,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "files": files,
        **(meta or {}),
    }
    (staging / MANIFEST_NAME).write_bytes(_dump_document(manifest))
    staging.rename(final_dir)
    return final_dir


class SnapshotStore:
    """Read-only access to one written snapshot."""

    def __init__(self, snapshot_dir: Path | str):
        self.root = Path(snapshot_dir)
        manifest_path = self.root / MANIFEST_NAME
        if not manifest_path.exists():
            raise SnapshotError(f"{self.root}: not a snapshot (missing {MANIFEST_NAME})")
        self.manifest = json.loads(manifest_path.read_text(encoding="utf-8"))

    @property
    def snapshot_id(self) -> str:
        return self.manifest["snapshot_id"]

    def read(self, relpath: str) -> Any:
        path = self.root / relpath
        if not path.exists():
            raise SnapshotError(f"snapshot document missing: {relpath}")
        return json.loads(path.read_text(encoding="utf-8"))

    def exists(self, relpath: str) -> bool:
        return (self.root / relpath).exists()

    def verify(self) -> None:
        """Re-hash every document and re-derive the id; raise on any mismatch."""
        files: dict[str, str] = self.manifest.get("files", {})
        for relpath, expected in files.items():
            path = self.root / relpath
            if not path.exists():
                raise SnapshotError(f"missing file {relpath}")
            actual = _file_digest(path.read_bytes())
            if actual != expected:
                raise SnapshotError(f"digest mismatch for {relpath}")
        derived = compute_snapshot_id(files)
        if derived != self.snapshot_id:
            raise SnapshotError(
                f"snapshot id mismatch: manifest says {self.snapshot_id}, content gives {derived}"
            )


def export_json_bundle(store: SnapshotStore, destination: Path | str) -> Path:
    """Copy the full snapshot tree; the copy re-verifies to the same id."""
    destination = Path(destination)
    target = destination / store.snapshot_id
    if target.exists():
        raise SnapshotError(f"export target already exists: {target}")
    shutil.copytree(store.root, target)
    return target


CSV_COLUMNS = (
    "group_id",
    "status",
    "mean_score",
    "sigma_e",
    "cv_e",
    "quality",
    "behavioral_mean",
    "cognitive_mean",
    "scaffold_cs_l",
    "scaffold_cs_m",
    "scaffold_cs_h",
    "scaffold_ms",
    "duration_s",
    "prior_mean",
)


def export_csv_metrics(store: SnapshotStore, destination: Path | str) -> Path:
    """One row per group with profile scalars, floats rendered to 2 decimals."""
    groups = store.read("cohort/groups.json")
    destination = Path(destination)
    destination.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(CSV_COLUMNS)]
    for entry in groups:
        profile = entry.get("profile") or {}
        scaffolds = profile.get("scaffold_counts") or {}
        row = [
            entry["group_id"],
            entry["status"],
            _fmt(profile.get("mean_score")),
            _fmt(profile.get("sigma_e")),
            _fmt(profile.get("cv_e")),
            _fmt(profile.get("quality")),
            _fmt(profile.get("behavioral_mean")),
            _fmt(profile.get("cognitive_mean")),
            str(scaffolds.get("CS-L", 0)),
            str(scaffolds.get("CS-M", 0)),
            str(scaffolds.get("CS-H", 0)),
            str(scaffolds.get("MS", 0)),
            _fmt(profile.get("discussion_duration")),
            _fmt(profile.get("prior_performance")),
        ]
        lines.append(",".join(row))
    destination.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return destination


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    return f"{float(value):.2f}"
