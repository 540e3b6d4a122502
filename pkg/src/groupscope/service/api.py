"""Read-only HTTP JSON API over one immutable snapshot.

Every response is a pure function of (snapshot, request): documents are
loaded once at startup and served verbatim; the only derived endpoint is
the behavior network, which recomputes from the stored annotations when a
custom question range or window is requested. Media files are served with
single-range support; the engine never decodes them.
"""

from __future__ import annotations

import os
import re
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from groupscope import networks
from groupscope.annotate.tasks import BehaviorAnnotation, UtteranceRef
from groupscope.service.snapshot import SnapshotStore

_GROUP_ID_RE = re.compile(r"^[A-Za-z0-9_\-]+$")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _not_found(message: str) -> ApiError:
    return ApiError(404, "not-found", message)


def _bad_request(message: str) -> ApiError:
    return ApiError(400, "bad-request", message)


class SnapshotService:
    """In-memory view of one snapshot, indexed for the API handlers."""

    def __init__(self, store: SnapshotStore, sessions_dir: Path | None = None):
        self.store = store
        manifest_sessions = store.manifest.get("sessions_dir")
        self.sessions_dir = sessions_dir or (
            Path(manifest_sessions) if manifest_sessions else None
        )
        self.instructor_id = store.manifest.get("instructor_id", "0000")
        self.groups = store.read("cohort/groups.json")
        self.by_group = {entry["group_id"]: entry for entry in self.groups}
        self.students = store.read("cohort/students.json")
        self.by_student = {entry["student_id"]: entry for entry in self.students}
        self.similarity = (
            store.read("cohort/similarity.json")
            if store.exists("cohort/similarity.json")
            else None
        )

    def group_entry(self, group_id: str) -> dict:
        entry = self.by_group.get(group_id)
        if entry is None:
            raise _not_found(f"unknown group {group_id}")
        return entry

    def group_doc(self, group_id: str, name: str) -> dict:
        entry = self.group_entry(group_id)
        if entry["status"] != "ok":
            raise ApiError(404, "group-failed", f"group {group_id} failed: {entry.get('error')}")
        return self.store.read(f"groups/{group_id}/{name}")


def create_app(
    snapshot_dir: Path | str,
    sessions_dir: Path | str | None = None,
    ui_dir: Path | str | None = None,
) -> FastAPI:
    store = SnapshotStore(snapshot_dir)
    service = SnapshotService(store, Path(sessions_dir) if sessions_dir else None)
    app = FastAPI(title="groupscope", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def on_api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.get("/api/snapshot")
    def snapshot_info():
        return {
            "snapshot_id": store.snapshot_id,
            "created_at": store.manifest.get("created_at"),
            "groups": store.manifest.get("groups", []),
            "warnings": store.manifest.get("warnings", []),
        }

    @app.get("/api/scheme")
    def scheme():
        return store.read("scheme.json")

    @app.get("/api/groups")
    def groups():
        return service.groups

    @app.get("/api/groups/{group_id}")
    def group(group_id: str):
        return service.group_entry(group_id)

    @app.get("/api/groups/{group_id}/similar")
    def similar(group_id: str):
        service.group_entry(group_id)
        if service.similarity is None:
            raise ApiError(404, "unavailable", "similarity requires a cohort of at least 3 groups")
        entry = service.similarity["per_group"].get(group_id)
        if entry is None:
            raise _not_found(f"no similarity entry for {group_id}")
        return {"target": group_id, **entry}

    @app.get("/api/groups/{group_id}/timeline")
    def timeline_doc(group_id: str, q: str | None = None):
        doc = service.group_doc(group_id, "timeline.json")
        if q is None:
            return doc
        qid = _parse_int(q, "q")
        for question in doc["questions"]:
            if question["question_id"] == qid:
                return question
        raise _not_found(f"group {group_id} has no question {qid}")

    @app.get("/api/groups/{group_id}/engagement")
    def engagement_doc(group_id: str):
        return service.group_doc(group_id, "engagement.json")

    @app.get("/api/groups/{group_id}/codes")
    def codes_doc(group_id: str):
        return service.group_doc(group_id, "codes.json")

    @app.get("/api/groups/{group_id}/network")
    def network_doc(group_id: str, questions: str | None = None, k: str | None = None):
        stored = service.group_doc(group_id, "networks.json")
        if questions is None and k is None:
            return stored["full"]
        window = stored["window"] if k is None else _parse_int(k, "k")
        if window < 2:
            raise _bad_request(f"k must be >= 2, got {window}")
        annotations = service.group_doc(group_id, "annotations.json")
        transcript = service.group_doc(group_id, "transcript.json")
        known = {question["question_id"] for question in annotations["questions"]}
        if questions is None:
            selected = sorted(known)
        else:
            selected = sorted({_parse_int(part, "questions") for part in questions.split(",") if part})
            unknown = [qid for qid in selected if qid not in known]
            if unknown:
                raise _not_found(f"unknown question ids {unknown}")
        if not selected:
            return networks.network_document(
                networks.BehaviorNetwork(nodes={}, edges={}, question_range=())
            )
        speakers = {
            question["question_id"]: [u["speaker"] for u in question["utterances"]]
            for question in transcript["questions"]
        }
        merged = networks.BehaviorNetwork(nodes={}, edges={}, question_range=())
        for question in annotations["questions"]:
            qid = question["question_id"]
            if qid not in selected:
                continue
            students_only = [
                BehaviorAnnotation(
                    ref=UtteranceRef(qid, b["index"]),
                    category=b["category"],
                    confidence_pct=b["confidence"],
                    explanation="",
                )
                for b in question["behaviors"]
                if speakers[qid][b["index"]] != service.instructor_id
            ]
            merged = merged.merged_with(
                networks.build_behavior_network(students_only, window)
            )
        merged = networks.BehaviorNetwork(
            nodes=merged.nodes, edges=merged.edges, question_range=tuple(selected)
        )
        return networks.network_document(merged)

    @app.get("/api/groups/{group_id}/transcript")
    def transcript_doc(group_id: str, q: str | None = None, t: str | None = None):
        doc = service.group_doc(group_id, "transcript.json")
        focus_time = _parse_float(t, "t") if t is not None else None
        questions = doc["questions"]
        if q is not None:
            qid = _parse_int(q, "q")
            questions = [question for question in questions if question["question_id"] == qid]
            if not questions:
                raise _not_found(f"group {group_id} has no question {qid}")
        out_questions = []
        for question in questions:
            utterances = []
            for u in question["utterances"]:
                entry = dict(u)
                if focus_time is not None and u["start"] <= focus_time < u["end"]:
                    entry["focus"] = True
                utterances.append(entry)
            out_questions.append({**question, "utterances": utterances})
        return {"group_id": doc["group_id"], "media": doc["media"], "questions": out_questions}

    @app.get("/api/students")
    def students():
        return service.students

    @app.get("/api/students/{student_id}")
    def student(student_id: str):
        entry = service.by_student.get(student_id)
        if entry is None:
            raise _not_found(f"unknown student {student_id}")
        return entry

    @app.get("/api/projection")
    def projection(level: str = "group"):
        if level == "group":
            return [
                {"group_id": entry["group_id"], "xy": entry["projection_xy"]}
                for entry in service.groups
                if entry["status"] == "ok"
            ]
        if level == "student":
            return [
                {"student_id": entry["student_id"], "group_id": entry["group_id"],
                 "xy": entry["projection_xy"]}
                for entry in service.students
            ]
        raise _bad_request(f"level must be group or student, got {level!r}")

    @app.get("/media/{group_id}/{filename}")
    def media(group_id: str, filename: str, request: Request):
        if service.sessions_dir is None:
            raise ApiError(404, "unavailable", "no sessions directory configured for media")
        if not _GROUP_ID_RE.match(group_id) or "/" in filename or ".." in filename:
            raise _bad_request("invalid media path")
        path = service.sessions_dir / group_id / filename
        if not path.is_file():
            raise _not_found(f"no media file {group_id}/{filename}")
        return _media_response(path, request.headers.get("range"))

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def _parse_int(raw: str, name: str) -> int:
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise _bad_request(f"query parameter {name} must be an integer, got {raw!r}") from None


def _parse_float(raw: str, name: str) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise _bad_request(f"query parameter {name} must be a number, got {raw!r}") from None


_RANGE_RE = re.compile(r"^bytes=(\d*)-(\d*)$")


def _media_response(path: Path, range_header: str | None) -> Response:
    size = os.path.getsize(path)
    media_type = "video/mp4" if path.suffix == ".mp4" else "application/octet-stream"
    if not range_header:
        return Response(
            content=path.read_bytes(),
            media_type=media_type,
            headers={"Accept-Ranges": "bytes", "Content-Length": str(size)},
        )
    match = _RANGE_RE.match(range_header.strip())
    if not match or (not match.group(1) and not match.group(2)):
        raise _bad_request(f"malformed Range header {range_header!r}")
    if match.group(1):
        start = int(match.group(1))
        end = int(match.group(2)) if match.group(2) else size - 1
    else:
        # Suffix range: last N bytes.
        length = int(match.group(2))
        start = max(0, size - length)
        end = size - 1
    if start >= size or end < start:
        return Response(
            status_code=416, headers={"Content-Range": f"bytes */{size}"}
        )
    end = min(end, size - 1)
    with open(path, "rb") as fh:
        fh.seek(start)
        chunk = fh.read(end - start + 1)
    return Response(
        content=chunk,
        status_code=206,
        media_type=media_type,
        headers={
            "Accept-Ranges": "bytes",
            "Content-Range": f"bytes {start}-{end}/{size}",
            "Content-Length": str(len(chunk)),
        },
    )
