"""Canonical data model for collaborative-programming sessions.

A session bundles one group's diarized transcript (split into per-question
segments with a declared driver), the three-student roster, and per-question
code submissions.  Parsing and validation happen here; everything downstream
treats these objects as immutable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

INSTRUCTOR_ID = "0000"

_HEADER_RE = re.compile(r"^Question(\d+)( Driver: (\d{4}))?$")
_RECORD_RE = re.compile(r"^(\d+(\.\d+)?) (\d+(\.\d+)?) (\d{4}) (.+)$")
_SPEAKER_RE = re.compile(r"^[0-9]{4}$")

ROSTER_SCHEMA_VERSION = 1
SCHEME_SCHEMA_VERSION = 1


class CorpusError(ValueError):
    """Invalid session input (malformed transcript, roster, or scheme)."""


@dataclass(frozen=True)
class Utterance:
    start: float
    end: float
    speaker: str
    text: str

    def __post_init__(self) -> None:
        if self.start < 0:
            raise CorpusError(f"utterance start must be non-negative, got {self.start}")
        if self.end <= self.start:
            raise CorpusError(
                f"utterance end must exceed start, got [{self.start}, {self.end}]"
            )
        if not _SPEAKER_RE.match(self.speaker):
            raise CorpusError(f"speaker id must be 4 digits, got {self.speaker!r}")
        if not self.text.strip():
            raise CorpusError("utterance text is empty")

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class QuestionSegment:
    question_id: int
    driver: str | None
    utterances: tuple[Utterance, ...]

    def __post_init__(self) -> None:
        if self.question_id <= 0:
            raise CorpusError(f"question id must be positive, got {self.question_id}")
        if self.driver is not None and not _SPEAKER_RE.match(self.driver):
            raise CorpusError(f"driver id must be 4 digits, got {self.driver!r}")
        starts = [u.start for u in self.utterances]
        if any(b < a for a, b in zip(starts, starts[1:])):
            raise CorpusError(
                f"question {self.question_id}: utterances not sorted by start time"
            )

    @property
    def span(self) -> tuple[float, float]:
        """Wall-clock span covered by the segment's utterances."""
        if not self.utterances:
            raise CorpusError(f"question {self.question_id} has no utterances")
        return self.utterances[0].start, self.utterances[-1].end

    def student_utterances(self, instructor: str = INSTRUCTOR_ID) -> list[Utterance]:
        return [u for u in self.utterances if u.speaker != instructor]


@dataclass(frozen=True)
class StudentRecord:
    id: str
    major: str
    prior_score: float

    def __post_init__(self) -> None:
        if not _SPEAKER_RE.match(self.id):
            raise CorpusError(f"student id must be 4 digits, got {self.id!r}")
        if self.id == INSTRUCTOR_ID:
            raise CorpusError(f"student id {INSTRUCTOR_ID} is reserved for the instructor")
        if not 0 <= self.prior_score <= 100:
            raise CorpusError(f"prior_score must be in [0, 100], got {self.prior_score}")


@dataclass(frozen=True)
class Session:
    group_id: str
    students: tuple[StudentRecord, ...]
    segments: tuple[QuestionSegment, ...]
    code_submissions: dict[int, str] = field(default_factory=dict)
    media_ref: str | None = None
    instructor: str = INSTRUCTOR_ID

    def __post_init__(self) -> None:
        if len(self.students) != 3:
            raise CorpusError(
                f"group must have exactly 3 students, got {len(self.students)}"
            )
        ids = [s.id for s in self.students]
        if len(set(ids)) != 3:
            raise CorpusError(f"duplicate student ids in roster: {ids}")
        qids = [seg.question_id for seg in self.segments]
        if any(b <= a for a, b in zip(qids, qids[1:])):
            raise CorpusError(f"question ids must be strictly increasing, got {qids}")
        for seg in self.segments:
            if seg.driver is not None and seg.driver not in ids:
                raise CorpusError(
                    f"question {seg.question_id}: driver {seg.driver} not in roster"
                )
            for u in seg.utterances:
                if u.speaker != self.instructor and u.speaker not in ids:
                    raise CorpusError(
                        f"question {seg.question_id}: speaker {u.speaker} "
                        f"not in roster and not instructor"
                    )

    @property
    def student_ids(self) -> list[str]:
        return [s.id for s in self.students]

    def segment(self, question_id: int) -> QuestionSegment:
        for seg in self.segments:
            if seg.question_id == question_id:
                return seg
        raise CorpusError(f"unknown question id {question_id} in group {self.group_id}")


@dataclass(frozen=True)
class CodingScheme:
    """Behavior categories with their four-way color grouping."""

    categories: tuple[tuple[str, int], ...]
    expected_count: int = 14

    def __post_init__(self) -> None:
        names = [name for name, _ in self.categories]
        if len(set(names)) != len(names):
            raise CorpusError("coding scheme category names must be unique")
        groups = {group for _, group in self.categories}
        if not groups <= {1, 2, 3, 4}:
            raise CorpusError(f"color groups must be within 1..4, got {sorted(groups)}")

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.categories]

    def color_group(self, name: str) -> int:
        for cat, group in self.categories:
            if cat == name:
                return group
        raise CorpusError(f"unknown category {name!r}")

    def __contains__(self, name: object) -> bool:
        return any(name == cat for cat, _ in self.categories)


# Six category names are fixed; the remaining eight are deployment-replaceable
# placeholders that bring the scheme to its expected 14 entries.
def default_scheme() -> CodingScheme:
    return CodingScheme(
        categories=(
            ("Project understanding", 1),
            ("Requirement analysis", 1),
            ("Knowledge recall", 1),
            ("Question Planning", 2),
            ("Solution comparison", 2),
            ("Task allocation", 2),
            ("Python coding", 3),
            ("Debugging", 3),
            ("Code review", 3),
            ("Output verification", 3),
            ("Acknowledgement", 4),
            ("Unrelated chat", 4),
            ("Help seeking", 4),
            ("Emotional expression", 4),
        ),
        expected_count=14,
    )


def parse_transcript(raw: str | IO[str] | Iterable[str]) -> list[QuestionSegment]:
    """Parse a diarized transcript into per-question segments.

    Lines are either ``QuestionN`` headers (optionally ``QuestionN Driver: XXXX``)
    or ``start end speaker text`` records grouped under the most recent header.
    Blank lines are skipped; surrounding whitespace is tolerated.
    """
    if isinstance(raw, str):
        lines: Iterable[str] = raw.splitlines()
    elif hasattr(raw, "read"):
        lines = raw.read().splitlines()  # type: ignore[union-attr]
    else:
        lines = raw

    segments: list[QuestionSegment] = []
    current_header: tuple[int, str | None] | None = None
    current_utts: list[Utterance] = []

    def flush() -> None:
        nonlocal current_utts
        if current_header is not None:
            qid, driver = current_header
            segments.append(
                QuestionSegment(question_id=qid, driver=driver, utterances=tuple(current_utts))
            )
        current_utts = []

    for lineno, rawline in enumerate(lines, start=1):
        line = rawline.strip()
        if not line:
            continue
        header = _HEADER_RE.match(line)
        if header:
            flush()
            current_header = (int(header.group(1)), header.group(3))
            continue
        record = _RECORD_RE.match(line)
        if not record:
            raise CorpusError(f"line {lineno}: malformed transcript line: {line!r}")
        if current_header is None:
            raise CorpusError(f"line {lineno}: utterance before any Question header")
        start, end = float(record.group(1)), float(record.group(3))
        if end <= start:
            raise CorpusError(
                f"line {lineno}: utterance end {end} must exceed start {start}"
            )
        try:
            current_utts.append(
                Utterance(start=start, end=end, speaker=record.group(5), text=record.group(6))
            )
        except CorpusError as exc:
            raise CorpusError(f"line {lineno}: {exc}") from None
    flush()
    return segments


def _fmt_seconds(value: float) -> str:
    text = repr(float(value))
    if "e" in text or "E" in text:
        text = f"{value:.10f}".rstrip("0").rstrip(".")
    if text.endswith(".0"):
        text = text[:-2]
    return text


def segments_to_text(segments: Iterable[QuestionSegment]) -> str:
    """Serialize segments back to the canonical transcript form."""
    out: list[str] = []
    for seg in segments:
        if seg.driver is not None:
            out.append(f"Question{seg.question_id} Driver: {seg.driver}")
        else:
            out.append(f"Question{seg.question_id}")
        for u in seg.utterances:
            out.append(f"{_fmt_seconds(u.start)} {_fmt_seconds(u.end)} {u.speaker} {u.text}")
    return "\n".join(out) + ("\n" if out else "")


def split_half(segment: QuestionSegment) -> tuple[list[Utterance], list[Utterance]]:
    """Split a segment at the midpoint of its wall-clock span.

    Returns (first_half, full) where first_half holds the utterances starting
    before the midpoint of [first start, last end].
    """
    if not segment.utterances:
        raise CorpusError(f"cannot split empty question {segment.question_id}")
    t0, t1 = segment.span
    midpoint = (t0 + t1) / 2.0
    first_half = [u for u in segment.utterances if u.start < midpoint]
    return first_half, list(segment.utterances)


def load_scheme(path: Path) -> CodingScheme:
    """Load a coding scheme from JSON: {schema_version, categories: [{name, color_group}]}."""
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: invalid JSON: {exc}") from None
    if "schema_version" not in doc:
        raise CorpusError(f"{path}: missing schema_version")
    cats = doc.get("categories")
    if not isinstance(cats, list) or not cats:
        raise CorpusError(f"{path}: categories must be a non-empty array")
    return CodingScheme(
        categories=tuple((c["name"], int(c["color_group"])) for c in cats),
        expected_count=int(doc.get("expected_count", len(cats))),
    )


def scheme_to_doc(scheme: CodingScheme) -> dict:
    return {
        "schema_version": SCHEME_SCHEMA_VERSION,
        "expected_count": scheme.expected_count,
        "categories": [
            {"name": name, "color_group": group} for name, group in scheme.categories
        ],
    }


_CODE_FILE_RE = re.compile(r"^q(\d+)\.py$")


def load_session(directory: Path | str, instructor: str = INSTRUCTOR_ID) -> Session:
    """Load and validate one group's session directory.

    Expected layout::

        roster.json        {schema_version, group_id, students: [{id, major, prior_score}]}
        transcript.txt     QuestionN headers + "start end speaker text" records
        code/q<N>.py       per-question submission (optional per question)
        media.mp4          optional session recording
    """
    directory = Path(directory)
    roster_path = directory / "roster.json"
    if not roster_path.exists():
        raise CorpusError(f"{directory}: missing roster.json")
    try:
        roster = json.loads(roster_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{roster_path}: invalid JSON: {exc}") from None
    if "schema_version" not in roster:
        raise CorpusError(f"{roster_path}: missing schema_version")
    students_doc = roster.get("students")
    if not isinstance(students_doc, list):
        raise CorpusError(f"{roster_path}: students must be an array")
    if len(students_doc) != 3:
        raise CorpusError(
            f"{roster_path}: group must have exactly 3 students, got {len(students_doc)}"
        )
    students = tuple(
        StudentRecord(
            id=str(s["id"]), major=str(s.get("major", "")), prior_score=float(s["prior_score"])
        )
        for s in students_doc
    )
    group_id = str(roster.get("group_id", directory.name))

    transcript_path = directory / "transcript.txt"
    if not transcript_path.exists():
        raise CorpusError(f"{directory}: missing transcript.txt")
    with open(transcript_path, encoding="utf-8") as fh:
        segments = parse_transcript(fh)
    qids = [seg.question_id for seg in segments]
    if len(set(qids)) != len(qids):
        raise CorpusError(f"{transcript_path}: duplicate question ids {qids}")

    code_submissions: dict[int, str] = {}
    code_dir = directory / "code"
    if code_dir.is_dir():
        for code_path in sorted(code_dir.iterdir()):
            m = _CODE_FILE_RE.match(code_path.name)
            if m:
                code_submissions[int(m.group(1))] = code_path.read_text(encoding="utf-8")

    media_path = directory / "media.mp4"
    media_ref = media_path.name if media_path.exists() else None

    return Session(
        group_id=group_id,
        students=students,
        segments=tuple(segments),
        code_submissions=code_submissions,
        media_ref=media_ref,
        instructor=instructor,
    )
