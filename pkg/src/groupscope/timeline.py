"""Timeline panel data: smoothed confidence bars, merged category runs,
role strips, scaffold markers, and time-window filtering.

Smoothing only ever touches confidences; categories change granularity
exclusively through run merging, applied after smoothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from groupscope.annotate.tasks import BehaviorAnnotation, RoleAssignment, ScaffoldEvent, UtteranceRef
from groupscope.corpus import QuestionSegment


class TimelineError(ValueError):
    pass


@dataclass(frozen=True)
class ConfidenceBar:
    ref: UtteranceRef
    t0: float
    t1: float
    speaker: str
    category: str
    raw_confidence: float
    smoothed_confidence: float
    explanation: str


@dataclass(frozen=True)
class MergedSegmentRun:
    category: str
    t0: float
    t1: float
    mean_confidence: float
    # Sum of member bar durations; differs from t1 - t0 when the merged
    # utterances have silence gaps between them.
    duration: float
    member_refs: tuple[UtteranceRef, ...]


@dataclass(frozen=True)
class RoleRect:
    ref: UtteranceRef
    t0: float
    t1: float
    student_id: str
    role: str


@dataclass(frozen=True)
class ScaffoldMarker:
    ref: UtteranceRef
    t0: float
    t1: float
    kind: str
    confidence_pct: float
    explanation: str


def smooth_confidences(values: list[float], window: int = 3) -> list[float]:
    """Centered moving average with window truncation at the boundaries."""
    if window < 1 or window % 2 == 0:
        raise TimelineError(f"smoothing window must be odd and >= 1, got {window}")
    if not values:
        return []
    half = window // 2
    out = []
    for i in range(len(values)):
        lo = max(0, i - half)
        hi = min(len(values), i + half + 1)
        out.append(sum(values[lo:hi]) / (hi - lo))
    return out


def build_bars(
    segment: QuestionSegment,
    annotations: list[BehaviorAnnotation],
    window: int = 3,
) -> list[ConfidenceBar]:
    """Pair each utterance with its annotation and smoothed confidence."""
    if len(annotations) != len(segment.utterances):
        raise TimelineError(
            f"question {segment.question_id}: {len(annotations)} annotations for "
            f"{len(segment.utterances)} utterances"
        )
    smoothed = smooth_confidences([a.confidence_pct for a in annotations], window)
    return [
        ConfidenceBar(
            ref=a.ref,
            t0=u.start,
            t1=u.end,
            speaker=u.speaker,
            category=a.category,
            raw_confidence=a.confidence_pct,
            smoothed_confidence=s,
            explanation=a.explanation,
        )
        for u, a, s in zip(segment.utterances, annotations, smoothed)
    ]


def merge_runs(bars: list[ConfidenceBar], weighted: bool = True) -> list[MergedSegmentRun]:
    """Collapse maximal runs of equal category into single spans.

    Run confidence is the duration-weighted mean of the members' smoothed
    confidences (unweighted mean when ``weighted`` is False).
    """
    runs: list[MergedSegmentRun] = []
    group: list[ConfidenceBar] = []

    def flush() -> None:
        if not group:
            return
        total = math.fsum(b.t1 - b.t0 for b in group)
        if weighted:
            mean = math.fsum(b.smoothed_confidence * (b.t1 - b.t0) for b in group) / total
        else:
            mean = math.fsum(b.smoothed_confidence for b in group) / len(group)
        runs.append(MergedSegmentRun(
            category=group[0].category,
            t0=group[0].t0,
            t1=group[-1].t1,
            mean_confidence=mean,
            duration=total,
            member_refs=tuple(b.ref for b in group),
        ))
        group.clear()

    for bar in bars:
        if group and bar.category != group[-1].category:
            flush()
        group.append(bar)
    flush()
    return runs


ROLE_NAMES = ("Driver", "Navigator", "Monitor", "None")


def build_role_strip(
    segment: QuestionSegment,
    roles: list[RoleAssignment],
    students: list[str],
) -> list[RoleRect]:
    """One rectangle per (utterance, student); three rectangles per timestamp."""
    rects: list[RoleRect] = []
    for assignment in roles:
        idx = assignment.ref.index
        if not 0 <= idx < len(segment.utterances):
            raise TimelineError(f"role assignment index {idx} out of range")
        utterance = segment.utterances[idx]
        covered = []
        for student in students:
            role = assignment.role_of(student)
            if role != "None":
                covered.append(student)
            rects.append(RoleRect(
                ref=assignment.ref,
                t0=utterance.start,
                t1=utterance.end,
                student_id=student,
                role=role,
            ))
        if sorted(covered) != sorted(students):
            raise TimelineError(
                f"role partition violated at {assignment.ref}: covered {covered}"
            )
    return rects


def build_scaffold_markers(
    segment: QuestionSegment, events: list[ScaffoldEvent]
) -> list[ScaffoldMarker]:
    markers = []
    for event in events:
        utterance = segment.utterances[event.ref.index]
        markers.append(ScaffoldMarker(
            ref=event.ref,
            t0=utterance.start,
            t1=utterance.end,
            kind=event.kind,
            confidence_pct=event.confidence_pct,
            explanation=event.explanation,
        ))
    return markers


def window_filter(items: list, t0: float, t1: float) -> list:
    """Keep items overlapping [t0, t1], clipping their spans to the window."""
    if t0 >= t1:
        raise TimelineError(f"inverted window [{t0}, {t1}]")
    out = []
    for item in items:
        lo = max(item.t0, t0)
        hi = min(item.t1, t1)
        if lo < hi:
            out.append(replace(item, t0=lo, t1=hi))
    return out


def timeline_document(
    segment: QuestionSegment,
    bars: list[ConfidenceBar],
    runs: list[MergedSegmentRun],
    role_rects: list[RoleRect],
    markers: list[ScaffoldMarker],
) -> dict:
    """Export one question's timeline panel data as a JSON document."""
    return {
        "question_id": segment.question_id,
        "span": list(segment.span) if segment.utterances else [0.0, 0.0],
        "driver": segment.driver,
        "bars": [
            {
                "index": b.ref.index,
                "t0": b.t0,
                "t1": b.t1,
                "speaker": b.speaker,
                "category": b.category,
                "confidence": b.smoothed_confidence,
                "raw_confidence": b.raw_confidence,
                "explanation": b.explanation,
            }
            for b in bars
        ],
        "runs": [
            {
                "category": r.category,
                "t0": r.t0,
                "t1": r.t1,
                "confidence": r.mean_confidence,
                "duration": r.duration,
                "members": [ref.index for ref in r.member_refs],
            }
            for r in runs
        ],
        "roles": [
            {
                "index": r.ref.index,
                "t0": r.t0,
                "t1": r.t1,
                "student": r.student_id,
                "role": r.role,
            }
            for r in role_rects
        ],
        "scaffolds": [
            {
                "index": m.ref.index,
                "t0": m.t0,
                "t1": m.t1,
                "kind": m.kind,
                "confidence": m.confidence_pct,
                "explanation": m.explanation,
            }
            for m in markers
        ],
    }
