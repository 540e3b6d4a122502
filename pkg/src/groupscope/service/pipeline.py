"""End-to-end pipeline: ingest sessions, annotate, compute, snapshot.

Stages are pure given (inputs, config): annotation fans out over a bounded
worker pool but every derived seed is keyed by content and task labels, so
the snapshot digest is identical regardless of scheduling. Failed groups are
isolated: they appear in the snapshot with status "failed" while the rest of
the cohort proceeds.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from groupscope import analytics, engagement, networks, timeline
from groupscope.annotate.backends import AnnotationError, ChatBackend
from groupscope.annotate.cache import AnnotationCache
from groupscope.annotate.mock import MockChatBackend
from groupscope.annotate.backends import RemoteChatBackend
from groupscope.annotate.tasks import (
    BehaviorAnnotation,
    CodeScore,
    RoleAssignment,
    ScaffoldEvent,
    TaskRunner,
    annotate_behaviors,
    annotate_roles,
    annotate_scaffolding,
    score_code,
)
from groupscope.corpus import (
    CodingScheme,
    CorpusError,
    QuestionSegment,
    Session,
    default_scheme,
    load_scheme,
    load_session,
    scheme_to_doc,
)
from groupscope.service.config import PipelineConfig
from groupscope.service.snapshot import write_snapshot

ROLE_NAMES = ("Driver", "Navigator", "Monitor")


class PipelineError(RuntimeError):
    pass


@dataclass
class GroupAnnotations:
    behaviors: dict[int, list[BehaviorAnnotation]] = field(default_factory=dict)
    roles: dict[int, list[RoleAssignment]] = field(default_factory=dict)
    scaffolds: dict[int, list[ScaffoldEvent]] = field(default_factory=dict)
    code_scores: dict[int, CodeScore] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


@dataclass
class GroupResult:
    group_id: str
    status: str  # "ok" | "failed"
    error: str | None = None
    session: Session | None = None
    annotations: GroupAnnotations | None = None
    profile: analytics.GroupProfile | None = None
    students: list[analytics.StudentSummary] = field(default_factory=list)
    documents: dict[str, object] = field(default_factory=dict)
    engagement_points: list[engagement.EngagementPoint] = field(default_factory=list)


@dataclass
class PipelineRun:
    snapshot_dir: Path
    snapshot_id: str
    groups: list[GroupResult]
    backend_calls: int
    cache_hits: int
    cache_misses: int
    warnings: list[str]


def make_backend(config: PipelineConfig) -> ChatBackend:
    if config.backend.kind == "mock":
        return MockChatBackend(seed=config.seed)
    return RemoteChatBackend(
        endpoint=config.backend.endpoint,
        model=config.backend.model,
        api_key_env=config.backend.api_key_env,
        timeout=config.backend.timeout_s,
        max_attempts=config.backend.max_attempts,
        backoff_s=config.backend.backoff_s,
    )


def discover_sessions(sessions_dir: Path | str) -> list[Path]:
    sessions_dir = Path(sessions_dir)
    if not sessions_dir.is_dir():
        raise PipelineError(f"sessions directory not found: {sessions_dir}")
    dirs = sorted(
        p for p in sessions_dir.iterdir() if p.is_dir() and (p / "roster.json").exists()
    )
    if not dirs:
        raise PipelineError(f"no session directories under {sessions_dir}")
    return dirs


def load_cohort_scheme(sessions_dir: Path, config: PipelineConfig) -> CodingScheme:
    if config.scheme_path:
        return load_scheme(config.resolve(config.scheme_path))
    cohort_scheme = Path(sessions_dir) / "scheme.json"
    if cohort_scheme.exists():
        return load_scheme(cohort_scheme)
    return default_scheme()


def load_questions(sessions_dir: Path) -> dict[int, str]:
    """Optional cohort-level question statements for the scoring prompt."""
    path = Path(sessions_dir) / "questions.json"
    if not path.exists():
        return {}
    doc = json.loads(path.read_text(encoding="utf-8"))
    return {int(k): str(v) for k, v in doc.get("questions", {}).items()}


def annotate_session(
    session: Session,
    scheme: CodingScheme,
    runner: TaskRunner,
    config: PipelineConfig,
    questions: dict[int, str] | None = None,
) -> GroupAnnotations:
    """Run all four annotation tasks for one session."""
    result = GroupAnnotations()
    questions = questions or {}

    def per_segment(segment: QuestionSegment):
        behaviors = annotate_behaviors(segment, scheme, runner)
        if segment.driver is not None:
            roles = annotate_roles(segment, session.student_ids, runner, config.role_samples)
            warning = None
        else:
            roles = []
            warning = f"question {segment.question_id}: no declared driver, roles skipped"
        scaffolds = annotate_scaffolding(segment, runner, instructor=session.instructor)
        return segment.question_id, behaviors, roles, scaffolds, warning

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        for qid, behaviors, roles, scaffolds, warning in pool.map(
            per_segment, session.segments
        ):
            result.behaviors[qid] = behaviors
            result.roles[qid] = roles
            result.scaffolds[qid] = scaffolds
            if warning:
                result.warnings.append(warning)

        def per_submission(item: tuple[int, str]):
            qid, source = item
            statement = questions.get(qid, f"Question {qid}")
            return qid, score_code(statement, source, runner, config.score_runs)

        submissions = sorted(session.code_submissions.items())
        for qid, score in pool.map(per_submission, submissions):
            result.code_scores[qid] = score
    return result


def _student_annotation_subset(
    segment: QuestionSegment, annotations: list[BehaviorAnnotation], instructor: str
) -> list[BehaviorAnnotation]:
    return [
        a for a in annotations if segment.utterances[a.ref.index].speaker != instructor
    ]


def compute_group(
    session: Session,
    scheme: CodingScheme,
    ann: GroupAnnotations,
    config: PipelineConfig,
) -> GroupResult:
    """Derive all per-group documents and the group profile."""
    students = session.student_ids
    timeline_docs = []
    engagement_points: list[engagement.EngagementPoint] = []
    per_question_networks: dict[int, networks.BehaviorNetwork] = {}
    role_counter: dict[str, Counter] = {s: Counter() for s in students}
    speaking = {s: 0.0 for s in students}
    turn_counts = {s: 0 for s in students}
    color_counter: Counter = Counter()

    for segment in session.segments:
        qid = segment.question_id
        behaviors = ann.behaviors.get(qid, [])
        roles = ann.roles.get(qid, [])
        scaffolds = ann.scaffolds.get(qid, [])

        bars = timeline.build_bars(segment, behaviors, config.smoothing_window)
        runs = timeline.merge_runs(bars, weighted=config.merge_weighted)
        role_rects = timeline.build_role_strip(segment, roles, students)
        markers = timeline.build_scaffold_markers(segment, scaffolds)
        timeline_docs.append(
            timeline.timeline_document(segment, bars, runs, role_rects, markers)
        )

        engagement_points.extend(
            engagement.engagement_scores(
                segment, scheme, students, behaviors, roles, seed=config.seed
            )
        )

        student_annotations = _student_annotation_subset(
            segment, behaviors, session.instructor
        )
        per_question_networks[qid] = networks.build_behavior_network(
            student_annotations, config.ena_window
        )
        for a in student_annotations:
            color_counter[scheme.color_group(a.category)] += 1

        for assignment in roles:
            for student in students:
                role = assignment.role_of(student)
                if role in ROLE_NAMES:
                    role_counter[student][role] += 1
        for u in segment.utterances:
            if u.speaker in speaking:
                speaking[u.speaker] += u.duration
                turn_counts[u.speaker] += 1

    # Per-student session means over the full-phase snapshots.
    full_points = [p for p in engagement_points if p.phase == "full"]
    behavioral_mean = {}
    cognitive_mean = {}
    for student in students:
        series = [p for p in full_points if p.student_id == student]
        behavioral_mean[student] = (
            sum(p.behavioral for p in series) / len(series) if series else 0.0
        )
        cognitive_mean[student] = (
            sum(p.cognitive for p in series) / len(series) if series else 0.0
        )

    # Engagement entering the quality equation: per student, summed over
    # questions of the full-phase (behavioral + cognitive) / 2.
    quality_engagement = []
    for student in students:
        series = [p for p in full_points if p.student_id == student]
        quality_engagement.append(
            sum((p.behavioral + p.cognitive) / 2.0 for p in series)
        )

    scores = [ann.code_scores[qid].weighted_total for qid in sorted(ann.code_scores)]
    if not scores:
        raise PipelineError(f"group {session.group_id}: no scored code submissions")
    sigma, cv, quality = analytics.collaboration_quality(
        scores, tuple(quality_engagement)
    )
    mean_score = sum(scores) / len(scores)

    scaffold_counts = Counter()
    for events in ann.scaffolds.values():
        scaffold_counts.update(e.kind for e in events)
    duration = sum(seg.span[1] - seg.span[0] for seg in session.segments if seg.utterances)
    total_color = sum(color_counter.values())
    color_freqs = tuple(
        color_counter.get(g, 0) / total_color if total_color else 0.0
        for g in analytics.COLOR_GROUPS
    )

    profile = analytics.GroupProfile(
        group_id=session.group_id,
        mean_score=mean_score,
        engagement_vector=tuple(quality_engagement),
        sigma_e=sigma,
        cv_e=cv,
        quality=quality,
        scaffold_counts={k: int(scaffold_counts.get(k, 0)) for k in analytics.SCAFFOLD_ORDER},
        discussion_duration=duration,
        prior_performance=sum(s.prior_score for s in session.students) / 3.0,
        behavior_color_freqs=color_freqs,
        behavioral_mean=sum(behavioral_mean.values()) / 3.0,
        cognitive_mean=sum(cognitive_mean.values()) / 3.0,
    )

    student_summaries = []
    for student in students:
        counts = role_counter[student]
        if counts:
            top = max(counts.values())
            modal = next(r for r in ROLE_NAMES if counts.get(r, 0) == top)
        else:
            modal = "Monitor"
        student_summaries.append(analytics.StudentSummary(
            student_id=student,
            behavioral_mean=behavioral_mean[student],
            cognitive_mean=cognitive_mean[student],
            modal_role=modal,
        ))

    full_network = networks.network_for_range(
        session,
        {qid: _student_annotation_subset(session.segment(qid), ann.behaviors[qid], session.instructor)
         for qid in ann.behaviors},
        {seg.question_id for seg in session.segments},
        config.ena_window,
    )

    documents = {
        "timeline.json": {"questions": timeline_docs},
        "engagement.json": engagement.engagement_document(
            students, engagement_points, config.sg_window, config.sg_polyorder
        ),
        "networks.json": {
            "window": config.ena_window,
            "per_question": {
                str(qid): networks.network_document(net)
                for qid, net in sorted(per_question_networks.items())
            },
            "full": networks.network_document(full_network),
        },
        "annotations.json": _annotations_document(ann),
        "transcript.json": _transcript_document(session),
        "codes.json": _codes_document(session, ann),
    }

    result = GroupResult(
        group_id=session.group_id,
        status="ok",
        session=session,
        annotations=ann,
        profile=profile,
        students=student_summaries,
        documents=documents,
        engagement_points=engagement_points,
    )
    # Extra per-student stats used by the cohort student projection.
    result.documents["_student_stats"] = {
        student: {
            "behavioral_mean": behavioral_mean[student],
            "cognitive_mean": cognitive_mean[student],
            "role_share": _role_share(role_counter[student]),
            "speaking_seconds": speaking[student],
            "utterance_count": turn_counts[student],
        }
        for student in students
    }
    return result


def _role_share(counts: Counter) -> dict[str, float]:
    total = sum(counts.values())
    return {
        role: (counts.get(role, 0) / total if total else 0.0) for role in ROLE_NAMES
    }


def _annotations_document(ann: GroupAnnotations) -> dict:
    questions = []
    for qid in sorted(ann.behaviors):
        questions.append({
            "question_id": qid,
            "behaviors": [
                {
                    "index": a.ref.index,
                    "category": a.category,
                    "confidence": a.confidence_pct,
                    "explanation": a.explanation,
                }
                for a in ann.behaviors[qid]
            ],
            "roles": [
                {
                    "index": r.ref.index,
                    "navigator": r.navigator,
                    "monitors": list(r.monitors),
                    "drivers": list(r.drivers),
                    "votes": r.votes,
                    "n_samples": r.n_samples,
                    "uncertain": r.uncertain,
                }
                for r in ann.roles.get(qid, [])
            ],
            "scaffolds": [
                {
                    "index": e.ref.index,
                    "kind": e.kind,
                    "confidence": e.confidence_pct,
                    "explanation": e.explanation,
                }
                for e in ann.scaffolds.get(qid, [])
            ],
        })
    return {"questions": questions, "warnings": list(ann.warnings)}


def _transcript_document(session: Session) -> dict:
    return {
        "group_id": session.group_id,
        "media": session.media_ref,
        "questions": [
            {
                "question_id": seg.question_id,
                "driver": seg.driver,
                "utterances": [
                    {"start": u.start, "end": u.end, "speaker": u.speaker, "text": u.text}
                    for u in seg.utterances
                ],
            }
            for seg in session.segments
        ],
    }


def _codes_document(session: Session, ann: GroupAnnotations) -> dict:
    questions = []
    for qid in sorted(session.code_submissions):
        entry: dict[str, object] = {
            "question_id": qid,
            "source": session.code_submissions[qid],
        }
        score = ann.code_scores.get(qid)
        if score is not None:
            entry["score"] = {
                "problem_solving": score.problem_solving,
                "code_integrity": score.code_integrity,
                "code_accuracy": score.code_accuracy,
                "algorithm_innovation": score.algorithm_innovation,
                "weighted_total": score.weighted_total,
                "rationale": score.rationale,
                "n_samples": score.n_samples,
                "demerits": list(score.demerits),
            }
        questions.append(entry)
    return {"questions": questions}


def _profile_document(profile: analytics.GroupProfile) -> dict:
    return {
        "group_id": profile.group_id,
        "mean_score": profile.mean_score,
        "engagement_vector": list(profile.engagement_vector),
        "sigma_e": profile.sigma_e,
        "cv_e": profile.cv_e,
        "quality": profile.quality,
        "scaffold_counts": dict(profile.scaffold_counts),
        "discussion_duration": profile.discussion_duration,
        "prior_performance": profile.prior_performance,
        "behavior_color_freqs": list(profile.behavior_color_freqs),
        "behavioral_mean": profile.behavioral_mean,
        "cognitive_mean": profile.cognitive_mean,
    }


def run_pipeline(
    sessions_dir: Path | str,
    config: PipelineConfig,
    backend: ChatBackend | None = None,
    cache: AnnotationCache | None = None,
) -> PipelineRun:
    """Execute ingest -> annotate -> compute and write the snapshot."""
    sessions_dir = Path(sessions_dir)
    session_dirs = discover_sessions(sessions_dir)
    scheme = load_cohort_scheme(sessions_dir, config)
    question_texts = load_questions(sessions_dir)

    backend = backend if backend is not None else make_backend(config)
    cache = cache if cache is not None else AnnotationCache(config.cache_path)
    runner = TaskRunner(
        backend=backend,
        cache=cache,
        temperature=config.backend.temperature,
        seed=config.seed,
    )

    warnings: list[str] = []
    results: list[GroupResult] = []
    for directory in session_dirs:
        group_id = directory.name
        try:
            session = load_session(directory, instructor=config.instructor_id)
            group_scheme_path = directory / "scheme.json"
            if group_scheme_path.exists():
                group_scheme = load_scheme(group_scheme_path)
                if group_scheme.categories != scheme.categories:
                    raise CorpusError(
                        f"{group_id}: per-group scheme differs from the cohort scheme"
                    )
            ann = annotate_session(session, scheme, runner, config, question_texts)
            result = compute_group(session, scheme, ann, config)
            warnings.extend(f"{group_id}: {w}" for w in ann.warnings)
        except (CorpusError, AnnotationError, PipelineError,
                engagement.EngagementError, analytics.AnalyticsError,
                timeline.TimelineError, networks.NetworkError) as exc:
            results.append(GroupResult(group_id=group_id, status="failed", error=str(exc)))
            warnings.append(f"{group_id}: failed: {exc}")
            continue
        results.append(result)

    cohort_docs, cohort_warnings = _cohort_stage(results, config)
    warnings.extend(cohort_warnings)

    documents: dict[str, object] = {"scheme.json": scheme_to_doc(scheme)}
    documents.update(cohort_docs)
    for result in results:
        base = f"groups/{result.group_id}"
        if result.status == "ok":
            for name, doc in result.documents.items():
                if name.startswith("_"):
                    continue
                documents[f"{base}/{name}"] = doc
            documents[f"{base}/profile.json"] = _profile_document(result.profile)
        else:
            documents[f"{base}/error.json"] = {
                "group_id": result.group_id,
                "error": result.error,
            }

    snapshot_dir = write_snapshot(
        documents,
        config.snapshot_path,
        meta={
            "groups": [r.group_id for r in results],
            "failed_groups": [r.group_id for r in results if r.status == "failed"],
            "warnings": warnings,
            "sessions_dir": str(sessions_dir.resolve()),
            "seed": config.seed,
            "instructor_id": config.instructor_id,
        },
    )
    manifest = json.loads((snapshot_dir / "manifest.json").read_text(encoding="utf-8"))
    return PipelineRun(
        snapshot_dir=snapshot_dir,
        snapshot_id=manifest["snapshot_id"],
        groups=results,
        backend_calls=getattr(backend, "calls", 0),
        cache_hits=cache.hits,
        cache_misses=cache.misses,
        warnings=warnings,
    )


def _cohort_stage(
    results: list[GroupResult], config: PipelineConfig
) -> tuple[dict[str, object], list[str]]:
    """Similarity, projections, glyphs and the cohort overview document."""
    documents: dict[str, object] = {}
    warnings: list[str] = []
    ok = [r for r in results if r.status == "ok"]
    profiles = [r.profile for r in ok]

    glyphs: dict[str, analytics.GlyphParams] = {}
    if profiles:
        students_by_group = {r.group_id: r.students for r in ok}
        glyphs = analytics.glyph_params(profiles, students_by_group)

    similarity_doc = None
    projection: dict[str, tuple[float, float]] = {}
    if len(ok) >= 2:
        raw_vectors = {r.group_id: analytics.group_feature_vector(r.profile) for r in ok}
        standardized = analytics.standardize(raw_vectors)
        if len(ok) >= 3:
            per_group = {}
            for r in ok:
                sim = analytics.rank_similarity(r.group_id, standardized)
                per_group[r.group_id] = {
                    "most_similar": {
                        "group_id": sim.most_similar[0],
                        "distance": sim.most_similar[1],
                    },
                    "most_different": {
                        "group_id": sim.most_different[0],
                        "distance": sim.most_different[1],
                    },
                }
            similarity_doc = {
                "per_group": per_group,
                "matrix": analytics.similarity_matrix(standardized),
                "feature_labels": list(analytics.FEATURE_LABELS),
            }
            documents["cohort/similarity.json"] = similarity_doc
        else:
            warnings.append("cohort too small for similarity ranking (need >= 3 groups)")

        n = len(ok)
        if n >= 4 and config.tsne.perplexity_groups <= (n - 1) / 3:
            keys = sorted(standardized)
            coords = analytics.project_tsne(
                np.array([standardized[k] for k in keys]),
                perplexity=config.tsne.perplexity_groups,
                seed=config.seed,
                iterations=config.tsne.iterations,
                learning_rate=config.tsne.learning_rate,
            )
            projection = {k: (float(c[0]), float(c[1])) for k, c in zip(keys, coords)}
        else:
            warnings.append(
                f"group projection skipped: {n} groups with perplexity "
                f"{config.tsne.perplexity_groups} violates the t-SNE precondition"
            )
    else:
        warnings.append("cohort too small for standardization (need >= 2 groups)")

    # Student-level projection over per-student stats.
    student_vectors: dict[str, list[float]] = {}
    student_meta: dict[str, dict] = {}
    for r in ok:
        stats = r.documents.get("_student_stats", {})
        for record in r.session.students:
            s = stats.get(record.id)
            if s is None:
                continue
            student_vectors[record.id] = [
                s["behavioral_mean"],
                s["cognitive_mean"],
                s["role_share"]["Driver"],
                s["role_share"]["Navigator"],
                s["role_share"]["Monitor"],
                s["speaking_seconds"],
                float(s["utterance_count"]),
                record.prior_score,
            ]
            student_meta[record.id] = {
                "student_id": record.id,
                "group_id": r.group_id,
                "major": record.major,
                "prior_score": record.prior_score,
                **{k: s[k] for k in ("behavioral_mean", "cognitive_mean",
                                     "role_share", "speaking_seconds",
                                     "utterance_count")},
            }

    student_projection: dict[str, tuple[float, float]] = {}
    n_students = len(student_vectors)
    if n_students >= 4 and config.tsne.perplexity_students <= (n_students - 1) / 3:
        standardized_students = analytics.standardize(student_vectors)
        keys = sorted(standardized_students)
        coords = analytics.project_tsne(
            np.array([standardized_students[k] for k in keys]),
            perplexity=config.tsne.perplexity_students,
            seed=config.seed + 1,
            iterations=config.tsne.iterations,
            learning_rate=config.tsne.learning_rate,
        )
        student_projection = {k: (float(c[0]), float(c[1])) for k, c in zip(keys, coords)}
    elif n_students:
        warnings.append(
            f"student projection skipped: {n_students} students with perplexity "
            f"{config.tsne.perplexity_students} violates the t-SNE precondition"
        )

    students_doc = []
    for sid in sorted(student_meta):
        entry = dict(student_meta[sid])
        entry["projection_xy"] = (
            list(student_projection[sid]) if sid in student_projection else None
        )
        modal = next(
            (
                s.modal_role
                for r in ok
                for s in r.students
                if s.student_id == sid
            ),
            "Monitor",
        )
        entry["modal_role"] = modal
        students_doc.append(entry)
    documents["cohort/students.json"] = students_doc

    overview = []
    for r in sorted(results, key=lambda item: item.group_id):
        entry: dict[str, object] = {"group_id": r.group_id, "status": r.status}
        if r.status != "ok":
            entry["error"] = r.error
            entry["profile"] = None
            entry["glyph"] = None
            entry["projection_xy"] = None
        else:
            entry["profile"] = _profile_document(r.profile)
            glyph = glyphs.get(r.group_id)
            entry["glyph"] = _glyph_document(glyph) if glyph else None
            entry["projection_xy"] = (
                list(projection[r.group_id]) if r.group_id in projection else None
            )
        overview.append(entry)
    documents["cohort/groups.json"] = overview
    return documents, warnings


def _glyph_document(glyph: analytics.GlyphParams) -> dict:
    return {
        "group_id": glyph.group_id,
        "flowers": [
            {
                "student_id": f.student_id,
                "petal_size": f.petal_size,
                "stamen_size": f.stamen_size,
                "flower_color": f.flower_color,
            }
            for f in glyph.flowers
        ],
        "leaf_color_level": glyph.leaf_color_level,
        "butterfly_count": glyph.butterfly_count,
        "shape": glyph.shape,
        "arc_fraction": glyph.arc_fraction,
        "base_color": glyph.base_color,
    }
