"""Behavioral and cognitive engagement scores.

Per (question, phase) snapshot each student gets two scalars: a behavioral
score from speech effort features (speaking time, turn count, co-occurrence
degree centrality) and a cognitive score from behavior-category and role
occupancy counts. Both matrices are max-normalized per column and reduced
to one factor per student with rank-1 multiplicative-update NMF, then the
per-question series is smoothed with a Savitzky-Golay filter for display.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from groupscope.annotate.tasks import BehaviorAnnotation, RoleAssignment
from groupscope.corpus import CodingScheme, QuestionSegment, Utterance, split_half
from groupscope.digest import stable_digest

IRRELEVANT_CATEGORY = "Unrelated chat"
PHASES = ("half", "full")
ROLE_COLUMNS = ("Driver", "Navigator", "Monitor")


class EngagementError(ValueError):
    pass


@dataclass(frozen=True)
class CooccurrenceNetwork:
    students: tuple[str, ...]
    # Symmetric adjacency-turn counts keyed by sorted speaker pair.
    edges: dict[tuple[str, str], float]

    def weight(self, a: str, b: str) -> float:
        return self.edges.get((min(a, b), max(a, b)), 0.0)

    @property
    def total_weight(self) -> float:
        return sum(self.edges.values())


@dataclass(frozen=True)
class FeatureMatrix:
    students: tuple[str, ...]
    columns: tuple[str, ...]
    values: np.ndarray  # shape (students, columns), >= 0, column max <= 1

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.students), len(self.columns)):
            raise EngagementError(
                f"feature matrix shape {self.values.shape} does not match labels"
            )
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise EngagementError("feature matrix must be finite and non-negative")


@dataclass(frozen=True)
class EngagementPoint:
    student_id: str
    question_id: int
    phase: str
    behavioral: float
    cognitive: float


def build_cooccurrence(utterances: list[Utterance], students: list[str]) -> CooccurrenceNetwork:
    """Count adjacent speaking turns between distinct students.

    Non-student speakers never contribute, so instructor turns neither link
    nor interrupt a student pair... they are simply skipped.
    """
    edges: dict[tuple[str, str], float] = {}
    speakers = [u.speaker for u in utterances if u.speaker in students]
    for a, b in zip(speakers, speakers[1:]):
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        edges[key] = edges.get(key, 0.0) + 1.0
    return CooccurrenceNetwork(students=tuple(students), edges=edges)


def degree_centrality(net: CooccurrenceNetwork) -> dict[str, float]:
    """Weighted degree normalized by twice the total edge weight.

    Values sum to 1 whenever the network has at least one edge; an empty
    network yields all zeros.
    """
    total = net.total_weight
    if total == 0:
        return {s: 0.0 for s in net.students}
    degrees = {s: 0.0 for s in net.students}
    for (a, b), w in net.edges.items():
        degrees[a] += w
        degrees[b] += w
    return {s: degrees[s] / (2.0 * total) for s in net.students}


def max_normalize_columns(matrix: np.ndarray) -> np.ndarray:
    """Scale each column to [0, 1] by its max; all-zero columns stay zero."""
    out = np.array(matrix, dtype=float, copy=True)
    maxima = out.max(axis=0)
    nonzero = maxima > 0
    out[:, nonzero] = out[:, nonzero] / maxima[nonzero]
    return out


def _phase_indices(segment: QuestionSegment, phase: str) -> list[int]:
    if phase not in PHASES:
        raise EngagementError(f"phase must be one of {PHASES}, got {phase!r}")
    first_half, _ = split_half(segment)
    count = len(first_half) if phase == "half" else len(segment.utterances)
    return list(range(count))


def behavioral_features(
    segment: QuestionSegment,
    phase: str,
    students: list[str],
    annotations: list[BehaviorAnnotation] | None = None,
) -> FeatureMatrix:
    """Speaking seconds, turn count and degree centrality per student.

    When annotations are given, utterances labeled as irrelevant chat are
    dropped before measuring.
    """
    indices = _phase_indices(segment, phase)
    if annotations is not None:
        by_index = {a.ref.index: a for a in annotations}
        indices = [
            i
            for i in indices
            if by_index.get(i) is None or by_index[i].category != IRRELEVANT_CATEGORY
        ]
    speech = [segment.utterances[i] for i in indices
              if segment.utterances[i].speaker in students]
    durations = {s: 0.0 for s in students}
    counts = {s: 0.0 for s in students}
    for u in speech:
        durations[u.speaker] += u.duration
        counts[u.speaker] += 1.0
    centrality = degree_centrality(build_cooccurrence(speech, students))
    raw = np.array(
        [[durations[s], counts[s], centrality[s]] for s in students], dtype=float
    )
    return FeatureMatrix(
        students=tuple(students),
        columns=("speaking_seconds", "utterance_count", "degree_centrality"),
        values=max_normalize_columns(raw),
    )


def cognitive_features(
    segment: QuestionSegment,
    phase: str,
    scheme: CodingScheme,
    students: list[str],
    annotations: list[BehaviorAnnotation],
    roles: list[RoleAssignment],
) -> FeatureMatrix:
    """Per-category utterance counts plus role occupancy counts per student.

    Role columns are all zero when the segment has no role annotations
    (e.g. no declared driver); passing None instead of a list is an error.
    """
    if annotations is None or roles is None:
        raise EngagementError("cognitive features require behavior and role annotations")
    kept_indices = set(_phase_indices(segment, phase))
    names = scheme.names
    col_index = {name: i for i, name in enumerate(names)}
    n_cat = len(names)
    raw = np.zeros((len(students), n_cat + len(ROLE_COLUMNS)))
    row_index = {s: i for i, s in enumerate(students)}

    for annotation in annotations:
        idx = annotation.ref.index
        if idx not in kept_indices:
            continue
        speaker = segment.utterances[idx].speaker
        if speaker in row_index:
            raw[row_index[speaker], col_index[annotation.category]] += 1.0

    for assignment in roles:
        if assignment.ref.index not in kept_indices:
            continue
        for student in students:
            role = assignment.role_of(student)
            if role in ROLE_COLUMNS:
                raw[row_index[student], n_cat + ROLE_COLUMNS.index(role)] += 1.0

    return FeatureMatrix(
        students=tuple(students),
        columns=tuple(names) + ROLE_COLUMNS,
        values=max_normalize_columns(raw),
    )


@dataclass(frozen=True)
class NMFResult:
    W: np.ndarray
    H: np.ndarray
    errors: tuple[float, ...]

    @property
    def reconstruction(self) -> np.ndarray:
        return self.W @ self.H


_NMF_EPS = 1e-12


def _init_factors(X: np.ndarray, rank: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded uniform init. W rows are keyed by their row content so that
    permuting X's rows permutes W's init rows identically."""
    n_rows, n_cols = X.shape
    W = np.empty((n_rows, rank))
    for i in range(n_rows):
        row_key = stable_digest("nmf-row", seed, X[i].tobytes())
        rng = np.random.RandomState(int(row_key[:8], 16))
        W[i] = rng.uniform(0.1, 1.0, size=rank)
    rng = np.random.RandomState(
        int(stable_digest("nmf-h", seed, n_cols, rank)[:8], 16)
    )
    H = rng.uniform(0.1, 1.0, size=(rank, n_cols))
    return W, H


def nmf(
    X: np.ndarray,
    rank: int,
    max_iter: int = 1000,
    tol: float = 1e-6,
    seed: int = 0,
) -> NMFResult:
    """Multiplicative-update NMF minimizing the Frobenius error.

    The error sequence is non-increasing; iteration stops once the relative
    error change drops below ``tol`` or after ``max_iter`` rounds.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise EngagementError("NMF input must be a matrix")
    if np.any(X < 0) or not np.all(np.isfinite(X)):
        raise EngagementError("NMF input must be finite and non-negative")
    if rank < 1 or rank > min(X.shape):
        raise EngagementError(f"rank must be within 1..min{X.shape}, got {rank}")

    W, H = _init_factors(X, rank, seed)
    errors: list[float] = [float(np.linalg.norm(X - W @ H))]
    for _ in range(max_iter):
        H *= (W.T @ X) / (W.T @ W @ H + _NMF_EPS)
        W *= (X @ H.T) / (W @ H @ H.T + _NMF_EPS)
        err = float(np.linalg.norm(X - W @ H))
        previous = errors[-1]
        errors.append(err)
        if previous > 0 and abs(previous - err) / previous < tol:
            break
        if err == 0:
            break
    return NMFResult(W=W, H=H, errors=tuple(errors))


def rank1_scores(X: np.ndarray, seed: int, max_iter: int = 1000, tol: float = 1e-9) -> np.ndarray:
    """Per-row factor of a rank-1 NMF, rescaled so the max row scores 1."""
    X = np.asarray(X, dtype=float)
    if not X.any():
        return np.zeros(X.shape[0])
    result = nmf(X, rank=1, max_iter=max_iter, tol=tol, seed=seed)
    scores = result.W[:, 0]
    peak = scores.max()
    if peak > 0:
        scores = scores / peak
    return scores


def engagement_scores(
    segment: QuestionSegment,
    scheme: CodingScheme,
    students: list[str],
    annotations: list[BehaviorAnnotation],
    roles: list[RoleAssignment],
    seed: int = 0,
) -> list[EngagementPoint]:
    """Two snapshots (mid-question and full) of both engagement scalars."""
    points = []
    for phase in PHASES:
        behav = behavioral_features(segment, phase, students, annotations)
        cog = cognitive_features(segment, phase, scheme, students, annotations, roles)
        behav_seed = int(stable_digest("behavioral", seed, segment.question_id, phase)[:8], 16)
        cog_seed = int(stable_digest("cognitive", seed, segment.question_id, phase)[:8], 16)
        b_scores = rank1_scores(behav.values, seed=behav_seed)
        c_scores = rank1_scores(cog.values, seed=cog_seed)
        for i, student in enumerate(students):
            points.append(EngagementPoint(
                student_id=student,
                question_id=segment.question_id,
                phase=phase,
                behavioral=float(b_scores[i]),
                cognitive=float(c_scores[i]),
            ))
    return points


def savgol_coefficients(window: int, polyorder: int) -> np.ndarray:
    """Least-squares Savitzky-Golay smoothing coefficients for a centered window."""
    if window < 1 or window % 2 == 0:
        raise EngagementError(f"window must be odd and >= 1, got {window}")
    if polyorder < 0 or polyorder >= window:
        raise EngagementError(
            f"polyorder must satisfy 0 <= polyorder < window, got {polyorder}"
        )
    half = window // 2
    x = np.arange(-half, half + 1, dtype=float)
    vander = np.vander(x, N=polyorder + 1, increasing=True)
    return np.linalg.pinv(vander)[0]


def smooth_engagement_curve(
    values: list[float], window: int = 5, polyorder: int = 2
) -> list[float]:
    """Savitzky-Golay smoothing; length preserved, short series pass through.

    Interior points use the symmetric convolution; each boundary point is
    evaluated from the least-squares polynomial fitted to its edge window,
    so polynomial inputs of degree <= polyorder are reproduced exactly.
    """
    coeffs = savgol_coefficients(window, polyorder)
    n = len(values)
    if n < window:
        return list(values)
    y = np.asarray(values, dtype=float)
    half = window // 2
    out = np.convolve(y, coeffs[::-1], mode="same")

    x_edge = np.arange(window, dtype=float)
    vander = np.vander(x_edge, N=polyorder + 1, increasing=True)
    head_fit = vander @ np.linalg.lstsq(vander, y[:window], rcond=None)[0]
    tail_fit = vander @ np.linalg.lstsq(vander, y[-window:], rcond=None)[0]
    out[:half] = head_fit[:half]
    out[-half:] = tail_fit[-half:]
    return [float(v) for v in out]


def engagement_document(
    students: list[str],
    points: list[EngagementPoint],
    window: int = 5,
    polyorder: int = 2,
) -> dict:
    """Per-group engagement export: raw points plus smoothed display curves."""
    ordered = sorted(points, key=lambda p: (p.question_id, PHASES.index(p.phase)))
    doc: dict = {"students": list(students), "points": [], "smoothed": []}
    for p in ordered:
        doc["points"].append({
            "student": p.student_id,
            "q": p.question_id,
            "phase": p.phase,
            "behavioral": p.behavioral,
            "cognitive": p.cognitive,
        })
    for student in students:
        series = [p for p in ordered if p.student_id == student]
        behavioral = smooth_engagement_curve([p.behavioral for p in series], window, polyorder)
        cognitive = smooth_engagement_curve([p.cognitive for p in series], window, polyorder)
        doc["smoothed"].append({
            "student": student,
            "labels": [[p.question_id, p.phase] for p in series],
            "behavioral": behavioral,
            "cognitive": cognitive,
        })
    return doc
