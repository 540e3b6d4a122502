"""Cohort-level group analytics.

Collaboration quality combines task effectiveness (mean question score) with
engagement balance via the coefficient of variation: quality = mean_score *
(1 - cv). Group feature vectors are z-scored across the cohort and feed both
the Euclidean similarity ranking and an exact t-SNE projection; the same
profile data parameterizes the flower/bouquet glyphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SCAFFOLD_ORDER = ("CS-L", "CS-M", "CS-H", "MS")
COLOR_GROUPS = (1, 2, 3, 4)

# Fixed, documented ordering of the group feature vector.
FEATURE_LABELS = (
    "mean_score",
    "quality",
    "behavioral_mean",
    "cognitive_mean",
    "engagement_cv",
    "scaffold_cs_l",
    "scaffold_cs_m",
    "scaffold_cs_h",
    "scaffold_ms",
    "duration_s",
    "prior_mean",
    "color_group_1_freq",
    "color_group_2_freq",
    "color_group_3_freq",
    "color_group_4_freq",
)


class AnalyticsError(ValueError):
    pass


def collaboration_quality(
    scores: list[float], engagement: tuple[float, float, float]
) -> tuple[float, float, float]:
    """(sigma_e, cv_e, quality) from question scores and per-student engagement.

    sigma_e is the population (1/n) standard deviation of the engagement
    triple; quality = mean(scores) * (1 - sigma_e / mean(engagement)).
    """
    if not scores:
        raise AnalyticsError("scores must be non-empty")
    if any(e < 0 for e in engagement):
        raise AnalyticsError(f"engagement must be non-negative, got {engagement}")
    e_mean = sum(engagement) / len(engagement)
    if e_mean == 0:
        raise AnalyticsError("engagement undefined: mean engagement is zero")
    s_mean = sum(scores) / len(scores)
    sigma = math.sqrt(sum((e - e_mean) ** 2 for e in engagement) / len(engagement))
    cv = sigma / e_mean
    quality = s_mean * (1.0 - cv)
    return sigma, cv, quality


@dataclass(frozen=True)
class GroupProfile:
    group_id: str
    mean_score: float
    engagement_vector: tuple[float, float, float]
    sigma_e: float
    cv_e: float
    quality: float
    scaffold_counts: dict[str, int]
    discussion_duration: float
    prior_performance: float
    behavior_color_freqs: tuple[float, float, float, float]
    behavioral_mean: float
    cognitive_mean: float
    feature_vector: tuple[float, ...] = ()
    projection_xy: tuple[float, float] | None = None


def group_feature_vector(profile: GroupProfile) -> list[float]:
    """Raw (pre-standardization) feature vector in FEATURE_LABELS order."""
    return [
        profile.mean_score,
        profile.quality,
        profile.behavioral_mean,
        profile.cognitive_mean,
        profile.cv_e,
        float(profile.scaffold_counts.get("CS-L", 0)),
        float(profile.scaffold_counts.get("CS-M", 0)),
        float(profile.scaffold_counts.get("CS-H", 0)),
        float(profile.scaffold_counts.get("MS", 0)),
        profile.discussion_duration,
        profile.prior_performance,
        *profile.behavior_color_freqs,
    ]


def standardize(vectors: dict[str, list[float]]) -> dict[str, np.ndarray]:
    """Z-score columns across the cohort; zero-variance columns map to 0."""
    if len(vectors) < 2:
        raise AnalyticsError(
            f"standardization needs at least 2 groups, got {len(vectors)}"
        )
    keys = sorted(vectors)
    X = np.array([vectors[k] for k in keys], dtype=float)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    Z = np.zeros_like(X)
    nonzero = std > 0
    Z[:, nonzero] = (X[:, nonzero] - mean[nonzero]) / std[nonzero]
    return {k: Z[i] for i, k in enumerate(keys)}


@dataclass(frozen=True)
class SimilarityResult:
    target: str
    most_similar: tuple[str, float]
    most_different: tuple[str, float]


def rank_similarity(target: str, vectors: dict[str, np.ndarray]) -> SimilarityResult:
    """Closest and farthest cohort member by Euclidean distance.

    Ties break deterministically toward the ascending group id.
    """
    if target not in vectors:
        raise AnalyticsError(f"unknown group {target!r}")
    others = sorted(k for k in vectors if k != target)
    if len(others) < 2:
        raise AnalyticsError("similarity ranking needs a cohort of at least 3")
    distances = [
        (float(np.linalg.norm(np.asarray(vectors[k]) - np.asarray(vectors[target]))), k)
        for k in others
    ]
    most_similar = min(distances, key=lambda pair: (pair[0], pair[1]))
    most_different = max(distances, key=lambda pair: (pair[0],))
    # Deterministic max tie-break toward the ascending id.
    far_candidates = sorted(k for d, k in distances if d == most_different[0])
    return SimilarityResult(
        target=target,
        most_similar=(most_similar[1], most_similar[0]),
        most_different=(far_candidates[0], most_different[0]),
    )


def similarity_matrix(vectors: dict[str, np.ndarray]) -> dict:
    keys = sorted(vectors)
    return {
        "groups": keys,
        "distances": [
            [float(np.linalg.norm(vectors[a] - vectors[b])) for b in keys] for a in keys
        ],
    }


def _joint_probabilities(sq_distances: np.ndarray, perplexity: float) -> np.ndarray:
    """Binary-search per-point precisions to the target perplexity."""
    n = sq_distances.shape[0]
    target_entropy = math.log(perplexity)
    P = np.zeros((n, n))
    for i in range(n):
        di = np.delete(sq_distances[i], i)
        beta, beta_min, beta_max = 1.0, 0.0, math.inf
        pi = np.exp(-di * beta)
        for _ in range(64):
            total = pi.sum()
            if total <= 0:
                entropy = 0.0
            else:
                entropy = math.log(total) + beta * float((di * pi).sum()) / total
            if abs(entropy - target_entropy) < 1e-7:
                break
            if entropy > target_entropy:
                beta_min = beta
                beta = beta * 2.0 if math.isinf(beta_max) else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = (beta + beta_min) / 2.0
            pi = np.exp(-di * beta)
        total = pi.sum()
        row = pi / total if total > 0 else np.full(n - 1, 1.0 / (n - 1))
        P[i, np.arange(n) != i] = row
    P = (P + P.T) / (2.0 * n)
    return np.maximum(P, 1e-12)


def project_tsne(
    vectors: np.ndarray,
    perplexity: float = 5.0,
    seed: int = 0,
    iterations: int = 1000,
    learning_rate: float = 100.0,
) -> np.ndarray:
    """Exact t-SNE to 2-D with seeded random init.

    Standard gradient descent with early exaggeration (x4 for the first 100
    iterations), momentum switching 0.5 -> 0.8 at iteration 250, and
    adaptive per-coordinate gains.
    """
    X = np.asarray(vectors, dtype=float)
    n = X.shape[0]
    if n < 4:
        raise AnalyticsError(f"t-SNE needs at least 4 points, got {n}")
    if not 0 < perplexity <= (n - 1) / 3:
        raise AnalyticsError(
            f"perplexity must be in (0, (n-1)/3] = (0, {(n - 1) / 3:.2f}], got {perplexity}"
        )
    sq_norms = (X * X).sum(axis=1)
    D = np.maximum(sq_norms[:, None] + sq_norms[None, :] - 2.0 * (X @ X.T), 0.0)
    P = _joint_probabilities(D, perplexity)

    rng = np.random.RandomState(seed)
    Y = rng.normal(0.0, 1e-4, size=(n, 2))
    velocity = np.zeros_like(Y)
    gains = np.ones_like(Y)
    exaggeration_until = min(100, iterations)

    for it in range(iterations):
        P_eff = P * 4.0 if it < exaggeration_until else P
        diff = Y[:, None, :] - Y[None, :, :]
        inv = 1.0 / (1.0 + (diff * diff).sum(axis=2))
        np.fill_diagonal(inv, 0.0)
        Q = np.maximum(inv / inv.sum(), 1e-12)
        PQ = (P_eff - Q) * inv
        grad = 4.0 * ((np.diag(PQ.sum(axis=1)) - PQ) @ Y)

        momentum = 0.5 if it < 250 else 0.8
        same_sign = np.sign(grad) == np.sign(velocity)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.clip(gains, 0.01, None, out=gains)
        velocity = momentum * velocity - learning_rate * gains * grad
        Y = Y + velocity
        Y = Y - Y.mean(axis=0)

    if not np.all(np.isfinite(Y)):
        raise AnalyticsError("t-SNE produced non-finite coordinates")
    return Y


@dataclass(frozen=True)
class StudentGlyph:
    student_id: str
    petal_size: float
    stamen_size: float
    flower_color: str  # modal role over the session


@dataclass(frozen=True)
class GlyphParams:
    group_id: str
    flowers: tuple[StudentGlyph, ...]
    leaf_color_level: int  # scaffold-intensity tertile, 0..2
    butterfly_count: int  # quality quartile bin, 0..3
    shape: str  # "rectangle" when the group received scaffolding, else "point"
    arc_fraction: float  # discussion duration / cohort max
    base_color: float  # mean prior score scaled to [0, 1]


@dataclass(frozen=True)
class StudentSummary:
    student_id: str
    behavioral_mean: float
    cognitive_mean: float
    modal_role: str


def _quartile_bin(value: float, population: list[float]) -> int:
    thresholds = [float(np.percentile(population, p)) for p in (25, 50, 75)]
    return sum(1 for t in thresholds if value >= t)


def _tertile_level(count: float, population: list[float]) -> int:
    if count == 0:
        return 0
    thresholds = [float(np.percentile(population, p)) for p in (100 / 3, 200 / 3)]
    return sum(1 for t in thresholds if count >= t)


def glyph_params(
    profiles: list[GroupProfile],
    students_by_group: dict[str, list[StudentSummary]],
) -> dict[str, GlyphParams]:
    """Visual encoding parameters for every group's bouquet."""
    if not profiles:
        return {}
    qualities = [p.quality for p in profiles]
    scaffold_totals = {
        p.group_id: float(sum(p.scaffold_counts.values())) for p in profiles
    }
    max_duration = max(p.discussion_duration for p in profiles)
    all_students = [s for group in students_by_group.values() for s in group]
    max_petal = max((s.behavioral_mean for s in all_students), default=0.0)
    max_stamen = max((s.cognitive_mean for s in all_students), default=0.0)

    out: dict[str, GlyphParams] = {}
    for profile in profiles:
        flowers = tuple(
            StudentGlyph(
                student_id=s.student_id,
                petal_size=s.behavioral_mean / max_petal if max_petal > 0 else 0.0,
                stamen_size=s.cognitive_mean / max_stamen if max_stamen > 0 else 0.0,
                flower_color=s.modal_role,
            )
            for s in students_by_group.get(profile.group_id, [])
        )
        total_scaffolds = scaffold_totals[profile.group_id]
        out[profile.group_id] = GlyphParams(
            group_id=profile.group_id,
            flowers=flowers,
            leaf_color_level=_tertile_level(
                total_scaffolds, list(scaffold_totals.values())
            ),
            butterfly_count=_quartile_bin(profile.quality, qualities),
            shape="rectangle" if total_scaffolds > 0 else "point",
            arc_fraction=(
                profile.discussion_duration / max_duration if max_duration > 0 else 0.0
            ),
            base_color=profile.prior_performance / 100.0,
        )
    return out
