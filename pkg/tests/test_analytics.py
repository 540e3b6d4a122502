from __future__ import annotations

import numpy as np
import pytest

from groupscope.analytics import (
    AnalyticsError,
    FEATURE_LABELS,
    GroupProfile,
    StudentSummary,
    collaboration_quality,
    glyph_params,
    group_feature_vector,
    project_tsne,
    rank_similarity,
    standardize,
)


class TestCollaborationQuality:
    def test_balanced_group_from_reference_table(self):
        sigma, cv, quality = collaboration_quality([4.14], (10.06, 9.32, 8.62))
        assert quality == pytest.approx(3.88, abs=0.01)
        assert sigma == pytest.approx(0.588, abs=0.001)
        assert cv == pytest.approx(0.0630, abs=0.0005)

    def test_imbalanced_group_from_reference_table(self):
        sigma, cv, quality = collaboration_quality([4.11], (10.515, 9.725, 4.575))
        assert quality == pytest.approx(2.80, abs=0.01)

    def test_zero_dispersion(self):
        for c in (0.5, 3.0, 11.0):
            _, cv, quality = collaboration_quality([4.0, 3.0], (c, c, c))
            assert cv == 0
            assert quality == 3.5

    def test_zero_engagement_rejected(self):
        with pytest.raises(AnalyticsError, match="engagement undefined"):
            collaboration_quality([4.0], (0.0, 0.0, 0.0))

    def test_negative_engagement_rejected(self):
        with pytest.raises(AnalyticsError):
            collaboration_quality([4.0], (1.0, -0.1, 2.0))

    def test_empty_scores_rejected(self):
        with pytest.raises(AnalyticsError):
            collaboration_quality([], (1.0, 1.0, 1.0))

    def test_scale_invariance(self):
        rng = np.random.RandomState(3)
        for _ in range(50):
            e = tuple(rng.uniform(0.1, 10.0, 3))
            scores = list(rng.uniform(1, 5, 4))
            factor = rng.uniform(0.01, 100)
            _, cv1, q1 = collaboration_quality(scores, e)
            _, cv2, q2 = collaboration_quality(scores, tuple(x * factor for x in e))
            assert abs(cv1 - cv2) < 1e-9
            assert abs(q1 - q2) < 1e-9

    def test_quality_bounded_by_mean_score(self):
        rng = np.random.RandomState(4)
        for _ in range(200):
            e = tuple(rng.uniform(0.5, 10.0, 3))
            scores = list(rng.uniform(1, 5, 3))
            _, cv, quality = collaboration_quality(scores, e)
            s_mean = sum(scores) / len(scores)
            if cv < 1:
                assert 0 < quality <= s_mean + 1e-12
            equal = len(set(e)) == 1
            assert (abs(quality - s_mean) < 1e-12) == equal


def profile(gid, quality=3.0, scaffolds=0, duration=300.0, prior=80.0,
            behavioral=0.5, cognitive=0.5, cv=0.1):
    kinds = {"CS-L": 0, "CS-M": 0, "CS-H": scaffolds, "MS": 0}
    return GroupProfile(
        group_id=gid,
        mean_score=4.0,
        engagement_vector=(1.0, 1.0, 1.0),
        sigma_e=cv,
        cv_e=cv,
        quality=quality,
        scaffold_counts=kinds,
        discussion_duration=duration,
        prior_performance=prior,
        behavior_color_freqs=(0.25, 0.25, 0.25, 0.25),
        behavioral_mean=behavioral,
        cognitive_mean=cognitive,
    )


class TestFeatureVectors:
    def test_labels_match_vector_length(self):
        vec = group_feature_vector(profile("G1"))
        assert len(vec) == len(FEATURE_LABELS)

    def test_identical_groups_distance_zero(self):
        vectors = {
            "G1": group_feature_vector(profile("G1")),
            "G2": group_feature_vector(profile("G2")),
            "G3": group_feature_vector(profile("G3", quality=4.0)),
        }
        standardized = standardize(vectors)
        result = rank_similarity("G1", standardized)
        assert result.most_similar == ("G2", 0.0)

    def test_zero_variance_column_standardized_to_zero(self):
        vectors = {"A": [1.0, 5.0], "B": [2.0, 5.0], "C": [3.0, 5.0]}
        standardized = standardize(vectors)
        assert all(standardized[k][1] == 0.0 for k in vectors)

    def test_single_group_standardization_error(self):
        with pytest.raises(AnalyticsError, match="at least 2"):
            standardize({"A": [1.0]})


class TestSimilarity:
    def test_pythagorean_distance(self):
        vectors = {"A": np.array([0.0, 0.0]), "B": np.array([3.0, 4.0]),
                   "C": np.array([10.0, 0.0])}
        result = rank_similarity("A", vectors)
        assert result.most_similar == ("B", 5.0)
        assert result.most_different == ("C", 10.0)

    def test_cohort_too_small(self):
        with pytest.raises(AnalyticsError):
            rank_similarity("A", {"A": np.zeros(2), "B": np.zeros(2)})

    def test_tie_breaks_ascending_id(self):
        vectors = {"A": np.zeros(2), "C": np.ones(2), "B": np.ones(2)}
        result = rank_similarity("A", vectors)
        assert result.most_similar[0] == "B"

    def test_orthogonal_invariance(self):
        rng = np.random.RandomState(9)
        for _ in range(20):
            raw = {f"G{i}": rng.uniform(-1, 1, 6) for i in range(8)}
            base = rank_similarity("G0", raw)
            # Random rotation via QR.
            Q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
            rotated = {k: Q @ v for k, v in raw.items()}
            after = rank_similarity("G0", rotated)
            assert after.most_similar[0] == base.most_similar[0]
            assert after.most_different[0] == base.most_different[0]
            assert after.most_similar[1] == pytest.approx(base.most_similar[1])


class TestTsne:
    def test_determinism(self):
        X = np.random.RandomState(1).uniform(0, 1, (8, 5))
        a = project_tsne(X, perplexity=2.0, seed=123, iterations=300)
        b = project_tsne(X, perplexity=2.0, seed=123, iterations=300)
        assert np.array_equal(a, b)

    def test_minimum_points(self):
        with pytest.raises(AnalyticsError, match="at least 4"):
            project_tsne(np.zeros((3, 2)), perplexity=0.5)

    def test_perplexity_guard(self):
        X = np.random.RandomState(1).uniform(0, 1, (6, 3))
        with pytest.raises(AnalyticsError, match="perplexity"):
            project_tsne(X, perplexity=2.0)  # (6-1)/3 = 1.67

    def test_finite_output(self):
        X = np.random.RandomState(2).uniform(0, 1, (10, 4))
        Y = project_tsne(X, perplexity=3.0, seed=5, iterations=500)
        assert Y.shape == (10, 2)
        assert np.all(np.isfinite(Y))

    def test_duplicate_rows_attract(self):
        rng = np.random.RandomState(7)
        X = rng.uniform(0, 1, (12, 6))
        X[1] = X[0]
        wins = 0
        for seed in range(20):
            Y = project_tsne(X, perplexity=3.0, seed=seed, iterations=500)
            D = np.linalg.norm(Y[:, None, :] - Y[None, :, :], axis=2)
            np.fill_diagonal(D, np.inf)
            wins += int(D[0].argmin() == 1 and D[1].argmin() == 0)
        assert wins >= 19


class TestGlyphs:
    def make_cohort(self):
        profiles = [
            profile("G1", quality=1.0, scaffolds=0, duration=100),
            profile("G2", quality=2.0, scaffolds=1, duration=200),
            profile("G3", quality=3.0, scaffolds=3, duration=300),
            profile("G4", quality=4.0, scaffolds=9, duration=400),
        ]
        students = {
            p.group_id: [
                StudentSummary(f"{p.group_id}s{i}", behavioral_mean=0.2 * i,
                               cognitive_mean=0.1 * i, modal_role="Driver")
                for i in range(1, 4)
            ]
            for p in profiles
        }
        return profiles, students

    def test_highest_quality_gets_three_butterflies(self):
        profiles, students = self.make_cohort()
        glyphs = glyph_params(profiles, students)
        assert glyphs["G4"].butterfly_count == 3
        assert glyphs["G1"].butterfly_count == 0

    def test_butterfly_monotone_in_quality(self):
        profiles, students = self.make_cohort()
        glyphs = glyph_params(profiles, students)
        ordered = sorted(profiles, key=lambda p: p.quality)
        counts = [glyphs[p.group_id].butterfly_count for p in ordered]
        assert counts == sorted(counts)

    def test_zero_scaffold_group_is_point_with_leaf_zero(self):
        profiles, students = self.make_cohort()
        glyphs = glyph_params(profiles, students)
        assert glyphs["G1"].shape == "point"
        assert glyphs["G1"].leaf_color_level == 0
        assert glyphs["G4"].shape == "rectangle"
        assert glyphs["G4"].leaf_color_level == 2

    def test_petal_sizes_rescaled_to_cohort_max(self):
        profiles, students = self.make_cohort()
        glyphs = glyph_params(profiles, students)
        petals = [f.petal_size for g in glyphs.values() for f in g.flowers]
        assert max(petals) == pytest.approx(1.0)

    def test_arc_fraction_and_base_color(self):
        profiles, students = self.make_cohort()
        glyphs = glyph_params(profiles, students)
        assert glyphs["G4"].arc_fraction == pytest.approx(1.0)
        assert glyphs["G2"].arc_fraction == pytest.approx(0.5)
        assert glyphs["G1"].base_color == pytest.approx(0.8)

    def test_modal_role_color(self):
        profiles, students = self.make_cohort()
        students["G1"][0] = StudentSummary("G1s1", 0.5, 0.5, modal_role="Navigator")
        glyphs = glyph_params(profiles, students)
        assert glyphs["G1"].flowers[0].flower_color == "Navigator"
