"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one PASS line (visible with ``pytest -s`` or in the -rA
summary); a failing criterion fails its test. Run with:

    pytest tests/test_acceptance.py -v -s
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from groupscope.analytics import collaboration_quality, project_tsne
from groupscope.annotate.tasks import code_weighted_total
from groupscope.engagement import nmf, savgol_coefficients, smooth_engagement_curve
from groupscope.service.config import config_from_doc
from groupscope.service.pipeline import run_pipeline
from groupscope.service.snapshot import SnapshotStore
from groupscope.timeline import ConfidenceBar, merge_runs, smooth_confidences
from groupscope.annotate.tasks import UtteranceRef

GOLDEN_DIR = Path(__file__).parent / "golden"
COHORT = Path(__file__).parent / "fixtures" / "cohort"


def ok(name: str) -> None:
    print(f"ACCEPTANCE {name}: PASS")


def test_quality_equation_reproduction():
    t0 = time.perf_counter()
    for _ in range(1000):
        _, _, q20 = collaboration_quality([4.14], (10.06, 9.32, 8.62))
        _, _, q19 = collaboration_quality([4.11], (10.515, 9.725, 4.575))
    per_call_ms = (time.perf_counter() - t0) * 1000 / 2000
    assert q20 == pytest.approx(3.88, abs=0.01)
    assert q19 == pytest.approx(2.80, abs=0.01)
    assert per_call_ms < 1.0
    ok(f"quality-equation (3.88/2.80, {per_call_ms:.4f} ms/call)")


def test_code_score_weighting():
    assert code_weighted_total(5, 5, 5, 3) == 4.50
    ok("code-score-weighting (5,5,5,3 -> 4.50 exactly)")


def _bar(t0, t1, category, confidence, index):
    return ConfidenceBar(
        ref=UtteranceRef(1, index), t0=t0, t1=t1, speaker="0301",
        category=category, raw_confidence=confidence,
        smoothed_confidence=confidence, explanation="",
    )


def test_merge_run_property_suite():
    rng = random.Random(20240517)
    for case in range(1000):
        n = rng.randint(0, 25)
        bars = []
        t = 0.0
        for i in range(n):
            dur = rng.randint(1, 512) / 64.0  # dyadic durations: exact sums
            bars.append(_bar(t, t + dur, rng.choice("ABCD"), rng.uniform(0, 100), i))
            t += dur
        runs = merge_runs(bars)
        for a, b in zip(runs, runs[1:]):
            assert a.category != b.category
        assert math.fsum(r.duration for r in runs) == math.fsum(b.t1 - b.t0 for b in bars)
        if bars:
            total = math.fsum(b.t1 - b.t0 for b in bars)
            overall = math.fsum(b.smoothed_confidence * (b.t1 - b.t0) for b in bars) / total
            merged = math.fsum(r.mean_confidence * r.duration for r in runs) / total
            assert abs(overall - merged) < 1e-9
        assert [ref for r in runs for ref in r.member_refs] == [b.ref for b in bars]
    ok("merge-run-properties (1000 randomized sequences)")


def test_smoothing_suite():
    rng = random.Random(99)
    for case in range(500):
        n = rng.randint(1, 50)
        window = rng.choice([1, 3, 5, 7, 9, 11])
        if rng.random() < 0.2:
            values = [rng.uniform(0, 100)] * n
            out = smooth_confidences(values, window)
            assert all(abs(v - values[0]) < 1e-9 for v in out)
        else:
            values = [rng.uniform(0, 100) for _ in range(n)]
            out = smooth_confidences(values, window)
        assert len(out) == n
        assert min(values) - 1e-9 <= min(out) and max(out) <= max(values) + 1e-9
    ok("smoothing-properties (500 randomized cases)")


def test_nmf_suite():
    for seed in range(200):
        rng = np.random.RandomState(seed)
        X = rng.uniform(0, 1, (6, 4))
        result = nmf(X, rank=2, max_iter=200, tol=0.0, seed=seed)
        errs = np.asarray(result.errors)
        assert np.all(np.diff(errs) <= 1e-9), f"seed {seed} not monotone"
        assert np.all(result.W >= 0) and np.all(result.H >= 0)

    for seed in range(200):
        rng = np.random.RandomState(10_000 + seed)
        X = np.outer(rng.uniform(0.1, 2.0, 6), rng.uniform(0.1, 2.0, 4))
        result = nmf(X, rank=1, max_iter=500, tol=1e-12, seed=seed)
        rel = np.linalg.norm(X - result.reconstruction) / np.linalg.norm(X)
        assert rel <= 1e-3, f"seed {seed}: rel err {rel}"
    ok("nmf-suite (200 monotone rank-2 + 200 rank-1 recoveries)")


def test_centrality_oracles():
    from groupscope.engagement import CooccurrenceNetwork, degree_centrality

    k3 = CooccurrenceNetwork(
        students=("A", "B", "C"),
        edges={("A", "B"): 2.0, ("A", "C"): 2.0, ("B", "C"): 2.0},
    )
    centrality = degree_centrality(k3)
    assert all(v == 1 / 3 for v in centrality.values())

    star = CooccurrenceNetwork(
        students=("A", "B", "C"), edges={("A", "B"): 1.0, ("A", "C"): 1.0}
    )
    values = degree_centrality(star)
    assert values == {"A": 0.5, "B": 0.25, "C": 0.25}
    ok("degree-centrality (K3 exact thirds, star oracle)")


def test_savitzky_golay_polynomial_reproduction():
    coeffs = savgol_coefficients(5, 2)
    assert np.allclose(coeffs * 35, [-3, 12, 17, 12, -3], atol=1e-9)
    rng = np.random.RandomState(5)
    xs = np.arange(20, dtype=float)
    for _ in range(25):
        a, b, c = rng.uniform(-2, 2, 3)
        series = (a * xs**2 + b * xs + c).tolist()
        out = smooth_engagement_curve(series, window=5, polyorder=2)
        for i in range(2, len(series) - 2):
            assert abs(out[i] - series[i]) < 1e-9
    ok("savitzky-golay (degree<=2 reproduced at interior, (5,2) table)")


def test_tsne_determinism_and_duplicate_affinity():
    rng = np.random.RandomState(7)
    X = rng.uniform(0, 1, (12, 6))
    X[1] = X[0]

    same_a = project_tsne(X, perplexity=3.0, seed=42)
    same_b = project_tsne(X, perplexity=3.0, seed=42)
    assert np.array_equal(same_a, same_b)

    t0 = time.perf_counter()
    wins = 0
    for seed in range(100):
        Y = project_tsne(X, perplexity=3.0, seed=seed, iterations=1000)
        D = np.linalg.norm(Y[:, None, :] - Y[None, :, :], axis=2)
        np.fill_diagonal(D, np.inf)
        wins += int(D[0].argmin() == 1 and D[1].argmin() == 0)
    elapsed = time.perf_counter() - t0
    assert wins >= 95, f"only {wins}/100 runs made the duplicates mutual NN"
    assert elapsed < 5.0, f"100 seeded runs took {elapsed:.2f}s"
    ok(f"tsne (same-seed identical; duplicates mutual NN {wins}/100 in {elapsed:.2f}s)")


@pytest.fixture(scope="module")
def e2e(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("acceptance")
    doc = json.loads((GOLDEN_DIR / "config.json").read_text())
    base = config_from_doc(doc, base_dir=tmp)
    config = replace(
        base,
        cache_dir=str(tmp / "cache"),
        snapshot_dir=str(tmp / "snapshots"),
    )
    t0 = time.perf_counter()
    first = run_pipeline(COHORT, config)
    first_elapsed = time.perf_counter() - t0
    second_config = replace(config, snapshot_dir=str(tmp / "snapshots-rerun"))
    second = run_pipeline(COHORT, second_config)
    return first, second, first_elapsed


def test_end_to_end_determinism(e2e):
    first, second, elapsed = e2e
    golden_path = GOLDEN_DIR / "snapshot_digest.txt"
    assert golden_path.exists(), (
        "golden digest missing; generate with tools/make_golden_digest.py"
    )
    golden = golden_path.read_text().strip()
    assert first.snapshot_id == golden, (
        f"snapshot digest {first.snapshot_id} != committed golden {golden}"
    )
    assert second.snapshot_id == golden
    assert second.backend_calls == 0
    assert second.cache_misses == 0
    assert elapsed < 30.0
    SnapshotStore(first.snapshot_dir).verify()
    ok(f"end-to-end (golden digest match, rerun 0 misses, {elapsed:.2f}s)")


def test_case_replica_similarity_and_debugging(e2e):
    first, _, _ = e2e
    store = SnapshotStore(first.snapshot_dir)
    similarity = store.read("cohort/similarity.json")
    assert similarity["per_group"]["G10"]["most_similar"]["group_id"] == "G18"

    def q1_debugging(group: str) -> float:
        doc = store.read(f"groups/{group}/networks.json")
        nodes = doc["per_question"]["1"]["nodes"]
        return next((n["freq"] for n in nodes if n["category"] == "Debugging"), 0.0)

    g10, g18 = q1_debugging("G10"), q1_debugging("G18")
    assert g18 > g10, f"expected G18 Q1 Debugging > G10, got {g18} vs {g10}"
    ok(f"case-replica (G10 most-similar=G18; Q1 Debugging {g18:.0f} > {g10:.0f})")
