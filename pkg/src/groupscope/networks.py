"""Behavior-pattern networks over coded utterance sequences.

Nodes are behavior categories with raw occurrence counts; edges accumulate
binary co-occurrence within a sliding window of consecutive annotations
(one increment per distinct pair per window). Windows never span question
boundaries, which makes edge weights additive across disjoint questions.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from groupscope.annotate.tasks import BehaviorAnnotation
from groupscope.corpus import Session


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class BehaviorNetwork:
    nodes: dict[str, float]  # category -> frequency
    edges: dict[tuple[str, str], float]  # sorted category pair -> weight
    question_range: tuple[int, ...]

    def merged_with(self, other: "BehaviorNetwork") -> "BehaviorNetwork":
        nodes = dict(self.nodes)
        for cat, freq in other.nodes.items():
            nodes[cat] = nodes.get(cat, 0.0) + freq
        edges = dict(self.edges)
        for pair, w in other.edges.items():
            edges[pair] = edges.get(pair, 0.0) + w
        return BehaviorNetwork(
            nodes=nodes,
            edges=edges,
            question_range=tuple(sorted(set(self.question_range) | set(other.question_range))),
        )


def build_behavior_network(
    annotations: list[BehaviorAnnotation], window: int = 4
) -> BehaviorNetwork:
    """Accumulate category co-occurrence over a sliding window.

    Sequences shorter than the window are treated as one truncated window,
    so short questions still contribute their pairings.
    """
    if window < 2:
        raise NetworkError(f"co-occurrence window must be >= 2, got {window}")
    categories = [a.category for a in annotations]
    nodes: dict[str, float] = {}
    for cat in categories:
        nodes[cat] = nodes.get(cat, 0.0) + 1.0

    edges: dict[tuple[str, str], float] = {}
    qids = sorted({a.ref.question_id for a in annotations})
    n = len(categories)
    if n >= 2:
        spans = range(n - window + 1) if n >= window else range(1)
        width = min(window, n)
        for start in spans:
            seen = sorted(set(categories[start:start + width]))
            for a, b in combinations(seen, 2):
                edges[(a, b)] = edges.get((a, b), 0.0) + 1.0
    return BehaviorNetwork(nodes=nodes, edges=edges, question_range=tuple(qids))


def network_for_range(
    session: Session,
    annotations_by_question: dict[int, list[BehaviorAnnotation]],
    questions: set[int],
    window: int = 4,
) -> BehaviorNetwork:
    """Accumulate per-question networks over a selection of questions."""
    known = {seg.question_id for seg in session.segments}
    unknown = set(questions) - known
    if unknown:
        raise NetworkError(f"unknown question ids {sorted(unknown)}")
    result = BehaviorNetwork(nodes={}, edges={}, question_range=())
    for qid in sorted(questions):
        per_question = build_behavior_network(
            annotations_by_question.get(qid, []), window
        )
        result = result.merged_with(per_question)
    return BehaviorNetwork(
        nodes=result.nodes, edges=result.edges, question_range=tuple(sorted(questions))
    )


def network_document(net: BehaviorNetwork) -> dict:
    """Network JSON with raw values plus max-scaled norms in [0, 1]."""
    max_freq = max(net.nodes.values(), default=0.0)
    max_weight = max(net.edges.values(), default=0.0)
    return {
        "range": list(net.question_range),
        "nodes": [
            {
                "category": cat,
                "freq": freq,
                "norm": freq / max_freq if max_freq > 0 else 0.0,
            }
            for cat, freq in sorted(net.nodes.items())
        ],
        "edges": [
            {
                "a": a,
                "b": b,
                "w": w,
                "norm": w / max_weight if max_weight > 0 else 0.0,
            }
            for (a, b), w in sorted(net.edges.items())
        ],
    }


def compare_networks(a: BehaviorNetwork, b: BehaviorNetwork) -> dict:
    """Side-by-side export, each network max-scaled by its own peak values."""
    return {"left": network_document(a), "right": network_document(b)}
