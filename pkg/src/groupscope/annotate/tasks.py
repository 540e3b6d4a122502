"""The four annotation tasks: behaviors, roles, scaffolding, code scoring.

Each task builds a prompt, routes it through the cache + backend, parses the
model's JSON reply, validates it against the task's schema and converts it
into typed annotations. Malformed replies get exactly one repair prompt;
transport failures surface as AnnotationError carrying partial progress.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from groupscope.annotate import prompts
from groupscope.annotate.backends import (
    AnnotationError,
    BackendError,
    ChatBackend,
    ChatMessage,
    ChatRequest,
)
from groupscope.annotate.cache import AnnotationCache, cache_key
from groupscope.corpus import CodingScheme, QuestionSegment
from groupscope.digest import canonical_json


@dataclass(frozen=True, order=True)
class UtteranceRef:
    question_id: int
    index: int


@dataclass(frozen=True)
class BehaviorAnnotation:
    ref: UtteranceRef
    category: str
    confidence_pct: float
    explanation: str

    def __post_init__(self) -> None:
        if not 0 <= self.confidence_pct <= 100:
            raise ValueError(f"confidence_pct out of range: {self.confidence_pct}")


@dataclass(frozen=True)
class RoleAssignment:
    ref: UtteranceRef
    navigator: str | None
    monitors: tuple[str, ...]
    drivers: tuple[str, ...]
    votes: int
    n_samples: int
    uncertain: bool = False
    candidates: tuple[str, ...] = ()

    def role_of(self, student: str) -> str:
        if student == self.navigator:
            return "Navigator"
        if student in self.monitors:
            return "Monitor"
        if student in self.drivers:
            return "Driver"
        return "None"


@dataclass(frozen=True)
class ScaffoldEvent:
    ref: UtteranceRef
    kind: str
    confidence_pct: float
    explanation: str

    def __post_init__(self) -> None:
        if self.kind not in prompts.SCAFFOLD_KINDS:
            raise ValueError(f"unknown scaffold kind {self.kind!r}")


@dataclass(frozen=True)
class CodeScore:
    problem_solving: float
    code_integrity: float
    code_accuracy: float
    algorithm_innovation: float
    weighted_total: float
    rationale: str
    n_samples: int
    demerits: tuple[str, ...] = ()


class MalformedResponse(ValueError):
    """Model reply did not match the task's JSON schema."""


def code_weighted_total(
    problem_solving: float,
    code_integrity: float,
    code_accuracy: float,
    algorithm_innovation: float,
) -> float:
    """Fixed-weight rubric total over the four 1-5 dimension scores."""
    for value in (problem_solving, code_integrity, code_accuracy, algorithm_innovation):
        if not 1 <= value <= 5:
            raise ValueError(f"dimension score out of range 1..5: {value}")
    return (
        0.05 * problem_solving
        + 0.35 * code_integrity
        + 0.35 * code_accuracy
        + 0.25 * algorithm_innovation
    )


@dataclass
class TaskRunner:
    """Shared request plumbing: caching, sampling, repair-and-retry."""

    backend: ChatBackend
    cache: AnnotationCache | None = None
    temperature: float = 0.7
    seed: int = 0
    prompt_version: str = prompts.PROMPT_VERSION

    def _complete(self, request: ChatRequest) -> str:
        content = canonical_json({
            "messages": [[m.role, m.content] for m in request.messages],
            "temperature": request.temperature,
            "seed": request.seed,
            "sample_idx": request.sample_idx,
            "attempt": request.attempt,
        })
        key = cache_key(request.task, content, self.prompt_version)
        if self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                return cached
        response = self.backend.complete(request)
        if self.cache is not None:
            self.cache.put(key, response)
        return response

    def ask(self, task: str, messages: tuple[tuple[str, str], ...], sample_idx: int, parse):
        """Run one sampled request; on a malformed reply, repair once."""
        request = ChatRequest(
            task=task,
            messages=tuple(ChatMessage(role, content) for role, content in messages),
            temperature=self.temperature,
            seed=self.seed,
            sample_idx=sample_idx,
        )
        try:
            return parse(self._complete(request))
        except MalformedResponse:
            repaired = request.with_repair(prompts.REPAIR_INSTRUCTION)
            try:
                return parse(self._complete(repaired))
            except MalformedResponse as exc:
                raise AnnotationError(f"{task}: malformed model JSON after repair: {exc}") from exc


def _load_json(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedResponse(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedResponse("top-level JSON value must be an object")
    return doc


def _clamp_pct(value) -> float:
    try:
        pct = float(str(value).rstrip("%"))
    except ValueError:
        raise MalformedResponse(f"confidence is not numeric: {value!r}") from None
    return max(0.0, min(100.0, pct))


def _edit_distance(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def normalized_edit_distance(a: str, b: str) -> float:
    if not a and not b:
        return 0.0
    return _edit_distance(a.lower(), b.lower()) / max(len(a), len(b))


# Off-scheme replies are folded onto the nearest scheme name; past this
# distance the mapping is considered meaningless and the annotation falls
# back to "Unrelated chat" at confidence 50.
OFF_SCHEME_THRESHOLD = 0.5
OFF_SCHEME_FALLBACK = ("Unrelated chat", 50.0)


def map_category(raw: str, scheme: CodingScheme, confidence_pct: float) -> tuple[str, float]:
    """Resolve a model-emitted category onto the coding scheme.

    Exact names pass through. Anything else maps to the nearest scheme name
    by normalized edit distance, with the confidence scaled down by the
    distance; matches worse than the threshold become the fallback category.
    """
    if raw in scheme:
        return raw, confidence_pct
    distances = sorted(
        (normalized_edit_distance(raw, name), name) for name in scheme.names
    )
    best_distance, best_name = distances[0]
    if best_distance > OFF_SCHEME_THRESHOLD:
        fallback, conf = OFF_SCHEME_FALLBACK
        if fallback not in scheme:
            return best_name, conf
        return fallback, conf
    return best_name, confidence_pct * (1.0 - best_distance)


def annotate_behaviors(
    segment: QuestionSegment,
    scheme: CodingScheme,
    runner: TaskRunner,
) -> list[BehaviorAnnotation]:
    """Classify every utterance of the segment, one annotation per utterance."""
    if not segment.utterances:
        return []

    expected = len(segment.utterances)

    def parse(text: str) -> list[BehaviorAnnotation]:
        doc = _load_json(text)
        entries = doc.get("conversations")
        if not isinstance(entries, list) or len(entries) != expected:
            raise MalformedResponse(
                f"expected {expected} conversation entries, got "
                f"{len(entries) if isinstance(entries, list) else type(entries).__name__}"
            )
        annotations = []
        for index, entry in enumerate(entries):
            if not isinstance(entry, dict) or "category" not in entry:
                raise MalformedResponse(f"entry {index} missing category")
            category, confidence = map_category(
                str(entry["category"]), scheme, _clamp_pct(entry.get("confidence_pct", 0))
            )
            annotations.append(BehaviorAnnotation(
                ref=UtteranceRef(segment.question_id, index),
                category=category,
                confidence_pct=confidence,
                explanation=str(entry.get("explanation", "")),
            ))
        return annotations

    messages = prompts.behavior_messages(segment, scheme.names)
    try:
        return runner.ask(prompts.TASK_BEHAVIOR, messages, 0, parse)
    except BackendError as exc:
        raise AnnotationError(
            f"behavior annotation failed for question {segment.question_id}: {exc}",
            partial=[],
        ) from exc


@dataclass(frozen=True)
class _RoleCandidate:
    navigator: str | None
    monitors: tuple[str, ...]
    drivers: tuple[str, ...]

    def key(self) -> str:
        return canonical_json({
            "navigator": self.navigator,
            "monitors": list(self.monitors),
            "drivers": list(self.drivers),
        })


def _parse_role_entry(entry: dict, students: list[str], driver: str) -> tuple[_RoleCandidate, float]:
    if not isinstance(entry, dict):
        raise MalformedResponse("role entry is not an object")
    navigator = entry.get("navigator")
    if navigator in ("None", "null", ""):
        navigator = None
    monitors = tuple(sorted(str(m) for m in entry.get("monitors", [])))
    drivers = tuple(sorted(str(d) for d in entry.get("drivers", [])))
    confidence = _clamp_pct(entry.get("confidence_pct", 0))
    # Normalize the displacement rule: a planning declared driver vacates
    # the driver slot.
    if navigator is not None and navigator == driver and drivers != ("None",):
        drivers = ("None",)
    candidate = _RoleCandidate(navigator=navigator, monitors=monitors, drivers=drivers)
    _validate_partition(candidate, students)
    return candidate, confidence


def _validate_partition(candidate: _RoleCandidate, students: list[str]) -> None:
    seen: list[str] = []
    if candidate.navigator is not None:
        seen.append(candidate.navigator)
    seen.extend(candidate.monitors)
    seen.extend(d for d in candidate.drivers if d != "None")
    if sorted(seen) != sorted(students):
        raise MalformedResponse(
            f"role partition must cover each student exactly once, got {seen}"
        )


def annotate_roles(
    segment: QuestionSegment,
    students: list[str],
    runner: TaskRunner,
    n_samples: int = 10,
) -> list[RoleAssignment]:
    """Majority-vote role extraction across repeated backend samples.

    Ties fall back to the highest summed confidence, then to the previous
    utterance's adopted assignment; anything still tied is adopted
    deterministically but flagged uncertain with all tied candidates kept.
    """
    if segment.driver is None:
        raise AnnotationError(
            f"question {segment.question_id} has no declared driver; roles undefined"
        )
    if not segment.utterances:
        return []

    expected = len(segment.utterances)
    driver = segment.driver

    def parse(text: str) -> list[tuple[_RoleCandidate, float]]:
        doc = _load_json(text)
        entries = doc.get("conversations")
        if not isinstance(entries, list) or len(entries) != expected:
            raise MalformedResponse(f"expected {expected} role entries")
        return [_parse_role_entry(entry, students, driver) for entry in entries]

    messages = prompts.roles_messages(segment, students)
    samples: list[list[tuple[_RoleCandidate, float]]] = []
    for sample_idx in range(n_samples):
        try:
            samples.append(runner.ask(prompts.TASK_ROLES, messages, sample_idx, parse))
        except BackendError as exc:
            raise AnnotationError(
                f"role annotation failed for question {segment.question_id}: {exc}",
                partial=samples,
            ) from exc

    assignments: list[RoleAssignment] = []
    previous_key: str | None = None
    for index in range(expected):
        tally: dict[str, list] = {}
        for sample in samples:
            candidate, confidence = sample[index]
            slot = tally.setdefault(candidate.key(), [candidate, 0, 0.0])
            slot[1] += 1
            slot[2] += confidence
        ranked = sorted(
            tally.values(), key=lambda slot: (-slot[1], -slot[2], slot[0].key())
        )
        top_votes = ranked[0][1]
        top_conf = ranked[0][2]
        tied = [slot for slot in ranked if slot[1] == top_votes and slot[2] == top_conf]
        uncertain = False
        winner = tied[0][0]
        if len(tied) > 1:
            by_key = {slot[0].key(): slot[0] for slot in tied}
            if previous_key in by_key:
                winner = by_key[previous_key]
            else:
                uncertain = True
        assignments.append(RoleAssignment(
            ref=UtteranceRef(segment.question_id, index),
            navigator=winner.navigator,
            monitors=winner.monitors,
            drivers=winner.drivers,
            votes=next(slot[1] for slot in ranked if slot[0] is winner),
            n_samples=len(samples),
            uncertain=uncertain,
            candidates=tuple(slot[0].key() for slot in tied) if uncertain else (),
        ))
        previous_key = winner.key()
    return assignments


def annotate_scaffolding(
    segment: QuestionSegment,
    runner: TaskRunner,
    instructor: str = "0000",
) -> list[ScaffoldEvent]:
    """Classify instructor utterances into the four scaffolding kinds."""
    instructor_indices = [
        i for i, u in enumerate(segment.utterances) if u.speaker == instructor
    ]
    if not instructor_indices:
        return []

    expected = len(instructor_indices)

    def parse(text: str) -> list[ScaffoldEvent]:
        doc = _load_json(text)
        entries = doc.get("events")
        if not isinstance(entries, list) or len(entries) != expected:
            raise MalformedResponse(f"expected {expected} scaffold events")
        events = []
        for pos, entry in enumerate(entries):
            if not isinstance(entry, dict):
                raise MalformedResponse(f"event {pos} is not an object")
            raw_kind = str(entry.get("kind", "")).strip()
            kind = prompts.SCAFFOLD_NAME_TO_KIND.get(raw_kind.lower(), raw_kind)
            if kind not in prompts.SCAFFOLD_KINDS:
                raise MalformedResponse(f"unknown scaffold kind {raw_kind!r}")
            events.append(ScaffoldEvent(
                ref=UtteranceRef(segment.question_id, instructor_indices[pos]),
                kind=kind,
                confidence_pct=_clamp_pct(entry.get("confidence_pct", 0)),
                explanation=str(entry.get("explanation", "")),
            ))
        return events

    messages = prompts.scaffold_messages(segment, instructor)
    try:
        return runner.ask(prompts.TASK_SCAFFOLD, messages, 0, parse)
    except BackendError as exc:
        raise AnnotationError(
            f"scaffold annotation failed for question {segment.question_id}: {exc}",
            partial=[],
        ) from exc


MIN_SURVIVING_SCORE_RUNS = 5


def score_code(
    question: str,
    answer: str,
    runner: TaskRunner,
    n_runs: int = 10,
) -> CodeScore:
    """Score one submission by averaging repeated rubric runs.

    Individual failed runs (transport or unrecoverable parse errors) are
    discarded; fewer than MIN_SURVIVING_SCORE_RUNS survivors is an error.
    The weighted total is always recomputed from the dimension scores, never
    taken from the model.
    """
    if not answer.strip():
        raise AnnotationError("cannot score an empty submission")

    def parse(text: str) -> dict:
        doc = _load_json(text)
        scores = doc.get("scores")
        if not isinstance(scores, dict):
            raise MalformedResponse("missing scores object")
        dims = {}
        for dim in prompts.SCORE_DIMENSIONS:
            if dim not in scores:
                raise MalformedResponse(f"missing dimension {dim}")
            value = scores[dim]
            if not isinstance(value, (int, float)) or not 1 <= value <= 5:
                raise MalformedResponse(f"dimension {dim} out of range: {value!r}")
            dims[dim] = float(value)
        return {
            "dims": dims,
            "explanation": str(doc.get("explanation", "")),
            "demerits": [str(d) for d in doc.get("demerits", []) or []],
        }

    messages = prompts.score_messages(question, answer)
    runs = []
    for sample_idx in range(n_runs):
        try:
            runs.append(runner.ask(prompts.TASK_SCORE, messages, sample_idx, parse))
        except (BackendError, AnnotationError):
            continue
    if len(runs) < MIN_SURVIVING_SCORE_RUNS:
        raise AnnotationError(
            f"only {len(runs)}/{n_runs} scoring runs survived "
            f"(need {MIN_SURVIVING_SCORE_RUNS})",
            partial=runs,
        )

    means = {
        dim: sum(run["dims"][dim] for run in runs) / len(runs)
        for dim in prompts.SCORE_DIMENSIONS
    }
    total = code_weighted_total(
        means["problem_solving"],
        means["code_integrity"],
        means["code_accuracy"],
        means["algorithm_innovation"],
    )
    per_run_totals = [code_weighted_total(*(run["dims"][d] for d in prompts.SCORE_DIMENSIONS)) for run in runs]
    representative = min(
        range(len(runs)), key=lambda i: (abs(per_run_totals[i] - total), i)
    )
    demerits: list[str] = []
    for run in runs:
        for item in run["demerits"]:
            if item not in demerits:
                demerits.append(item)
    return CodeScore(
        problem_solving=means["problem_solving"],
        code_integrity=means["code_integrity"],
        code_accuracy=means["code_accuracy"],
        algorithm_innovation=means["algorithm_innovation"],
        weighted_total=total,
        rationale=runs[representative]["explanation"],
        n_samples=len(runs),
        demerits=tuple(demerits),
    )
