"""Deterministic rule-based stand-in for the remote LLM.

The mock implements the same chat contract as the remote backend: it reads
the transcript (or code) back out of the prompt payload and answers with the
JSON a well-behaved model would return. Keyword rules pick categories; a
base confidence per rule plus a seed-keyed jitter (zero for the first
sample) provides the vote diversity the repeated-sampling tasks need while
staying bit-identical across runs for a given (input, seed).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from groupscope.annotate import prompts
from groupscope.annotate.backends import ChatRequest
from groupscope.corpus import INSTRUCTOR_ID, Utterance, parse_transcript
from groupscope.digest import stable_digest

_WORD_RE = re.compile(r"[a-z']+")

# (category, base confidence, word keywords, phrase keywords) in match order.
_BEHAVIOR_RULES: tuple[tuple[str, int, frozenset[str], tuple[str, ...]], ...] = (
    (
        "Debugging",
        85,
        frozenset({"error", "bug", "wrong", "fix", "debug", "traceback", "exception", "crash", "fails"}),
        ("doesn't work", "not working", "went wrong"),
    ),
    (
        "Python coding",
        85,
        frozenset({"print", "def", "loop", "list", "sort", "sorted", "function", "variable",
                   "int", "eval", "input", "code", "indent", "colon", "syntax", "string"}),
        ("for loop", "while loop", "type conversion", "write it"),
    ),
    (
        "Question Planning",
        85,
        frozenset({"should", "could", "plan", "merge", "combine", "template", "approach",
                   "idea", "next", "continue", "start", "how"}),
        ("let's", "how about", "what if", "we can"),
    ),
    (
        "Acknowledgement",
        80,
        frozenset({"good", "great", "perfect", "success", "successful", "successfully",
                   "nice", "done", "okay", "ok", "yes", "right", "completed", "correct"}),
        ("well done",),
    ),
    (
        "Project understanding",
        90,
        frozenset({"easy", "understand", "simple", "requirement", "means"}),
        ("question is", "not too difficult", "no problem", "better done", "task is"),
    ),
)

_FALLBACK_BEHAVIOR = ("Unrelated chat", 60)

_PLANNING_WORDS = frozenset({
    "should", "could", "plan", "merge", "combine", "note", "noted", "template",
    "approach", "sort", "sorted", "descending", "ascending", "use", "try",
    "continue", "next", "idea", "first", "then",
})
_PLANNING_PHRASES = ("let's", "how about", "what if", "go on to", "go like this")

_MS_PHRASES = (
    "what is the question", "what's the problem", "where is", "where's",
    "how's it going", "any progress", "i see", "keep going", "carry on",
)
_MS_WORDS = frozenset({"oh", "hmm", "exactly", "yes", "yep"})

_HINT_WORDS = frozenset({"try", "consider", "hint", "check", "maybe", "perhaps", "remember"})
_HINT_PHRASES = ("think about", "what if", "look at", "have a look", "another way", "alternative")


def _words(text: str) -> frozenset[str]:
    return frozenset(_WORD_RE.findall(text.lower()))


def _has_phrase(text: str, phrases: tuple[str, ...]) -> bool:
    lowered = text.lower()
    return any(p in lowered for p in phrases)


@dataclass
class MockChatBackend:
    """Offline annotator; fully deterministic given (request, seed)."""

    seed: int = 0
    calls: int = 0

    def complete(self, request: ChatRequest) -> str:
        self.calls += 1
        if request.task == prompts.TASK_BEHAVIOR:
            return self._behaviors(request)
        if request.task == prompts.TASK_ROLES:
            return self._roles(request)
        if request.task == prompts.TASK_SCAFFOLD:
            return self._scaffold(request)
        if request.task == prompts.TASK_SCORE:
            return self._score(request)
        raise ValueError(f"mock backend does not know task {request.task!r}")

    # Jitter is zero for the first sample so canonical single-shot outputs
    # equal the rule's base confidence; later samples move within +/-10.
    def _jitter(self, content: str, sample_idx: int, lane: str, spread: int = 10) -> int:
        if sample_idx == 0:
            return 0
        digest = stable_digest("mock-jitter", lane, self.seed, sample_idx, content)
        return int(digest[:8], 16) % (2 * spread + 1) - spread

    @staticmethod
    def _payload_segment(request: ChatRequest):
        content = request.user_content()
        marker = "Transcript:\n"
        idx = content.find(marker)
        if idx < 0:
            raise ValueError("mock backend: payload has no Transcript section")
        segments = parse_transcript(content[idx + len(marker):])
        if len(segments) != 1:
            raise ValueError(f"mock backend: expected one segment, got {len(segments)}")
        return segments[0]

    @staticmethod
    def _span(u: Utterance) -> str:
        return f"{u.start:g}-{u.end:g}"

    def _behaviors(self, request: ChatRequest) -> str:
        segment = self._payload_segment(request)
        conversations = []
        for u in segment.utterances:
            category, base, reason = _classify_behavior(u.text)
            conf = base + self._jitter(u.text, request.sample_idx, "behavior")
            conversations.append({
                "speaker": u.speaker,
                "timestamp": self._span(u),
                "content": u.text,
                "category": category,
                "confidence_pct": max(0, min(100, conf)),
                "explanation": reason,
            })
        return json.dumps(
            {"question": segment.question_id, "conversations": conversations},
            ensure_ascii=False,
        )

    def _roles(self, request: ChatRequest) -> str:
        content = request.user_content()
        students_match = re.search(r"^Students:\s*((?:\d{4}\s*)+)$", content, re.MULTILINE)
        if not students_match:
            raise ValueError("mock backend: roles payload has no Students line")
        students = students_match.group(1).split()
        segment = self._payload_segment(request)
        driver = segment.driver
        conversations = []
        for u in segment.utterances:
            conf = 80 + self._jitter(u.text, request.sample_idx, "roles", spread=15)
            if u.speaker == INSTRUCTOR_ID:
                entry = {"navigator": None, "monitors": sorted(students), "drivers": ["None"]}
            elif self._is_planning(u.text, request.sample_idx):
                others = sorted(s for s in students if s != u.speaker)
                if u.speaker == driver:
                    entry = {"navigator": u.speaker, "monitors": others, "drivers": ["None"]}
                else:
                    entry = {
                        "navigator": u.speaker,
                        "monitors": [s for s in others if s != driver],
                        "drivers": [driver],
                    }
            else:
                entry = {
                    "navigator": None,
                    "monitors": sorted(s for s in students if s != driver),
                    "drivers": [driver] if driver else ["None"],
                }
            conversations.append({
                "timestamp": self._span(u),
                "content": u.text,
                "confidence_pct": max(0, min(100, conf)),
                **entry,
            })
        return json.dumps(
            {"question": segment.question_id, "conversations": conversations},
            ensure_ascii=False,
        )

    def _is_planning(self, text: str, sample_idx: int) -> bool:
        words = _words(text)
        score = len(words & _PLANNING_WORDS)
        if text.rstrip().endswith("?"):
            score += 1
        if _has_phrase(text, _PLANNING_PHRASES):
            score += 1
        if score == 0:
            return False
        if score >= 2:
            return True
        # Single weak marker: one in five samples dissents, so the majority
        # vote still lands on "planning" while the tally shows real spread.
        digest = stable_digest("mock-planning", self.seed, sample_idx, text)
        return sample_idx == 0 or (int(digest[:8], 16) % 5 != 0)

    def _scaffold(self, request: ChatRequest) -> str:
        segment = self._payload_segment(request)
        events = []
        for u in segment.utterances:
            kind, base, reason = _classify_scaffold(u)
            conf = base + self._jitter(u.text, request.sample_idx, "scaffold")
            events.append({
                "speaker": u.speaker,
                "timestamp": self._span(u),
                "content": u.text,
                "kind": kind,
                "confidence_pct": max(0, min(100, conf)),
                "explanation": reason,
            })
        return json.dumps({"events": events}, ensure_ascii=False)

    def _score(self, request: ChatRequest) -> str:
        content = request.user_content()
        marker = "Answer:\n"
        idx = content.find(marker)
        if idx < 0:
            raise ValueError("mock backend: score payload has no Answer section")
        answer = content[idx + len(marker):]
        dims = {"problem_solving": 4, "code_integrity": 4, "code_accuracy": 4,
                "algorithm_innovation": 3}
        demerits = []
        lowered = answer.lower()
        if "def " in lowered or "for " in lowered or "while " in lowered:
            dims["algorithm_innovation"] += 1
            dims["problem_solving"] += 1
        if "eval(" in lowered:
            dims["code_accuracy"] -= 1
            demerits.append("eval() on raw input is unsafe; int() would be the robust conversion")
        if len(answer.strip()) < 20:
            dims["code_integrity"] -= 1
            demerits.append("submission is fragmentary")
        if "print" in lowered:
            dims["code_integrity"] += 1
        for dim in dims:
            digest = stable_digest("mock-score", self.seed, request.sample_idx, dim, answer)
            wobble = int(digest[:8], 16) % 10
            delta = -1 if wobble == 0 else (1 if wobble == 9 else 0)
            if request.sample_idx > 0:
                dims[dim] += delta
            dims[dim] = max(1, min(5, dims[dim]))
        return json.dumps({
            "key_ideas": "The submission addresses the task with straightforward Python.",
            "scores": dims,
            "explanation": "Scores derived from structure, robustness and originality of the answer.",
            "demerits": demerits,
        }, ensure_ascii=False)


def _classify_behavior(text: str) -> tuple[str, int, str]:
    words = _words(text)
    for category, base, keywords, phrases in _BEHAVIOR_RULES:
        if category == "Question Planning" and text.rstrip().endswith("?"):
            return category, base, "Interrogative drives the planning discussion."
        if words & keywords or _has_phrase(text, phrases):
            return category, base, f"Keyword rule matched {category!r}."
    category, base = _FALLBACK_BEHAVIOR
    return category, base, "No task-related marker found; treated as digression."


def _classify_scaffold(u: Utterance) -> tuple[str, int, str]:
    text = u.text
    words = _words(text)
    if u.duration >= 30 or len(text) >= 200:
        return "CS-H", 100, "Long direct demonstration or dictated solution."
    if _has_phrase(text, _MS_PHRASES) or (words and words <= _MS_WORDS | {"i", "the", "a"}):
        return "MS", 80, "Monitors progress or group process without cognitive input."
    if words & _HINT_WORDS or _has_phrase(text, _HINT_PHRASES):
        return "CS-M", 90, "Offers a hint while leaving the solution to the group."
    if text.rstrip().endswith("?"):
        return "CS-L", 85, "Open-ended question that elicits group thinking."
    return "MS", 80, "Regulates the session without adding task content."
