"""Prompt templates and payload builders for the four annotation tasks.

The templates are versioned resources: PROMPT_VERSION participates in every
cache key, so editing a prompt invalidates previously cached completions.
Payloads embed the transcript in the same wire format the corpus parser
reads, after a fixed ``Transcript:`` marker, which lets the deterministic
mock backend recover the input without any model in the loop.
"""

from __future__ import annotations

from groupscope.corpus import QuestionSegment, segments_to_text

PROMPT_VERSION = "1"

TASK_BEHAVIOR = "behavior"
TASK_ROLES = "roles"
TASK_SCAFFOLD = "scaffold"
TASK_SCORE = "score"

SCAFFOLD_KINDS = ("CS-L", "CS-M", "CS-H", "MS")

# Long-form names accepted on the wire and mapped to the四-way codes.
SCAFFOLD_NAME_TO_KIND = {
    "low-control cognitive scaffolding": "CS-L",
    "medium-control cognitive scaffolding": "CS-M",
    "high-control cognitive scaffolding": "CS-H",
    "metacognitive scaffolding": "MS",
}

SCORE_WEIGHTS = {
    "problem_solving": 0.05,
    "code_integrity": 0.35,
    "code_accuracy": 0.35,
    "algorithm_innovation": 0.25,
}
SCORE_DIMENSIONS = tuple(SCORE_WEIGHTS)

BEHAVIOR_SYSTEM = """\
You are a teacher reviewing a collaborative programming session. You will \
receive one question's conversation transcript, where each line holds a \
start time, an end time, a 4-digit speaker id, and the spoken text. Classify \
the communication behavior of every single line into exactly one of the \
valid categories listed with the transcript, and estimate a prediction \
percentage (0-100) describing how certain the classification is. If a line \
fits no category, pick the one with the most similar meaning and lower the \
percentage accordingly. Reply with JSON only, using this shape:

{"question": <number>, "conversations": [{"speaker": "<id>", "timestamp": \
"<start>-<end>", "content": "<text>", "category": "<category>", \
"confidence_pct": <0-100>, "explanation": "<one sentence>"}]}

Emit exactly one entry per transcript line, in transcript order."""

ROLES_SYSTEM = """\
You are a teacher reviewing a collaborative programming session of exactly \
three students. For every transcript line decide whether the sentence plans \
a solution or contributes an insight that drives the problem forward \
(examples: proposing an approach, combining ideas, pointing at a function to \
use). Casual remarks, jokes and plain agreement are not planning.

Roles: the Navigator is the speaker of a planning sentence; the Driver is \
the member who writes the code and is declared once per question in the \
header line; every remaining member is a Monitor. If the declared Driver is \
the one planning, they become the Navigator for that sentence and the \
drivers list is ["None"]. For a sentence that is not planning, the navigator \
is null and the declared Driver stays in the drivers list. For lines spoken \
by the instructor (id 0000), all three students are Monitors and the drivers \
list is ["None"]. Every student must appear in exactly one of \
navigator/monitors/drivers for every line. Reply with JSON only:

{"question": <number>, "conversations": [{"timestamp": "<start>-<end>", \
"content": "<text>", "navigator": "<id or null>", "monitors": ["<id>"], \
"drivers": ["<id or None>"], "confidence_pct": <0-100>}]}

Emit exactly one entry per transcript line, in transcript order."""

SCAFFOLD_SYSTEM = """\
You are analysing the instructor's assistance during a collaborative \
programming session. Classify every instructor line into one scaffolding \
kind:

CS-L (low-control cognitive): open-ended questions that trigger group \
thinking without giving new information.
CS-M (medium-control cognitive): hints or clues that support solving the \
problem while keeping some challenge.
CS-H (high-control cognitive): directly giving answers or demonstrating the \
task, e.g. dictating code.
MS (metacognitive): monitoring or regulating the group's goals, progress \
and collaboration process.

Reply with JSON only:

{"events": [{"speaker": "<id>", "timestamp": "<start>-<end>", "content": \
"<text>", "kind": "<CS-L|CS-M|CS-H|MS>", "confidence_pct": <0-100>, \
"explanation": "<one sentence>"}]}

Emit exactly one entry per transcript line, in transcript order."""

SCORE_SYSTEM = """\
You are a Python teacher grading one submission. Score four dimensions on a \
1-5 scale: problem_solving (is the approach effective for the task), \
code_integrity (structure, readability, completeness of the implementation), \
code_accuracy (does it produce correct results across inputs), \
algorithm_innovation (originality beyond imitating simple examples). Use 5 \
for excellent down to 1 for bad. Also summarise the key ideas of the code \
and, for any dimension under 5, state the demerits. Do not compute a total; \
report only the per-dimension scores. Reply with JSON only:

{"key_ideas": "<paragraph>", "scores": {"problem_solving": <1-5>, \
"code_integrity": <1-5>, "code_accuracy": <1-5>, "algorithm_innovation": \
<1-5>}, "explanation": "<one sentence overall>", "demerits": ["<issue>"]}"""

REPAIR_INSTRUCTION = (
    "The previous reply was not valid JSON matching the requested shape. "
    "Reply again with valid JSON only, no prose."
)


def behavior_messages(segment: QuestionSegment, categories: list[str]) -> tuple[tuple[str, str], ...]:
    payload = (
        "Valid categories: " + "; ".join(categories) + "\n\n"
        "Transcript:\n" + segments_to_text([segment])
    )
    return (("system", BEHAVIOR_SYSTEM), ("user", payload))


def roles_messages(segment: QuestionSegment, students: list[str]) -> tuple[tuple[str, str], ...]:
    payload = (
        "Students: " + " ".join(students) + "\n\n"
        "Transcript:\n" + segments_to_text([segment])
    )
    return (("system", ROLES_SYSTEM), ("user", payload))


def scaffold_messages(segment: QuestionSegment, instructor: str) -> tuple[tuple[str, str], ...]:
    instructor_only = QuestionSegment(
        question_id=segment.question_id,
        driver=None,
        utterances=tuple(u for u in segment.utterances if u.speaker == instructor),
    )
    payload = "Transcript:\n" + segments_to_text([instructor_only])
    return (("system", SCAFFOLD_SYSTEM), ("user", payload))


def score_messages(question: str, answer: str) -> tuple[tuple[str, str], ...]:
    payload = "Question:\n" + question.strip() + "\n\nAnswer:\n" + answer
    return (("system", SCORE_SYSTEM), ("user", payload))
