from groupscope.annotate.backends import (
    AnnotationError,
    BackendError,
    ChatBackend,
    ChatMessage,
    ChatRequest,
    RemoteChatBackend,
)
from groupscope.annotate.cache import AnnotationCache, cache_key
from groupscope.annotate.mock import MockChatBackend
from groupscope.annotate.tasks import (
    BehaviorAnnotation,
    CodeScore,
    RoleAssignment,
    ScaffoldEvent,
    UtteranceRef,
    annotate_behaviors,
    annotate_roles,
    annotate_scaffolding,
    code_weighted_total,
    score_code,
)

__all__ = [
    "AnnotationCache",
    "AnnotationError",
    "BackendError",
    "BehaviorAnnotation",
    "ChatBackend",
    "ChatMessage",
    "ChatRequest",
    "CodeScore",
    "MockChatBackend",
    "RemoteChatBackend",
    "RoleAssignment",
    "ScaffoldEvent",
    "UtteranceRef",
    "annotate_behaviors",
    "annotate_roles",
    "annotate_scaffolding",
    "cache_key",
    "code_weighted_total",
    "score_code",
]
