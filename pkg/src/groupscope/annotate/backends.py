"""Chat-completion backends: a provider-agnostic remote client and the error types.

The wire contract is deliberately small: a request is a list of (role, text)
messages plus sampling parameters, a response is the model's raw text. The
``task`` and ``sample_idx`` fields exist so caching and the deterministic
mock can key off them; remote providers never see them.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field, replace
from typing import Protocol

import httpx


class BackendError(RuntimeError):
    """The backend could not produce a completion (after retries)."""


class AnnotationError(RuntimeError):
    """An annotation task failed; ``partial`` holds whatever completed."""

    def __init__(self, message: str, partial: list | None = None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str


@dataclass(frozen=True)
class ChatRequest:
    task: str
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    seed: int = 0
    sample_idx: int = 0
    attempt: int = 0

    def with_repair(self, instruction: str) -> "ChatRequest":
        extra = ChatMessage(role="user", content=instruction)
        return replace(self, messages=self.messages + (extra,), attempt=self.attempt + 1)

    def user_content(self) -> str:
        for msg in self.messages:
            if msg.role == "user":
                return msg.content
        return ""


class ChatBackend(Protocol):
    calls: int

    def complete(self, request: ChatRequest) -> str: ...


@dataclass
class RemoteChatBackend:
    """JSON-over-HTTP chat client (OpenAI-style message array in, text out).

    Credentials come from the environment (``api_key_env``), never from
    configuration files. Transport failures are retried with exponential
    backoff before giving up.
    """

    endpoint: str
    model: str
    api_key_env: str = "GROUPSCOPE_API_KEY"
    timeout: float = 60.0
    max_attempts: int = 3
    backoff_s: float = 0.5
    calls: int = 0
    _client: httpx.Client | None = field(default=None, repr=False)

    def _http(self) -> httpx.Client:
        if self._client is None:
            self._client = httpx.Client(timeout=self.timeout)
        return self._client

    def complete(self, request: ChatRequest) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "seed": request.seed,
        }
        headers = {}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            self.calls += 1
            try:
                resp = self._http().post(self.endpoint, json=body, headers=headers)
                resp.raise_for_status()
                return _extract_text(resp.json())
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.max_attempts:
                    time.sleep(self.backoff_s * (2**attempt))
        raise BackendError(
            f"chat completion failed after {self.max_attempts} attempts: {last_error}"
        )


def _extract_text(doc: dict) -> str:
    if "choices" in doc:
        return doc["choices"][0]["message"]["content"]
    if "content" in doc:
        return doc["content"]
    if "text" in doc:
        return doc["text"]
    raise ValueError(f"unrecognized completion payload keys: {sorted(doc)}")
