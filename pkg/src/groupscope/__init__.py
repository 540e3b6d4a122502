"""Analytics engine for collaborative-programming sessions.

Parses diarized session transcripts and code submissions, annotates them
through a chat-completion backend (remote or deterministic mock), computes
group- and student-level collaboration metrics, and persists everything as
immutable snapshots served over a read-only HTTP API.
"""

__version__ = "0.1.0"
