"""Stable content hashing and canonical JSON used across the package.

Every digest that ends up in a cache key, a derived RNG seed, or a snapshot
id goes through here so the result is identical across runs, platforms and
worker scheduling.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_json(doc: Any) -> str:
    """Serialize a JSON-able document with a stable byte representation."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def stable_digest(*parts: str | bytes | int | float) -> str:
    """SHA-256 hex digest over the given parts, order-sensitive.

    Parts are length-prefixed before hashing so ("ab", "c") and ("a", "bc")
    never collide.
    """
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, bytes):
            raw = part
        else:
            raw = str(part).encode("utf-8")
        h.update(str(len(raw)).encode("ascii"))
        h.update(b":")
        h.update(raw)
    return h.hexdigest()


def derive_seed(*parts: str | bytes | int | float) -> int:
    """Derive a 32-bit RNG seed from arbitrary labels, stably."""
    return int(stable_digest(*parts)[:8], 16)
