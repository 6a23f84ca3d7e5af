"""Pure-Python kernel implementations.

Mirrors ``_ops.pyx`` operation-for-operation so that the compiled and
interpreted paths produce bit-identical results.
"""

from __future__ import annotations

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def levenshtein(a: str, b: str) -> int:
    """Edit distance (insert/delete/substitute, unit costs)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    cur = [0] * (len(b) + 1)
    for i, ca in enumerate(a):
        cur[0] = i + 1
        for j, cb in enumerate(b):
            cost = 0 if ca == cb else 1
            cur[j + 1] = min(prev[j + 1] + 1, cur[j] + 1, prev[j] + cost)
        prev, cur = cur, prev
    return prev[len(b)]


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash; process-independent (unlike builtin ``hash``)."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def hashed_counts(tokens: list[str], dim: int) -> list[float]:
    """Signed feature-hashing of a token bag into a ``dim``-long vector."""
    out = [0.0] * dim
    for token in tokens:
        h = fnv1a64(token.encode("utf-8"))
        sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
        out[h % dim] += sign
    return out
