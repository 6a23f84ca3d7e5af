"""Kernel selection: compiled extension when available, pure Python otherwise.

``KERNEL_BACKEND`` reports which path was picked ("compiled" or "python");
``benchmarks/bench_kernels.py`` compares the two head to head.
"""

from __future__ import annotations

try:
    from stagecraft.kernels._ops import fnv1a64, hashed_counts, levenshtein

    KERNEL_BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from stagecraft.kernels._ops_py import fnv1a64, hashed_counts, levenshtein

    KERNEL_BACKEND = "python"

__all__ = ["levenshtein", "fnv1a64", "hashed_counts", "KERNEL_BACKEND"]


def relative_levenshtein(a: str, b: str) -> float:
    """Levenshtein distance scaled by the longer string; 0.0 for two empties."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest
