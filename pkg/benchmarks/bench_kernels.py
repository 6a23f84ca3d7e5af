"""Head-to-head timing of the compiled kernels against the pure-Python ones.

Run with ``python3 benchmarks/bench_kernels.py``. Prints per-op timings
plus the speedup factor, and verifies both implementations agree on the
benchmark inputs before timing them.
"""

from __future__ import annotations

import random
import time

from stagecraft.kernels import KERNEL_BACKEND
from stagecraft.kernels import _ops_py as pure

try:
    from stagecraft.kernels import _ops as compiled
except ImportError:
    compiled = None

WORDS = (
    "harbor ledger key orchid fog letter night door brass winter ship plant "
    "story threshold lantern tide archive north garden glass rumor clerk"
).split()


def make_inputs(seed: int = 7):
    rng = random.Random(seed)
    sentences = [
        " ".join(rng.choices(WORDS, k=rng.randint(4, 18))) for _ in range(300)
    ]
    pairs = [
        (rng.choice(sentences), rng.choice(sentences)) for _ in range(400)
    ]
    blobs = [s.encode("utf-8") for s in sentences]
    token_lists = [s.split() for s in sentences]
    return pairs, blobs, token_lists


def check_agreement(pairs, blobs, token_lists):
    for a, b in pairs[:50]:
        assert compiled.levenshtein(a, b) == pure.levenshtein(a, b)
    for blob in blobs[:50]:
        assert compiled.fnv1a64(blob) == pure.fnv1a64(blob)
    for tokens in token_lists[:50]:
        assert compiled.hashed_counts(tokens, 256) == pure.hashed_counts(tokens, 256)


def bench(label, fn, args_list, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def main():
    print("active kernel backend: %s" % KERNEL_BACKEND)
    if compiled is None:
        print("compiled extension not built; nothing to compare")
        return
    pairs, blobs, token_lists = make_inputs()
    check_agreement(pairs, blobs, token_lists)
    cases = [
        ("levenshtein (400 pairs)", pairs),
        ("fnv1a64 (300 blobs)", [(b,) for b in blobs]),
        ("hashed_counts (300 docs, dim 256)", [(t, 256) for t in token_lists]),
    ]
    impls = [("levenshtein", "fnv1a64", "hashed_counts")]
    print("%-34s %12s %12s %9s" % ("op", "compiled", "python", "speedup"))
    for (label, args_list), name in zip(cases, impls[0]):
        fast = bench(label, getattr(compiled, name), args_list)
        slow = bench(label, getattr(pure, name), args_list)
        print(
            "%-34s %10.4fs %10.4fs %8.1fx"
            % (label, fast, slow, slow / fast if fast > 0 else float("inf"))
        )


if __name__ == "__main__":
    main()
