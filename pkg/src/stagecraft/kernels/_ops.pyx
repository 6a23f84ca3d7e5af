# cython: boundscheck=False, wraparound=False
"""Compiled kernels: edit distance and signed feature hashing.

Must stay result-identical to ``_ops_py.py``; the import-time selector in
``kernels/__init__`` treats the two as interchangeable.
"""

from libc.stdint cimport uint64_t

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325UL
cdef uint64_t FNV_PRIME = 0x100000001B3UL


def levenshtein(unicode a, unicode b):
    """Edit distance (insert/delete/substitute, unit costs)."""
    if a == b:
        return 0
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la

    cdef list prev = list(range(lb + 1))
    cdef list cur = [0] * (lb + 1)
    cdef Py_ssize_t i, j
    cdef long cost, dele, ins, sub, best
    cdef Py_UCS4 ca
    for i in range(la):
        ca = a[i]
        cur[0] = i + 1
        for j in range(lb):
            cost = 0 if ca == <Py_UCS4> b[j] else 1
            dele = <long> prev[j + 1] + 1
            ins = <long> cur[j] + 1
            sub = <long> prev[j] + cost
            best = dele if dele < ins else ins
            if sub < best:
                best = sub
            cur[j + 1] = best
        prev, cur = cur, prev
    return prev[lb]


cdef uint64_t _fnv1a64_bytes(const unsigned char[:] data) noexcept nogil:
    cdef uint64_t h = FNV_OFFSET
    cdef Py_ssize_t i
    for i in range(data.shape[0]):
        h ^= <uint64_t> data[i]
        h *= FNV_PRIME
    return h


def fnv1a64(bytes data):
    """64-bit FNV-1a hash; process-independent (unlike builtin ``hash``)."""
    if len(data) == 0:
        return int(FNV_OFFSET)
    return int(_fnv1a64_bytes(data))


def hashed_counts(list tokens, int dim):
    """Signed feature-hashing of a token bag into a ``dim``-long vector."""
    cdef list out = [0.0] * dim
    cdef uint64_t h
    cdef Py_ssize_t idx
    cdef double sign
    for token in tokens:
        h = _fnv1a64_bytes((<unicode> token).encode("utf-8"))
        sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
        idx = <Py_ssize_t> (h % <uint64_t> dim)
        out[idx] = <double> out[idx] + sign
    return out
