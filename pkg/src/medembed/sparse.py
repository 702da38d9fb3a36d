"""Finitely supported vectors in a Hilbert space with integer basis keys.

Basis keys are handed out by a process-global allocator so that distinct
spaces never share keys; direct sums of embeddings of different spaces are
then automatically orthogonal.
"""

from __future__ import annotations

import math
import threading

import numpy as np

_key_lock = threading.Lock()
_next_key = 0


def allocate_keys(count: int) -> int:
    """Reserve a dense block of ``count`` fresh basis keys, returning the
    first. Blocks are never reused within a process."""
    global _next_key
    if count < 0:
        raise ValueError("count must be non-negative")
    with _key_lock:
        start = _next_key
        _next_key += count
    return start


class SparseVector:
    """Immutable finitely supported vector: a map basis key -> coefficient.

    Zero coefficients are dropped at construction, so the stored support
    is exactly the set of nonzero coordinates.
    """

    __slots__ = ("coords",)

    def __init__(self, coords=None):
        self.coords = {
            int(k): float(v) for k, v in (coords or {}).items() if v != 0.0
        }

    def __eq__(self, other):
        return isinstance(other, SparseVector) and self.coords == other.coords

    def __repr__(self):
        items = ", ".join(f"{k}: {v:.6g}" for k, v in sorted(self.coords.items()))
        return f"SparseVector({{{items}}})"

    @property
    def support_size(self) -> int:
        return len(self.coords)

    def get(self, key: int) -> float:
        return self.coords.get(key, 0.0)

    def norm(self) -> float:
        return math.sqrt(math.fsum(v * v for v in self.coords.values()))

    def dot(self, other: "SparseVector") -> float:
        a, b = self.coords, other.coords
        if len(b) < len(a):
            a, b = b, a
        return math.fsum(v * b[k] for k, v in a.items() if k in b)

    def distance(self, other: "SparseVector") -> float:
        return vec_distance(self, other)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Support and values as parallel arrays, sorted by key."""
        if not self.coords:
            return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))
        keys = np.fromiter(self.coords.keys(), dtype=np.int64, count=len(self.coords))
        vals = np.fromiter(self.coords.values(), dtype=np.float64, count=len(self.coords))
        order = np.argsort(keys)
        return keys[order], vals[order]


def vec_distance(a: SparseVector, b: SparseVector) -> float:
    """Euclidean distance over the union of the two supports.

    Terms are combined with exact summation, so the result is independent
    of argument order.
    """
    ca, cb = a.coords, b.coords
    terms = []
    for k, v in ca.items():
        diff = v - cb.get(k, 0.0)
        terms.append(diff * diff)
    terms.extend(v * v for k, v in cb.items() if k not in ca)
    return math.sqrt(math.fsum(terms))
