"""Row/column isoperimetry functionals iota (max) and chi (min).

For a vertex set A of H(2, n), iota(A) is the largest number of elements of A
in a single row or column and chi(A) the smallest.  Both are monotone under
inclusion and satisfy chi(A) - 1 <= |E(A, A)| / |A| <= iota(A) - 1.
"""
from __future__ import annotations

from typing import Iterable

import numpy as np

from .graph import HAMMING2, HammingGraph
from .permutation import Permutation


def _require_hamming(g: HammingGraph) -> None:
    if g.mode != HAMMING2:
        raise ValueError("iota/chi need the row/column structure of H(2, n)")


def tallies(g: HammingGraph, A: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
    """Per-row and per-column counts of A."""
    _require_hamming(g)
    a = np.fromiter(A, dtype=np.int64)
    a = np.unique(a)
    rows = np.bincount(a // g.n, minlength=g.n)
    cols = np.bincount(a % g.n, minlength=g.n)
    return rows, cols


def iota(g: HammingGraph, A: Iterable[int]) -> int:
    rows, cols = tallies(g, A)
    return int(max(rows.max(), cols.max()))


def chi(g: HammingGraph, A: Iterable[int]) -> int:
    rows, cols = tallies(g, A)
    return int(min(rows.min(), cols.min()))


class IsoProfile:
    """Incrementally maintained row/column tallies of a growing vertex set."""

    def __init__(self, g: HammingGraph, A: Iterable[int] = ()):
        _require_hamming(g)
        self.g = g
        self.rows = [0] * g.n
        self.cols = [0] * g.n
        self.members: set[int] = set()
        self.iota = 0
        for v in A:
            self.add(v)

    def add(self, v: int) -> bool:
        """Insert v; return False if it was already present."""
        if v in self.members:
            return False
        self.members.add(v)
        x, y = v % self.g.n, v // self.g.n
        self.rows[y] += 1
        self.cols[x] += 1
        self.iota = max(self.iota, self.rows[y], self.cols[x])
        return True

    @property
    def chi(self) -> int:
        return min(min(self.rows), min(self.cols))

    def __len__(self) -> int:
        return len(self.members)


def check_iso_inequality(g: HammingGraph, A: Iterable[int]) -> bool:
    """Whether chi(A) - 1 <= |E(A, A)| / |A| <= iota(A) - 1 holds."""
    A = set(int(v) for v in A)
    if not A:
        raise ValueError("A must be nonempty")
    ratio = g.edges_between(A, A) / len(A)
    return chi(g, A) - 1 <= ratio <= iota(g, A) - 1


def orbit_segment_iso(g: HammingGraph, p: Permutation, v: int, k: int) -> tuple[int, int]:
    """(iota, chi) of the first min(k, |orbit|) elements of the orbit of v."""
    if k < 1:
        raise ValueError("k must be >= 1")
    seg = p.orbit_prefix(v, k)
    return iota(g, seg), chi(g, seg)
