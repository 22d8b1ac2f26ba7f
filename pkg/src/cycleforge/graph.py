"""Hamming graph H(2, n) with dense integer vertex and edge indices.

Vertex ``(x, y)`` has index ``x + n * y``.  Row ``L_i`` is ``{(., i)}`` and
column ``D_i`` is ``{(i, .)}``.  Edges are numbered canonically: all row
edges first (row by row, pairs ``x1 < x2`` in lexicographic order), then all
column edges (column by column, pairs ``y1 < y2``).

The ``complete`` mode is a mean-field comparator on the same ``n**2``
vertices; it exposes the same interface but has no row/column structure.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

HAMMING2 = "hamming2"
COMPLETE = "complete"


def _pair_index(a, b, m):
    """Index of the pair a < b among all pairs of {0..m-1} in lex order."""
    return a * (2 * m - a - 1) // 2 + (b - a - 1)


def _pairs(m: int) -> tuple[np.ndarray, np.ndarray]:
    a, b = np.triu_indices(m, k=1)
    return a.astype(np.int64), b.astype(np.int64)


@dataclass(frozen=True)
class HammingGraph:
    n: int
    mode: str = HAMMING2

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"side length must be >= 2, got {self.n}")
        if self.mode not in (HAMMING2, COMPLETE):
            raise ValueError(f"unknown graph mode {self.mode!r}")

    @property
    def num_vertices(self) -> int:
        return self.n * self.n

    @property
    def num_edges(self) -> int:
        if self.mode == HAMMING2:
            return self.n * self.n * (self.n - 1)
        N = self.num_vertices
        return N * (N - 1) // 2

    @property
    def degree(self) -> int:
        if self.mode == HAMMING2:
            return 2 * (self.n - 1)
        return self.num_vertices - 1

    def edge_intensity(self, beta: float) -> float:
        """Per-edge bridge intensity so that the mean bridge count is beta*N."""
        return beta * self.num_vertices / self.num_edges

    # -- coordinates -------------------------------------------------------

    def vertex(self, x: int, y: int) -> int:
        return x + self.n * y

    def coords(self, v: int) -> tuple[int, int]:
        return v % self.n, v // self.n

    def row(self, i: int) -> np.ndarray:
        return i * self.n + np.arange(self.n)

    def column(self, i: int) -> np.ndarray:
        return i + self.n * np.arange(self.n)

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.num_vertices:
            raise IndexError(f"vertex {v} out of range for N={self.num_vertices}")

    # -- edges -------------------------------------------------------------

    @cached_property
    def edge_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays ``(u, w)`` with ``u < w`` for every edge id, canonical order."""
        n = self.n
        if self.mode == COMPLETE:
            u, w = _pairs(self.num_vertices)
        else:
            a, b = _pairs(n)
            lines = np.repeat(np.arange(n, dtype=np.int64), len(a))
            pa, pb = np.tile(a, n), np.tile(b, n)
            # row y: (a, y) -- (b, y); column x: (x, a) -- (x, b)
            row_u, row_w = pa + n * lines, pb + n * lines
            col_u, col_w = lines + n * pa, lines + n * pb
            u = np.concatenate([row_u, col_u])
            w = np.concatenate([row_w, col_w])
        u.flags.writeable = False
        w.flags.writeable = False
        return u, w

    def endpoints(self, e: int) -> tuple[int, int]:
        u, w = self.edge_endpoints
        return int(u[e]), int(w[e])

    def edge_id(self, u: int, w: int) -> int:
        """Canonical id of the edge {u, w}; raises if u, w are not adjacent."""
        self._check_vertex(u)
        self._check_vertex(w)
        if u == w:
            raise ValueError("no self-loops")
        if u > w:
            u, w = w, u
        if self.mode == COMPLETE:
            return _pair_index(u, w, self.num_vertices)
        n = self.n
        per_line = n * (n - 1) // 2
        (xu, yu), (xw, yw) = self.coords(u), self.coords(w)
        if yu == yw:
            return yu * per_line + _pair_index(xu, xw, n)
        if xu == xw:
            return n * per_line + xu * per_line + _pair_index(yu, yw, n)
        raise ValueError(f"vertices {u} and {w} are not adjacent")

    def adjacent(self, u: int, w: int) -> bool:
        if u == w:
            return False
        if self.mode == COMPLETE:
            return True
        (xu, yu), (xw, yw) = self.coords(u), self.coords(w)
        return xu == xw or yu == yw

    def neighbors(self, v: int) -> list[int]:
        """The other vertices of v's row and column (everyone, in complete mode)."""
        self._check_vertex(v)
        if self.mode == COMPLETE:
            return [w for w in range(self.num_vertices) if w != v]
        x, y = self.coords(v)
        n = self.n
        out = [i + n * y for i in range(n) if i != x]
        out.extend(x + n * j for j in range(n) if j != y)
        return out

    def edges_between(self, A: Iterable[int], B: Iterable[int]) -> int:
        """Number of edges {v, w} with v in A and w in B, each counted once."""
        a = np.zeros(self.num_vertices, dtype=bool)
        b = np.zeros(self.num_vertices, dtype=bool)
        a[list(A)] = True
        b[list(B)] = True
        if self.mode == COMPLETE:
            na, nb, nab = int(a.sum()), int(b.sum()), int((a & b).sum())
            # ordered pairs (v in A, w in B, v != w), minus double counts inside A&B
            return na * nb - nab - nab * (nab - 1) // 2
        u, w = self.edge_endpoints
        hit = (a[u] & b[w]) | (a[w] & b[u])
        return int(hit.sum())


def hamming(n: int) -> HammingGraph:
    return HammingGraph(n, HAMMING2)


def complete(n: int) -> HammingGraph:
    """Complete graph on n**2 vertices, for mean-field comparisons."""
    return HammingGraph(n, COMPLETE)
