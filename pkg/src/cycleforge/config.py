"""Bridge configurations: finite sets of (edge, time) points in E x [0, 1).

Bridges are kept sorted by time, ties broken by edge id, so the edge sequence
is a pure function of the bridge set.  The induced permutation composes the
edge transpositions in increasing time order: sigma = e_k o ... o e_1.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Iterator

import numpy as np

from .graph import COMPLETE, HAMMING2, HammingGraph
from .permutation import CycleTracker, Permutation


class BridgeConfiguration:
    __slots__ = ("graph", "edges", "times", "beta")

    def __init__(self, graph: HammingGraph, edges, times, beta: float = math.nan):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1)
        times = np.asarray(times, dtype=np.float64).reshape(-1)
        if edges.shape != times.shape:
            raise ValueError("edges and times must have the same length")
        if len(edges):
            if edges.min() < 0 or edges.max() >= graph.num_edges:
                raise ValueError("edge id out of range")
            if times.min() < 0.0 or times.max() >= 1.0:
                raise ValueError("bridge times must lie in [0, 1)")
        order = np.lexsort((edges, times))
        edges, times = edges[order], times[order]
        if len(edges) > 1:
            dup = (np.diff(times) == 0) & (np.diff(edges) == 0)
            if dup.any():
                raise ValueError("duplicate bridge")
        edges.flags.writeable = False
        times.flags.writeable = False
        self.graph = graph
        self.edges = edges
        self.times = times
        self.beta = float(beta)

    @classmethod
    def empty(cls, graph: HammingGraph, beta: float = math.nan) -> "BridgeConfiguration":
        return cls(graph, [], [], beta)

    @classmethod
    def from_bridges(cls, graph: HammingGraph, bridges, beta: float = math.nan):
        """Build from ``[((u, w), t), ...]`` or ``[(edge_id, t), ...]``."""
        edges, times = [], []
        for e, t in bridges:
            if not isinstance(e, (int, np.integer)):
                e = graph.edge_id(*e)
            edges.append(int(e))
            times.append(float(t))
        return cls(graph, edges, times, beta)

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        return zip(self.edges.tolist(), self.times.tolist())

    def __eq__(self, other) -> bool:
        return (isinstance(other, BridgeConfiguration) and self.graph == other.graph
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.times, other.times))

    def __repr__(self) -> str:
        return f"BridgeConfiguration({self.graph.mode} n={self.graph.n}, |X|={len(self)})"

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoint arrays ``(u, w)`` of the bridges in time order."""
        u, w = self.graph.edge_endpoints
        return u[self.edges], w[self.edges]

    def union(self, other: "BridgeConfiguration") -> "BridgeConfiguration":
        if other.graph != self.graph:
            raise ValueError("configurations live on different graphs")
        return BridgeConfiguration(self.graph, np.concatenate([self.edges, other.edges]),
                                   np.concatenate([self.times, other.times]), self.beta)

    def with_bridge(self, e: int, t: float) -> "BridgeConfiguration":
        return BridgeConfiguration(self.graph, np.append(self.edges, e),
                                   np.append(self.times, t), self.beta)

    def without_index(self, i: int) -> "BridgeConfiguration":
        keep = np.ones(len(self), dtype=bool)
        keep[i] = False
        return BridgeConfiguration(self.graph, self.edges[keep], self.times[keep], self.beta)


def sample_poisson(g: HammingGraph, beta: float, rng: np.random.Generator) -> BridgeConfiguration:
    """Poisson bridges of intensity ``beta * N / |E|`` per edge (beta/(n-1) on H(2,n))."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    counts = rng.poisson(g.edge_intensity(beta), size=g.num_edges)
    edges = np.repeat(np.arange(g.num_edges, dtype=np.int64), counts)
    times = rng.random(len(edges))
    return BridgeConfiguration(g, edges, times, beta)


def permutation_of(x: BridgeConfiguration) -> Permutation:
    """sigma(X): the particle starting at v ends at sigma(v)."""
    N = x.graph.num_vertices
    occupant = list(range(N))
    u, w = x.endpoints()
    for a, b in zip(u.tolist(), w.tolist()):
        occupant[a], occupant[b] = occupant[b], occupant[a]
    image = np.empty(N, dtype=np.int64)
    image[occupant] = np.arange(N)
    return Permutation(image)


def restrict(x: BridgeConfiguration, s: float, t: float) -> BridgeConfiguration:
    """Bridges with time in [s, t)."""
    if not s < t:
        raise ValueError(f"need s < t, got s={s}, t={t}")
    keep = (x.times >= s) & (x.times < t)
    return BridgeConfiguration(x.graph, x.edges[keep], x.times[keep], x.beta)


def prefix_process(x: BridgeConfiguration) -> list[Permutation]:
    """sigma_0 = id, sigma_1, ..., sigma_|X| = sigma(X)."""
    tracker = CycleTracker(x.graph.num_vertices)
    out = [tracker.permutation()]
    u, w = x.endpoints()
    for a, b in zip(u.tolist(), w.tolist()):
        tracker.transpose(a, b)
        out.append(tracker.permutation())
    return out


def prefix_events(x: BridgeConfiguration) -> Iterator[tuple[int, int, int, int]]:
    """Yield ``(step, u, w, delta)`` where delta is +1 for a split, -1 for a merge."""
    tracker = CycleTracker(x.graph.num_vertices)
    u, w = x.endpoints()
    for k, (a, b) in enumerate(zip(u.tolist(), w.tolist()), start=1):
        yield k, a, b, tracker.transpose(a, b)


# -- text format ------------------------------------------------------------

def dumps(x: BridgeConfiguration) -> str:
    lines = [f"{x.graph.mode} n={x.graph.n} beta={x.beta!r}"]
    lines.extend(f"{e} {t!r}" for e, t in x)
    return "\n".join(lines) + "\n"


def loads(text: str) -> BridgeConfiguration:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty configuration file")
    head = lines[0].split()
    if len(head) != 3 or head[0] not in (HAMMING2, COMPLETE):
        raise ValueError(f"bad header line: {lines[0]!r}")
    fields = dict(kv.split("=", 1) for kv in head[1:])
    g = HammingGraph(int(fields["n"]), head[0])
    edges, times = [], []
    for ln in lines[1:]:
        e, t = ln.split()
        edges.append(int(e))
        times.append(float(t))
    return BridgeConfiguration(g, edges, times, float(fields["beta"]))


def loads_all(text: str) -> list[BridgeConfiguration]:
    """Parse a stream of configurations, each starting at its header line."""
    blocks: list[list[str]] = []
    for ln in text.splitlines():
        if ln.startswith((HAMMING2, COMPLETE)):
            blocks.append([])
        if ln.strip():
            if not blocks:
                raise ValueError(f"bridge line before any header: {ln!r}")
            blocks[-1].append(ln)
    return [loads("\n".join(b)) for b in blocks]


def save(x: BridgeConfiguration, path) -> None:
    Path(path).write_text(dumps(x))


def load(path) -> BridgeConfiguration:
    return loads(Path(path).read_text())
