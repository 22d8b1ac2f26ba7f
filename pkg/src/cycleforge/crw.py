"""Cyclic random walk (CRW) over a fixed bridge configuration.

The walk starts at ``(v, 0)`` and climbs the bar of its current vertex at unit
speed.  When it meets a bridge it crosses to the other endpoint; at height 1
it wraps to height 0.  Heights are compared through the bridge *rank* in the
time-sorted configuration, so tied times follow the same order as the
permutation composition.  The vertices occupied at integer times are the
orbit of ``v`` under sigma(X).
"""
from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .config import BridgeConfiguration
from .isoperimetry import IsoProfile

COVER_TOL = 1e-12


class Event(NamedTuple):
    s: float          # simulation time
    vertex: int       # vertex occupied after the event
    height: float     # height on the bar (s mod 1)
    kind: str         # start | fresh | backtrack | wrap | close | halt
    edge: int         # edge id of the bridge used, -1 otherwise
    rank: int         # position of that bridge in time order, -1 otherwise
    source: int       # vertex before the event


@dataclass
class CrwTrace:
    config: BridgeConfiguration
    start: int
    horizon: float
    events: list[Event] = field(default_factory=list)
    discovered: list[int] = field(default_factory=list)      # Z in discovery order
    discovery_times: list[float] = field(default_factory=list)  # T_1 = 0, T_2, ...
    orbit: list[int] = field(default_factory=list)            # vertices at integer times
    tau_c: float = math.inf
    end_time: float = 0.0
    # per-vertex list of covered bar intervals (h0, h1, s0)
    segments: dict[int, list[tuple[float, float, float]]] = field(default_factory=dict)
    internal: list[bool] = field(default_factory=list)        # aligned with events
    direct: list[bool] = field(default_factory=list)
    bad: list[bool] | None = None

    @property
    def closed(self) -> bool:
        return math.isfinite(self.tau_c)

    @property
    def graph(self):
        return self.config.graph

    def jump_events(self) -> list[int]:
        return [i for i, ev in enumerate(self.events) if ev.kind in ("fresh", "backtrack")]

    def trace_at(self, t: float) -> list[int]:
        """Z_t: vertices visited during [0, t]."""
        k = bisect.bisect_right(self.discovery_times, t)
        return self.discovered[:k]

    def orbit_prefix(self, k: int) -> list[int]:
        """O_k(v): orbit entries at times in [0, k)."""
        return self.orbit[:k]

    def hitting_time(self, k: int) -> float:
        """T_k, or inf if fewer than k vertices were discovered."""
        return self.discovery_times[k - 1] if k <= len(self.discovery_times) else math.inf

    def potential(self, t: float) -> float:
        """|Z_t| - t, valid for t <= tau_c."""
        return len(self.trace_at(t)) - t

    def covered(self, v: int, t: float) -> list[tuple[float, float]]:
        """Merged covered sub-intervals of the bar of v by the path up to time t."""
        pieces = []
        for h0, h1, s0 in self.segments.get(v, ()):
            if s0 > t:
                continue
            pieces.append((h0, min(h1, h0 + (t - s0))))
        return _merge(pieces)

    def unexplored_measure(self, v: int, t: float) -> float:
        return 1.0 - sum(b - a for a, b in self.covered(v, t))

    def potential_by_coverage(self, t: float) -> float:
        """Lebesgue measure of unused parts of the bars visited up to t."""
        return sum(self.unexplored_measure(v, t) for v in self.trace_at(t))

    def is_dead(self, v: int, t: float) -> bool:
        iv = self.covered(v, t)
        return len(iv) == 1 and iv[0][0] <= COVER_TOL and iv[0][1] >= 1.0 - COVER_TOL

    def counters(self, t: float = math.inf) -> dict[str, int]:
        """Fresh, backtrack, internal (I), bad (I^b) and direct (I^d) counts up to t."""
        out = dict(fresh=0, backtrack=0, internal=0, bad=0, direct=0)
        for i, ev in enumerate(self.events):
            if ev.s > t:
                break
            if ev.kind == "backtrack":
                out["backtrack"] += 1
            elif ev.kind == "fresh":
                out["fresh"] += 1
                out["internal"] += self.internal[i]
                out["direct"] += self.direct[i]
                if self.bad is not None:
                    out["bad"] += self.bad[i]
        return out


def _merge(pieces, tol: float = COVER_TOL) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for a, b in sorted(pieces):
        if b <= a:
            continue
        if out and a <= out[-1][1] + tol:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


class Bars:
    """Per-vertex sorted bridge ranks for one configuration."""

    def __init__(self, x: BridgeConfiguration):
        self.x = x
        u, w = x.endpoints()
        self.u = u.tolist()
        self.w = w.tolist()
        self.times = x.times.tolist()
        self.edges = x.edges.tolist()
        verts = np.concatenate([u, w])
        ranks = np.concatenate([np.arange(len(x)), np.arange(len(x))])
        order = np.lexsort((ranks, verts))
        verts, ranks = verts[order], ranks[order]
        self.ranks: dict[int, list[int]] = {}
        if len(verts):
            cuts = np.flatnonzero(np.diff(verts)) + 1
            for vs, rs in zip(np.split(verts, cuts), np.split(ranks, cuts)):
                self.ranks[int(vs[0])] = rs.tolist()

    def next_rank(self, v: int, r: int) -> int:
        """Smallest bridge rank > r on the bar of v, or -1."""
        rs = self.ranks.get(v)
        if not rs:
            return -1
        j = bisect.bisect_right(rs, r)
        return rs[j] if j < len(rs) else -1

    def other_end(self, q: int, v: int) -> int:
        return self.w[q] if self.u[q] == v else self.u[q]


def default_horizon(n: int) -> float:
    return n * math.log(n) ** 2


def run(x: BridgeConfiguration, v: int, horizon: float | None = None) -> CrwTrace:
    """Simulate the CRW from (v, 0) until it closes or reaches the horizon."""
    g = x.graph
    if not 0 <= v < g.num_vertices:
        raise IndexError(f"start vertex {v} out of range")
    if horizon is None:
        horizon = default_horizon(g.n)
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    bars = Bars(x)
    n = g.n
    tr = CrwTrace(config=x, start=v, horizon=horizon)
    ev, internal, direct = tr.events, tr.internal, tr.direct
    segs = tr.segments
    visited = {v}
    tr.discovered.append(v)
    tr.discovery_times.append(0.0)
    tr.orbit.append(v)
    used: set[int] = set()

    def log(e: Event, is_internal=False, is_direct=False):
        ev.append(e)
        internal.append(is_internal)
        direct.append(is_direct)

    log(Event(0.0, v, 0.0, "start", -1, -1, v))
    cur, r, lap, h = v, -1, 0, 0.0  # r: rank of the bridge just used (-1 at height 0)
    while True:
        q = bars.next_rank(cur, r)
        h_next = bars.times[q] if q >= 0 else 1.0
        s_next = lap + h_next
        if s_next > horizon:
            segs.setdefault(cur, []).append((h, h + (horizon - (lap + h)), lap + h))
            tr.end_time = horizon
            log(Event(horizon, cur, horizon - lap, "halt", -1, -1, cur))
            break
        segs.setdefault(cur, []).append((h, h_next, lap + h))
        if q < 0:
            lap += 1
            r, h = -1, 0.0
            if cur == v:
                tr.tau_c = float(lap)
                tr.end_time = float(lap)
                log(Event(float(lap), cur, 0.0, "close", -1, -1, cur))
                break
            tr.orbit.append(cur)
            log(Event(float(lap), cur, 0.0, "wrap", -1, -1, cur))
            continue
        dest = bars.other_end(q, cur)
        fresh = q not in used
        is_internal = is_direct = False
        if fresh:
            used.add(q)
            is_internal = dest in visited
            is_direct = cur >= n and dest < n
        if dest not in visited:
            visited.add(dest)
            tr.discovered.append(dest)
            tr.discovery_times.append(s_next)
        log(Event(s_next, dest, h_next, "fresh" if fresh else "backtrack",
                  bars.edges[q], q, cur), is_internal, is_direct)
        cur, r, h = dest, q, h_next
    return tr


def orbit_of(x: BridgeConfiguration, v: int) -> list[int]:
    """Full orbit of v read off the CRW (runs until the walk closes)."""
    return run(x, v, horizon=math.inf).orbit


# -- exploration graph ---------------------------------------------------------

@dataclass
class ExplorationGraph:
    """Multigraph of visited vertices and fresh bridges, with dead flags."""
    vertices: set[int]
    edges: dict[int, tuple[int, int]]   # bridge rank -> endpoints
    dead: set[int]

    def adjacency(self) -> dict[int, list[int]]:
        adj = {v: [] for v in self.vertices}
        for a, b in self.edges.values():
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def degree(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b in self.edges.values())

    def degrees(self) -> dict[int, int]:
        deg = {v: 0 for v in self.vertices}
        for a, b in self.edges.values():
            deg[a] += 1
            deg[b] += 1
        return deg

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj = self.adjacency()
        root = next(iter(self.vertices))
        seen = {root}
        stack = [root]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def ball(self, sources, radius: int) -> set[int]:
        adj = self.adjacency()
        dist = {s: 0 for s in sources if s in self.vertices}
        queue = deque(dist)
        while queue:
            a = queue.popleft()
            if dist[a] == radius:
                continue
            for b in adj[a]:
                if b not in dist:
                    dist[b] = dist[a] + 1
                    queue.append(b)
        return set(dist)


def exploration_graph(trace: CrwTrace, t: float) -> ExplorationGraph:
    """G_t: vertices Z_t and fresh bridges traversed by time t."""
    if t > trace.end_time + COVER_TOL:
        raise ValueError(f"t={t} beyond the simulated time {trace.end_time}")
    verts = set(trace.trace_at(t))
    edges = {}
    for ev in trace.events:
        if ev.s > t:
            break
        if ev.kind == "fresh":
            edges[ev.rank] = (ev.source, ev.vertex)
    dead = {v for v in verts if trace.is_dead(v, t)}
    return ExplorationGraph(verts, edges, dead)


def core(g: ExplorationGraph) -> ExplorationGraph:
    """Prune dead vertices of degree one until none remain."""
    verts = set(g.vertices)
    edges = dict(g.edges)
    deg = g.degrees()
    incident: dict[int, set[int]] = {v: set() for v in verts}
    for key, (a, b) in edges.items():
        incident[a].add(key)
        incident[b].add(key)
    queue = deque(v for v in verts if v in g.dead and deg[v] == 1)
    while queue:
        v = queue.popleft()
        if v not in verts or deg[v] != 1:
            continue
        (key,) = incident[v]
        a, b = edges.pop(key)
        w = b if a == v else a
        verts.discard(v)
        incident[w].discard(key)
        deg[w] -= 1
        if w in g.dead and deg[w] == 1:
            queue.append(w)
    return ExplorationGraph(verts, edges, g.dead & verts)


def core_degree_excess(trace: CrwTrace, t: float) -> int:
    """sum over the core of (deg - 2) minus twice the internal-jump count up to t."""
    c = core(exploration_graph(trace, t))
    return sum(d - 2 for d in c.degrees().values()) - 2 * trace.counters(t)["internal"]


# -- bad set and jump taxonomy -------------------------------------------------

def bad_radius(n: int, eps: float) -> int:
    return math.ceil(n ** eps)


def bad_set(trace: CrwTrace, t: float, eps: float) -> set[int]:
    """Union of G_t-balls of radius ceil(n**eps) around visited row-0 vertices."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    n = trace.graph.n
    g = exploration_graph(trace, t)
    sources = [v for v in g.vertices if v < n]
    return g.ball(sources, bad_radius(n, eps)) if sources else set()


def classify_jumps(trace: CrwTrace, eps: float = 0.04) -> dict[str, int]:
    """Fill ``trace.bad`` and return the jump counters at the end of the trace.

    A fresh jump is bad when its target lies in the bad set just before the
    jump; the set is grown incrementally along the walk.
    """
    n = trace.graph.n
    radius = bad_radius(n, eps)
    adj: dict[int, list[int]] = {trace.start: []}
    bad = []
    for ev in trace.events:
        flag = False
        if ev.kind == "fresh":
            sources = [v for v in adj if v < n]
            if sources:
                dist = {s: 0 for s in sources}
                queue = deque(sources)
                while queue and ev.vertex not in dist:
                    a = queue.popleft()
                    if dist[a] == radius:
                        continue
                    for b in adj[a]:
                        if b not in dist:
                            dist[b] = dist[a] + 1
                            queue.append(b)
                flag = ev.vertex in dist
            adj.setdefault(ev.vertex, [])
            adj[ev.source].append(ev.vertex)
            adj[ev.vertex].append(ev.source)
        bad.append(flag)
    trace.bad = bad
    return trace.counters()


def isoperimetry_stopping_times(trace: CrwTrace, delta: float) -> tuple[float, float]:
    """(tau_iso^delta, tau_c); inf when the event does not happen within the trace."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    g = trace.graph
    bound = g.n ** delta
    prof = IsoProfile(g)
    tau_iso = math.inf
    for v, t in zip(trace.discovered, trace.discovery_times):
        prof.add(v)
        if prof.iota > bound:
            tau_iso = t
            break
    return tau_iso, trace.tau_c


# -- straight paths ------------------------------------------------------------

@dataclass(frozen=True)
class StraightPath:
    vertices: tuple[int, ...]
    closed: bool
    potential: float

    @property
    def length(self) -> int:
        return len(self.vertices) - 1


def straight_paths(trace: CrwTrace, t: float, min_len: int = 1) -> list[StraightPath]:
    """Maximal runs of degree-two core vertices at time t, with their potential.

    A core component that is a bare cycle is reported once as a closed path
    starting at its smallest vertex.  Potential is the unexplored bar measure
    of the path's vertices, and zero once the walk has closed.
    """
    c = core(exploration_graph(trace, t))
    deg = c.degrees()
    two = {v for v, d in deg.items() if d == 2}
    adj = {v: [] for v in two}
    for a, b in c.edges.values():
        if a in two and b in two:
            adj[a].append(b)
            adj[b].append(a)
    closed_walk = t >= trace.tau_c
    out, seen = [], set()
    for v0 in sorted(two):
        if v0 in seen:
            continue
        comp = {v0}
        stack = [v0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        ends = sorted(v for v in comp if len(adj[v]) < 2)
        is_cycle = not ends
        start = ends[0] if ends else min(comp)
        path, on_path, cur = [start], {start}, start
        while True:
            cand = [w for w in adj[cur] if w not in on_path]
            if not cand:
                break
            cur = min(cand)
            path.append(cur)
            on_path.add(cur)
        if len(path) - 1 < min_len:
            continue
        pot = 0.0 if closed_walk else sum(trace.unexplored_measure(w, t) for w in path)
        out.append(StraightPath(tuple(path), is_cycle, pot))
    return out


# -- output ----------------------------------------------------------------------

def events_csv(trace: CrwTrace) -> str:
    lines = ["s,vertex,height,event_kind,bridge_edge_id"]
    for ev in trace.events:
        lines.append(f"{ev.s!r},{ev.vertex},{ev.height!r},{ev.kind},{ev.edge}")
    return "\n".join(lines) + "\n"
