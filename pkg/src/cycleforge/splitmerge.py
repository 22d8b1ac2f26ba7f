"""Simple split-merge processes, epoch schedules, and the union-find coupling.

A simple split-merge process evolves a partition of a ground set one step at
a time, each step splitting one block in two or merging two blocks.  The
transposition process sigma_t is the motivating example: a transposition
inside a cycle splits it, across two cycles merges them.

``run_split_merge`` instruments such a process along a geometric epoch
schedule: in epoch i it records the vertices lost to splits (S_i) and those
that stayed in blocks of size >= 2**i but failed to reach 2**(i+1) (M_i).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence, Union

import mpmath
import numpy as np

from .config import BridgeConfiguration
from .graph import HammingGraph
from .permutation import CycleTracker


class UnionFind:
    """Disjoint sets with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.components = n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        return True

    def component_size(self, a: int) -> int:
        return self.size[self.find(a)]

    def component_sizes(self) -> list[int]:
        return sorted((self.size[r] for r in range(len(self.parent)) if self.parent[r] == r),
                      reverse=True)

    def labels(self) -> list[int]:
        return [self.find(a) for a in range(len(self.parent))]


# -- epoch schedule ----------------------------------------------------------------

def _ceil_q_log2(q: Fraction, r: Fraction) -> int:
    """ceil(q * log2(r)) for rationals q > 0 and r >= 1, computed exactly."""
    num, den = r.numerator, r.denominator
    if den & (den - 1) == 0 and num & (num - 1) == 0:
        value = q * (num.bit_length() - den.bit_length())
        return math.ceil(value)
    # log2(r) is irrational here, so q*log2(r) is never an integer
    with mpmath.workdps(60):
        val = mpmath.mpf(q.numerator) / q.denominator * mpmath.log(
            mpmath.mpf(num) / den, 2)
        return int(mpmath.ceil(val))


def _dec(x: float) -> Fraction:
    """The decimal a user typed: 0.1 means 1/10, not the nearest double."""
    return Fraction(repr(x)) if isinstance(x, float) else Fraction(x)


def epoch_length(N: int, i: int, delta: float = 1.0, c2: float = 1.0) -> int:
    """m_i = ceil((4/c2) / delta * (N/2^i) * log2(N/2^i)); zero when N = 2^i."""
    r = Fraction(N, 2 ** i)
    if r < 1:
        raise ValueError("need 2**i <= N")
    return _ceil_q_log2(4 / _dec(c2) / _dec(delta) * r, r)


@dataclass(frozen=True)
class EpochSchedule:
    N: int
    j: int
    K: int
    delta: float
    eps: float
    c2: float
    c3: float
    t0: int
    lengths: tuple[int, ...]      # m_j, ..., m_{K-1}
    milestones: tuple[int, ...]   # T_j = t0, ..., T_K
    delta_t: float                # c3/delta * (N/2^j) log2(N/2^j)
    t1: int                       # t0 + ceil(delta_t)

    @property
    def total(self) -> int:
        return sum(self.lengths)

    @property
    def fits_interval(self) -> bool:
        """Whether the epochs end within t0 + delta_t."""
        return self.total <= self.delta_t

    def epoch(self, i: int) -> tuple[int, int]:
        return self.milestones[i - self.j], self.milestones[i - self.j + 1]


def epoch_schedule(N: int, j: int, delta: float = 1.0, c2: float = 1.0,
                   c3: float | None = None, eps: float = 0.1, t0: int = 0) -> EpochSchedule:
    """Milestones T_j < ... < T_K with T_{i+1} - T_i = ceil(a_i),
    a_i = (4/c2) / delta * (N/2^i) * log2(N/2^i), K = ceil(log2(eps*delta*N))."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if not 0 < eps < 1 / 8:
        raise ValueError("eps must lie in (0, 1/8)")
    if c2 <= 0:
        raise ValueError("c2 must be positive")
    if j < 0 or 2 ** j > eps * delta * N:
        raise ValueError(f"need 2**j <= eps*delta*N, got j={j}, eps*delta*N={eps * delta * N}")
    c3 = 4.0 / c2 if c3 is None else c3
    fd, fe, fc3 = _dec(delta), _dec(eps), _dec(c3)
    K = _ceil_q_log2(Fraction(1), fe * fd * N)
    lengths = [epoch_length(N, i, delta, c2) for i in range(j, K)]
    milestones = [t0]
    for m in lengths:
        milestones.append(milestones[-1] + m)
    r = Fraction(N, 2 ** j)
    t1 = t0 + _ceil_q_log2(fc3 / fd * r, r)
    delta_t = float(fc3 / fd * r) * math.log2(float(r))
    return EpochSchedule(N, j, K, delta, eps, c2, c3, t0, tuple(lengths), tuple(milestones),
                         delta_t, t1)


# -- split-merge engine ----------------------------------------------------------------

class SimplicityError(RuntimeError):
    pass


@dataclass(frozen=True)
class Merge:
    a: int
    b: int


@dataclass(frozen=True)
class Split:
    piece: frozenset  # one of the two resulting blocks


@dataclass
class SplitMergeState:
    """Partition of {0..N-1}: block label per element plus block member sets."""
    label: list[int]
    members: dict[int, set[int]]
    k: int = 0
    log: list[tuple[int, str, tuple[int, ...]]] = field(default_factory=list)
    _next: int = 0

    @classmethod
    def singletons(cls, N: int) -> "SplitMergeState":
        return cls(list(range(N)), {i: {i} for i in range(N)}, _next=N)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "SplitMergeState":
        relabel: dict[int, int] = {}
        lab = [relabel.setdefault(int(x), len(relabel)) for x in labels]
        members: dict[int, set[int]] = {}
        for v, b in enumerate(lab):
            members.setdefault(b, set()).add(v)
        return cls(lab, members, _next=len(relabel))

    @property
    def sizes(self) -> dict[int, int]:
        return {b: len(m) for b, m in self.members.items()}

    def block_size(self, v: int) -> int:
        return len(self.members[self.label[v]])

    def members_at_least(self, ell: float) -> set[int]:
        """C(ell): vertices in blocks of size >= ell."""
        out: set[int] = set()
        for m in self.members.values():
            if len(m) >= ell:
                out |= m
        return out

    def apply(self, step: "Step") -> list[set[int]]:
        """Apply one step; returns the blocks produced by a split, else []."""
        self.k += 1
        if step is None:
            return []
        if isinstance(step, Merge):
            la, lb = self.label[step.a], self.label[step.b]
            if la == lb:
                raise SimplicityError(f"step {self.k}: merge inside a single block")
            A, B = self.members[la], self.members[lb]
            self.log.append((self.k, "merge", (len(A), len(B))))
            keep, drop = (la, lb) if len(A) >= len(B) else (lb, la)
            moved = self.members.pop(drop)
            for v in moved:
                self.label[v] = keep
            self.members[keep] |= moved
            return []
        if isinstance(step, Split):
            piece = set(step.piece)
            blocks = {self.label[v] for v in piece}
            if len(blocks) != 1:
                raise SimplicityError(f"step {self.k}: split piece spans {len(blocks)} blocks")
            (old,) = blocks
            rest = self.members[old]
            if len(piece) >= len(rest):
                raise SimplicityError(f"step {self.k}: split piece is the whole block")
            rest -= piece
            new = self._next
            self._next += 1
            for v in piece:
                self.label[v] = new
            self.members[new] = piece
            self.log.append((self.k, "split", (len(rest), len(piece))))
            return [rest, piece]
        raise SimplicityError(f"step {self.k}: unknown step {step!r}")

    def check(self) -> None:
        total = sum(len(m) for m in self.members.values())
        if total != len(self.label):
            raise AssertionError("blocks do not cover the ground set")
        for b, m in self.members.items():
            if not m or any(self.label[v] != b for v in m):
                raise AssertionError(f"block {b} inconsistent with labels")


Step = Union[Merge, Split, None]


Driver = Callable[[SplitMergeState], Step]


def transposition_driver(edges: Iterable[tuple[int, int]], N: int) -> Driver:
    """Drive a split-merge process by left-multiplying transpositions.

    Starts from the identity; the partition is the cycle partition of sigma_t.
    """
    it = iter(edges)
    tracker = CycleTracker(N)

    def driver(state: SplitMergeState) -> Step:
        a, b = next(it)  # StopIteration ends the run
        if tracker.transpose(a, b) > 0:
            small = a if tracker.cycle_size(a) <= tracker.cycle_size(b) else b
            return Split(frozenset(tracker.cycle_of(small)))
        return Merge(a, b)

    driver.tracker = tracker
    return driver


def random_edge_stream(g: HammingGraph, rng: np.random.Generator) -> Iterator[tuple[int, int]]:
    eu, ew = g.edge_endpoints
    while True:
        for e in rng.integers(g.num_edges, size=1024).tolist():
            yield int(eu[e]), int(ew[e])


@dataclass
class EpochRecord:
    i: int
    T_i: int
    m_i: int
    C_size: int      # |C_{T_i}(2^i)|
    S_size: int      # |S_i|
    M_size: int      # |M_i|


@dataclass
class SplitMergeLog:
    schedule: EpochSchedule
    epochs: list[EpochRecord]
    steps: int
    complete: bool  # every scheduled epoch ran to its end

    def csv(self) -> str:
        lines = ["epoch,T_i,m_i,C_size,S_size,M_size"]
        lines += [f"{e.i},{e.T_i},{e.m_i},{e.C_size},{e.S_size},{e.M_size}" for e in self.epochs]
        return "\n".join(lines) + "\n"


def run_split_merge(driver: Driver, N: int, schedule: EpochSchedule,
                    state: SplitMergeState | None = None,
                    h: int | None = None, verify: bool = False) -> SplitMergeLog:
    """Run ``driver`` through the schedule's epochs and record S_i and M_i.

    Steps before ``schedule.t0`` are taken uninstrumented.  The run stops
    when the driver raises StopIteration or ``h`` steps have been taken; an
    unfinished epoch is dropped.  The containment of lost vertices in
    S_k | M_k is checked after every epoch k and raises on failure.
    """
    state = state if state is not None else SplitMergeState.singletons(N)
    h = schedule.milestones[-1] if h is None else h

    def advance() -> list[set[int]] | None:
        if state.k >= h:
            return None
        try:
            step = driver(state)
        except StopIteration:
            return None
        pieces = state.apply(step)
        if verify:
            state.check()
        return pieces

    while state.k < schedule.t0:
        if advance() is None:
            return SplitMergeLog(schedule, [], state.k, False)
    base = state.members_at_least(2 ** schedule.j)
    lost: set[int] = set()
    epochs: list[EpochRecord] = []
    for idx, m in enumerate(schedule.lengths):
        i = schedule.j + idx
        threshold = 2 ** (i + 1)
        C_i = state.members_at_least(2 ** i)
        S_i: set[int] = set()
        for _ in range(m):
            pieces = advance()
            if pieces is None:
                return SplitMergeLog(schedule, epochs, state.k, False)
            for block in pieces:
                if len(block) < threshold:
                    S_i |= block
        C_next = state.members_at_least(threshold)
        M_i = C_i - (C_next | S_i)
        lost |= S_i | M_i
        if not (base - C_next) <= lost:
            raise AssertionError(f"epoch {i}: lost vertices escape S_k | M_k")
        epochs.append(EpochRecord(i, schedule.milestones[idx], m, len(C_i), len(S_i), len(M_i)))
    return SplitMergeLog(schedule, epochs, state.k, True)


# -- coupled random graph process ---------------------------------------------------------

@dataclass
class GraphProcessState:
    u: int
    uf: UnionFind
    tracker: CycleTracker | None

    def cycles_contained(self) -> bool:
        """Every cycle of sigma_{s+u} lies inside one union-find component."""
        if self.tracker is None:
            raise ValueError("no permutation tracked")
        seen = set()
        for v in range(len(self.tracker)):
            if v in seen:
                continue
            cyc = self.tracker.cycle_of(v)
            seen.update(cyc)
            root = self.uf.find(v)
            if any(self.uf.find(w) != root for w in cyc):
                return False
        return True

    def long_cycle_vertices(self, ell: int) -> set[int]:
        t = self.tracker
        return {v for v in range(len(t)) if t.cycle_size(v) >= ell}

    def large_component_vertices(self, ell: int) -> set[int]:
        return {v for v in range(len(self.uf.parent)) if self.uf.component_size(v) >= ell}


def graph_process(x: BridgeConfiguration, s: int, track: bool = True,
                  verify: bool = False) -> Iterator[GraphProcessState]:
    """Yield G^s_u for u = 0..|X|-s, seeded by the cycles of sigma_s.

    The yielded state object is mutated in place between iterations.
    """
    if not 0 <= s <= len(x):
        raise ValueError(f"s must lie in [0, {len(x)}]")
    N = x.graph.num_vertices
    a, b = x.endpoints()
    a, b = a.tolist(), b.tolist()
    tracker = CycleTracker(N)
    for k in range(s):
        tracker.transpose(a[k], b[k])
    uf = UnionFind(N)
    for c in tracker.permutation().cycles():
        for v in c[1:]:
            uf.union(c[0], v)
    state = GraphProcessState(0, uf, tracker if track else None)
    if verify and track and not state.cycles_contained():
        raise AssertionError("initial cycles not contained")
    yield state
    for k in range(s, len(x)):
        uf.union(a[k], b[k])
        if track:
            tracker.transpose(a[k], b[k])
        state.u += 1
        if verify and track and not state.cycles_contained():
            raise AssertionError(f"cycle escapes its component at u={state.u}")
        yield state


def bernoulli_percolation(g: HammingGraph, p: float, rng: np.random.Generator) -> list[int]:
    """Open each edge independently with probability p; component sizes, descending."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    open_edges = np.flatnonzero(rng.random(g.num_edges) < p)
    eu, ew = g.edge_endpoints
    uf = UnionFind(g.num_vertices)
    for a, b in zip(eu[open_edges].tolist(), ew[open_edges].tolist()):
        uf.union(a, b)
    return uf.component_sizes()
