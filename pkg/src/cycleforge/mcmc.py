"""Sampling from the cycle-tilted bridge measure theta**C(X) B(dX).

``BridgeChain`` is a reversible Metropolis-Hastings chain on configurations
with three moves: birth of a uniform (edge, time) bridge, death of a uniform
existing bridge, and an edge swap that keeps the time of a uniform bridge.
Against a Poisson reference of total mass L = beta*N the acceptance ratios are

    birth  L / (|X| + 1) * theta**dC
    death  |X| / L       * theta**dC
    swap   theta**dC

Inserting or removing a bridge at time t changes sigma(X) by the transposition
of the positions that the bridge endpoints are carried to by the bridges after
t, so dC is read off an incremental cycle tracker.

``exact_distribution`` and ``kernel_bound_check`` enumerate tiny instances
exactly and serve as independent oracles.
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy import stats

from .config import BridgeConfiguration, permutation_of, sample_poisson
from .graph import HammingGraph
from .permutation import CycleTracker, Permutation

BIRTH, DEATH, SWAP = "birth", "death", "swap"
MOVE_MIX = {BIRTH: 0.4, DEATH: 0.4, SWAP: 0.2}


def big_theta(theta: float) -> float:
    return max(theta, 1.0 / theta)


# -- weights -------------------------------------------------------------------

@dataclass(frozen=True)
class WeightFunction:
    """An admissible functional C(X).

    Weights that are a sum over cycles of sigma(X) give ``per_cycle`` and are
    updated incrementally by the chain; others only give ``evaluate``.
    """
    name: str
    evaluate: Callable[[BridgeConfiguration], float]
    per_cycle: Callable[[int], float] | None = None
    admissible: bool = True


def _cycle_sum(f):
    def evaluate(x: BridgeConfiguration) -> float:
        return float(sum(f(int(s)) for s in permutation_of(x).cycle_sizes))
    return evaluate


def _one(size: int) -> float:
    return 1.0


def _nontrivial(size: int) -> float:
    return 1.0 if size > 1 else 0.0


CYCLES = WeightFunction("cycles", _cycle_sum(_one), _one)
CYCLES_NONTRIVIAL = WeightFunction("cycles-nontrivial", _cycle_sum(_nontrivial), _nontrivial)
ZERO = WeightFunction("zero", lambda x: 0.0, lambda s: 0.0)

WEIGHTS: dict[str, WeightFunction] = {w.name: w for w in (CYCLES, CYCLES_NONTRIVIAL, ZERO)}


def register_weight(w: WeightFunction) -> None:
    WEIGHTS[w.name] = w


def get_weight(w: str | WeightFunction) -> WeightFunction:
    if isinstance(w, WeightFunction):
        return w
    try:
        return WEIGHTS[w]
    except KeyError:
        raise ValueError(f"unknown weight {w!r}; known: {sorted(WEIGHTS)}") from None


def lipschitz_spot_test(w: WeightFunction, x: BridgeConfiguration, rng: np.random.Generator,
                        trials: int = 50) -> bool:
    """Random single-bridge edits must move C by at most 1; reordering-free
    time changes must leave it unchanged."""
    g = x.graph
    base = w.evaluate(x)
    for _ in range(trials):
        if len(x) and rng.random() < 0.5:
            y = x.without_index(int(rng.integers(len(x))))
        else:
            y = x.with_bridge(int(rng.integers(g.num_edges)), float(rng.random()))
        if abs(w.evaluate(y) - base) > 1 + 1e-9:
            return False
    if len(x):
        # a monotone reparametrisation of time keeps edges(X)
        squeezed = BridgeConfiguration(g, x.edges, x.times ** 2, x.beta)
        if list(squeezed.edges) == list(x.edges) and abs(w.evaluate(squeezed) - base) > 1e-9:
            return False
    return True


# -- the chain -----------------------------------------------------------------

@dataclass
class Proposal:
    kind: str
    size: int          # |X| before the move
    delta_c: float
    accept_prob: float
    accepted: bool


@dataclass
class ChainStats:
    proposed: dict[str, int] = field(default_factory=lambda: dict.fromkeys(MOVE_MIX, 0))
    accepted: dict[str, int] = field(default_factory=lambda: dict.fromkeys(MOVE_MIX, 0))

    def rate(self, kind: str) -> float:
        return self.accepted[kind] / self.proposed[kind] if self.proposed[kind] else math.nan


class BridgeChain:
    """Metropolis-Hastings chain targeting theta**C(X) relative to Poisson(beta)."""

    def __init__(self, g: HammingGraph, beta: float, theta: float,
                 weight: str | WeightFunction = "cycles",
                 rng: np.random.Generator | None = None,
                 init: BridgeConfiguration | None = None,
                 verify_every: int = 1000, log_proposals: bool = False):
        if beta <= 0 or theta <= 0:
            raise ValueError("beta and theta must be positive")
        self.g = g
        self.beta = beta
        self.theta = theta
        self.log_theta = math.log(theta)
        self.weight = get_weight(weight)
        self.rng = rng if rng is not None else np.random.default_rng()
        self.total_rate = g.edge_intensity(beta) * g.num_edges   # = beta * N
        self.verify_every = verify_every
        self.stats = ChainStats()
        self.proposals: list[Proposal] | None = [] if log_proposals else None
        self._since_verify = 0
        eu, ew = g.edge_endpoints
        self._eu, self._ew = eu, ew
        # bridge storage: id -> (edge, time); ids kept in a list for O(1) uniform picks
        self.bridges: dict[int, tuple[int, float]] = {}
        self._ids: list[int] = []
        self._pos: dict[int, int] = {}
        self._next_id = 0
        self.bars: dict[int, list[tuple[float, int]]] = {}
        self.tracker = CycleTracker(g.num_vertices)
        if init is not None:
            for e, t in init:
                self._insert(e, t)
            self.tracker = CycleTracker(permutation_of(init))
        self.c_value = self._fresh_c()

    # bookkeeping

    def __len__(self) -> int:
        return len(self._ids)

    def _ends(self, e: int) -> tuple[int, int]:
        return int(self._eu[e]), int(self._ew[e])

    def _insert(self, e: int, t: float) -> int:
        bid = self._next_id
        self._next_id += 1
        self.bridges[bid] = (e, t)
        self._pos[bid] = len(self._ids)
        self._ids.append(bid)
        for v in self._ends(e):
            bisect.insort(self.bars.setdefault(v, []), (t, bid))
        return bid

    def _remove(self, bid: int) -> tuple[int, float]:
        e, t = self.bridges.pop(bid)
        i = self._pos.pop(bid)
        last = self._ids.pop()
        if last != bid:
            self._ids[i] = last
            self._pos[last] = i
        for v in self._ends(e):
            bar = self.bars[v]
            bar.pop(bisect.bisect_left(bar, (t, bid)))
        return e, t

    def _follow(self, p: int, t: float) -> int:
        """Position reached from p by the bridges strictly after time t."""
        bars = self.bars
        while True:
            bar = bars.get(p)
            if not bar:
                return p
            j = bisect.bisect_right(bar, (t, math.inf))
            if j == len(bar):
                return p
            t, bid = bar[j]
            a, b = self._ends(self.bridges[bid][0])
            p = b if p == a else a

    def configuration(self) -> BridgeConfiguration:
        if not self.bridges:
            return BridgeConfiguration.empty(self.g, self.beta)
        e, t = zip(*self.bridges.values())
        return BridgeConfiguration(self.g, e, t, self.beta)

    def _c_after(self, drop: int | None = None, add: tuple[int, float] | None = None) -> float:
        """C of the current configuration with one bridge dropped and/or added."""
        items = [b for bid, b in self.bridges.items() if bid != drop]
        if add is not None:
            items.append(add)
        e, t = zip(*items) if items else ((), ())
        return self.weight.evaluate(BridgeConfiguration(self.g, e, t, self.beta)) - self.c_value

    def permutation(self) -> Permutation:
        return self.tracker.permutation()

    def _fresh_c(self) -> float:
        if self.weight.per_cycle is not None:
            f = self.weight.per_cycle
            return float(sum(f(s) for s in self.tracker.size.values()))
        return self.weight.evaluate(self.configuration())

    # incremental dC through the tracker

    def _local(self, pts) -> float:
        f = self.weight.per_cycle
        labels = {self.tracker.label[p] for p in pts}
        return sum(f(self.tracker.size[l]) for l in labels)

    def _apply(self, moves: Sequence[tuple[int, int]]) -> float:
        """Apply transpositions to the tracker, returning the change in C."""
        if self.weight.per_cycle is None:
            for a, b in moves:
                self.tracker.transpose(a, b)
            return math.nan
        pts = [p for ab in moves for p in ab]
        before = self._local(pts)
        for a, b in moves:
            self.tracker.transpose(a, b)
        return self._local(pts) - before

    def _undo(self, moves) -> None:
        for a, b in reversed(moves):
            self.tracker.transpose(a, b)

    # moves

    def step(self) -> bool:
        r = self.rng.random()
        if r < MOVE_MIX[BIRTH]:
            kind = BIRTH
        elif r < MOVE_MIX[BIRTH] + MOVE_MIX[DEATH]:
            kind = DEATH
        else:
            kind = SWAP
        self.stats.proposed[kind] += 1
        size = len(self)
        if kind != BIRTH and size == 0:
            self._record(kind, size, 0.0, 0.0, False)
            return False
        generic = self.weight.per_cycle is None
        if kind == BIRTH:
            e = int(self.rng.integers(self.g.num_edges))
            t = float(self.rng.random())
            u, w = self._ends(e)
            moves = [(self._follow(u, t), self._follow(w, t))]
            dc = self._apply(moves)
            if generic:
                dc = self._c_after(add=(e, t))
            log_ratio = math.log(self.total_rate / (size + 1)) + dc * self.log_theta
        elif kind == DEATH:
            bid = self._ids[int(self.rng.integers(size))]
            e, t = self.bridges[bid]
            u, w = self._ends(e)
            moves = [(self._follow(u, t), self._follow(w, t))]
            dc = self._apply(moves)
            if generic:
                dc = self._c_after(drop=bid)
            log_ratio = math.log(size / self.total_rate) + dc * self.log_theta
        else:
            bid = self._ids[int(self.rng.integers(size))]
            e, t = self.bridges[bid]
            e_new = int(self.rng.integers(self.g.num_edges))
            if e_new == e:
                self._record(kind, size, 0.0, 1.0, True)
                self.stats.accepted[kind] += 1
                return True
            u, w = self._ends(e)
            c, d = self._ends(e_new)
            moves = [(self._follow(u, t), self._follow(w, t)),
                     (self._follow(c, t), self._follow(d, t))]
            dc = self._apply(moves)
            if generic:
                dc = self._c_after(drop=bid, add=(e_new, t))
            log_ratio = dc * self.log_theta
        prob = 1.0 if log_ratio >= 0 else math.exp(log_ratio)
        accepted = self.rng.random() < prob
        self._record(kind, size, dc, prob, accepted)
        if not accepted:
            self._undo(moves)
            return False
        self.stats.accepted[kind] += 1
        if kind == BIRTH:
            self._insert(e, t)
        elif kind == DEATH:
            self._remove(bid)
        else:
            self._remove(bid)
            self._insert(e_new, t)
        self.c_value += dc
        self._since_verify += 1
        if self.verify_every and self._since_verify >= self.verify_every:
            self.verify()
        return True

    def _record(self, kind, size, dc, prob, accepted) -> None:
        if self.proposals is not None:
            self.proposals.append(Proposal(kind, size, dc, prob, accepted))

    def verify(self) -> None:
        """Full recomputation of sigma(X) and C(X) against the cached values."""
        self._since_verify = 0
        x = self.configuration()
        p = permutation_of(x)
        if p != self.tracker.permutation():
            raise RuntimeError("cycle tracker diverged from sigma(X)")
        self.tracker = CycleTracker(p)
        fresh = self.weight.evaluate(x)
        if abs(fresh - self.c_value) > 1e-9:
            raise RuntimeError(f"cached C(X)={self.c_value} but fresh value is {fresh}")
        self.c_value = fresh

    def run(self, moves: int) -> None:
        for _ in range(moves):
            self.step()

    def burn(self, accepted_moves: int, max_proposals: int | None = None) -> None:
        """Run until ``accepted_moves`` proposals have been accepted."""
        done = tries = 0
        while done < accepted_moves:
            done += self.step()
            tries += 1
            if max_proposals is not None and tries >= max_proposals:
                break


def default_burn_in(g: HammingGraph, beta: float) -> int:
    return max(1, math.ceil(100 * beta * g.num_vertices))


def default_thin(g: HammingGraph, beta: float) -> int:
    return max(1, math.ceil(beta * g.num_vertices))


def mcmc_sample(g: HammingGraph, beta: float, theta: float,
                weight: str | WeightFunction = "cycles", sweeps: int = 1,
                burn_in: int | None = None, thin: int | None = None,
                rng: np.random.Generator | None = None) -> Iterator[BridgeConfiguration]:
    """Yield ``sweeps`` configurations from the tilted measure.

    ``burn_in`` counts accepted moves, ``thin`` counts proposals between
    retained samples.  theta == 1 draws independent Poisson configurations.
    """
    rng = rng if rng is not None else np.random.default_rng()
    w = get_weight(weight)
    if theta == 1.0:
        for _ in range(sweeps):
            yield sample_poisson(g, beta, rng)
        return
    chain = BridgeChain(g, beta, theta, w, rng, init=sample_poisson(g, beta, rng))
    if w.per_cycle is None and not lipschitz_spot_test(w, chain.configuration(), rng):
        raise ValueError(f"weight {w.name!r} failed the Lipschitz spot test")
    chain.burn(default_burn_in(g, beta) if burn_in is None else burn_in)
    thin = default_thin(g, beta) if thin is None else thin
    for _ in range(sweeps):
        chain.run(thin)
        yield chain.configuration()


# -- exact enumeration oracle ---------------------------------------------------

def _transpose_key(perm: tuple[int, ...], a: int, b: int) -> tuple[int, ...]:
    """(a b) o perm on image tuples."""
    return tuple(b if x == a else a if x == b else x for x in perm)


def _cycle_sizes(perm: tuple[int, ...]) -> list[int]:
    seen = [False] * len(perm)
    out = []
    for s in range(len(perm)):
        if seen[s]:
            continue
        size, v = 0, s
        while not seen[v]:
            seen[v] = True
            v = perm[v]
            size += 1
        out.append(size)
    return out


def _c_of(perm, per_cycle) -> float:
    return float(sum(per_cycle(s) for s in _cycle_sizes(perm)))


@dataclass
class ExactDistribution:
    probs: dict[tuple[int, ...], float]
    k_max: int
    poisson_tail: float   # P(Poisson(Theta * beta * N) > k_max)
    tail_bound: float     # the same with the exp(beta N (Theta - 1/Theta)) prefactor
    size_probs: list[float]

    def prob(self, p: Permutation | tuple) -> float:
        key = p.key() if isinstance(p, Permutation) else tuple(p)
        return self.probs.get(key, 0.0)

    def same_cycle_prob(self, u: int, v: int) -> float:
        if u == v:
            return 1.0
        total = 0.0
        for key, pr in self.probs.items():
            w = key[u]
            hit = u == v
            while not hit and w != u:
                hit = w == v
                w = key[w]
            total += pr * hit
        return total


def tilted_tail(g: HammingGraph, beta: float, theta: float, k_max: int) -> tuple[float, float]:
    L = beta * g.num_vertices
    Th = big_theta(theta)
    tail = float(stats.poisson.sf(k_max, Th * L))
    return tail, math.exp(L * (Th - 1.0 / Th)) * tail


def exact_distribution(g: HammingGraph, beta: float, theta: float, k_max: int,
                       weight: str | WeightFunction = "cycles",
                       max_tail: float | None = 1e-6) -> ExactDistribution:
    """Law of sigma(X) under the tilted measure, truncated at k_max bridges.

    Every ordered edge sequence of length k carries Poisson weight
    exp(-L) * lam**k / k! (lam the per-edge intensity) times theta**C.
    Sequences are aggregated by their permutation with a dynamic program over
    the symmetric group, so only tiny graphs are feasible.
    """
    w = get_weight(weight)
    if w.per_cycle is None:
        raise ValueError("exact enumeration needs a cycle-sum weight")
    tail, bound = tilted_tail(g, beta, theta, k_max)
    if max_tail is not None and tail > max_tail:
        raise ValueError(f"Poisson tail beyond k_max={k_max} is {tail:.3g} > {max_tail:g}; "
                         f"increase k_max")
    lam = g.edge_intensity(beta)
    eu, ew = g.edge_endpoints
    trans = list(zip(eu.tolist(), ew.tolist()))
    ident = tuple(range(g.num_vertices))
    layer = {ident: 1.0}  # sum over sequences of length k of lam**k / k!
    mass: dict[tuple[int, ...], float] = {}
    size_mass = []
    c_cache: dict[tuple[int, ...], float] = {}
    for k in range(k_max + 1):
        if k:
            nxt: dict[tuple[int, ...], float] = {}
            for perm, val in layer.items():
                for a, b in trans:
                    key = _transpose_key(perm, a, b)
                    nxt[key] = nxt.get(key, 0.0) + val * lam / k
            layer = nxt
        sk = 0.0
        for perm, val in layer.items():
            if perm not in c_cache:
                c_cache[perm] = theta ** _c_of(perm, w.per_cycle)
            m = val * c_cache[perm]
            mass[perm] = mass.get(perm, 0.0) + m
            sk += m
        size_mass.append(sk)
    z = sum(mass.values())
    return ExactDistribution({k: v / z for k, v in mass.items()}, k_max, tail, bound,
                             [m / z for m in size_mass])


@dataclass
class KernelReport:
    theta: float
    k: int
    band: tuple[float, float]
    conditionals: list[tuple[tuple[int, ...], int, float]]  # (prefix, next edge, prob)
    violations: int

    @property
    def min_prob(self) -> float:
        return min(p for _, _, p in self.conditionals)

    @property
    def max_prob(self) -> float:
        return max(p for _, _, p in self.conditionals)


def kernel_bound_check(g: HammingGraph, beta: float, theta: float, k: int,
                       weight: str | WeightFunction = "cycles",
                       prefixes: Sequence[Sequence[int]] | None = None,
                       rtol: float = 1e-12) -> KernelReport:
    """Exact next-edge conditionals given |X| = k and an edge prefix.

    Given |X| = k every edge sequence has equal Poisson weight, so the
    conditional law of e_{i+1} is proportional to the total tilt over all
    completions.  beta drops out of the conditioning and is accepted only for
    interface symmetry.  By default every prefix of length < k is checked.
    """
    del beta
    w = get_weight(weight)
    eu, ew = g.edge_endpoints
    trans = list(zip(eu.tolist(), ew.tolist()))
    E = len(trans)
    ident = tuple(range(g.num_vertices))
    # completion[r][perm] = sum over r further edges of theta**C(final)
    completion: list[dict[tuple[int, ...], float]] = []
    # states: everything reachable from the identity by edge transpositions
    states = {ident}
    frontier = [ident]
    while frontier:
        fresh = []
        for p in frontier:
            for a, b in trans:
                q = _transpose_key(p, a, b)
                if q not in states:
                    states.add(q)
                    fresh.append(q)
        frontier = fresh
    completion.append({p: theta ** _c_of(p, w.per_cycle) for p in states})
    for _ in range(k):
        prev = completion[-1]
        completion.append({p: sum(prev[_transpose_key(p, a, b)] for a, b in trans)
                           for p in states})
    Th = big_theta(theta)
    lo, hi = Th ** -2 / E, Th ** 2 / E
    if prefixes is None:
        prefixes = [pre for i in range(k) for pre in itertools.product(range(E), repeat=i)]
    out = []
    bad = 0
    for pre in prefixes:
        i = len(pre)
        if i >= k:
            raise ValueError("prefix must be shorter than k")
        perm = ident
        for e in pre:
            perm = _transpose_key(perm, *trans[e])
        rest = k - i - 1
        weights = [completion[rest][_transpose_key(perm, a, b)] for a, b in trans]
        z = sum(weights)
        for e, wt in enumerate(weights):
            pr = wt / z
            out.append((tuple(pre), e, pr))
            if pr < lo * (1 - rtol) or pr > hi * (1 + rtol):
                bad += 1
    return KernelReport(theta, k, (lo, hi), out, bad)


# -- Poisson slice bands ------------------------------------------------------------

@dataclass
class SliceReport:
    hits: int
    trials: int
    estimate: float
    ci: tuple[float, float]
    band: tuple[float, float]

    @property
    def consistent(self) -> bool:
        """The confidence interval meets the band."""
        return self.ci[1] >= self.band[0] and self.ci[0] <= self.band[1]

    @property
    def estimate_in_band(self) -> bool:
        return self.band[0] <= self.estimate <= self.band[1]


def slice_band(g: HammingGraph, beta: float, theta: float, measure: float) -> tuple[float, float]:
    """Bounds on P(|X_A| >= 1 | outside A) for a set A of the given measure."""
    Th = big_theta(theta)
    lam_lo = beta / Th / (g.n - 1) if g.mode == "hamming2" else g.edge_intensity(beta) / Th
    lam_hi = beta * Th / (g.n - 1) if g.mode == "hamming2" else g.edge_intensity(beta) * Th
    return 1 - math.exp(-measure * lam_lo), 1 - math.exp(-measure * lam_hi)


def poisson_slice_check(samples: Sequence[BridgeConfiguration], edges: Sequence[int],
                        t: float, s: float, beta: float, theta: float,
                        confidence: float = 0.99) -> SliceReport:
    """Empirical frequency of a bridge in ``edges x [t, t+s)`` against its band."""
    if not samples:
        raise ValueError("need at least one sample")
    edge_set = np.asarray(sorted(set(edges)))
    hits = 0
    for x in samples:
        inside = np.isin(x.edges, edge_set) & (x.times >= t) & (x.times < t + s)
        hits += bool(inside.any())
    trials = len(samples)
    ci = stats.binomtest(hits, trials).proportion_ci(confidence, method="wilson")
    band = slice_band(samples[0].graph, beta, theta, len(edge_set) * s)
    return SliceReport(hits, trials, hits / trials, (ci.low, ci.high), band)
