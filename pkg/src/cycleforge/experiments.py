"""Experiment harness: beta sweeps, subcritical scaling, Heisenberg
correlations and CRW isoperimetry campaigns.

Every random cell draws from ``numpy.random.default_rng(cell_seed)`` where
``cell_seed`` is derived from the master seed and the cell's grid indices,
so any single row can be regenerated in isolation from its ``seed`` column.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import __version__
from .config import BridgeConfiguration, permutation_of, sample_poisson
from .crw import default_horizon, run as run_crw
from .graph import hamming
from .isoperimetry import chi, iota
from .mcmc import big_theta, mcmc_sample
from .permutation import cycle_stats
from .splitmerge import UnionFind

EPS_GRID = (0.01, 0.02, 0.05, 0.1)
CSV_COLUMNS = ("n", "beta", "theta", "seed", "num_bridges", "max_cycle",
               *(f"frac_ge_{e}" for e in EPS_GRID), "frac_ge_nlog2n", "log2_histogram")


class RegimeError(ValueError):
    """Parameters fall outside the regime an experiment is defined for."""


def cell_seed(master: int, *indices: int) -> int:
    """A 63-bit seed derived from the master seed and grid indices."""
    ss = np.random.SeedSequence(master, spawn_key=tuple(indices))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def worker_count() -> int:
    cap = os.environ.get("CYCLEFORGE_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def _map(fn: Callable, tasks: Sequence, workers: int | None = None) -> list:
    """Ordered map, parallel when more than one worker is allowed."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def manifest(experiment: str, params: dict, seed: int) -> dict:
    return {"experiment": experiment, "params": params, "seed": seed,
            "code_version": __version__}


# -- sweeps ---------------------------------------------------------------------------

@dataclass
class SweepRecord:
    n: int
    beta: float
    theta: float
    seed: int
    num_bridges: int
    max_cycle: int
    frac_ge_eps: dict[float, float]
    frac_ge_nlog2n: float
    histogram: list[int]          # cycle counts with length in [2^k, 2^(k+1))
    wall_time: float = field(default=0.0, compare=False)

    def row(self) -> list:
        return [self.n, repr(self.beta), repr(self.theta), self.seed, self.num_bridges,
                self.max_cycle, *(repr(self.frac_ge_eps[e]) for e in EPS_GRID),
                repr(self.frac_ge_nlog2n), ";".join(map(str, self.histogram))]


def log2_histogram(lengths: np.ndarray) -> list[int]:
    if len(lengths) == 0:
        return []
    bins = np.floor(np.log2(lengths)).astype(int)
    return np.bincount(bins).tolist()


def record_for(x: BridgeConfiguration, theta: float, seed: int, wall: float = 0.0) -> SweepRecord:
    g = x.graph
    st = cycle_stats(permutation_of(x))
    N = g.num_vertices
    return SweepRecord(
        n=g.n, beta=x.beta, theta=theta, seed=seed, num_bridges=len(x),
        max_cycle=st.max_length,
        frac_ge_eps={e: st.fraction_at_least(math.ceil(e * N)) for e in EPS_GRID},
        frac_ge_nlog2n=st.fraction_at_least(math.ceil(default_horizon(g.n))),
        histogram=log2_histogram(st.lengths), wall_time=wall)


@dataclass(frozen=True)
class _Cell:
    n: int
    beta: float
    theta: float
    seed: int
    sampler: str
    weight: str


def _run_cell(c: _Cell) -> SweepRecord:
    t0 = time.perf_counter()
    g = hamming(c.n)
    rng = np.random.default_rng(c.seed)
    if c.sampler == "poisson":
        x = sample_poisson(g, c.beta, rng)
    else:
        x = next(mcmc_sample(g, c.beta, c.theta, c.weight, sweeps=1, rng=rng))
    return record_for(x, c.theta, c.seed, time.perf_counter() - t0)


def sweep(n: int, theta: float, betas: Sequence[float], replicates: int,
          sampler: str = "poisson", seed: int = 0, weight: str = "cycles",
          workers: int | None = None) -> list[SweepRecord]:
    """One record per (beta, replicate), ordered by beta index then replicate."""
    betas = list(betas)
    if not betas:
        raise ValueError("beta grid is empty")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if sampler not in ("poisson", "mcmc"):
        raise ValueError(f"unknown sampler {sampler!r}")
    if sampler == "poisson" and theta != 1:
        raise ValueError("the poisson sampler only covers theta = 1")
    if sampler == "mcmc" and theta == 1:
        warnings.warn("theta = 1: delegating to the poisson sampler", stacklevel=2)
        sampler = "poisson"
    cells = [_Cell(n, float(b), float(theta), cell_seed(seed, bi, r), sampler, weight)
             for bi, b in enumerate(betas) for r in range(replicates)]
    return _map(_run_cell, cells, workers)


def sweep_csv(records: Sequence[SweepRecord], include_timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*CSV_COLUMNS, "wall_time"] if include_timing else CSV_COLUMNS)
    for r in records:
        w.writerow([*r.row(), f"{r.wall_time:.6f}"] if include_timing else r.row())
    return buf.getvalue()


def sweep_means(records: Sequence[SweepRecord]) -> dict[float, float]:
    """Mean largest-cycle fraction per beta, in grid order."""
    acc: dict[float, list[float]] = {}
    for r in records:
        acc.setdefault(r.beta, []).append(r.max_cycle / r.n ** 2)
    return {b: float(np.mean(v)) for b, v in acc.items()}


def kendall_tau(values: Sequence[float]) -> float:
    return float(stats.kendalltau(np.arange(len(values)), values).statistic)


# -- subcritical scaling ------------------------------------------------------------------

@dataclass
class ScalingFit:
    theta: float
    beta: float
    ns: list[int]
    maxima: list[int]   # per-n maximum cycle length over replicates
    slope: float        # least squares of maxima against ln n
    intercept: float

    @property
    def ratios(self) -> list[float]:
        return [m / n for m, n in zip(self.maxima, self.ns)]


def subcritical_scaling(theta: float, beta: float, ns: Sequence[int], replicates: int,
                        seed: int = 0, workers: int | None = None) -> ScalingFit:
    """Largest cycle over replicates for each n, fitted against ln n."""
    limit = 1 / (2 * big_theta(theta))
    if beta >= limit:
        raise RegimeError(f"beta={beta} is not below 1/(2 Theta) = {limit:.6g}; "
                          "the logarithmic bound only applies there")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    ns = list(ns)
    maxima = []
    for ni, n in enumerate(ns):
        recs = sweep(n, theta, [beta], replicates, "poisson" if theta == 1 else "mcmc",
                     cell_seed(seed, ni), workers=workers)
        maxima.append(max(r.max_cycle for r in recs))
    if len(ns) >= 2:
        slope, intercept = np.polyfit(np.log(ns), maxima, 1)
    else:
        slope, intercept = math.nan, math.nan
    return ScalingFit(theta, beta, ns, maxima, float(slope), float(intercept))


# -- Heisenberg correlation ------------------------------------------------------------------

@dataclass
class Correlation:
    estimate: float
    low: float
    high: float
    hits: int
    samples: int


def heisenberg_correlation(n: int, beta: float, u: int, v: int, samples: int,
                           seed: int = 0, confidence: float = 0.95,
                           burn_in: int | None = None, thin: int | None = None) -> Correlation:
    """Quarter of the probability that u and v share a cycle at theta = 2."""
    g = hamming(n)
    for w in (u, v):
        if not 0 <= w < g.num_vertices:
            raise IndexError(f"vertex {w} out of range")
    if u == v:
        return Correlation(0.25, 0.25, 0.25, samples, samples)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    hits = sum(permutation_of(x).same_cycle(u, v)
               for x in mcmc_sample(g, beta, 2.0, "cycles", samples, burn_in, thin, rng))
    ci = stats.binomtest(hits, samples).proportion_ci(confidence, method="wilson")
    return Correlation(hits / samples / 4, ci.low / 4, ci.high / 4, hits, samples)


# -- CRW isoperimetry campaign --------------------------------------------------------------------

@dataclass
class IsoCampaign:
    n: int
    beta: float
    theta: float
    horizon: float
    iota_max: list[int]          # per replicate, max over start vertices
    chi_values: list[int]        # long orbits only
    excluded: int                # start vertices whose orbit is shorter than the horizon

    @property
    def C_hat(self) -> float:
        return max(self.iota_max) / math.log(self.n) ** 2

    @property
    def c_hat(self) -> float:
        if not self.chi_values:
            return math.nan
        return min(self.chi_values) / math.log(self.n) ** 2


def _iso_cell(args) -> tuple[int, list[int], int]:
    n, beta, theta, horizon, s, starts = args
    g = hamming(n)
    rng = np.random.default_rng(s)
    x = sample_poisson(g, beta, rng) if theta == 1 else next(
        mcmc_sample(g, beta, theta, "cycles", 1, rng=rng))
    p = permutation_of(x)
    vs = range(g.num_vertices) if starts is None else starts
    k = math.floor(horizon)
    best, chis, skipped = 0, [], 0
    for v in vs:
        tr = run_crw(x, v, horizon)
        best = max(best, iota(g, tr.trace_at(horizon)))
        if p.cycle_size_of(v) < k or k < 1:
            skipped += 1
        else:
            chis.append(chi(g, p.orbit_prefix(v, k)))
    return best, chis, skipped


def crw_iso_campaign(n: int, beta: float, theta: float = 1.0, horizon: float | None = None,
                     replicates: int = 10, seed: int = 0, starts: Sequence[int] | None = None,
                     workers: int | None = None) -> IsoCampaign:
    """iota of the CRW trace at the horizon and chi of long orbit segments."""
    if beta <= big_theta(theta) / 2:
        warnings.warn(f"beta={beta} is not above Theta/2; the iota bound is out of regime",
                      stacklevel=2)
    horizon = default_horizon(n) if horizon is None else float(horizon)
    tasks = [(n, beta, theta, horizon, cell_seed(seed, r), starts) for r in range(replicates)]
    out = _map(_iso_cell, tasks, workers)
    return IsoCampaign(n, beta, theta, horizon, [o[0] for o in out],
                       [c for o in out for c in o[1]], sum(o[2] for o in out))


def fit_against_log2(ns: Sequence[int], values: Sequence[float]) -> tuple[float, float]:
    """Slopes of ``values`` against log^2 n and against n (least squares)."""
    ns = np.asarray(ns, dtype=float)
    s_log = np.polyfit(np.log(ns) ** 2, values, 1)[0]
    s_lin = np.polyfit(ns, values, 1)[0]
    return float(s_log), float(s_lin)


# -- coupling sanity -------------------------------------------------------------------------------

def coupled_component_max(x: BridgeConfiguration) -> int:
    """Largest component of the graph whose edges carry at least one bridge."""
    uf = UnionFind(x.graph.num_vertices)
    a, b = x.endpoints()
    for u, w in zip(a.tolist(), b.tolist()):
        uf.union(u, w)
    return max(uf.size[r] for r in range(len(uf.parent)) if uf.parent[r] == r)


def write_outputs(path: str, text: str, meta: dict) -> None:
    """Write ``meta`` to ``path + '.manifest.json'`` and then ``text`` to ``path``."""
    with open(path + ".manifest.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(path, "w") as fh:
        fh.write(text)
