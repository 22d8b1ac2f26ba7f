import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from cycleforge.config import permutation_of, sample_poisson
from cycleforge.graph import hamming
from cycleforge.permutation import Permutation
from cycleforge.splitmerge import (Merge, SimplicityError, Split, SplitMergeState, UnionFind,
                                   bernoulli_percolation, epoch_length, epoch_schedule, graph_process,
                                   random_edge_stream, run_split_merge, transposition_driver)


def _m_oracle(N, i, delta, c2):
    """ceil(a_i) by exact symbolic evaluation."""
    r = sympy.Rational(N, 2 ** i)
    a = 4 / sympy.Rational(str(c2)) / sympy.Rational(str(delta)) * r * sympy.log(r, 2)
    return int(sympy.ceiling(a))


# -- union-find -----------------------------------------------------------------------

def test_union_find_basics():
    uf = UnionFind(6)
    assert uf.union(0, 1) and uf.union(2, 3) and uf.union(1, 3)
    assert not uf.union(0, 2)
    assert uf.component_sizes() == [4, 1, 1]
    assert uf.components == 3
    assert uf.find(0) == uf.find(3) != uf.find(4)


@given(st.lists(st.tuples(st.integers(0, 19), st.integers(0, 19)), max_size=60))
def test_union_find_matches_labels(pairs):
    uf = UnionFind(20)
    label = list(range(20))
    last = uf.components
    for a, b in pairs:
        uf.union(a, b)
        la, lb = label[a], label[b]
        label = [la if x == lb else x for x in label]
        assert uf.components <= last
        last = uf.components
    for a in range(20):
        for b in range(20):
            assert (uf.find(a) == uf.find(b)) == (label[a] == label[b])
    assert sum(uf.component_sizes()) == 20


# -- epoch schedule --------------------------------------------------------------------------

def test_schedule_example():
    s = epoch_schedule(1024, 5, delta=1.0, c2=4.0, eps=0.1)
    assert s.lengths[0] == 160  # a_5 = (4/4) * 32 * log2(32)
    assert s.K == math.ceil(math.log2(0.1 * 1024))
    assert s.milestones[1] - s.milestones[0] == 160


def test_degenerate_epoch_length():
    assert epoch_length(32, 5) == 0
    assert epoch_length(1024, 5, 1.0, 4.0) == 160
    with pytest.raises(ValueError):
        epoch_length(16, 5)


def test_schedule_without_epochs():
    s = epoch_schedule(10, 0, eps=0.1)  # eps * N = 1 so K = 0
    assert s.K == 0 and s.lengths == () and s.milestones == (0,)


def test_schedule_rejects_bad_hypotheses():
    with pytest.raises(ValueError):
        epoch_schedule(1024, 7, eps=0.1)  # 128 > 102.4
    with pytest.raises(ValueError):
        epoch_schedule(1024, 0, delta=1.5)
    with pytest.raises(ValueError):
        epoch_schedule(1024, 0, eps=0.2)
    with pytest.raises(ValueError):
        epoch_schedule(1024, 0, c2=0)


def test_schedule_exact_integer_boundary():
    # (4/0.3) * 8 * log2(8) = 320 exactly; a binary 0.3 would round up to 321
    assert epoch_length(64, 3, delta=0.3) == 320


def test_schedule_default_c3_and_delta_t():
    s = epoch_schedule(4096, 2, delta=0.5, c2=2.0, eps=0.1)
    assert s.c3 == 2.0
    r = 4096 / 4
    assert s.delta_t == pytest.approx(2.0 / 0.5 * r * math.log2(r))
    assert s.t1 == math.ceil(s.delta_t)


@settings(max_examples=200, deadline=None)
@given(st.integers(64, 10**7), st.sampled_from([0.25, 0.5, 0.75, 1.0, 0.3, 0.6]),
       st.sampled_from([0.5, 1.0, 2.0, 3.0]), st.sampled_from([0.05, 0.1, 0.12]), st.data())
def test_schedule_arithmetic(N, delta, c2, eps, data):
    jmax = int(math.floor(math.log2(eps * delta * N)))
    if jmax < 0:
        return
    j = data.draw(st.integers(0, jmax))
    t0 = data.draw(st.integers(0, 100))
    s = epoch_schedule(N, j, delta, c2, eps=eps, t0=t0)
    assert list(s.lengths) == [_m_oracle(N, i, delta, c2) for i in range(j, s.K)]
    assert all(b - a == m for a, b, m in zip(s.milestones, s.milestones[1:], s.lengths))
    assert s.milestones[-1] - s.milestones[0] == s.total
    assert s.milestones[0] == t0


# -- split-merge engine ----------------------------------------------------------------------

def test_state_rejects_non_simple_steps():
    st_ = SplitMergeState.from_labels([0, 0, 1, 1])
    with pytest.raises(SimplicityError):
        st_.apply(Merge(0, 1))
    with pytest.raises(SimplicityError):
        st_.apply(Split(frozenset({1, 2})))
    with pytest.raises(SimplicityError):
        st_.apply(Split(frozenset({0, 1})))
    st_.apply(Split(frozenset({1})))
    assert sorted(st_.sizes.values()) == [1, 1, 2]
    st_.check()


def _pairwise_merger(N):
    """Merges blocks of equal size pairwise, smallest first; never splits."""
    def driver(state):
        by_size = {}
        for b, m in sorted(state.members.items()):
            by_size.setdefault(len(m), []).append(min(m))
        for size in sorted(by_size):
            if len(by_size[size]) >= 2:
                a, c = by_size[size][:2]
                return Merge(a, c)
        return None
    return driver


def test_pairwise_merger_never_splits():
    N = 64
    sch = epoch_schedule(N, 0, eps=0.1)
    log = run_split_merge(_pairwise_merger(N), N, sch, verify=True)
    assert log.complete
    assert all(e.S_size == 0 for e in log.epochs)


def test_idle_driver_loses_everything_to_m():
    N = 64
    sch = epoch_schedule(N, 0, eps=0.1)
    log = run_split_merge(lambda state: None, N, sch)
    first = log.epochs[0]
    assert first.C_size == N and first.M_size == N
    assert all(e.S_size == 0 for e in log.epochs)


def test_simplicity_violation_aborts():
    def bad(state):
        return Merge(0, 0)
    with pytest.raises(SimplicityError):
        run_split_merge(bad, 16, epoch_schedule(16, 0, eps=0.1))


def _set_algebra_oracle(edges, N, sch):
    """Recompute S_i, M_i and the containment from cycle partitions directly."""
    p = Permutation.identity(N)
    k = 0
    pos = iter(edges)

    def big(perm, ell):
        return {v for v in range(N) if perm.cycle_size_of(v) >= ell}

    base = big(p, 2 ** sch.j)
    lost = set()
    out = []
    for idx, m in enumerate(sch.lengths):
        i = sch.j + idx
        C_i = big(p, 2 ** i)
        S_i = set()
        for _ in range(m):
            a, b = next(pos)
            q = p.then_transpose(a, b)
            if p.same_cycle(a, b):
                for v in q.orbit(a) + q.orbit(b):
                    if q.cycle_size_of(v) < 2 ** (i + 1):
                        S_i.add(v)
            p = q
            k += 1
        C_next = big(p, 2 ** (i + 1))
        M_i = C_i - (C_next | S_i)
        lost |= S_i | M_i
        out.append(((base - C_next) <= lost, len(C_i), len(S_i), len(M_i)))
    return out


def test_transposition_driver_against_set_algebra():
    g = hamming(20)
    N = g.num_vertices
    sch = epoch_schedule(N, 0, delta=1.0, c2=8.0, eps=0.1)
    for seed in range(50):
        rng = np.random.default_rng(seed)
        stream = random_edge_stream(g, rng)
        edges = [next(stream) for _ in range(sch.total)]
        log = run_split_merge(transposition_driver(iter(edges), N), N, sch)
        assert log.complete
        if seed < 5:
            oracle = _set_algebra_oracle(edges, N, sch)
            assert all(ok for ok, *_ in oracle)
            assert [(e.C_size, e.S_size, e.M_size) for e in log.epochs] == [o[1:] for o in oracle]


def test_driver_classification_matches_cycle_count():
    g = hamming(6)
    x = sample_poisson(g, 2.0, np.random.default_rng(0))
    a, b = x.endpoints()
    drv = transposition_driver(zip(a.tolist(), b.tolist()), g.num_vertices)
    state = SplitMergeState.singletons(g.num_vertices)
    p = Permutation.identity(g.num_vertices)
    for u, w in zip(a.tolist(), b.tolist()):
        step = drv(state)
        state.apply(step)
        q = p.then_transpose(u, w)
        assert isinstance(step, Split) == (q.cycle_count() > p.cycle_count())
        p = q
        state.check()
        assert len(state.members) == p.cycle_count()
    assert drv.tracker.permutation() == permutation_of(x)
    with pytest.raises(StopIteration):
        drv(state)


def test_run_stops_when_driver_is_exhausted():
    log = run_split_merge(transposition_driver(iter([(0, 1)]), 16), 16,
                          epoch_schedule(16, 0, eps=0.1))
    assert not log.complete and log.steps == 1


def test_epoch_csv():
    N = 64
    log = run_split_merge(lambda s: None, N, epoch_schedule(N, 0, eps=0.1))
    lines = log.csv().splitlines()
    assert lines[0] == "epoch,T_i,m_i,C_size,S_size,M_size"
    assert len(lines) == 1 + len(log.epochs)


# -- graph process ------------------------------------------------------------------------------

def test_graph_process_endpoints():
    g = hamming(4)
    x = sample_poisson(g, 1.0, np.random.default_rng(1))
    states = graph_process(x, len(x))
    st_ = next(states)
    p = permutation_of(x)
    assert sorted(st_.uf.component_sizes()) == sorted(p.cycle_sizes.tolist())
    assert next(states, None) is None
    first = next(graph_process(x, 0))
    assert first.uf.components == g.num_vertices
    with pytest.raises(ValueError):
        next(graph_process(x, len(x) + 1))


def test_graph_process_containment_random():
    rng = np.random.default_rng(2)
    for _ in range(40):
        n = int(rng.integers(2, 11))
        x = sample_poisson(hamming(n), float(rng.uniform(0.5, 2.0)), rng)
        for s in {0, len(x) // 2, max(len(x) - 10, 0)}:
            last = None
            for st_ in graph_process(x, s, verify=True):
                assert st_.long_cycle_vertices(3) <= st_.large_component_vertices(3)
                if last is not None:
                    assert st_.uf.components <= last
                last = st_.uf.components


# -- percolation ----------------------------------------------------------------------------------

def test_percolation_extremes():
    g = hamming(5)
    rng = np.random.default_rng(0)
    assert bernoulli_percolation(g, 0.0, rng) == [1] * 25
    assert bernoulli_percolation(g, 1.0, rng) == [25]
    with pytest.raises(ValueError):
        bernoulli_percolation(g, 1.5, rng)


@pytest.mark.parametrize("n", [40, 80])
def test_percolation_direction(n):
    g = hamming(n)
    means = {}
    for lam in (0.25, 1.0):
        fr = [bernoulli_percolation(g, lam / (n - 1), np.random.default_rng(r))[0] / n ** 2
              for r in range(30)]
        means[lam] = np.mean(fr)
    assert means[1.0] > means[0.25] + 0.3
