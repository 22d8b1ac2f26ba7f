import itertools
import math
from collections import Counter

import numpy as np
import pytest

from cycleforge.config import BridgeConfiguration, permutation_of, sample_poisson
from cycleforge.graph import hamming
from cycleforge.mcmc import (CYCLES, BridgeChain, WeightFunction, big_theta, exact_distribution,
                             get_weight, kernel_bound_check, lipschitz_spot_test, mcmc_sample,
                             poisson_slice_check, register_weight, slice_band, tilted_tail)
from cycleforge.permutation import Permutation

G2 = hamming(2)


def _brute_exact(g, beta, theta, k_max):
    """Sum over every ordered edge sequence up to k_max, no aggregation."""
    lam = g.edge_intensity(beta)
    eu, ew = g.edge_endpoints
    mass = Counter()
    for k in range(k_max + 1):
        base = lam ** k / math.factorial(k)
        for seq in itertools.product(range(g.num_edges), repeat=k):
            p = Permutation.identity(g.num_vertices)
            for e in seq:
                p = p.then_transpose(int(eu[e]), int(ew[e]))
            mass[p.key()] += base * theta ** p.cycle_count()
    z = sum(mass.values())
    return {key: v / z for key, v in mass.items()}


def test_big_theta():
    assert big_theta(2.0) == big_theta(0.5) == 2.0
    assert big_theta(1.0) == 1.0


def test_weight_registry():
    assert get_weight("cycles") is CYCLES
    with pytest.raises(ValueError):
        get_weight("no-such-weight")
    x = BridgeConfiguration.from_bridges(G2, [((0, 1), 0.2)])
    assert get_weight("cycles").evaluate(x) == 3
    assert get_weight("cycles-nontrivial").evaluate(x) == 1


def test_lipschitz_spot_test():
    rng = np.random.default_rng(0)
    x = sample_poisson(hamming(3), 1.0, rng)
    assert lipschitz_spot_test(CYCLES, x, rng)
    steep = WeightFunction("steep", lambda y: 3.0 * permutation_of(y).cycle_count())
    assert not lipschitz_spot_test(steep, x, rng)
    timed = WeightFunction("timed", lambda y: float(np.sum(y.times)))
    assert not lipschitz_spot_test(timed, x, rng)


def test_non_admissible_weight_rejected():
    register_weight(WeightFunction("test-steep", lambda y: 5.0 * len(y)))
    with pytest.raises(ValueError):
        next(mcmc_sample(hamming(3), 0.5, 2.0, "test-steep", sweeps=1,
                         rng=np.random.default_rng(1)))


def test_theta_one_delegates_to_poisson():
    g = hamming(5)
    a = list(mcmc_sample(g, 0.7, 1.0, sweeps=3, rng=np.random.default_rng(9)))
    rng = np.random.default_rng(9)
    b = [sample_poisson(g, 0.7, rng) for _ in range(3)]
    assert a == b


def test_invalid_parameters():
    with pytest.raises(ValueError):
        BridgeChain(G2, 0.0, 2.0)
    with pytest.raises(ValueError):
        BridgeChain(G2, 0.5, -1.0)


def test_detailed_balance_on_logged_proposals():
    g = hamming(3)
    beta, theta = 0.6, 2.5
    chain = BridgeChain(g, beta, theta, rng=np.random.default_rng(2), log_proposals=True,
                        verify_every=1)
    chain.run(20_000)
    lam, E = beta / (g.n - 1), g.num_edges
    seen = Counter()
    for p in chain.proposals:
        if p.kind != "birth" and p.size == 0:
            continue  # nothing to remove or swap
        if p.kind == "birth":
            # density ratio lam * theta**dC, proposal ratio (1/(k+1)) / (1/|E|)
            r = lam * theta ** p.delta_c * E / (p.size + 1)
        elif p.kind == "death":
            r = (1 / lam) * theta ** p.delta_c * p.size / E
        else:
            r = theta ** p.delta_c
            if p.delta_c == 0:
                assert p.accept_prob == 1.0
        assert p.accept_prob == pytest.approx(min(1.0, r), rel=1e-12)
        # the reverse move has ratio 1/r; balance needs a(x->y) / a(y->x) = r
        assert p.accept_prob / min(1.0, 1 / r) == pytest.approx(r, rel=1e-12)
        seen[p.kind] += 1
    assert min(seen.values()) > 1000


def test_logged_delta_c_is_exact():
    g = hamming(3)
    chain = BridgeChain(g, 1.0, 0.5, rng=np.random.default_rng(3), log_proposals=True)
    for _ in range(3000):
        before = permutation_of(chain.configuration()).cycle_count()
        if chain.step():
            after = permutation_of(chain.configuration()).cycle_count()
            assert chain.proposals[-1].delta_c == after - before
            assert chain.c_value == after


def test_incremental_and_generic_paths_agree():
    g = hamming(3)
    generic = WeightFunction("cycles-generic", CYCLES.evaluate)
    a = BridgeChain(g, 0.8, 2.0, "cycles", np.random.default_rng(4))
    b = BridgeChain(g, 0.8, 2.0, generic, np.random.default_rng(4))
    for _ in range(2000):
        assert a.step() == b.step()
    assert a.configuration() == b.configuration()
    assert a.c_value == b.c_value


def test_cache_coherence_with_frequent_verification():
    chain = BridgeChain(hamming(4), 1.0, 3.0, rng=np.random.default_rng(5), verify_every=1)
    chain.run(10_000)
    chain.verify()
    assert chain.permutation() == permutation_of(chain.configuration())


def test_death_only_path_reaches_empty():
    """Every single-bridge deletion has positive acceptance probability."""
    g = hamming(3)
    beta, theta = 0.5, 3.0
    x = sample_poisson(g, 2.0, np.random.default_rng(6))
    lam_total = beta * g.num_vertices
    while len(x):
        c = permutation_of(x).cycle_count()
        y = x.without_index(0)
        r = len(x) / lam_total * theta ** (permutation_of(y).cycle_count() - c)
        assert min(1.0, r) > 0
        x = y
    assert len(x) == 0


def test_exact_matches_brute_force():
    for theta in (0.5, 1.0, 2.0):
        d = exact_distribution(G2, 0.3, theta, 5, max_tail=None)
        brute = _brute_exact(G2, 0.3, theta, 5)
        assert set(d.probs) == set(brute)
        for key, v in brute.items():
            assert d.probs[key] == pytest.approx(v, rel=1e-12)


def test_exact_distribution_properties():
    d = exact_distribution(G2, 0.5, 2.0, 20)
    assert sum(d.probs.values()) == pytest.approx(1.0)
    assert len(d.probs) == 24
    assert d.poisson_tail <= 1e-6
    assert d.prob(Permutation.identity(4)) == d.probs[(0, 1, 2, 3)]
    # 0 and 3 are opposite corners of the square
    assert d.same_cycle_prob(1, 1) == 1.0
    assert 0 < d.same_cycle_prob(0, 3) < 1


def test_exact_tail_rejection():
    with pytest.raises(ValueError):
        exact_distribution(G2, 0.5, 2.0, 8)
    with pytest.raises(ValueError):
        exact_distribution(G2, 0.5, 2.0, 30, WeightFunction("w", CYCLES.evaluate))


def test_tilted_tail_values():
    tail, bound = tilted_tail(G2, 0.5, 2.0, 8)
    # P(Poisson(4) > 8)
    assert tail == pytest.approx(1 - sum(math.exp(-4) * 4 ** k / math.factorial(k)
                                         for k in range(9)), rel=1e-10)
    assert bound == pytest.approx(math.exp(2 * 1.5) * tail)


def test_small_beta_concentrates_on_identity():
    beta = 1e-4
    d = exact_distribution(G2, beta, 2.0, 6)
    assert d.prob(Permutation.identity(4)) >= 1 - beta * 4 * 2 * math.exp(beta * 10)


def test_exact_theta_one_against_poisson_monte_carlo():
    d = exact_distribution(G2, 0.5, 1.0, 20)
    rng = np.random.default_rng(7)
    reps = 40_000
    counts = Counter(permutation_of(sample_poisson(G2, 0.5, rng)).key() for _ in range(reps))
    for key, p in d.probs.items():
        sd = math.sqrt(p * (1 - p) / reps)
        assert abs(counts[key] / reps - p) <= 3 * sd + 1e-12


def test_mcmc_matches_exact_oracle():
    d = exact_distribution(G2, 0.5, 2.0, 30)
    rng = np.random.default_rng(8)
    n = 100_000
    counts = Counter(permutation_of(x).key()
                     for x in mcmc_sample(G2, 0.5, 2.0, sweeps=n, thin=2, rng=rng))
    tv = 0.5 * sum(abs(counts[k] / n - p) for k, p in d.probs.items())
    assert tv <= 0.02


def test_kernel_band_theta_one():
    rep = kernel_bound_check(G2, 0.5, 1.0, 3)
    assert rep.violations == 0
    assert all(p == pytest.approx(0.25, rel=1e-12) for _, _, p in rep.conditionals)


def test_kernel_band_theta_two():
    rep = kernel_bound_check(G2, 0.5, 2.0, 3)
    assert rep.violations == 0
    assert rep.band == (1 / 16, 1.0)
    # 1 + 4 + 16 prefixes, four next edges each
    assert len(rep.conditionals) == 84
    assert rep.min_prob < 0.25 < rep.max_prob


def test_kernel_random_prefixes():
    rng = np.random.default_rng(9)
    for theta in (0.5, 2.0, 3.0):
        prefixes = [tuple(rng.integers(4, size=int(rng.integers(0, 4)))) for _ in range(1000)]
        rep = kernel_bound_check(G2, 0.5, theta, 4, prefixes=prefixes)
        assert rep.violations == 0


def test_kernel_prefix_too_long():
    with pytest.raises(ValueError):
        kernel_bound_check(G2, 0.5, 2.0, 2, prefixes=[(0, 1)])


def test_slice_band_collapses_at_theta_one():
    g = hamming(4)
    lo, hi = slice_band(g, 0.9, 1.0, 0.5)
    assert lo == hi == pytest.approx(1 - math.exp(-0.5 * 0.3))


def test_slice_check_theta_one():
    g = hamming(4)
    rng = np.random.default_rng(10)
    xs = [sample_poisson(g, 0.9, rng) for _ in range(20_000)]
    rep = poisson_slice_check(xs, [3], 0.0, 0.5, 0.9, 1.0)
    assert rep.consistent
    assert rep.band[0] == rep.band[1]


def test_slice_check_theta_two():
    g = hamming(4)
    xs = list(mcmc_sample(g, 0.9, 2.0, sweeps=3000, rng=np.random.default_rng(11)))
    rep = poisson_slice_check(xs, [5], 0.0, 0.5, 0.9, 2.0)
    assert rep.band[0] < rep.band[1]
    assert rep.consistent
    tiny = poisson_slice_check(xs, [5], 0.2, 1e-9, 0.9, 2.0)
    assert tiny.hits == 0
    with pytest.raises(ValueError):
        poisson_slice_check([], [5], 0.0, 0.5, 0.9, 2.0)
