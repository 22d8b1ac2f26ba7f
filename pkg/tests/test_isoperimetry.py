import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cycleforge.graph import complete, hamming
from cycleforge.isoperimetry import (IsoProfile, check_iso_inequality, chi, iota,
                                     orbit_segment_iso)
from cycleforge.permutation import Permutation


def _brute(n, A):
    """(iota, chi) by scanning every row and column separately."""
    counts = []
    for i in range(n):
        counts.append(sum(1 for v in A if v // n == i))
        counts.append(sum(1 for v in A if v % n == i))
    return max(counts), min(counts)


@st.composite
def board_and_set(draw, nmax=8):
    n = draw(st.integers(2, nmax))
    A = draw(st.sets(st.integers(0, n * n - 1)))
    return n, A


def test_examples():
    g = hamming(4)
    L0 = list(g.row(0))
    assert iota(g, L0) == 4
    assert chi(g, L0) == 0
    assert iota(g, [7]) == 1
    assert iota(g, range(16)) == chi(g, range(16)) == 4
    assert iota(g, []) == chi(g, []) == 0


def test_inequality_examples():
    g = hamming(4)
    assert check_iso_inequality(g, g.row(0))
    # A = V: both sides are equalities
    assert g.edges_between(range(16), range(16)) / 16 == iota(g, range(16)) - 1 == 3
    assert check_iso_inequality(g, range(16))
    with pytest.raises(ValueError):
        check_iso_inequality(g, [])


def test_complete_mode_rejected():
    with pytest.raises(ValueError):
        iota(complete(3), [0])


@given(board_and_set())
def test_matches_brute_force(case):
    n, A = case
    g = hamming(n)
    assert (iota(g, A), chi(g, A)) == _brute(n, A)
    assert 0 <= chi(g, A) <= iota(g, A) <= n


@settings(max_examples=200)
@given(board_and_set(nmax=12))
def test_inequality_holds(case):
    n, A = case
    if A:
        assert check_iso_inequality(hamming(n), A)


@given(board_and_set(), st.data())
def test_subadditive_and_monotone(case, data):
    n, A = case
    B = data.draw(st.sets(st.integers(0, n * n - 1)))
    g = hamming(n)
    assert iota(g, A | B) <= iota(g, A) + iota(g, B)
    assert iota(g, A) <= iota(g, A | B)
    assert chi(g, A) <= chi(g, A | B)


@given(board_and_set(), st.randoms())
def test_board_symmetry(case, rnd):
    n, A = case
    g = hamming(n)
    rp, cp = list(range(n)), list(range(n))
    rnd.shuffle(rp)
    rnd.shuffle(cp)
    B = {cp[v % n] + n * rp[v // n] for v in A}
    assert iota(g, B) == iota(g, A)
    assert chi(g, B) == chi(g, A)


@given(board_and_set(), st.randoms())
def test_profile_incremental(case, rnd):
    n, A = case
    g = hamming(n)
    prof = IsoProfile(g)
    seen = set()
    order = list(A)
    rnd.shuffle(order)
    for v in order:
        assert prof.add(v)
        assert not prof.add(v)
        seen.add(v)
        assert prof.iota == iota(g, seen)
        assert prof.chi == chi(g, seen)
    assert len(prof) == len(A)


def test_orbit_segment():
    g = hamming(3)
    p = Permutation.from_cycles(9, [[0, 1, 2, 4]])
    assert orbit_segment_iso(g, p, 0, 1) == (1, 0)
    assert orbit_segment_iso(g, p, 0, 3) == (3, 0)
    assert orbit_segment_iso(g, p, 0, 100) == (iota(g, [0, 1, 2, 4]), chi(g, [0, 1, 2, 4]))
    with pytest.raises(ValueError):
        orbit_segment_iso(g, p, 0, 0)


def test_orbit_segment_random():
    rng = np.random.default_rng(4)
    g = hamming(5)
    for _ in range(50):
        p = Permutation(rng.permutation(25))
        v, k = int(rng.integers(25)), int(rng.integers(1, 30))
        seg = p.orbit(v)[:k]
        assert orbit_segment_iso(g, p, v, k) == _brute(5, seg)
