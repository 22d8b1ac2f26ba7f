"""Permutations of the vertex set, cycle statistics, and incremental cycle tracking."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class Permutation:
    """A permutation of ``{0, ..., N-1}`` stored as its image array.

    ``image[v]`` is sigma(v).  Instances are treated as immutable snapshots.
    """

    __slots__ = ("image", "_labels", "_sizes")

    def __init__(self, image: Sequence[int] | np.ndarray):
        image = np.array(image, dtype=np.int64)
        seen = np.zeros(len(image), dtype=bool)
        if len(image) and (image.min() < 0 or image.max() >= len(image)):
            raise ValueError("image out of range")
        seen[image] = True
        if not seen.all():
            raise ValueError("image map is not a bijection")
        image.flags.writeable = False
        self.image = image
        self._labels = None
        self._sizes = None

    @classmethod
    def identity(cls, N: int) -> "Permutation":
        return cls(np.arange(N))

    @classmethod
    def from_cycles(cls, N: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        image = np.arange(N)
        for c in cycles:
            for i, v in enumerate(c):
                image[v] = c[(i + 1) % len(c)]
        return cls(image)

    def __len__(self) -> int:
        return len(self.image)

    def __call__(self, v: int) -> int:
        return int(self.image[v])

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.image, other.image)

    def __hash__(self) -> int:
        return hash(self.image.tobytes())

    def __repr__(self) -> str:
        cyc = [c for c in self.cycles() if len(c) > 1]
        body = "".join("(" + " ".join(map(str, c)) + ")" for c in cyc) or "id"
        return f"Permutation[{len(self)}]{body}"

    def key(self) -> tuple[int, ...]:
        return tuple(int(i) for i in self.image)

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.image)
        inv[self.image] = np.arange(len(self.image))
        return Permutation(inv)

    def then_transpose(self, u: int, w: int) -> "Permutation":
        """Return ``(u w) o self``."""
        image = self.image.copy()
        iu, iw = image == u, image == w
        image[iu], image[iw] = w, u
        return Permutation(image)

    # -- cycle structure ---------------------------------------------------

    def _build_index(self) -> None:
        N = len(self.image)
        labels = np.full(N, -1, dtype=np.int64)
        sizes = []
        img = self.image.tolist()
        for start in range(N):
            if labels[start] >= 0:
                continue
            cid = len(sizes)
            v, size = start, 0
            while labels[v] < 0:
                labels[v] = cid
                v = img[v]
                size += 1
            sizes.append(size)
        self._labels = labels
        self._sizes = np.array(sizes, dtype=np.int64)

    @property
    def cycle_labels(self) -> np.ndarray:
        """Cycle id of each vertex (cycles numbered by smallest member)."""
        if self._labels is None:
            self._build_index()
        return self._labels

    @property
    def cycle_sizes(self) -> np.ndarray:
        if self._sizes is None:
            self._build_index()
        return self._sizes

    def cycles(self) -> list[list[int]]:
        out = []
        img = self.image
        for start in np.flatnonzero(_first_members(self.cycle_labels)):
            c = [int(start)]
            v = int(img[start])
            while v != start:
                c.append(v)
                v = int(img[v])
            out.append(c)
        return out

    def cycle_count(self, include_fixed: bool = True) -> int:
        sizes = self.cycle_sizes
        return int(len(sizes) if include_fixed else np.count_nonzero(sizes > 1))

    def same_cycle(self, u: int, w: int) -> bool:
        labels = self.cycle_labels
        return bool(labels[u] == labels[w])

    def cycle_size_of(self, v: int) -> int:
        return int(self.cycle_sizes[self.cycle_labels[v]])

    def orbit(self, v: int) -> list[int]:
        """``[v, sigma(v), sigma^2(v), ...]`` up to (not including) the return to v."""
        out = [int(v)]
        w = int(self.image[v])
        while w != v:
            out.append(w)
            w = int(self.image[w])
        return out

    def orbit_prefix(self, v: int, length: int) -> list[int]:
        """First ``min(length, orbit size)`` elements of the orbit of v."""
        out = []
        w = int(v)
        while len(out) < length:
            out.append(w)
            w = int(self.image[w])
            if w == v:
                break
        return out


def _first_members(labels: np.ndarray) -> np.ndarray:
    """Boolean mask of the first vertex (in index order) of each cycle."""
    _, first = np.unique(labels, return_index=True)
    mask = np.zeros(len(labels), dtype=bool)
    mask[first] = True
    return mask


@dataclass(frozen=True)
class CycleStats:
    lengths: np.ndarray  # sorted descending, fixed points included
    count: int
    max_length: int

    def fraction_at_least(self, ell: int) -> float:
        N = int(self.lengths.sum())
        return float(self.lengths[self.lengths >= ell].sum()) / N if N else 0.0


def cycle_stats(p: Permutation) -> CycleStats:
    lengths = np.sort(p.cycle_sizes)[::-1].copy()
    return CycleStats(lengths=lengths, count=len(lengths),
                      max_length=int(lengths[0]) if len(lengths) else 0)


def fraction_in_long_cycles(p: Permutation, ell: int) -> float:
    """Fraction of vertices lying on cycles of length at least ``ell``."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    return cycle_stats(p).fraction_at_least(ell)


def cycle_stats_record(p: Permutation, n: int, beta: float, theta: float, seed,
                       thresholds: Sequence[float] = (0.01, 0.02, 0.05, 0.1)) -> dict:
    """JSON-ready cycle statistics; thresholds are fractions eps of N = n**2."""
    st = cycle_stats(p)
    N = len(p)
    frac = {str(eps): st.fraction_at_least(max(1, int(np.ceil(eps * N)))) for eps in thresholds}
    return {
        "n": n, "beta": beta, "theta": theta, "seed": seed,
        "cycle_lengths_desc": [int(x) for x in st.lengths],
        "max_cycle": st.max_length,
        "frac_ge": frac,
    }


class CycleTracker:
    """Mutable permutation under left multiplication by transpositions.

    Keeps ``nxt`` (sigma) and ``prv`` (sigma^-1) as a doubly linked cycle
    structure plus a cycle-label index.  Applying ``(a b) o sigma`` rewires two
    links in O(1); the label index is repaired by relabelling the smaller of
    the two affected cycles, found by walking both candidates in lockstep, so
    each update costs O(size of the smaller piece).
    """

    def __init__(self, perm: Permutation | int):
        if isinstance(perm, int):
            perm = Permutation.identity(perm)
        self.nxt = perm.image.tolist()
        self.prv = [0] * len(self.nxt)
        for v, w in enumerate(self.nxt):
            self.prv[w] = v
        self.label = perm.cycle_labels.tolist()
        self.size = {i: int(s) for i, s in enumerate(perm.cycle_sizes)}
        self._next_label = len(self.size)

    def __len__(self) -> int:
        return len(self.nxt)

    @property
    def num_cycles(self) -> int:
        return len(self.size)

    def same_cycle(self, a: int, b: int) -> bool:
        return self.label[a] == self.label[b]

    def cycle_size(self, v: int) -> int:
        return self.size[self.label[v]]

    def permutation(self) -> Permutation:
        return Permutation(self.nxt)

    def cycle_of(self, v: int) -> list[int]:
        out = [v]
        w = self.nxt[v]
        while w != v:
            out.append(w)
            w = self.nxt[w]
        return out

    def transpose(self, a: int, b: int) -> int:
        """Replace sigma by ``(a b) o sigma``; return +1 on a split, -1 on a merge."""
        if a == b:
            raise ValueError("transposition needs two distinct points")
        nxt, prv, label = self.nxt, self.prv, self.label
        xa, xb = prv[a], prv[b]
        nxt[xa], nxt[xb] = b, a
        prv[b], prv[a] = xa, xb
        if label[a] == label[b]:
            old = label[a]
            # walk the two new cycles (through a and through b) in lockstep
            pa, pb = nxt[a], nxt[b]
            while pa != a and pb != b:
                pa, pb = nxt[pa], nxt[pb]
            start = a if pa == a else b
            new = self._next_label
            self._next_label += 1
            count = 1
            label[start] = new
            w = nxt[start]
            while w != start:
                label[w] = new
                w = nxt[w]
                count += 1
            self.size[old] -= count
            self.size[new] = count
            return 1
        la, lb = label[a], label[b]
        keep, drop = (la, lb) if self.size[la] >= self.size[lb] else (lb, la)
        start = a if label[a] == drop else b
        label[start] = keep
        w = nxt[start]
        while label[w] == drop:
            label[w] = keep
            w = nxt[w]
        self.size[keep] += self.size.pop(drop)
        return -1
