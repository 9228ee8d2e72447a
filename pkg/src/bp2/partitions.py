"""Pair partitions of ordered ground sets {1..m}.

A pair partition is stored canonically: pairs ``(l, r)`` with ``l < r``,
sorted by left end, covering ``1..n_points`` exactly once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

Pair = tuple[int, int]

_PAIR_RE = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")


class PartitionError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class PairPartition:
    n_points: int
    pairs: tuple[Pair, ...]

    def __post_init__(self):
        if self.n_points < 0 or self.n_points % 2:
            raise PartitionError(f"n_points must be even and >= 0, got {self.n_points}")
        seen = set()
        for l, r in self.pairs:
            if not 1 <= l < r <= self.n_points:
                raise PartitionError(f"bad pair ({l},{r}) on {self.n_points} points")
            seen.update((l, r))
        if len(seen) != self.n_points or len(self.pairs) * 2 != self.n_points:
            raise PartitionError(f"pairs {self.pairs} do not cover 1..{self.n_points}")
        if list(self.pairs) != sorted(self.pairs):
            raise PartitionError("pairs must be sorted by left end; use PairPartition.of")

    @classmethod
    def of(cls, pairs: Sequence[Sequence[int]], n_points: int | None = None) -> PairPartition:
        """Build from pairs in any order/orientation on the ground set 1..n."""
        norm = tuple(sorted((min(a, b), max(a, b)) for a, b in pairs))
        if n_points is None:
            n_points = 2 * len(norm)
        return cls(n_points, norm)

    @classmethod
    def empty(cls) -> PairPartition:
        return cls(0, ())

    @classmethod
    def parse(cls, text: str) -> PairPartition:
        """Parse the ``(1,4)(2,3)`` literal; ``""`` and ``"()"`` are the empty partition."""
        s = text.strip()
        if s in ("", "()", "∅"):
            return cls.empty()
        pairs = []
        pos = 0
        for m in _PAIR_RE.finditer(s):
            if s[pos:m.start()].strip():
                raise PartitionError(f"unparseable partition literal: {text!r}")
            pairs.append((int(m.group(1)), int(m.group(2))))
            pos = m.end()
        if s[pos:].strip() or not pairs:
            raise PartitionError(f"unparseable partition literal: {text!r}")
        points = sorted(p for pr in pairs for p in pr)
        if points != list(range(1, len(points) + 1)):
            raise PartitionError(f"pairs overlap or leave gaps: {text!r}")
        return cls.of(pairs)

    def __len__(self):
        return len(self.pairs)

    def __str__(self):
        if not self.pairs:
            return "()"
        return "".join(f"({l},{r})" for l, r in self.pairs)

    def __repr__(self):
        return f"PairPartition({self})"

    def partner(self) -> dict[int, int]:
        out = {}
        for l, r in self.pairs:
            out[l] = r
            out[r] = l
        return out


@dataclass(frozen=True)
class BlockDecomposition:
    """Connected components of the crossing graph, as tuples of pair indices."""

    blocks: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.blocks)


def _pairings(points: tuple[int, ...]) -> Iterator[tuple[Pair, ...]]:
    if not points:
        yield ()
        return
    first, rest = points[0], points[1:]
    for i, other in enumerate(rest):
        remaining = rest[:i] + rest[i + 1:]
        for tail in _pairings(remaining):
            yield ((first, other),) + tail


@lru_cache(maxsize=None)
def _enumerate_cached(n_points: int) -> tuple[PairPartition, ...]:
    return tuple(PairPartition(n_points, tuple(sorted(p)))
                 for p in _pairings(tuple(range(1, n_points + 1))))


def enumerate_partitions(n_points: int) -> list[PairPartition]:
    """All pair partitions of {1..n_points} in lexicographic order; empty if odd."""
    if n_points < 0:
        raise PartitionError("n_points must be >= 0")
    if n_points % 2:
        return []
    return list(_enumerate_cached(n_points))


def pairings_of(points: Sequence[int]) -> Iterator[tuple[Pair, ...]]:
    """All perfect matchings of an arbitrary ordered point sequence."""
    pts = tuple(points)
    if len(pts) % 2:
        return iter(())
    return _pairings(pts)


def _cross(p: Pair, q: Pair) -> bool:
    (a, b), (c, d) = p, q
    return a < c < b < d or c < a < d < b


def crossings(v: PairPartition) -> int:
    pairs = v.pairs
    return sum(1 for i in range(len(pairs)) for j in range(i + 1, len(pairs))
               if _cross(pairs[i], pairs[j]))


def blocks(v: PairPartition) -> BlockDecomposition:
    parent = list(range(len(v.pairs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(v.pairs)):
        for j in range(i + 1, len(v.pairs)):
            if _cross(v.pairs[i], v.pairs[j]):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(v.pairs)):
        groups.setdefault(find(i), []).append(i)
    return BlockDecomposition(tuple(sorted(tuple(g) for g in groups.values())))


def block_count(v: PairPartition) -> int:
    return len(blocks(v))


@lru_cache(maxsize=1 << 20)
def pair_stats(pairs: tuple[Pair, ...]) -> tuple[int, int, int]:
    """``(pairs, blocks, crossings)`` of a canonical pair tuple, memoized."""
    m = len(pairs)
    parent = list(range(m))
    cross = 0
    for i in range(m):
        a, b = pairs[i]
        for j in range(i + 1, m):
            c, d = pairs[j]
            if c > b:
                break
            if c < b < d:
                cross += 1
                ri, rj = i, j
                while parent[ri] != ri:
                    ri = parent[ri]
                while parent[rj] != rj:
                    rj = parent[rj]
                if ri != rj:
                    parent[ri] = rj
    nblocks = sum(1 for i in range(m) if parent[i] == i)
    return m, nblocks, cross


def stats_batch(pair_tuples: Sequence[tuple[Pair, ...]]) -> list[tuple[int, int, int]]:
    """Vectorized :func:`pair_stats` for many canonical pair tuples."""
    import numpy as np

    out: list = [None] * len(pair_tuples)
    by_size: dict[int, list[int]] = {}
    for i, p in enumerate(pair_tuples):
        by_size.setdefault(len(p), []).append(i)
    for m, idx in by_size.items():
        if m == 0:
            for i in idx:
                out[i] = (0, 0, 0)
            continue
        arr = np.array([pair_tuples[i] for i in idx], dtype=np.int16).reshape(len(idx), m, 2)
        l = arr[:, :, 0]
        r = arr[:, :, 1]
        li, lj = l[:, :, None], l[:, None, :]
        ri, rj = r[:, :, None], r[:, None, :]
        cr = ((li < lj) & (lj < ri) & (ri < rj)) | ((lj < li) & (li < rj) & (rj < ri))
        ncross = cr.sum(axis=(1, 2)) // 2
        reach = cr | np.eye(m, dtype=bool)[None]
        steps = 1
        while steps < m:
            reach = np.matmul(reach.astype(np.int32), reach.astype(np.int32)) > 0
            steps *= 2
        roots = reach.argmax(axis=2) == np.arange(m)[None, :]
        nblocks = roots.sum(axis=1)
        for k, i in enumerate(idx):
            out[i] = (m, int(nblocks[k]), int(ncross[k]))
    return out


def rotate(v: PairPartition) -> PairPartition:
    """Move the last point to the front: ``(l, 2r)`` becomes ``(1, l+1)``, others shift by one."""
    if not v.pairs:
        raise PartitionError("rotate is undefined on the empty partition")
    m = v.n_points
    new = []
    for l, r in v.pairs:
        if r == m:
            new.append((1, l + 1))
        else:
            new.append((l + 1, r + 1))
    return PairPartition.of(new, m)


def from_permutation(tau: Sequence[int]) -> PairPartition:
    """Embed ``tau`` in S(n) as the pair partition {(i, 2n+1-tau(i))} on 2n points."""
    n = len(tau)
    if sorted(tau) != list(range(1, n + 1)):
        raise PartitionError(f"not a permutation of 1..{n}: {tuple(tau)}")
    return PairPartition.of([(i, 2 * n + 1 - tau[i - 1]) for i in range(1, n + 1)], 2 * n)


def nest_insert(v1: PairPartition, v2: PairPartition, k: int) -> PairPartition:
    """Insert ``v2`` as a contiguous interval right after point ``k`` of ``v1``."""
    if not 0 <= k <= v1.n_points:
        raise PartitionError(f"gap position {k} outside 0..{v1.n_points}")
    m2 = v2.n_points

    def shift(x):
        return x if x <= k else x + m2

    pairs = [(shift(a), shift(b)) for a, b in v1.pairs]
    pairs += [(a + k, b + k) for a, b in v2.pairs]
    return PairPartition.of(pairs, v1.n_points + m2)


def concatenate(v1: PairPartition, v2: PairPartition) -> PairPartition:
    return nest_insert(v1, v2, v1.n_points)


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def catalan(n: int) -> int:
    from math import comb
    return comb(2 * n, n) // (n + 1)
