import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from bp2.partitions import (PairPartition, PartitionError, block_count, blocks, catalan,
                            concatenate, crossings, double_factorial, enumerate_partitions,
                            from_permutation, nest_insert, pair_stats, rotate, stats_batch)

P = PairPartition.parse


# --- oracles: brute force from the definitions

def brute_matchings(n):
    """Every perfect matching of 1..n, via permutations (independent of the library)."""
    seen = set()
    for perm in itertools.permutations(range(1, n + 1)):
        seen.add(tuple(sorted(tuple(sorted(perm[i:i + 2])) for i in range(0, n, 2))))
    return sorted(seen)


def brute_crossings(pairs):
    return sum(1 for (a, b), (c, d) in itertools.combinations(pairs, 2) if a < c < b < d or c < a < d < b)


def brute_blocks(pairs):
    """Components of the crossing graph by depth-first search."""
    todo, comps = set(range(len(pairs))), 0
    while todo:
        comps += 1
        stack = [todo.pop()]
        while stack:
            i = stack.pop()
            for j in list(todo):
                (a, b), (c, d) = sorted([pairs[i], pairs[j]])
                if a < c < b < d:
                    todo.remove(j)
                    stack.append(j)
    return comps


partitions_upto_10 = st.integers(0, 5).flatmap(
    lambda k: st.sampled_from(enumerate_partitions(2 * k)))


# --- literals

def test_parse_and_print_round_trip():
    v = P("(2,4)(1,3)")
    assert v.pairs == ((1, 3), (2, 4)) and str(v) == "(1,3)(2,4)"
    assert P("()") == PairPartition.empty() and str(PairPartition.empty()) == "()"


@pytest.mark.parametrize("bad", ["(1,2", "(1,2)(2,3)", "(1,3)", "(1,2)x", "(2,1)(3,3)"])
def test_parse_rejects(bad):
    with pytest.raises(PartitionError):
        P(bad)


def test_constructor_validates():
    with pytest.raises(PartitionError):
        PairPartition(3, ((1, 2),))
    with pytest.raises(PartitionError):
        PairPartition(4, ((3, 4), (1, 2)))


# --- enumeration

@pytest.mark.parametrize("n, count", [(2, 1), (4, 3), (8, 105)])
def test_enumerate_counts(n, count):
    assert len(enumerate_partitions(n)) == count


def test_enumerate_small_examples():
    assert enumerate_partitions(2) == [P("(1,2)")]
    assert enumerate_partitions(0) == [PairPartition.empty()]
    assert enumerate_partitions(5) == []
    with pytest.raises(PartitionError):
        enumerate_partitions(-2)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_enumerate_matches_brute_force_in_lexicographic_order(n):
    got = [v.pairs for v in enumerate_partitions(n)]
    assert got == brute_matchings(n)


@pytest.mark.parametrize("k", range(1, 7))
def test_double_factorial_and_catalan_counts(k):
    vs = enumerate_partitions(2 * k)
    assert len(vs) == double_factorial(2 * k - 1)
    assert sum(1 for v in vs if crossings(v) == 0) == catalan(k)


# --- statistics

@pytest.mark.parametrize("lit, cr, bl", [
    ("(1,2)(3,4)", 0, 2), ("(1,3)(2,4)", 1, 1), ("(1,4)(2,5)(3,6)", 3, 1), ("(1,4)(2,3)", 0, 2),
])
def test_stats_examples(lit, cr, bl):
    v = P(lit)
    assert crossings(v) == cr and block_count(v) == bl


def test_block_decomposition_partitions_the_pairs():
    v = P("(1,3)(2,4)(5,6)(7,9)(8,10)")
    dec = blocks(v)
    assert sorted(i for b in dec.blocks for i in b) == list(range(len(v)))
    assert len(dec) == 3


@settings(max_examples=300, deadline=None)
@given(partitions_upto_10)
def test_stats_match_oracle(v):
    assert crossings(v) == brute_crossings(v.pairs)
    assert block_count(v) == brute_blocks(v.pairs)
    assert pair_stats(v.pairs) == (len(v), block_count(v), crossings(v))


@settings(max_examples=300, deadline=None)
@given(partitions_upto_10)
def test_noncrossing_iff_all_blocks_singletons(v):
    assert (crossings(v) == 0) == (block_count(v) == len(v))


def test_stats_batch_matches_scalar_path():
    vs = [v.pairs for n in range(0, 11, 2) for v in enumerate_partitions(n)]
    assert stats_batch(vs) == [pair_stats(p) for p in vs]


# --- rotation

@pytest.mark.parametrize("lit, want", [
    ("(1,2)", "(1,2)"), ("(1,3)(2,4)", "(1,3)(2,4)"), ("(1,2)(3,4)", "(1,4)(2,3)"),
])
def test_rotate_examples(lit, want):
    assert rotate(P(lit)) == P(want)


def test_rotate_rejects_empty():
    with pytest.raises(PartitionError):
        rotate(PairPartition.empty())


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_rotate_preserves_stats_and_has_full_period(n):
    for v in enumerate_partitions(n):
        r = rotate(v)
        assert (crossings(r), block_count(r)) == (crossings(v), block_count(v))
        x = v
        for _ in range(n):
            x = rotate(x)
        assert x == v


# --- permutations and insertion

@pytest.mark.parametrize("tau, want", [((1,), "(1,2)"), ((1, 2), "(1,4)(2,3)"), ((2, 1), "(1,3)(2,4)")])
def test_from_permutation_examples(tau, want):
    assert from_permutation(tau) == P(want)


@pytest.mark.parametrize("n", range(1, 6))
def test_identity_permutation_gives_rainbow(n):
    v = from_permutation(tuple(range(1, n + 1)))
    assert v.pairs == tuple((i, 2 * n + 1 - i) for i in range(1, n + 1))


def test_from_permutation_rejects_non_permutation():
    with pytest.raises(PartitionError):
        from_permutation((1, 1))


@pytest.mark.parametrize("v1, v2, k, want", [
    ("(1,2)", "(1,2)", 1, "(1,4)(2,3)"),
    ("(1,2)", "(1,2)", 2, "(1,2)(3,4)"),
    ("(1,3)(2,4)", "(1,2)", 2, "(1,5)(2,6)(3,4)"),
])
def test_nest_insert_examples(v1, v2, k, want):
    assert nest_insert(P(v1), P(v2), k) == P(want)


def test_nest_insert_rejects_bad_gap():
    with pytest.raises(PartitionError):
        nest_insert(P("(1,2)"), P("(1,2)"), 3)


def test_nest_insert_keeps_interval_and_adds_crossings():
    rng = random.Random(7)
    for _ in range(200):
        v1 = rng.choice(enumerate_partitions(rng.choice([2, 4, 6])))
        v2 = rng.choice(enumerate_partitions(rng.choice([2, 4])))
        k = rng.randint(0, v1.n_points)
        u = nest_insert(v1, v2, k)
        inner = [p for p in u.pairs if k < p[0] and p[1] <= k + v2.n_points]
        assert len(inner) == len(v2)
        assert crossings(u) == crossings(v1) + crossings(v2)
    assert concatenate(P("(1,2)"), P("(1,2)")) == P("(1,2)(3,4)")
