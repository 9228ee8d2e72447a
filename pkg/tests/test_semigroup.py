from math import comb, factorial

import pytest
from hypothesis import given, settings, strategies as st

from bp2.partitions import PairPartition, double_factorial, enumerate_partitions
from bp2.semigroup import (COHOOK, EMPTY, HOOK, PAIR, Diagram, DiagramError, Token, closing_pairs,
                           compose, diagram_count, enumerate_diagrams, evaluate_word, involution,
                           multiply, parse_diagram, parse_word, permute_legs, product,
                           standard_form, underline, word_to_str)

P = PairPartition.parse


@st.composite
def diagrams(draw, max_pairs=3, max_legs=2):
    npairs = draw(st.integers(0, max_pairs))
    nl = draw(st.integers(0, max_legs))
    nr = draw(st.integers(0, max_legs))
    m = 2 * npairs + nl + nr
    pts = draw(st.permutations(range(1, m + 1)))
    pairs = tuple(sorted(tuple(sorted(pts[2 * i:2 * i + 2])) for i in range(npairs)))
    rest = pts[2 * npairs:]
    return Diagram(m, pairs, tuple(rest[:nl]), tuple(rest[nl:]))


def sector(n, max_pairs=2):
    """Diagrams with exactly n left legs and no right legs."""
    return st.integers(0, max_pairs).flatmap(lambda p: st.sampled_from(enumerate_diagrams(n, 0, p)))


def perms(n):
    return st.permutations(range(1, n + 1)).map(tuple)


# --- literals and validation

def test_literal_round_trip_and_hook_literal():
    assert str(HOOK) == "BP{1; pairs=; L=[1]; R=[]}"
    assert parse_diagram("BP{1; pairs=; L=[1]; R=[]}") == HOOK
    d = Diagram(5, ((1, 4),), (3, 2), (5,))
    assert parse_diagram(str(d)) == d


@pytest.mark.parametrize("bad", ["BP{2; pairs=(1,2); L=[1]; R=[]}", "BP{1; L=[1]}", "(1,2)",
                                 "BP{2; pairs=(1,2)x; L=[]; R=[]}"])
def test_bad_literals(bad):
    with pytest.raises(DiagramError):
        parse_diagram(bad)


@settings(max_examples=200, deadline=None)
@given(diagrams())
def test_literal_round_trip_random(d):
    assert parse_diagram(str(d)) == d


# --- product

def test_product_examples():
    assert multiply(COHOOK, HOOK) == PAIR
    assert multiply(HOOK, HOOK) == Diagram(2, (), (1, 2), ())
    assert multiply(PAIR, PAIR) == Diagram.from_partition(P("(1,2)(3,4)"))
    assert product() == EMPTY and product(HOOK) == HOOK


@settings(max_examples=500, deadline=None)
@given(diagrams(), diagrams(), diagrams())
def test_associativity(a, b, c):
    assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))


@settings(max_examples=200, deadline=None)
@given(diagrams())
def test_empty_is_identity(d):
    assert multiply(EMPTY, d) == d == multiply(d, EMPTY)


# --- involution

def test_involution_examples():
    assert involution(HOOK) == COHOOK
    assert involution(PAIR) == PAIR


@settings(max_examples=200, deadline=None)
@given(diagrams(), diagrams())
def test_involution_is_antihomomorphic_involution(a, b):
    assert involution(involution(a)) == a
    assert involution(multiply(a, b)) == multiply(involution(b), involution(a))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2).flatmap(lambda n: st.tuples(sector(n), sector(n))))
def test_closing_pairs_fast_path(ab):
    a, b = ab
    assert closing_pairs(a, b) == multiply(involution(a), b).pairs


# --- canonical form

@settings(max_examples=200, deadline=None)
@given(diagrams(), st.integers(1, 5), st.integers(0, 9))
def test_canonicalization_invariant_under_order_preserving_relabel(d, scale, shift):
    f = {x: scale * x + shift for x in range(1, d.m + 1)}
    again = Diagram.from_parts(f.values(), [(f[a], f[b]) for a, b in d.pairs],
                               [f[x] for x in d.left], [f[x] for x in d.right])
    assert again == d
    assert Diagram.from_parts(range(1, d.m + 1), d.pairs, d.left, d.right) == d


# --- underline

def test_underline_examples():
    assert underline(EMPTY) == PAIR
    assert underline(PAIR) == Diagram.from_partition(P("(1,4)(2,3)"))
    assert underline(HOOK) == Diagram(3, ((1, 3),), (2,), ())


@settings(max_examples=200, deadline=None)
@given(diagrams())
def test_underline_commutes_with_involution(d):
    assert involution(underline(d)) == underline(involution(d))


# --- leg permutations

def test_permute_legs_examples():
    hh = multiply(HOOK, HOOK)
    assert permute_legs((1, 2), hh) == hh
    assert permute_legs((2, 1), hh).left == (2, 1)
    with pytest.raises(DiagramError):
        permute_legs((1,), hh)
    with pytest.raises(DiagramError):
        permute_legs((1, 1), hh)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_permute_legs_is_a_group_action(data):
    n = data.draw(st.integers(0, 3))
    d = data.draw(diagrams(max_legs=0))
    d = Diagram(d.m + n, d.pairs, tuple(range(d.m + 1, d.m + n + 1)), ())
    pi, sigma = data.draw(perms(n)), data.draw(perms(n))
    assert permute_legs(pi, permute_legs(sigma, d)) == permute_legs(compose(pi, sigma), d)


# --- enumeration

def closed_form_count(nl, nr, p):
    m = 2 * p + nl + nr
    return comb(m, nl) * factorial(nl) * comb(m - nl, nr) * factorial(nr) * double_factorial(2 * p - 1)


@pytest.mark.parametrize("args", [(0, 0, 1), (1, 0, 0), (1, 0, 1), (2, 0, 2), (1, 1, 2), (3, 0, 1)])
def test_enumerate_diagrams_counts_and_uniqueness(args):
    ds = enumerate_diagrams(*args)
    assert len(ds) == len(set(ds)) == diagram_count(*args)
    assert diagram_count(*args) == sum(closed_form_count(args[0], args[1], p) for p in range(args[2] + 1))
    assert all(d.n_left == args[0] and d.n_right == args[1] and len(d.pairs) <= args[2] for d in ds)


def test_enumerate_diagrams_examples():
    assert enumerate_diagrams(0, 0, 1) == [EMPTY, PAIR]
    assert enumerate_diagrams(1, 0, 0) == [HOOK]
    assert len(enumerate_diagrams(1, 0, 1)) == 4
    with pytest.raises(DiagramError):
        enumerate_diagrams(-1, 0, 0)


# --- standard form

def test_standard_form_examples():
    assert word_to_str(standard_form(P("(1,2)"))) == "COHOOK HOOK"
    assert word_to_str(standard_form(P("(1,4)(2,3)"))) == "COHOOK COHOOK HOOK HOOK"
    crossing = standard_form(P("(1,3)(2,4)"))
    assert sum(1 for t in crossing if t.kind == "PERM") == 1
    assert evaluate_word(crossing) == Diagram.from_partition(P("(1,3)(2,4)"))


def test_standard_form_round_trip_exhaustive_upto_8_points():
    vs = [v for n in range(0, 9, 2) for v in enumerate_partitions(n)]
    assert len(vs) == 1 + 1 + 3 + 15 + 105
    for v in vs:
        word = standard_form(v)
        assert evaluate_word(word) == Diagram.from_partition(v)
        assert sum(t.kind == "HOOK" for t in word) == sum(t.kind == "COHOOK" for t in word) == len(v)
        assert parse_word(word_to_str(word)) == word


def test_word_parser_rejects_garbage():
    with pytest.raises(DiagramError):
        parse_word("HOOK FOO")
    assert parse_word("PERM(2,1)") == (Token("PERM", (2, 1)),)
