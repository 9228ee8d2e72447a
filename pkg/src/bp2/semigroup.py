"""The *-semigroup of broken pair partitions.

A :class:`Diagram` lives on the ground set ``1..m``. Every point is either
an end of a pair, a left leg, or a right leg. ``left[i]`` is the ground
position of the left leg with rank ``i + 1`` (rank 1 is the topmost leg);
``right`` likewise. The product places the second factor to the right of
the first and joins right legs of the first with left legs of the second
rank by rank.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .partitions import Pair, PairPartition, enumerate_partitions, pairings_of


class DiagramError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Diagram:
    m: int
    pairs: tuple[Pair, ...] = ()
    left: tuple[int, ...] = ()
    right: tuple[int, ...] = ()

    def __post_init__(self):
        pts = [p for pr in self.pairs for p in pr] + list(self.left) + list(self.right)
        if sorted(pts) != list(range(1, self.m + 1)):
            raise DiagramError(f"pairs and legs must partition 1..{self.m}: {self!s}")
        if any(a >= b for a, b in self.pairs) or list(self.pairs) != sorted(self.pairs):
            raise DiagramError("pairs must be (l, r) with l < r, sorted by l")

    @classmethod
    def from_parts(cls, points: Iterable[int], pairs, left, right) -> Diagram:
        """Canonicalize a triple given on an arbitrary ordered ground set."""
        order = {x: i + 1 for i, x in enumerate(sorted(points))}
        norm = tuple(sorted((min(order[a], order[b]), max(order[a], order[b])) for a, b in pairs))
        return cls(len(order), norm, tuple(order[x] for x in left), tuple(order[x] for x in right))

    @classmethod
    def from_partition(cls, v: PairPartition) -> Diagram:
        return cls(v.n_points, v.pairs)

    @property
    def n_left(self) -> int:
        return len(self.left)

    @property
    def n_right(self) -> int:
        return len(self.right)

    def is_partition(self) -> bool:
        return not self.left and not self.right

    def to_partition(self) -> PairPartition:
        if not self.is_partition():
            raise DiagramError("diagram has legs; it is not a pair partition")
        return PairPartition(self.m, self.pairs)

    def __str__(self):
        pairs = "".join(f"({a},{b})" for a, b in self.pairs)
        left = ",".join(map(str, self.left))
        right = ",".join(map(str, self.right))
        return f"BP{{{self.m}; pairs={pairs}; L=[{left}]; R=[{right}]}}"

    def __repr__(self):
        return str(self)


_LITERAL_RE = re.compile(
    r"^\s*BP\{\s*(\d+)\s*;\s*pairs\s*=\s*([^;]*);\s*L\s*=\s*\[([^\]]*)\]\s*;\s*R\s*=\s*\[([^\]]*)\]\s*\}\s*$"
)


def _int_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    return tuple(int(x) for x in text.split(",")) if text else ()


def parse_diagram(text: str) -> Diagram:
    m = _LITERAL_RE.match(text)
    if not m:
        raise DiagramError(f"unparseable diagram literal: {text!r}")
    size = int(m.group(1))
    pairs_text = m.group(2).strip()
    found = re.findall(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)", pairs_text)
    if re.sub(r"\(\s*\d+\s*,\s*\d+\s*\)", "", pairs_text).strip():
        raise DiagramError(f"unparseable pairs in diagram literal: {text!r}")
    pairs = tuple(sorted((min(int(a), int(b)), max(int(a), int(b))) for a, b in found))
    return Diagram(size, pairs, _int_list(m.group(3)), _int_list(m.group(4)))


EMPTY = Diagram(0)
HOOK = Diagram(1, (), (1,), ())       # d0, the left hook
COHOOK = Diagram(1, (), (), (1,))     # d0*, the right hook
PAIR = Diagram(2, ((1, 2),))          # p = d0* . d0


def multiply(d1: Diagram, d2: Diagram) -> Diagram:
    m1 = d1.m
    k = min(len(d1.right), len(d2.left))
    pairs = list(d1.pairs)
    pairs += [(a + m1, b + m1) for a, b in d2.pairs]
    pairs += [(d1.right[i], d2.left[i] + m1) for i in range(k)]
    pairs.sort()
    left = d1.left + tuple(x + m1 for x in d2.left[k:])
    right = tuple(x + m1 for x in d2.right) + d1.right[k:]
    return Diagram(m1 + d2.m, tuple(pairs), left, right)


def product(*ds: Diagram) -> Diagram:
    out = EMPTY
    for d in ds:
        out = multiply(out, d)
    return out


def involution(d: Diagram) -> Diagram:
    m = d.m
    pairs = tuple(sorted((m + 1 - b, m + 1 - a) for a, b in d.pairs))
    return Diagram(m, pairs, tuple(m + 1 - x for x in d.right), tuple(m + 1 - x for x in d.left))


def underline(d: Diagram) -> Diagram:
    """Wrap the diagram in one new pair embracing every point."""
    pairs = ((1, d.m + 2),) + tuple((a + 1, b + 1) for a, b in d.pairs)
    return Diagram(d.m + 2, tuple(sorted(pairs)),
                   tuple(x + 1 for x in d.left), tuple(x + 1 for x in d.right))


def permute_legs(perm: Sequence[int], d: Diagram) -> Diagram:
    """Send the left leg of rank i to rank ``perm[i-1]``."""
    n = len(perm)
    if n != len(d.left):
        raise DiagramError(f"permutation of {n} points acting on {len(d.left)} left legs")
    if sorted(perm) != list(range(1, n + 1)):
        raise DiagramError(f"not a permutation: {tuple(perm)}")
    left = [0] * n
    for i, pos in enumerate(d.left):
        left[perm[i] - 1] = pos
    return Diagram(d.m, d.pairs, tuple(left), d.right)


def compose(p: Sequence[int], s: Sequence[int]) -> tuple[int, ...]:
    """(p o s)(i) = p(s(i)) in one-line notation."""
    return tuple(p[s[i] - 1] for i in range(len(s)))


def closing_pairs(d1: Diagram, d2: Diagram) -> tuple[Pair, ...]:
    """Pairs of ``d1* . d2`` for legs-only-on-the-left diagrams with equal leg counts.

    Fast path for Gram entries; equals ``multiply(involution(d1), d2).pairs``.
    """
    m1 = d1.m
    pairs = [(m1 + 1 - b, m1 + 1 - a) for a, b in d1.pairs]
    pairs += [(a + m1, b + m1) for a, b in d2.pairs]
    pairs += [(m1 + 1 - x, y + m1) for x, y in zip(d1.left, d2.left)]
    pairs.sort()
    return tuple(pairs)


def enumerate_diagrams(n_left: int, n_right: int, max_pairs: int) -> list[Diagram]:
    """All canonical diagrams with the given leg counts and at most ``max_pairs`` pairs.

    Ordered by pair count, then left-leg positions (in rank order), then
    right-leg positions, then the pairing.
    """
    if min(n_left, n_right, max_pairs) < 0:
        raise DiagramError("arguments must be >= 0")
    out = []
    for p in range(max_pairs + 1):
        m = 2 * p + n_left + n_right
        ground = range(1, m + 1)
        for left in itertools.permutations(ground, n_left):
            rest = [x for x in ground if x not in left]
            for right in itertools.permutations(rest, n_right):
                paired = tuple(x for x in rest if x not in right)
                for pairing in pairings_of(paired):
                    out.append(Diagram(m, tuple(sorted(pairing)), left, right))
    return out


def diagram_count(n_left: int, n_right: int, max_pairs: int) -> int:
    from math import factorial
    return sum(factorial(2 * p + n_left + n_right) // (2 ** p * factorial(p))
               for p in range(max_pairs + 1))


# --- standard form -----------------------------------------------------------

class Token(NamedTuple):
    kind: str                       # "HOOK", "COHOOK" or "PERM"
    perm: tuple[int, ...] = ()

    def __str__(self):
        if self.kind == "PERM":
            return "PERM(" + ",".join(map(str, self.perm)) + ")"
        return self.kind


def word_to_str(word: Sequence[Token]) -> str:
    return " ".join(str(t) for t in word)


def parse_word(text: str) -> tuple[Token, ...]:
    out = []
    for tok in text.split():
        if tok in ("HOOK", "COHOOK"):
            out.append(Token(tok))
        elif tok.startswith("PERM(") and tok.endswith(")"):
            out.append(Token("PERM", _int_list(tok[5:-1])))
        else:
            raise DiagramError(f"bad token {tok!r}")
    return tuple(out)


def _bring_to_top(s: int, n: int) -> tuple[int, ...]:
    """Cycle sending rank s to rank 1 and ranks 1..s-1 down by one."""
    return tuple(list(range(2, s + 1)) + [1] + list(range(s + 1, n + 1)))


def standard_form(v: PairPartition) -> tuple[Token, ...]:
    """Generator word whose right-to-left evaluation rebuilds ``v``.

    Points are consumed from the right. A right end opens a leg (HOOK),
    a left end closes its partner (COHOOK), preceded by the cycle that
    brings the partner to rank 1 when it is not already there.
    """
    partner = v.partner()
    open_legs: list[int] = []       # ground positions, rank order
    rev: list[Token] = []
    for x in range(v.n_points, 0, -1):
        if partner[x] > x:
            s = open_legs.index(partner[x]) + 1
            if s != 1:
                rev.append(Token("PERM", _bring_to_top(s, len(open_legs))))
                open_legs.insert(0, open_legs.pop(s - 1))
            rev.append(Token("COHOOK"))
            open_legs.pop(0)
        else:
            rev.append(Token("HOOK"))
            open_legs.insert(0, x)
    return tuple(reversed(rev))


def evaluate_word(word: Sequence[Token], start: Diagram = EMPTY) -> Diagram:
    """Apply tokens right to left: HOOK is d0 . x, COHOOK is d0* . x, PERM acts on left legs."""
    x = start
    for tok in reversed(word):
        if tok.kind == "HOOK":
            x = multiply(HOOK, x)
        elif tok.kind == "COHOOK":
            x = multiply(COHOOK, x)
        elif tok.kind == "PERM":
            x = permute_legs(tok.perm, x)
        else:
            raise DiagramError(f"bad token {tok!r}")
    return x


__all__ = [
    "Diagram", "DiagramError", "EMPTY", "HOOK", "COHOOK", "PAIR", "Token",
    "multiply", "product", "involution", "underline", "permute_legs", "compose",
    "closing_pairs", "enumerate_diagrams", "diagram_count", "standard_form",
    "evaluate_word", "parse_diagram", "parse_word", "word_to_str", "enumerate_partitions",
]
