"""Moments of Gaussian and Fock states and the generalized Wick product.

Positions are 1-based. A :class:`WickMonomial` on the ground ``1..N`` has
pairs on a subset P and vector labels on the complement F; it stands for
either the moment monomial M(V, f) or the Wick product Ψ(V, f), depending
on the :class:`WickExpression` it sits in.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

from .kernel import ONE, ZERO, KernelError, Scalar, SymMatrix, Matrix, dot, scalar
from .partitions import Pair
from .weights import Weight, evaluate

CREATE = "c"
ANNIHILATE = "a"


class WickError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Fresh:
    """A label orthonormal to every vector label and to every other Fresh label."""

    key: tuple

    def __str__(self):
        return "g" + ".".join(map(str, self.key))


def unit(i: int, dim: int) -> tuple[Scalar, ...]:
    """The basis vector e_i (1-based) of length ``dim``."""
    if not 1 <= i <= dim:
        raise WickError(f"e{i} does not fit in dimension {dim}")
    return tuple(ONE if k == i else ZERO for k in range(1, dim + 1))


def label_dot(a, b) -> Scalar:
    """Inner product of finitely supported vectors; the shorter one is zero-padded."""
    if isinstance(a, Fresh) or isinstance(b, Fresh):
        return ONE if a == b else ZERO
    k = min(len(a), len(b))
    return dot(a[:k], b[:k])


def label_str(x) -> str:
    if isinstance(x, Fresh):
        return str(x)
    nz = [i for i, c in enumerate(x) if c != 0]
    if len(nz) == 1 and x[nz[0]] == 1:
        return f"e{nz[0] + 1}"
    return "(" + ",".join(str(c) for c in x) + ")"


_E_RE = re.compile(r"^e(\d+)$")


def parse_label(text: str):
    """``e3`` or an explicit coordinate tuple ``(1,1/2)``; unit vectors get minimal length."""
    s = text.strip()
    m = _E_RE.match(s)
    if m:
        i = int(m.group(1))
        if i < 1:
            raise WickError("basis labels start at e1")
        return unit(i, i)
    if s[:1] in "([" and s[-1:] in ")]":
        try:
            return tuple(scalar(c) for c in s[1:-1].split(",") if c.strip())
        except KernelError as exc:
            raise WickError(f"bad label {text!r}") from exc
    raise WickError(f"bad label {text!r}; use e<i> or (x1,x2,...)")


def trim_labels(labels: Sequence) -> list:
    """Drop trailing coordinates that vanish in every vector label."""
    vecs = [x for x in labels if not isinstance(x, Fresh)]
    dim = max([i + 1 for x in vecs for i, c in enumerate(x) if c] + [0])
    return [x if isinstance(x, Fresh) else tuple(x[:dim]) for x in labels]


def pad_labels(labels: Sequence) -> list:
    """Zero-pad vector labels to a common length; Fresh labels pass through."""
    dim = max([len(x) for x in labels if not isinstance(x, Fresh)] + [0])
    return [x if isinstance(x, Fresh) else tuple(x) + (ZERO,) * (dim - len(x)) for x in labels]


# --- label assignments and monomials ------------------------------------------------

@dataclass(frozen=True, order=True)
class LabelAssignment:
    """Vector labels on an ordered set of free points.

    Labels are finitely supported vectors, stored with the minimal common
    length, so ``e1`` means the same label in every ambient dimension.
    """

    items: tuple = ()

    def __post_init__(self):
        pos = [p for p, _ in self.items]
        if pos != sorted(set(pos)):
            raise WickError("label positions must be strictly increasing")
        dims = {len(x) for _, x in self.items if not isinstance(x, Fresh)}
        if len(dims) > 1:
            raise WickError("label vectors must have equal length")

    @classmethod
    def of(cls, mapping) -> LabelAssignment:
        pairs = sorted(mapping.items() if isinstance(mapping, dict) else mapping)
        labels = trim_labels(pad_labels([lab if isinstance(lab, Fresh) else tuple(scalar(c) for c in lab)
                                         for _, lab in pairs]))
        return cls(tuple((int(p), lab) for (p, _), lab in zip(pairs, labels)))

    @classmethod
    def sequence(cls, labels: Sequence, start: int = 1) -> LabelAssignment:
        return cls.of({start + i: lab for i, lab in enumerate(labels)})

    @property
    def points(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.items)

    @property
    def labels(self) -> tuple:
        return tuple(x for _, x in self.items)

    def __getitem__(self, pos):
        for p, x in self.items:
            if p == pos:
                return x
        raise KeyError(pos)

    def __len__(self):
        return len(self.items)

    def restrict(self, points) -> LabelAssignment:
        keep = set(points)
        return LabelAssignment(tuple(it for it in self.items if it[0] in keep))

    def __str__(self):
        return " ".join(f"{p}:{label_str(x)}" for p, x in self.items)


@dataclass(frozen=True, order=True)
class WickMonomial:
    """Pairs on P and labels on F, with P and F partitioning ``1..n_points``."""

    n_points: int
    pairs: tuple[Pair, ...]
    labels: LabelAssignment

    def __post_init__(self):
        pts = [p for pr in self.pairs for p in pr] + list(self.labels.points)
        if sorted(pts) != list(range(1, self.n_points + 1)):
            raise WickError(f"pairs and labels must partition 1..{self.n_points}")
        if any(a >= b for a, b in self.pairs) or list(self.pairs) != sorted(self.pairs):
            raise WickError("pairs must be (l, r) with l < r, sorted")

    @property
    def free_points(self) -> tuple[int, ...]:
        return self.labels.points

    def __str__(self):
        pairs = "".join(f"({a},{b})" for a, b in self.pairs) or "()"
        return f"{pairs} | {self.labels}" if len(self.labels) else pairs


def parse_monomial(text: str) -> WickMonomial:
    """Parse ``(1,4) | 2:e1 3:e1``; either side may be empty (``()`` for no pairs)."""
    from .partitions import _PAIR_RE

    left, bar, right = text.partition("|")
    if not bar and ":" in left:
        left, right = "", left
    left = left.strip()
    pairs = [(int(a), int(b)) for a, b in _PAIR_RE.findall(left)]
    if _PAIR_RE.sub("", left).strip() not in ("", "()"):
        raise WickError(f"bad pairs in monomial literal {text!r}")
    labels = {}
    for tok in right.split():
        pos, _, lab = tok.partition(":")
        if not pos.isdigit() or not lab:
            raise WickError(f"bad label token {tok!r}; use <position>:<label>")
        labels[int(pos)] = parse_label(lab)
    return monomial(pairs, labels)


def monomial(pairs=(), labels=None, n_points: int | None = None) -> WickMonomial:
    """Build a monomial from pairs and a ``{position: vector}`` mapping."""
    pairs = tuple(sorted((min(a, b), max(a, b)) for a, b in pairs))
    la = labels if isinstance(labels, LabelAssignment) else LabelAssignment.of(labels or {})
    if n_points is None:
        n_points = 2 * len(pairs) + len(la)
    return WickMonomial(n_points, pairs, la)


@dataclass(frozen=True)
class WickExpression:
    """Formal sum of monomials, read as M-terms (``kind="M"``) or Ψ-terms (``kind="Psi"``)."""

    kind: str
    terms: tuple[tuple[WickMonomial, Scalar], ...]

    @classmethod
    def build(cls, kind: str, pieces) -> WickExpression:
        if kind not in ("M", "Psi"):
            raise WickError(f"unknown expression kind {kind!r}")
        acc: dict = {}
        for mono, c in pieces:
            acc[mono] = acc.get(mono, ZERO) + scalar(c)
        return cls(kind, tuple(sorted((m, c) for m, c in acc.items() if c != 0)))

    def __add__(self, other):
        if self.kind != other.kind:
            raise WickError("cannot add M- and Psi-expressions")
        return WickExpression.build(self.kind, self.terms + other.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{self.kind}[{m}]" for m, c in self.terms)


def eta(labels: LabelAssignment, pairs) -> Scalar:
    """Product of label inner products over the given pairs; 1 for no pairs."""
    pts = set(labels.points)
    out = ONE
    for a, b in pairs:
        if a not in pts or b not in pts:
            raise WickError(f"pair ({a},{b}) is not inside the free points")
        out *= label_dot(labels[a], labels[b])
    return out


def _partial_matchings(points: tuple[int, ...]) -> Iterator[tuple[Pair, ...]]:
    if not points:
        yield ()
        return
    first, rest = points[0], points[1:]
    yield from _partial_matchings(rest)
    for i, other in enumerate(rest):
        for tail in _partial_matchings(rest[:i] + rest[i + 1:]):
            yield ((first, other),) + tail


def _expand(mono: WickMonomial, sign: bool):
    for sub in _partial_matchings(mono.free_points):
        e = eta(mono.labels, sub)
        if not e:
            continue
        if sign and len(sub) % 2:
            e = -e
        used = {p for pr in sub for p in pr}
        rest = mono.labels.restrict([p for p in mono.free_points if p not in used])
        yield WickMonomial(mono.n_points, tuple(sorted(mono.pairs + sub)), rest), e


def wick_from_moments(mono: WickMonomial) -> WickExpression:
    """Ψ(V, f) expanded in moment monomials: Σ (−1)^|V'| η(V') M(V ∪ V', f on F∖P')."""
    return WickExpression.build("M", _expand(mono, True))


def moments_from_wick(mono: WickMonomial) -> WickExpression:
    """M(V, f) expanded in Wick products: Σ η(V') Ψ(V ∪ V', f on F∖P')."""
    return WickExpression.build("Psi", _expand(mono, False))


def convert(expr: WickExpression) -> WickExpression:
    """Re-express a Psi-expression in M-terms or an M-expression in Psi-terms."""
    if expr.kind == "Psi":
        kind, fn = "M", wick_from_moments
    else:
        kind, fn = "Psi", moments_from_wick
    return WickExpression.build(kind, ((m, c * c2) for mono, c in expr.terms
                                       for m, c2 in fn(mono).terms))


# --- moments ------------------------------------------------------------------------

def _weighted_pairings(labels: list, allowed=None) -> Iterator[tuple[tuple[Pair, ...], Scalar]]:
    """Pairings of positions 1..n with nonzero label product.

    ``allowed(i, j)`` may veto a pair (i < j, 0-based) before its inner product is taken.
    """
    n = len(labels)

    def rec(free: tuple[int, ...]):
        if not free:
            yield (), ONE
            return
        first, rest = free[0], free[1:]
        for k, other in enumerate(rest):
            if allowed is not None and not allowed(first, other):
                continue
            e = label_dot(labels[first], labels[other])
            if not e:
                continue
            for tail, e2 in rec(rest[:k] + rest[k + 1:]):
                yield ((first + 1, other + 1),) + tail, e * e2

    if n % 2:
        return iter(())
    return rec(tuple(range(n)))


def _as_label_list(labels) -> list:
    if isinstance(labels, LabelAssignment):
        if labels.points != tuple(range(1, len(labels) + 1)):
            raise WickError("a moment needs labels on every point 1..n")
        return list(labels.labels)
    return pad_labels([x if isinstance(x, Fresh) else tuple(scalar(c) for c in x) for x in labels])


def gaussian_moment(w: Weight, labels) -> Scalar:
    """Vacuum expectation of ω(f_1)…ω(f_n): Σ_V t(V) Π ⟨f_k, f_l⟩; zero for odd n."""
    labs = _as_label_list(labels)
    total = ZERO
    for pairs, e in _weighted_pairings(labs):
        total += e * evaluate(w, tuple(sorted(pairs)))
    return total


class Op(NamedTuple):
    kind: str       # CREATE or ANNIHILATE
    label: object

    def __str__(self):
        return f"{self.kind}:{label_str(self.label)}"


def parse_pattern(text: str) -> tuple[Op, ...]:
    """Parse ``a:e1 c:e2`` (a = annihilate, c = create)."""
    ops = []
    for tok in text.split():
        kind, _, lab = tok.partition(":")
        if kind not in (CREATE, ANNIHILATE) or not lab:
            raise WickError(f"bad pattern token {tok!r}; use a:<label> or c:<label>")
        ops.append(Op(kind, parse_label(lab)))
    labels = pad_labels([op.label for op in ops])
    return tuple(Op(op.kind, lab) for op, lab in zip(ops, labels))


def parse_field_word(text: str) -> list:
    """Parse ``w:e1 w:e2`` into a list of field labels."""
    out = []
    for tok in text.split():
        kind, _, lab = tok.partition(":")
        if kind != "w" or not lab:
            raise WickError(f"bad field token {tok!r}; use w:<label>")
        out.append(parse_label(lab))
    return pad_labels(out)


def pattern_str(pattern) -> str:
    return " ".join(str(op) for op in pattern)


def fock_moment(w: Weight, pattern: Sequence[Op]) -> Scalar:
    """⟨Ω, a^♯1(f_1)…a^♯n(f_n) Ω⟩: pairings whose left end annihilates and right end creates."""
    kinds = [op.kind for op in pattern]
    labels = pad_labels([op.label for op in pattern])
    if any(k not in (CREATE, ANNIHILATE) for k in kinds):
        raise WickError("pattern symbols must be CREATE or ANNIHILATE")

    def allowed(i, j):
        return kinds[i] == ANNIHILATE and kinds[j] == CREATE

    total = ZERO
    for pairs, e in _weighted_pairings(labels, allowed):
        total += e * evaluate(w, tuple(sorted(pairs)))
    return total


def dagger(pattern: Sequence[Op]) -> tuple[Op, ...]:
    """Adjoint of a monomial over real labels: reverse and swap creation/annihilation."""
    swap = {CREATE: ANNIHILATE, ANNIHILATE: CREATE}
    return tuple(Op(swap[op.kind], op.label) for op in reversed(pattern))


def psi_pattern(mono: WickMonomial, tag=()) -> tuple[Op, ...]:
    """Operator word of the ψ-vector: creators on F, a(g_i)…a*(g_i) on the i-th pair.

    The g_i are Fresh labels keyed by ``tag`` and the pair index.
    """
    ops: list = [None] * mono.n_points
    for p, lab in mono.labels.items:
        ops[p - 1] = Op(CREATE, lab)
    for i, (l, r) in enumerate(mono.pairs):
        g = Fresh(tuple(tag) + (i,))
        ops[l - 1] = Op(ANNIHILATE, g)
        ops[r - 1] = Op(CREATE, g)
    return tuple(ops)


def _retag(pattern, tag):
    return tuple(Op(op.kind, Fresh((tag,) + op.label.key)) if isinstance(op.label, Fresh) else op
                 for op in pattern)


def pattern_inner(w: Weight, p1, p2) -> Scalar:
    """⟨p1 Ω, p2 Ω⟩ with each pattern's Fresh labels kept private to it."""
    return fock_moment(w, dagger(_retag(p1, "bra")) + _retag(p2, "ket"))


# --- inner products of Wick products -------------------------------------------------

def _concat(m1: WickMonomial, m2: WickMonomial):
    """Ground X1 reversed followed by X2: pairs V1* ∪ V2 and the two labelled point lists."""
    n1 = m1.n_points
    pairs = [(n1 + 1 - b, n1 + 1 - a) for a, b in m1.pairs] + [(a + n1, b + n1) for a, b in m2.pairs]
    f1 = sorted((n1 + 1 - p, lab) for p, lab in m1.labels.items)
    f2 = [(p + n1, lab) for p, lab in m2.labels.items]
    return pairs, f1, f2


def wick_inner_product(w: Weight, m1: WickMonomial, m2: WickMonomial) -> Scalar:
    """⟨Ψ1 Ω, Ψ2 Ω⟩ = δ Σ over bijections F1* → F2 of η · t(V1* ∪ V2 ∪ W)."""
    if len(m1.labels) != len(m2.labels):
        return ZERO
    pairs, f1, f2 = _concat(m1, m2)
    total = ZERO

    def rec(i, remaining, acc_pairs, acc_eta):
        nonlocal total
        if i == len(f1):
            total += acc_eta * evaluate(w, tuple(sorted(pairs + acc_pairs)))
            return
        x, lx = f1[i]
        for k, (y, ly) in enumerate(remaining):
            e = label_dot(lx, ly)
            if e:
                rec(i + 1, remaining[:k] + remaining[k + 1:], acc_pairs + [(x, y)], acc_eta * e)

    rec(0, f2, [], ONE)
    return total


def moment_inner_product(w: Weight, m1: WickMonomial, m2: WickMonomial) -> Scalar:
    """⟨M1 Ω, M2 Ω⟩: sum over every pairing of the free points of X1* + X2."""
    pairs, f1, f2 = _concat(m1, m2)
    free = f1 + f2
    labels = [lab for _, lab in free]
    total = ZERO
    for sub, e in _weighted_pairings(labels):
        extra = [(free[a - 1][0], free[b - 1][0]) for a, b in sub]
        extra = [(min(a, b), max(a, b)) for a, b in extra]
        total += e * evaluate(w, tuple(sorted(pairs + extra)))
    return total


def expression_inner_product(w: Weight, e1: WickExpression, e2: WickExpression) -> Scalar:
    """Bilinear extension of the matching inner product over two expressions of one kind."""
    if e1.kind != e2.kind:
        raise WickError("expressions must have the same kind")
    ip = wick_inner_product if e1.kind == "Psi" else moment_inner_product
    return sum((c1 * c2 * ip(w, m1, m2) for m1, c1 in e1.terms for m2, c2 in e2.terms), ZERO)


def gaussian_gram(w: Weight, monomials: Sequence[WickMonomial]) -> SymMatrix:
    """Gram matrix of the vectors Ψ(V_a, f_a) Ω."""
    n = len(monomials)
    rows = [[ZERO] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            rows[a][b] = rows[b][a] = wick_inner_product(w, monomials[a], monomials[b])
    return SymMatrix.of(Matrix._raw([tuple(r) for r in rows], n))


def fock_gram(w: Weight, patterns: Sequence[Sequence[Op]]) -> SymMatrix:
    """Gram matrix of the vectors p_a Ω computed from Fock-state moments."""
    n = len(patterns)
    rows = [[ZERO] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            rows[a][b] = rows[b][a] = pattern_inner(w, patterns[a], patterns[b])
    return SymMatrix.of(Matrix._raw([tuple(r) for r in rows], n))


def wick_family(dim: int, max_pairs: int, max_free: int) -> list[WickMonomial]:
    """Every monomial with at most ``max_pairs`` pairs, ``max_free`` free points, labels e_1..e_dim."""
    from itertools import combinations, product as iproduct

    from .partitions import pairings_of

    out = []
    for p in range(max_pairs + 1):
        for f in range(max_free + 1):
            n = 2 * p + f
            for free in combinations(range(1, n + 1), f):
                rest = [x for x in range(1, n + 1) if x not in free]
                for pairing in pairings_of(rest):
                    for cols in iproduct(range(1, dim + 1), repeat=f):
                        labels = {x: unit(c, dim) for x, c in zip(free, cols)}
                        out.append(monomial(pairing, labels, n))
    return out


__all__ = [
    "CREATE", "ANNIHILATE", "WickError", "Fresh", "unit", "label_dot", "label_str", "parse_label",
    "LabelAssignment", "WickMonomial", "monomial", "parse_monomial", "WickExpression", "eta", "wick_from_moments",
    "moments_from_wick", "convert", "gaussian_moment", "Op", "parse_pattern", "parse_field_word",
    "pattern_str", "fock_moment", "dagger", "psi_pattern", "pattern_inner", "wick_inner_product",
    "moment_inner_product", "expression_inner_product", "gaussian_gram", "fock_gram", "wick_family",
]
