"""Weight functions on pair partitions and their extension to diagrams."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .kernel import ONE, ZERO, KernelError, Scalar, scalar
from .partitions import PairPartition, enumerate_partitions, nest_insert, pair_stats, rotate
from .semigroup import Diagram

BOSONIC_TAG = "BOSONIC"
FREE_TAG = "FREE"
FERMIONIC_TAG = "FERMIONIC"
BLOCK_Q_TAG = "BLOCK_Q"
CROSSING_Q_TAG = "CROSSING_Q"
CUSTOM_TAG = "CUSTOM"


class WeightError(ValueError):
    pass


@dataclass(frozen=True)
class Weight:
    """A named weight t on pair partitions.

    ``multiplicative`` and ``tracial`` are capability flags: True for the
    built-in families, None (unknown) for custom functions. They are hints;
    the ``is_*_upto`` checks verify them.
    """

    family: str
    q: Scalar | None = None
    name: str = ""
    func: Callable | None = field(default=None, compare=False, repr=False)
    multiplicative: bool | None = True
    tracial: bool | None = True

    def __str__(self):
        return self.literal

    @property
    def literal(self) -> str:
        if self.family == BLOCK_Q_TAG:
            return f"q:{self.q}"
        if self.family == CROSSING_Q_TAG:
            return f"qcr:{self.q}"
        if self.family == CUSTOM_TAG:
            return f"custom:{self.name}"
        return self.family.lower()

    @property
    def stats_based(self) -> bool:
        return self.family != CUSTOM_TAG

    def from_stats(self, npairs: int, nblocks: int, ncross: int) -> Scalar:
        """Value of the weight from (pairs, blocks, crossings)."""
        fam = self.family
        if fam == BOSONIC_TAG:
            return ONE
        if fam == FREE_TAG:
            return ONE if ncross == 0 else ZERO
        if fam == FERMIONIC_TAG:
            return -ONE if ncross % 2 else ONE
        if fam == BLOCK_Q_TAG:
            q = self.q
            if q >= 0:
                return q ** (npairs - nblocks)
            val = (-q) ** (npairs - nblocks)
            return -val if ncross % 2 else val
        if fam == CROSSING_Q_TAG:
            return self.q ** ncross
        raise WeightError(f"weight {self.literal} is not a function of partition statistics")

    def __call__(self, v) -> Scalar:
        return evaluate(self, v)


BOSONIC = Weight(BOSONIC_TAG)
FREE = Weight(FREE_TAG)
FERMIONIC = Weight(FERMIONIC_TAG)


def block_q(q) -> Weight:
    """t_q(V) = q^(|V| - |B(V)|) for q >= 0, and t_|q| times the crossing sign for q < 0."""
    q = scalar(q)
    if not -1 <= q <= 1:
        raise WeightError(f"BLOCK_Q parameter must lie in [-1, 1], got {q}")
    return Weight(BLOCK_Q_TAG, q)


def crossing_q(q) -> Weight:
    """t(V) = q^crossings(V). Any rational q is allowed; only |q| <= 1 is positive."""
    return Weight(CROSSING_Q_TAG, scalar(q))


def custom(name: str, func: Callable[[PairPartition], object],
           multiplicative: bool | None = None, tracial: bool | None = None) -> Weight:
    """Wrap ``func(V)``; it is never called on the empty partition, whose value is 1."""
    return Weight(CUSTOM_TAG, None, name, func, multiplicative, tracial)


def parse_weight(text: str) -> Weight:
    """Parse ``bosonic``, ``free``, ``fermionic``, ``q:<r>`` or ``qcr:<r>``."""
    s = text.strip().lower()
    if s in ("bosonic", "free", "fermionic"):
        return {"bosonic": BOSONIC, "free": FREE, "fermionic": FERMIONIC}[s]
    for prefix, make in (("qcr:", crossing_q), ("q:", block_q)):
        if s.startswith(prefix):
            try:
                return make(s[len(prefix):])
            except KernelError as exc:
                raise WeightError(f"bad weight parameter in {text!r}") from exc
    raise WeightError(f"unknown weight {text!r}; use bosonic, free, fermionic, q:<r> or qcr:<r>")


def _pairs_of(v) -> tuple:
    if isinstance(v, PairPartition):
        return v.pairs
    if isinstance(v, Diagram):
        return v.to_partition().pairs
    return tuple(v)


def evaluate(w: Weight, v) -> Scalar:
    """t(V); the empty partition has weight 1 for every weight."""
    pairs = _pairs_of(v)
    if not pairs:
        return ONE
    if w.family == CUSTOM_TAG:
        part = v if isinstance(v, PairPartition) else PairPartition(2 * len(pairs), pairs)
        return scalar(w.func(part))
    return w.from_stats(*pair_stats(pairs))


def evaluate_hat(w: Weight, d: Diagram) -> Scalar:
    """t(V) when the diagram has no legs, else 0."""
    if not d.is_partition():
        return ZERO
    return evaluate(w, d.pairs)


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    checked: int
    counterexample: dict | None = None

    def __bool__(self):
        return self.holds

    def to_json(self):
        return "pass" if self.holds else self.counterexample


def _check_size(n_points):
    if n_points < 0 or n_points > 12:
        raise WeightError("n_points must lie in 0..12")


def is_multiplicative_upto(w: Weight, n_points: int) -> CheckResult:
    """Exhaustively test t(V1 with V2 inserted after point k) = t(V1) t(V2).

    V1 and V2 are nonempty and the union has at most ``n_points`` points.
    Cases are visited by total size first, so a counterexample is minimal.
    """
    _check_size(n_points)
    checked = 0
    for total in range(4, n_points + 1, 2):
        for m1 in range(2, total - 1, 2):
            for v1 in enumerate_partitions(m1):
                t1 = evaluate(w, v1)
                for v2 in enumerate_partitions(total - m1):
                    t2 = evaluate(w, v2)
                    for k in range(m1 + 1):
                        u = nest_insert(v1, v2, k)
                        tu = evaluate(w, u)
                        checked += 1
                        if tu != t1 * t2:
                            return CheckResult(False, checked, {
                                "V1": str(v1), "V2": str(v2), "k": k, "union": str(u),
                                "t_union": str(tu), "t1_t2": str(t1 * t2)})
    return CheckResult(True, checked)


def is_rotation_invariant_upto(w: Weight, n_points: int) -> CheckResult:
    """Exhaustively test t(V) = t(rotate(V)) for all V with at most ``n_points`` points."""
    _check_size(n_points)
    checked = 0
    for m in range(2, n_points + 1, 2):
        for v in enumerate_partitions(m):
            a, b = evaluate(w, v), evaluate(w, rotate(v))
            checked += 1
            if a != b:
                return CheckResult(False, checked, {
                    "V": str(v), "rotated": str(rotate(v)), "t_V": str(a), "t_rotated": str(b)})
    return CheckResult(True, checked)


__all__ = [
    "Weight", "WeightError", "BOSONIC", "FREE", "FERMIONIC", "block_q", "crossing_q", "custom",
    "parse_weight", "evaluate", "evaluate_hat", "CheckResult", "is_multiplicative_upto",
    "is_rotation_invariant_upto",
]
