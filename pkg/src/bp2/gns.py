"""Finite GNS models over diagram bases.

A sector is the span of χ(d)ξ for diagrams d with ``n`` left legs, no right
legs and at most ``max_pairs`` pairs, with inner product t̂(d1*·d2). Vectors
are written in quotient coordinates: coefficients on a set of selected basis
diagrams whose Gram block (the *metric*) is positive definite.

Operators built here (j, j*, U(π), θ, χ(d)) are exact whenever the images
they need stay inside the truncation; otherwise they raise
:class:`TruncationError` rather than silently project, except for θ whose
truncated spectrum is reported together with its leak.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .kernel import (ONE, ZERO, Matrix, PSDCertificate, Scalar, SymMatrix, dot, inverse,
                     lazy_pivoted_ldlt, ldlt_psd_certificate, scalar, symmetric_eigs)
from .partitions import pair_stats, stats_batch
from .semigroup import (COHOOK, EMPTY, HOOK, Diagram, Token, closing_pairs, enumerate_diagrams,
                        involution, multiply, permute_legs, standard_form, underline)
from .weights import BLOCK_Q_TAG, CheckResult, Weight, evaluate, is_rotation_invariant_upto


class GNSError(ValueError):
    pass


class TruncationError(GNSError):
    pass


class NotPositiveError(GNSError):
    pass


# --- cached sector combinatorics ------------------------------------------------------

@lru_cache(maxsize=None)
def sector_basis(n: int, max_pairs: int) -> tuple[Diagram, ...]:
    return tuple(enumerate_diagrams(n, 0, max_pairs))


@lru_cache(maxsize=32)
def _gram_index(n: int, max_pairs: int):
    """Distinct partitions d_i*·d_j (as pair tuples), their statistics, and the index matrix."""
    basis = sector_basis(n, max_pairs)
    size = len(basis)
    keys: dict = {}
    idx = np.zeros((size, size), dtype=np.int64)
    for i, a in enumerate(basis):
        row = idx[i]
        for j in range(i, size):
            k = closing_pairs(a, basis[j])
            x = keys.get(k)
            if x is None:
                x = keys[k] = len(keys)
            row[j] = x
    iu = np.triu_indices(size, 1)
    idx[(iu[1], iu[0])] = idx[iu]
    key_list = list(keys)
    return key_list, stats_batch(key_list), idx


def inner_hat(w: Weight, d1: Diagram, d2: Diagram) -> Scalar:
    """⟨χ(d1)ξ, χ(d2)ξ⟩ = t̂(d1*·d2) for diagrams without right legs."""
    if d1.n_right or d2.n_right:
        raise GNSError("sector vectors have no right legs")
    if d1.n_left != d2.n_left:
        return ZERO
    return evaluate(w, closing_pairs(d1, d2))


def gram_matrix(w: Weight, n: int, max_pairs: int) -> SymMatrix:
    """Exact Gram matrix of the sector basis."""
    keys, stats, idx = _gram_index(n, max_pairs)
    if w.stats_based:
        memo: dict = {}
        vals = []
        for st in stats:
            v = memo.get(st)
            if v is None:
                v = memo[st] = w.from_stats(*st)
            vals.append(v)
    else:
        vals = [evaluate(w, k) for k in keys]
    table = np.empty(len(vals), dtype=object)
    table[:] = vals
    rows = table[idx].tolist()
    return SymMatrix.of(Matrix._raw([tuple(r) for r in rows], len(rows)))


# --- Gram models ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GramModel:
    """A truncated sector V_n with its quotient coordinates.

    ``certificate`` is the exact LDLᵀ outcome when the full Gram matrix was
    built; lazily built models carry ``certificate=None`` and rely on the
    weight being positive (their pivots are still exact).
    """

    weight: Weight
    n_left: int
    max_pairs: int
    basis: tuple[Diagram, ...]
    gram: SymMatrix | None
    certificate: PSDCertificate | None
    selected: tuple[int, ...] = ()
    metric: Matrix | None = None
    metric_inv: Matrix | None = None
    reduction: tuple = ()
    complete: bool = False
    index: dict = field(default_factory=dict, repr=False)

    @property
    def positive(self) -> bool:
        return self.metric is not None

    @property
    def rank(self) -> int:
        return len(self.selected)

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def selected_diagrams(self) -> tuple[Diagram, ...]:
        return tuple(self.basis[i] for i in self.selected)

    def _require_positive(self):
        if not self.positive:
            raise NotPositiveError(f"{self.weight} is not positive on sector n={self.n_left}, "
                                   f"max_pairs={self.max_pairs}")

    def project(self, d: Diagram) -> tuple[tuple[Scalar, ...], Scalar]:
        """Coordinates of the orthogonal projection of χ(d)ξ, and the squared residual norm."""
        self._require_positive()
        i = self.index.get(d)
        if i is not None and self.complete:
            return self.reduction[i], ZERO
        g = [inner_hat(self.weight, s, d) for s in self.selected_diagrams]
        c = self.metric_inv @ g
        return c, inner_hat(self.weight, d, d) - dot(g, c)

    def coords(self, d: Diagram) -> tuple[Scalar, ...]:
        """Exact quotient coordinates of χ(d)ξ; fails if it leaves the truncated span."""
        c, res = self.project(d)
        if res != 0:
            raise TruncationError(
                f"{d} (with {len(d.pairs)} pairs) is not in the span of sector n={self.n_left} "
                f"truncated at max_pairs={self.max_pairs}")
        return c

    def inner(self, x: Sequence, y: Sequence) -> Scalar:
        return self.metric.bilinear(x, y)

    def norm2(self, x: Sequence) -> Scalar:
        return self.metric.quad(x)


def _finish(w, n, max_pairs, basis, gram, cert, order, cols, complete) -> GramModel:
    index = {d: i for i, d in enumerate(basis)}
    if order is None:
        return GramModel(w, n, max_pairs, basis, gram, cert, index=index)
    sel = tuple(sorted(order))
    if cols is None:
        cols = {s: gram.column(s) for s in sel}
    metric = Matrix._raw([tuple(cols[b][a] for b in sel) for a in sel], len(sel))
    minv = inverse(metric) if sel else metric
    red_rows = [minv @ [cols[s][i] for s in sel] for i in range(len(basis))] if sel else \
        [()] * len(basis)
    return GramModel(w, n, max_pairs, basis, gram, cert, sel, metric, minv, tuple(red_rows),
                     complete, index)


def gram_model(w: Weight, n_left: int, max_pairs: int, certify: bool = True) -> GramModel:
    """Sector model over ``enumerate_diagrams(n_left, 0, max_pairs)``.

    With ``certify`` the full Gram matrix is built and certified by exact
    LDLᵀ; an indefinite result is returned (``positive`` is False and the
    certificate holds the witness). Without it, only pivot columns are
    computed and positivity of the weight is taken for granted.
    """
    if n_left < 0 or max_pairs < 0:
        raise GNSError("n_left and max_pairs must be >= 0")
    basis = sector_basis(n_left, max_pairs)
    if certify:
        g = gram_matrix(w, n_left, max_pairs)
        cert = ldlt_psd_certificate(g)
        if not cert.psd:
            return _finish(w, n_left, max_pairs, basis, g, cert, None, None, False)
        return _finish(w, n_left, max_pairs, basis, g, cert, cert.order, None, True)
    diag = [inner_hat(w, d, d) for d in basis]
    cols: dict = {}

    def column(i):
        c = [inner_hat(w, d, basis[i]) for d in basis]
        cols[i] = tuple(c)
        return c

    part = lazy_pivoted_ldlt(diag, column)
    if any(r < 0 for r in part.residual):
        raise NotPositiveError(f"{w} has a negative residual on sector n={n_left}")
    return _finish(w, n_left, max_pairs, basis, None, None, part.order, cols, part.complete)


# --- operators between sectors -------------------------------------------------------

def _columns(model: GramModel, images) -> Matrix:
    cols = [model.coords(d) for d in images]
    return Matrix.from_columns(cols, model.rank) if cols else Matrix._raw([()] * model.rank, 0)


def j_matrix(src: GramModel, dst: GramModel) -> Matrix:
    """Left multiplication by the hook d0, from sector n to sector n+1."""
    if dst.n_left != src.n_left + 1:
        raise GNSError("j maps sector n to sector n+1")
    images = [multiply(HOOK, d) for d in src.selected_diagrams]
    need = max((len(d.pairs) for d in images), default=0)
    if need > dst.max_pairs:
        raise TruncationError(f"j needs the target truncated at max_pairs >= {need}")
    return _columns(dst, images)


def j_star_matrix(src: GramModel, dst: GramModel) -> Matrix:
    """Left multiplication by the cohook d0*, from sector n+1 to sector n.

    This equals the adjoint of j in the quotient metric; it closes the
    rank-1 leg, adding a pair, so the target truncation must absorb the image.
    """
    if src.n_left != dst.n_left + 1:
        raise GNSError("j* maps sector n+1 to sector n")
    images = [multiply(COHOOK, d) for d in src.selected_diagrams]
    try:
        return _columns(dst, images)
    except TruncationError as exc:
        raise TruncationError(f"{exc}; j* images need a larger target max_pairs") from None


def metric_adjoint(op: Matrix, src: GramModel, dst: GramModel) -> Matrix:
    """Adjoint of ``op: src -> dst`` with respect to the two quotient metrics."""
    return src.metric_inv @ op.T @ dst.metric


def sym_rep(model: GramModel, perm: Sequence[int]) -> Matrix:
    """U(π) on the sector: the leg of rank i moves to rank π(i)."""
    if len(perm) != model.n_left:
        raise GNSError(f"permutation of {len(perm)} points on a sector with {model.n_left} legs")
    return _columns(model, [permute_legs(perm, d) for d in model.selected_diagrams])


def embed_perm(perm: Sequence[int]) -> tuple[int, ...]:
    """ι(π): the new rank-1 leg added by j stays fixed, old ranks shift by one."""
    return (1,) + tuple(p + 1 for p in perm)


def chi_matrix(d: Diagram, src: GramModel, dst: GramModel) -> Matrix:
    """χ(d) from sector ``src`` into sector ``dst``; exact or TruncationError."""
    images = [multiply(d, s) for s in src.selected_diagrams]
    for im in images:
        if im.n_right or im.n_left != dst.n_left:
            raise GNSError(f"{d} does not map sector {src.n_left} into sector {dst.n_left}")
    return _columns(dst, images)


def j_isometry_check(w: Weight, n: int, max_pairs: int) -> CheckResult:
    """Check ⟨d0·d1, d0·d2⟩ = ⟨d1, d2⟩ on all basis pairs; reports the first defect."""
    basis = sector_basis(n, max_pairs)
    checked = 0
    for a in basis:
        ha = multiply(HOOK, a)
        for b in basis:
            lhs = inner_hat(w, ha, multiply(HOOK, b))
            rhs = inner_hat(w, a, b)
            checked += 1
            if lhs != rhs:
                return CheckResult(False, checked, {"d1": str(a), "d2": str(b), "jd1_jd2": str(lhs),
                                                    "d1_d2": str(rhs), "defect": str(lhs - rhs)})
    return CheckResult(True, checked)


# --- standard forms as operator words -----------------------------------------------

def operator_chain(w: Weight, max_legs: int, max_pairs: int = 1) -> list[GramModel]:
    """Sectors 0..max_legs (lazily built) for evaluating generator words as operators."""
    return [gram_model(w, n, max_pairs if n else 0, certify=False) for n in range(max_legs + 1)]


class WordEvaluator:
    """Evaluate generator words with HOOK ↦ j, COHOOK ↦ j*, PERM ↦ U(π) in quotient coordinates."""

    def __init__(self, models: Sequence[GramModel]):
        self.models = list(models)
        self._j: dict = {}
        self._js: dict = {}
        self._u: dict = {}

    def j(self, n):
        if n not in self._j:
            self._j[n] = j_matrix(self.models[n], self.models[n + 1])
        return self._j[n]

    def j_star(self, n):
        if n not in self._js:
            self._js[n] = j_star_matrix(self.models[n + 1], self.models[n])
        return self._js[n]

    def u(self, perm):
        perm = tuple(perm)
        if perm not in self._u:
            self._u[perm] = sym_rep(self.models[len(perm)], perm)
        return self._u[perm]

    def vacuum(self):
        return self.models[0].coords(EMPTY)

    def apply(self, word: Sequence[Token], x, level: int = 0):
        for tok in reversed(word):
            if tok.kind == "HOOK":
                if level + 1 >= len(self.models):
                    raise TruncationError(f"word needs more than {len(self.models) - 1} legs")
                x = self.j(level) @ x
                level += 1
            elif tok.kind == "COHOOK":
                if level == 0:
                    raise GNSError("COHOOK applied with no open leg")
                x = self.j_star(level - 1) @ x
                level -= 1
            else:
                x = self.u(tok.perm) @ x
        return x, level

    def vacuum_expectation(self, word: Sequence[Token]) -> Scalar:
        xi = self.vacuum()
        x, level = self.apply(word, xi)
        if level != 0:
            return ZERO
        return self.models[0].inner(xi, x)


def standard_form_expectation(w: Weight, v, evaluator: WordEvaluator | None = None) -> Scalar:
    """⟨ξ, (operator word of the standard form of V) ξ⟩, which should equal t(V)."""
    if evaluator is None:
        evaluator = WordEvaluator(operator_chain(w, max(1, v.n_points // 2)))
    return evaluator.vacuum_expectation(standard_form(v))


# --- theta -------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaSector:
    n: int
    max_pairs: int
    rank: int
    matrix: Matrix               # θ in quotient coordinates
    gram_theta: Matrix           # [⟨s, θ s'⟩]
    symmetric: bool              # G θ = θᵀ G, exactly
    leak: Scalar                 # largest squared residual of θ s outside the truncation
    spectrum: tuple[float, ...]
    spectrum_perp: tuple[float, ...]


@dataclass(frozen=True)
class ThetaReport:
    weight: str
    max_pairs: int
    sectors: tuple[ThetaSector, ...]
    theta_fixes_xi: bool
    eig1_multiplicity: int
    norm_perp: float

    @property
    def spectrum(self) -> tuple[float, ...]:
        return tuple(sorted((x for s in self.sectors for x in s.spectrum), reverse=True))

    def to_json(self) -> dict:
        return {"spectrum": [_r(x) for x in self.spectrum],
                "norm_perp": _r(self.norm_perp),
                "eig1_multiplicity": self.eig1_multiplicity,
                "theta_fixes_xi": self.theta_fixes_xi,
                "symmetric": all(s.symmetric for s in self.sectors),
                "leak": str(max((s.leak for s in self.sectors), default=ZERO)),
                "sectors": [{"n": s.n, "rank": s.rank, "spectrum": [_r(x) for x in s.spectrum]}
                            for s in self.sectors]}


def _r(x: float) -> float:
    return round(x, 12) + 0.0       # 12 digits for stable output; + 0.0 folds -0.0


def _orthonormal_float(metric: Matrix) -> np.ndarray:
    g = metric.to_numpy()
    if g.size == 0:
        return np.zeros((0, 0))
    chol = np.linalg.cholesky(g)
    return np.linalg.inv(chol).T           # columns b with bᵀ G b = δ, first column ∝ e_0


def theta_sector(model: GramModel, tol: float = 1e-9) -> ThetaSector:
    model._require_positive()
    w = model.weight
    sel = model.selected_diagrams
    under = [underline(s) for s in sel]
    gt = Matrix._raw([tuple(inner_hat(w, a, b) for b in under) for a in sel], len(sel))
    symmetric = all(inner_hat(w, a, underline(b)) == inner_hat(w, underline(a), b)
                    for a in model.basis for b in model.basis) if model.size <= 400 else gt.is_symmetric()
    theta = model.metric_inv @ gt
    leak = ZERO
    for d in under:
        leak = max(leak, model.project(d)[1])
    spectrum, perp = (), ()
    if model.rank:
        b = _orthonormal_float(model.metric)
        c = b.T @ gt.to_numpy() @ b
        c = (c + c.T) / 2
        spectrum = symmetric_eigs(c, tol=1e-13)
        if model.n_left == 0 and model.selected and model.basis[model.selected[0]] == EMPTY:
            perp = symmetric_eigs(c[1:, 1:], tol=1e-13) if model.rank > 1 else ()
        else:
            perp = spectrum
    return ThetaSector(model.n_left, model.max_pairs, model.rank, theta, gt, symmetric, leak,
                       spectrum, perp)


def theta_matrix(w: Weight, n_max: int, max_pairs: int, tol: float = 1e-9,
                 trace_points: int = 8) -> ThetaReport:
    """θ: χ(d)ξ ↦ χ(underline d)ξ on sectors 0..n_max, each truncated at ``max_pairs``.

    Refuses weights that fail the rotation (trace) check up to ``trace_points`` points.
    """
    trace = is_rotation_invariant_upto(w, trace_points)
    if not trace.holds:
        raise GNSError(f"{w} is not tracial, θ is not selfadjoint: {trace.counterexample}")
    sectors = []
    for n in range(n_max + 1):
        model = gram_model(w, n, max_pairs)
        if not model.positive:
            raise NotPositiveError(f"{w} is not positive on sector {n}")
        sectors.append(theta_sector(model, tol))
    m0 = gram_model(w, 0, max_pairs)
    xi = m0.coords(EMPTY)
    fixes = sectors[0].matrix @ xi == xi
    eig1 = sum(1 for s in sectors for x in s.spectrum if abs(x - 1) <= tol)
    norm_perp = max((abs(x) for s in sectors for x in s.spectrum_perp), default=0.0)
    return ThetaReport(str(w), max_pairs, tuple(sectors), fixes, eig1, norm_perp)


def theta_table(w: Weight, n_max: int, pairs: Sequence[int] = (0, 1, 2), tol: float = 1e-9):
    """Truncation-convergence table: one θ report per max_pairs value."""
    return [theta_matrix(w, n_max, p, tol) for p in pairs]


def quadratic_factor(q, n: int, literal: bool = False) -> Scalar:
    """The constant c with ⟨θd1, θd2⟩ = c⟨d1, θd2⟩ on the n-leg sector of t_q.

    The n leg-joining pairs each cross one more embracing pair on the left
    side, so c = |q|·(−1)^n for q < 0 and c = q for q >= 0. ``literal``
    returns q·(−1)^n instead, the form that fails for odd n.
    """
    q = scalar(q)
    if literal:
        return q * (-1) ** n
    return -q * (-1) ** n if q < 0 else q


def theta_quadratic_identity(w: Weight, n: int, max_pairs: int, literal: bool = False) -> CheckResult:
    """For t_q: t̂(u(d1)*·u(d2)) = c·t̂(d1*·u(d2)) on all basis pairs, u = underline.

    ``c`` is :func:`quadratic_factor`. Also checks the two counting identities
    behind it: the block counts agree and the pair counts differ by one.
    """
    if w.family != BLOCK_Q_TAG:
        raise GNSError("the quadratic identity is stated for BLOCK_Q weights")
    if n < 1:
        raise GNSError("the identity needs n >= 1")
    basis = sector_basis(n, max_pairs)
    c = quadratic_factor(w.q, n, literal)
    checked = 0
    for d1 in basis:
        u1 = underline(d1)
        for d2 in basis:
            u2 = underline(d2)
            left = closing_pairs(u1, u2)
            right = closing_pairs(d1, u2)
            pl, bl, _ = pair_stats(left)
            pr, br, _ = pair_stats(right)
            lhs = evaluate(w, left)
            rhs = c * evaluate(w, right)
            checked += 1
            if lhs != rhs or bl != br or pl != pr + 1:
                return CheckResult(False, checked, {
                    "d1": str(d1), "d2": str(d2), "lhs": str(lhs), "rhs": str(rhs),
                    "factor": str(c), "blocks": [bl, br], "pairs": [pl, pr]})
    return CheckResult(True, checked)


def counting_identities(n: int, max_pairs: int) -> CheckResult:
    """|B(u(d1)*·u(d2))| = |B(d1*·u(d2))| and |u(d1)*·u(d2)| = |d1*·u(d2)| + 1 on all basis pairs."""
    basis = sector_basis(n, max_pairs)
    checked = 0
    for d1 in basis:
        u1 = underline(d1)
        for d2 in basis:
            u2 = underline(d2)
            pl, bl, _ = pair_stats(closing_pairs(u1, u2))
            pr, br, _ = pair_stats(closing_pairs(d1, u2))
            checked += 1
            if bl != br or pl != pr + 1:
                return CheckResult(False, checked, {"d1": str(d1), "d2": str(d2),
                                                    "blocks": [bl, br], "pairs": [pl, pr]})
    return CheckResult(True, checked)


# --- the symmetrized Fock model ----------------------------------------------------------

class FockError(GNSError):
    pass


@dataclass(frozen=True, eq=False)
class FockVector:
    """A vector of level n: a map from colour words (length n) to sector coordinates."""

    level: int
    comps: dict

    def __add__(self, other):
        return _combine(self, other, ONE)

    def __sub__(self, other):
        return _combine(self, other, -ONE)

    def scale(self, c):
        c = scalar(c)
        return FockVector(self.level, {k: tuple(c * x for x in v) for k, v in self.comps.items()})


def _combine(a, b, sign):
    if a.level != b.level:
        raise FockError("vectors live on different levels")
    out = dict(a.comps)
    for k, v in b.comps.items():
        if k in out:
            out[k] = tuple(x + sign * y for x, y in zip(out[k], v))
        else:
            out[k] = tuple(sign * y for y in v)
    return FockVector(a.level, {k: v for k, v in out.items() if any(v)})


def _matvec(rows, v):
    nz = [(j, b) for j, b in enumerate(v) if b]
    return tuple(sum((r[j] * b for j, b in nz), ZERO) for r in rows)


def _swap(word, i, j):
    w = list(word)
    w[i], w[j] = w[j], w[i]
    return tuple(w)


class FockModel:
    """F_V(h) for h = Q^d, levels 0..level_cap, built on the sector quotients.

    Level n holds symmetric vectors of V_n ⊗ h^{⊗n}; tensor slot s pairs with
    the leg of rank n − s, so the slot added by a* is the rank-1 leg added by
    j. The inner product on level n is n! times the tensor inner product,
    and a(h) = (n+1)(j* ⊗ ⟨h| on the last slot), the adjoint of a*(h).
    Sectors are truncated at ``max_pairs``; every j* image is checked to
    stay inside the truncated span, so all results are exact.
    """

    def __init__(self, w: Weight, dim: int = 2, level_cap: int = 4, max_pairs: int = 1,
                 max_length: int | None = None):
        if dim < 1 or level_cap < 0:
            raise FockError("need dim >= 1 and level_cap >= 0")
        self.weight = w
        self.dim = dim
        self.level_cap = level_cap
        self.max_pairs = max_pairs
        self.max_length = 2 * level_cap if max_length is None else max_length
        self.sectors = [gram_model(w, n, max_pairs if n else 0, certify=False)
                        for n in range(level_cap + 1)]
        self._words = {n: list(itertools.product(range(dim), repeat=n)) for n in range(level_cap + 1)}
        self.j = [j_matrix(self.sectors[n], self.sectors[n + 1]) for n in range(level_cap)]
        self.j_star = [j_star_matrix(self.sectors[n + 1], self.sectors[n]) for n in range(level_cap)]
        self._jrows = [m.rows for m in self.j]
        self._jsrows = [m.rows for m in self.j_star]
        self._u: dict = {}

    # -- structure
    def rank(self, n):
        return self.sectors[n].rank

    def words(self, n):
        return self._words[n]

    def slot_transposition_rep(self, n: int, i: int, k: int) -> tuple:
        """Rows of U for the transposition of tensor slots i and k at level n."""
        key = (n, min(i, k), max(i, k))
        if key not in self._u:
            perm = list(range(1, n + 1))
            a, b = n - i, n - k
            perm[a - 1], perm[b - 1] = b, a
            self._u[key] = sym_rep(self.sectors[n], perm).rows
        return self._u[key]

    def slot_perm_rep(self, n: int, slot_perm: Sequence[int]) -> tuple:
        """Rows of U(π) for π given on slots 0..n-1 (slot s goes to slot π[s])."""
        perm = [0] * n
        for s, t in enumerate(slot_perm):
            perm[n - s - 1] = n - t
        key = (n, tuple(perm))
        if key not in self._u:
            self._u[key] = sym_rep(self.sectors[n], perm).rows
        return self._u[key]

    # -- vectors
    def vacuum(self) -> FockVector:
        return FockVector(0, {(): self.sectors[0].coords(EMPTY)})

    def zero(self, n) -> FockVector:
        return FockVector(n, {})

    def _vec(self, h):
        h = tuple(scalar(x) for x in h)
        if len(h) != self.dim:
            raise FockError(f"one-particle vectors have {self.dim} coordinates")
        return h

    def symmetrize(self, x: FockVector) -> FockVector:
        """Average of (U(π) ⊗ Ũ(π)) x over all π in S(n)."""
        n = x.level
        acc: dict = {}
        for perm in itertools.permutations(range(n)):
            rows = self.slot_perm_rep(n, perm)
            for word, v in x.comps.items():
                new = [0] * n
                for s, c in enumerate(word):
                    new[perm[s]] = c
                u = _matvec(rows, v)
                key = tuple(new)
                acc[key] = tuple(a + b for a, b in zip(acc[key], u)) if key in acc else u
        f = mpq_frac(1, math.factorial(n))
        return FockVector(n, {k: tuple(f * a for a in v) for k, v in acc.items() if any(v)})

    def create(self, h, x: FockVector) -> FockVector:
        """a*(h) x = Sym((j x) ⊗ h)."""
        h = self._vec(h)
        n = x.level
        if n + 1 > self.level_cap:
            raise FockError(f"creation beyond level cap {self.level_cap}")
        jr = self._jrows[n]
        y0: dict = {}
        for word, v in x.comps.items():
            jv = _matvec(jr, v)
            for c in range(self.dim):
                if h[c]:
                    y0[word + (c,)] = tuple(h[c] * a for a in jv)
        # x is symmetric, so S(n+1) reduces to the n+1 cosets of the embedded S(n)
        acc: dict = {}
        for i in range(n + 1):
            rows = self.slot_transposition_rep(n + 1, i, n) if i != n else None
            for word, v in y0.items():
                key = _swap(word, i, n) if rows is not None else word
                u = _matvec(rows, v) if rows is not None else v
                acc[key] = tuple(a + b for a, b in zip(acc[key], u)) if key in acc else u
        f = mpq_frac(1, n + 1)
        return FockVector(n + 1, {k: tuple(f * a for a in v) for k, v in acc.items() if any(v)})

    def annihilate(self, h, y: FockVector) -> FockVector:
        """a(h) y = (n+1) (j* ⊗ ⟨h| on the last slot) y for y on level n+1."""
        h = self._vec(h)
        if y.level == 0:
            return FockVector(0, {})
        n = y.level - 1
        jsr = self._jsrows[n]
        acc: dict = {}
        for word, v in y.comps.items():
            c = word[-1]
            if not h[c]:
                continue
            u = _matvec(jsr, v)
            key = word[:-1]
            coef = h[c] * (n + 1)
            u = tuple(coef * a for a in u)
            acc[key] = tuple(a + b for a, b in zip(acc[key], u)) if key in acc else u
        return FockVector(n, {k: v for k, v in acc.items() if any(v)})

    def inner(self, x: FockVector, y: FockVector) -> Scalar:
        if x.level != y.level:
            return ZERO
        g = self.sectors[x.level].metric
        total = ZERO
        for word, v in x.comps.items():
            u = y.comps.get(word)
            if u is not None:
                total += g.bilinear(v, u)
        return total * math.factorial(x.level)

    def norm2(self, x: FockVector) -> Scalar:
        return self.inner(x, x)

    def apply_op(self, op, x: FockVector) -> FockVector:
        kind, label = op
        h = self._label_vec(label)
        return self.create(h, x) if kind == "c" else self.annihilate(h, x)

    def _label_vec(self, label):
        lab = tuple(label)
        if len(lab) > self.dim:
            if any(lab[self.dim:]):
                raise FockError(f"label {lab} does not fit {self.dim} colours")
            lab = lab[:self.dim]
        return lab + (ZERO,) * (self.dim - len(lab))

    def apply(self, pattern, x: FockVector | None = None) -> FockVector:
        """Apply a monomial (rightmost operator first), to the vacuum by default."""
        x = self.vacuum() if x is None else x
        for op in reversed(list(pattern)):
            x = self.apply_op(op, x)
        return x

    def vacuum_expectation(self, pattern) -> Scalar:
        """⟨Ω, monomial Ω⟩ in the matrix model.

        Monomials whose level path cannot return to the vacuum are zero
        without computation; a path that needs more than ``level_cap`` raises.
        """
        pattern = list(pattern)
        if len(pattern) > self.max_length:
            raise FockError(f"monomial longer than the cap {self.max_length}: {_pstr(pattern)}")
        level, path = 0, []
        for op in reversed(pattern):
            level += 1 if op[0] == "c" else -1
            if level < 0:
                return ZERO
            path.append(level)
        if level != 0:
            return ZERO
        if max(path, default=0) > self.level_cap:
            raise FockError(f"monomial {_pstr(pattern)} needs level {max(path)} > cap {self.level_cap}")
        return self.inner(self.vacuum(), self.apply(pattern))

    def psi_vector(self, mono) -> FockVector:
        """ψ(V, f) = χ(Ṽ)ξ ⊗_s f, with Ṽ the pairs V and left legs at the free points."""
        pts = mono.free_points
        n = len(pts)
        d = Diagram(mono.n_points, mono.pairs, tuple(pts), ())
        sector = self.sectors[n]
        v = sector.coords(d)
        word = tuple(_color(self._label_vec(mono.labels[p])) for p in reversed(pts))
        return self.symmetrize(FockVector(n, {word: v}))

    def basis(self, n: int) -> list[FockVector]:
        """Symmetrized s ⊗ e_w for selected diagrams s and sorted colour words w."""
        out = []
        r = self.rank(n)
        for word in itertools.combinations_with_replacement(range(self.dim), n):
            for k in range(r):
                v = tuple(ONE if i == k else ZERO for i in range(r))
                out.append(self.symmetrize(FockVector(n, {word: v})))
        return out


def mpq_frac(a, b):
    return scalar(a) / b


def _color(vec):
    nz = [i for i, c in enumerate(vec) if c]
    if len(nz) != 1 or vec[nz[0]] != 1:
        raise FockError("psi_vector needs unit-vector labels")
    return nz[0]


def _pstr(pattern):
    from .wick import pattern_str
    return pattern_str(pattern)


def fock_model(w: Weight, dim: int = 2, level_cap: int = 4, max_pairs: int = 1,
               max_length: int | None = None) -> FockModel:
    return FockModel(w, dim, level_cap, max_pairs, max_length)


def all_monomials(dim: int, max_length: int):
    """Every a/a* word over e_1..e_dim of length 1..max_length."""
    from .wick import Op, unit
    ops = [Op(k, unit(c, dim)) for k in ("a", "c") for c in range(1, dim + 1)]
    for length in range(1, max_length + 1):
        yield from itertools.product(ops, repeat=length)


# --- second quantization ------------------------------------------------------------

class SecondQuantized:
    """F(T): v ⊗ h_0 ⊗ … ⊗ h_{n-1} ↦ v ⊗ T h_0 ⊗ … ⊗ T h_{n-1}."""

    def __init__(self, model: FockModel, t: Matrix):
        self.model = model
        self.t = t

    def apply(self, x: FockVector) -> FockVector:
        t = self.t
        acc: dict = {}
        for word, v in x.comps.items():
            for new in itertools.product(range(self.model.dim), repeat=x.level):
                c = ONE
                for a, b in zip(new, word):
                    c *= t[a, b]
                    if not c:
                        break
                if not c:
                    continue
                u = tuple(c * y for y in v)
                acc[new] = tuple(p + q for p, q in zip(acc[new], u)) if new in acc else u
        return FockVector(x.level, {k: v for k, v in acc.items() if any(v)})

    def matrix(self, level: int, vectors: Sequence[FockVector]) -> Matrix:
        """Gram-type matrix [⟨x_a, F(T) x_b⟩] over the given level vectors."""
        imgs = [self.apply(x) for x in vectors]
        return Matrix._raw([tuple(self.model.inner(a, b) for b in imgs) for a in vectors],
                           len(vectors))


def is_contraction(t: Matrix) -> bool:
    """‖T‖ ≤ 1, certified by I − TᵀT being PSD."""
    d = Matrix.identity(t.ncols) - t.T @ t
    return ldlt_psd_certificate(SymMatrix.of(d)).psd


def second_quantize(model: FockModel, t) -> SecondQuantized:
    t = t if isinstance(t, Matrix) else Matrix(t)
    if t.shape != (model.dim, model.dim):
        raise FockError(f"T must be {model.dim}x{model.dim}")
    if not is_contraction(t):
        raise FockError("T is not a contraction (I - TᵀT is not PSD)")
    return SecondQuantized(model, t)


# --- creation / annihilation bounds ------------------------------------------------------

@dataclass(frozen=True)
class BoundsReport:
    holds: bool
    checked: int
    max_ratio_create: Scalar     # max ‖a*(f)ψ‖² / ((k+1)‖f‖²‖ψ‖²)
    max_ratio_annihilate: Scalar  # max ‖a(f)ψ‖² / (k‖f‖²‖ψ‖²)
    failures: tuple = ()

    def to_json(self):
        return {"holds": self.holds, "checked": self.checked,
                "max_ratio_create": str(self.max_ratio_create),
                "max_ratio_annihilate": str(self.max_ratio_annihilate)}


def creation_bounds(model: FockModel, n_random: int = 0, seed: int = 0,
                    labels: Sequence | None = None) -> BoundsReport:
    """Check ‖a(f)ψ‖² ≤ k‖f‖²‖ψ‖² and ‖a*(f)ψ‖² ≤ (k+1)‖f‖²‖ψ‖² exactly, level by level.

    Uses every basis vector of levels up to the cap (creation stops one level
    below it) plus ``n_random`` random integer combinations per level.
    """
    import random

    rng = random.Random(seed)
    d = model.dim
    fs = [tuple(ONE if i == c else ZERO for i in range(d)) for c in range(d)] if labels is None \
        else [tuple(scalar(x) for x in f) for f in labels]
    checked = 0
    mc = ma = ZERO
    failures = []
    for k in range(model.level_cap + 1):
        vecs = [v for v in model.basis(k) if v.comps]
        for _ in range(n_random if vecs else 0):
            acc = model.zero(k)
            for v in vecs:
                c = rng.randint(-3, 3)
                if c:
                    acc = acc + v.scale(c)
            vecs.append(acc)
        for psi in vecs:
            n2 = model.norm2(psi)
            if n2 == 0:
                continue
            for f in fs:
                f2 = dot(f, f)
                if k < model.level_cap:
                    r = model.norm2(model.create(f, psi)) / ((k + 1) * f2 * n2)
                    mc = max(mc, r)
                    checked += 1
                    if r > 1:
                        failures.append(("create", k))
                if k > 0:
                    r = model.norm2(model.annihilate(f, psi)) / (k * f2 * n2)
                    ma = max(ma, r)
                    checked += 1
                    if r > 1:
                        failures.append(("annihilate", k))
    return BoundsReport(not failures, checked, mc, ma, tuple(failures))


# --- reports -----------------------------------------------------------------------

def sector_report(w: Weight, n: int, max_pairs: int, theta: bool = True) -> dict:
    """JSON-ready summary of one sector: rank, certificate, θ data and checks."""
    from .weights import is_multiplicative_upto

    model = gram_model(w, n, max_pairs)
    cert = model.certificate
    psd = True if cert.psd else {"witness": [str(x) for x in cert.witness],
                                 "value": str(cert.witness_value)}
    report = {"weight": str(w), "sector": n, "truncation": {"max_pairs": max_pairs,
                                                             "basis_size": model.size},
              "gram_rank": cert.rank, "psd": psd}
    checks = {"multiplicative_upto_8": is_multiplicative_upto(w, 8).to_json(),
              "tracial_upto_8": is_rotation_invariant_upto(w, 8).to_json()}
    if theta and cert.psd and checks["tracial_upto_8"] == "pass":
        rep = theta_matrix(w, n, max_pairs)
        report["theta"] = rep.to_json()
        if w.family == BLOCK_Q_TAG and n >= 1:
            checks["theta_quadratic_identity"] = theta_quadratic_identity(w, n, max_pairs).to_json()
    else:
        report["theta"] = None
    report["checks"] = checks
    return report


__all__ = [
    "GNSError", "TruncationError", "NotPositiveError", "sector_basis", "inner_hat", "gram_matrix",
    "GramModel", "gram_model", "j_matrix", "j_star_matrix", "metric_adjoint", "sym_rep",
    "embed_perm", "chi_matrix", "j_isometry_check", "operator_chain", "WordEvaluator",
    "standard_form_expectation", "ThetaSector", "ThetaReport", "theta_sector", "theta_matrix",
    "theta_table", "quadratic_factor", "theta_quadratic_identity", "counting_identities", "FockError", "FockVector", "FockModel",
    "fock_model", "all_monomials", "SecondQuantized", "second_quantize", "is_contraction",
    "BoundsReport", "creation_bounds", "sector_report",
]
