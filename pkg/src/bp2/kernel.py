"""Exact rational scalars and the small dense linear algebra used everywhere else.

Scalars are ``gmpy2.mpq`` values: arbitrary precision, always in lowest
terms with a positive denominator. Matrices are immutable row tuples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpq

Scalar = type(mpq())
ZERO = mpq(0)
ONE = mpq(1)


class KernelError(ValueError):
    pass


def scalar(x) -> Scalar:
    """Coerce ints, Fractions, mpq values and ``"p/q"`` strings to an exact scalar.

    Floats are refused: they would silently smuggle rounding into exact code.
    """
    if isinstance(x, Scalar):
        return x
    if isinstance(x, bool):
        raise KernelError("booleans are not scalars")
    if isinstance(x, float):
        raise KernelError(f"float {x!r} is not exact; pass an int, Fraction or 'p/q' string")
    if isinstance(x, str):
        try:
            return mpq(x.strip())
        except ValueError as exc:
            raise KernelError(f"not a rational literal: {x!r}") from exc
    if isinstance(x, (int, Fraction)) or type(x).__name__ == "mpz":
        return mpq(x)
    raise KernelError(f"cannot convert {type(x).__name__} to an exact scalar")


def fmt(x) -> str:
    """Canonical text: ``3``, ``-1/2``."""
    return str(scalar(x))


def vector(xs: Iterable) -> tuple[Scalar, ...]:
    return tuple(scalar(x) for x in xs)


def dot(u: Sequence, v: Sequence) -> Scalar:
    if len(u) != len(v):
        raise KernelError(f"length mismatch {len(u)} != {len(v)}")
    return sum((a * b for a, b in zip(u, v)), ZERO)


def is_square(x: Scalar) -> bool:
    return x >= 0 and gmpy2.is_square(x.numerator) and gmpy2.is_square(x.denominator)


def exact_sqrt(x: Scalar) -> Scalar:
    if not is_square(x):
        raise KernelError(f"{x} has no rational square root")
    return mpq(gmpy2.isqrt(x.numerator), gmpy2.isqrt(x.denominator))


def primitive(v: Sequence[Scalar]) -> tuple[Scalar, ...]:
    """Scale a nonzero rational vector to coprime integers, first nonzero entry kept in sign."""
    den = 1
    for x in v:
        den = gmpy2.lcm(den, x.denominator)
    ints = [x * den for x in v]
    g = 0
    for x in ints:
        g = gmpy2.gcd(g, x.numerator)
    if g == 0:
        return tuple(ZERO for _ in v)
    return tuple(mpq(x.numerator // g) for x in ints)


class Matrix:
    """Dense exact matrix; entries are never mutated after construction."""

    __slots__ = ("rows", "nrows", "ncols")
    symmetric = False

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        rows = tuple(tuple(scalar(x) for x in r) for r in rows)
        self._set(rows, ncols)

    def _set(self, rows, ncols):
        object.__setattr__(self, "rows", rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise KernelError("ragged matrix rows")
        object.__setattr__(self, "nrows", len(rows))
        object.__setattr__(self, "ncols", ncols)

    @classmethod
    def _raw(cls, rows, ncols=None):
        """Trusted constructor: ``rows`` already holds tuples of mpq."""
        out = object.__new__(cls)
        Matrix._set(out, tuple(rows), ncols)
        return out

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    @classmethod
    def identity(cls, n: int) -> Matrix:
        return Matrix._raw([tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)], n)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> Matrix:
        return Matrix._raw([(ZERO,) * ncols for _ in range(nrows)], ncols)

    @classmethod
    def diag(cls, values: Sequence) -> Matrix:
        vals = vector(values)
        n = len(vals)
        return Matrix._raw([tuple(vals[i] if i == j else ZERO for j in range(n)) for i in range(n)], n)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int | None = None) -> Matrix:
        cols = [vector(c) for c in cols]
        if nrows is None:
            nrows = len(cols[0]) if cols else 0
        return Matrix._raw([tuple(c[i] for c in cols) for i in range(nrows)], len(cols))

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> tuple[Scalar, ...]:
        return tuple(r[j] for r in self.rows)

    @property
    def T(self) -> Matrix:
        return Matrix._raw(list(zip(*self.rows)) if self.nrows else [], self.nrows)

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise KernelError(f"shape mismatch {self.shape} @ {other.shape}")
            cols = list(zip(*other.rows)) if other.nrows else [()] * other.ncols
            return Matrix._raw([tuple(dot(r, c) if r else ZERO for c in cols) for r in self.rows],
                               other.ncols)
        v = vector(other)
        if len(v) != self.ncols:
            raise KernelError(f"shape mismatch {self.shape} @ vector[{len(v)}]")
        return tuple(dot(r, v) for r in self.rows)

    def __add__(self, other: Matrix) -> Matrix:
        self._check_same(other)
        return Matrix._raw([tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)],
                           self.ncols)

    def __sub__(self, other: Matrix) -> Matrix:
        self._check_same(other)
        return Matrix._raw([tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)],
                           self.ncols)

    def __neg__(self) -> Matrix:
        return self.scale(-1)

    def scale(self, c) -> Matrix:
        c = scalar(c)
        return Matrix._raw([tuple(c * a for a in r) for r in self.rows], self.ncols)

    def _check_same(self, other):
        if self.shape != other.shape:
            raise KernelError(f"shape mismatch {self.shape} vs {other.shape}")

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in r) for r in self.rows)
        return f"{type(self).__name__}[{body}]"

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> Matrix:
        return Matrix._raw([tuple(self.rows[i][j] for j in cols) for i in rows], len(cols))

    def is_symmetric(self) -> bool:
        n = self.nrows
        if n != self.ncols:
            return False
        rows = self.rows
        return all(rows[i][j] == rows[j][i] for i in range(n) for j in range(i + 1, n))

    def quad(self, v: Sequence) -> Scalar:
        """vᵀ M v."""
        return dot(vector(v), self @ v)

    def bilinear(self, u: Sequence, v: Sequence) -> Scalar:
        return dot(vector(u), self @ v)

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.rows], dtype=float).reshape(self.shape)

    def to_lists(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self.rows]


class SymMatrix(Matrix):
    """Square matrix whose entries are checked to be symmetric."""

    __slots__ = ()
    symmetric = True

    def __init__(self, rows, ncols=None):
        super().__init__(rows, ncols)
        if not Matrix.is_symmetric(self):
            raise KernelError("matrix is not symmetric")

    @classmethod
    def of(cls, m: Matrix) -> SymMatrix:
        if not m.is_symmetric():
            raise KernelError("matrix is not symmetric")
        out = object.__new__(cls)
        Matrix._set(out, m.rows, m.ncols)
        return out

    def is_symmetric(self) -> bool:
        return True


def inverse(m: Matrix) -> Matrix:
    """Exact Gauss-Jordan inverse."""
    n = m.nrows
    if n != m.ncols:
        raise KernelError("inverse of a non-square matrix")
    a = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(m.rows)]
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            raise KernelError("matrix is singular")
        a[c], a[p] = a[p], a[c]
        inv = ONE / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            f = a[r][c]
            if r != c and f:
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return Matrix._raw([tuple(r[n:]) for r in a], n)


# --- PSD certificates ---------------------------------------------------------------

@dataclass(frozen=True)
class PSDCertificate:
    """Outcome of the pivoted LDLᵀ.

    ``order`` lists pivot indices, ``pivots`` their (positive) values. When
    ``psd`` is false, ``witness`` is a primitive integer vector with
    ``witness_value = vᵀMv < 0``.
    """

    psd: bool
    rank: int
    order: tuple[int, ...]
    pivots: tuple[Scalar, ...]
    witness: tuple[Scalar, ...] | None = None
    witness_value: Scalar | None = None

    def to_json(self) -> dict:
        out = {"psd": self.psd, "rank": self.rank,
               "pivot_order": list(self.order), "pivots": [str(p) for p in self.pivots]}
        if not self.psd:
            out["witness"] = [str(x) for x in self.witness]
            out["witness_value"] = str(self.witness_value)
        return out


def _as_rows(m) -> list[list[Scalar]]:
    if isinstance(m, Matrix):
        if not m.is_symmetric():
            raise KernelError("ldlt_psd_certificate needs a symmetric matrix")
        return [list(r) for r in m.rows]
    rows = [[scalar(x) for x in r] for r in m]
    if not Matrix._raw([tuple(r) for r in rows], len(rows)).is_symmetric():
        raise KernelError("ldlt_psd_certificate needs a symmetric matrix")
    return rows


def _simple_witness(rows) -> tuple[list[Scalar], Scalar] | None:
    """Look for a negative direction among e_i and e_i ± e_j."""
    n = len(rows)
    for i in range(n):
        if rows[i][i] < 0:
            v = [ZERO] * n
            v[i] = ONE
            return v, rows[i][i]
    for i in range(n):
        mii = rows[i][i]
        ri = rows[i]
        for j in range(i + 1, n):
            s = mii + rows[j][j]
            two = 2 * ri[j]
            for sign in (-1, 1):
                val = s + sign * two
                if val < 0:
                    v = [ZERO] * n
                    v[i] = ONE
                    v[j] = mpq(sign)
                    return v, val
    return None


def ldlt_psd_certificate(m) -> PSDCertificate:
    """Exact LDLᵀ with symmetric pivoting on the largest diagonal entry (lowest index on ties).

    Elimination stops as soon as no positive diagonal remains. The matrix is
    PSD exactly when the remaining Schur complement is zero; otherwise a
    rational vector with negative quadratic form is returned.
    """
    rows = _as_rows(m)
    original = [list(r) for r in rows]
    n = len(rows)
    active = list(range(n))
    order, pivots, cols = [], [], []
    while active:
        best = active[0]
        for i in active:
            if rows[i][i] > rows[best][best]:
                best = i
        d = rows[best][best]
        if d <= 0:
            break
        active.remove(best)
        prow = rows[best]
        col = {}
        for i in active:
            a = rows[i][best]
            if a:
                li = a / d
                col[i] = li
                rows[i] = [x - li * y for x, y in zip(rows[i], prow)]
        order.append(best)
        pivots.append(d)
        cols.append(col)
    y = None
    for i in active:
        if rows[i][i] < 0:
            y = {i: ONE}
            break
    if y is None:
        for a_idx, i in enumerate(active):
            ri = rows[i]
            for j in active[a_idx + 1:]:
                if ri[j]:
                    y = {i: ONE, j: mpq(-1 if ri[j] > 0 else 1)}
                    break
            if y is not None:
                break
    rank = len(pivots)
    if y is None:
        return PSDCertificate(True, rank, tuple(order), tuple(pivots))
    simple = _simple_witness(original)
    if simple is not None:
        v, val = simple
    else:
        x = [ZERO] * n
        for i, c in y.items():
            x[i] = c
        for k in range(len(order) - 1, -1, -1):
            x[order[k]] = -sum((li * x[i] for i, li in cols[k].items()), ZERO)
        v = list(primitive(x))
        val = Matrix._raw([tuple(r) for r in original], n).quad(v)
    if not val < 0:
        raise AssertionError("internal error: witness is not negative")
    return PSDCertificate(False, rank, tuple(order), tuple(pivots), tuple(v), val)


def is_psd(m) -> bool:
    return ldlt_psd_certificate(m).psd


@dataclass(frozen=True)
class PartialLDL:
    """Pivoted LDLᵀ computed column by column.

    ``columns[k]`` is the k-th column of L (length n), ``residual`` the
    diagonal of the final Schur complement. If the matrix is PSD, a zero
    residual means the pivot columns span its range.
    """

    order: tuple[int, ...]
    pivots: tuple[Scalar, ...]
    columns: tuple[tuple[Scalar, ...], ...]
    residual: tuple[Scalar, ...]

    @property
    def complete(self) -> bool:
        return all(r == 0 for r in self.residual)

    @property
    def rank(self) -> int:
        return len(self.order)


def lazy_pivoted_ldlt(diagonal: Sequence, column: Callable[[int], Sequence]) -> PartialLDL:
    """Same pivot rule as :func:`ldlt_psd_certificate`, fetching only pivot columns.

    Costs O(n·rank²) instead of O(n²·rank); it cannot see off-diagonal
    entries of the final Schur complement, so it certifies nothing by itself.
    """
    d = [scalar(x) for x in diagonal]
    n = len(d)
    taken = [False] * n
    order, pivots, cols = [], [], []
    while True:
        best = None
        for i in range(n):
            if not taken[i] and (best is None or d[i] > d[best]):
                best = i
        if best is None or d[best] <= 0:
            break
        c = [scalar(x) for x in column(best)]
        for k, lk in enumerate(cols):
            f = lk[best] * pivots[k]
            if f:
                c = [x - f * y for x, y in zip(c, lk)]
        piv = c[best]
        lcol = [x / piv for x in c]
        for i in range(n):
            if c[i]:
                d[i] -= c[i] * lcol[i]
        d[best] = ZERO
        taken[best] = True
        order.append(best)
        pivots.append(piv)
        cols.append(tuple(lcol))
    return PartialLDL(tuple(order), tuple(pivots), tuple(cols), tuple(d))


# --- float spectrum -----------------------------------------------------------------

def symmetric_eigs(m, tol: float = 1e-12, max_sweeps: int = 60) -> tuple[float, ...]:
    """Eigenvalues by cyclic Jacobi rotations, sorted descending.

    Sweeps stop once the off-diagonal Frobenius norm drops below ``tol``
    (scaled by the matrix norm when that exceeds 1).
    """
    if not tol > 0:
        raise KernelError("tol must be > 0")
    a = m.to_numpy() if isinstance(m, Matrix) else np.array(m, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, rtol=0, atol=0):
        raise KernelError("symmetric_eigs needs a symmetric matrix")
    a = a.copy()
    scale = max(1.0, float(np.linalg.norm(a)))

    def off(x):
        return math.sqrt(2.0 * float(np.sum(np.triu(x, 1) ** 2)))

    for _ in range(max_sweeps):
        if off(a) < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * max(1.0, abs(diff)):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = diff / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                colp, colq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp, rowq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, q] = a[q, p] = 0.0     # exact zero by construction; drop rounding residue
    else:
        if off(a) >= tol * scale:
            raise KernelError("Jacobi iteration did not converge")
    return tuple(sorted((float(x) for x in np.diag(a)), reverse=True))


def float_psd(m, tol: float = 1e-9) -> bool:
    """Advisory definiteness from the Jacobi spectrum."""
    eigs = symmetric_eigs(m, tol=1e-13)
    scale = max([1.0] + [abs(e) for e in eigs])
    return eigs[-1] >= -tol * scale if eigs else True


# --- quotient by the kernel -----------------------------------------------------------

@dataclass(frozen=True)
class QuotientBasis:
    """Selected indices and a G-orthogonal basis of the quotient.

    Columns of ``basis`` satisfy ``basisᵀ G basis = diag(norms)``. Columns
    whose squared norm is a rational square are normalized, so ``norms``
    is all ones whenever that is possible over the rationals.
    """

    selected: tuple[int, ...]
    basis: Matrix
    norms: tuple[Scalar, ...]

    @property
    def rank(self) -> int:
        return len(self.selected)

    def is_orthonormal(self) -> bool:
        return all(x == 1 for x in self.norms)

    def orthonormal_float(self) -> np.ndarray:
        """Float basis with BᵀGB = I up to rounding."""
        b = self.basis.to_numpy()
        return b / np.sqrt(np.array([float(x) for x in self.norms]))[None, :] if self.rank else b


def quotient_basis(g, exact: bool = True, tol: float | None = None):
    """Select independent columns of a PSD Gram matrix and orthogonalize them.

    Exact mode returns a :class:`QuotientBasis`; float mode (``exact=False``)
    returns ``(selected, B)`` with B a float array, BᵀGB = I within ``tol``.
    """
    if not exact:
        if tol is None or not tol > 0:
            raise KernelError("float mode needs tol > 0")
        return _float_quotient(g, tol)
    gm = g if isinstance(g, Matrix) else Matrix(g)
    cert = ldlt_psd_certificate(gm)
    if not cert.psd:
        raise KernelError(f"Gram matrix is indefinite (witness {[str(x) for x in cert.witness]})")
    n = gm.nrows
    cols, norms = [], []
    for s in cert.order:
        b = [ZERO] * n
        b[s] = ONE
        gs = gm.column(s)
        for bj, nj in zip(cols, norms):
            c = dot(bj, gs) / nj
            if c:
                b = [x - c * y for x, y in zip(b, bj)]
        nk = gm.quad(b)
        if is_square(nk):
            r = exact_sqrt(nk)
            b = [x / r for x in b]
            nk = ONE
        cols.append(b)
        norms.append(nk)
    basis = Matrix.from_columns(cols, n) if cols else Matrix._raw([()] * n, 0)
    return QuotientBasis(tuple(cert.order), basis, tuple(norms))


def _float_quotient(g, tol):
    a = g.to_numpy() if isinstance(g, Matrix) else np.array(g, dtype=float)
    n = a.shape[0]
    s = a.copy()
    selected, cols = [], []
    while True:
        dg = np.diag(s).copy()
        dg[selected] = -np.inf
        if n == 0 or dg.max() <= tol:
            break
        k = int(np.argmax(dg))
        selected.append(k)
        lk = s[:, k] / s[k, k]
        s = s - np.outer(lk, s[k, :])
    for k in selected:
        b = np.zeros(n)
        b[k] = 1.0
        for c in cols:
            b = b - (c @ a @ b) * c
        b = b / math.sqrt(b @ a @ b)
        cols.append(b)
    basis = np.array(cols).T if cols else np.zeros((n, 0))
    return tuple(selected), basis


__all__ = [
    "Scalar", "ZERO", "ONE", "KernelError", "scalar", "fmt", "vector", "dot", "primitive",
    "Matrix", "SymMatrix", "inverse", "PSDCertificate", "ldlt_psd_certificate", "is_psd",
    "PartialLDL", "lazy_pivoted_ldlt", "symmetric_eigs", "float_psd", "QuotientBasis",
    "quotient_basis", "is_square", "exact_sqrt",
]
