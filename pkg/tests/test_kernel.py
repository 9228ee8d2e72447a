from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bp2.kernel import (ONE, ZERO, KernelError, Matrix, SymMatrix, dot, exact_sqrt, fmt,
                        inverse, is_square, lazy_pivoted_ldlt, ldlt_psd_certificate, primitive,
                        quotient_basis, scalar, symmetric_eigs, float_psd)


def det(rows):
    """Fraction determinant by cofactor expansion (oracle, small n only)."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    return sum((-1) ** j * Fraction(rows[0][j]) * det([r[:j] + r[j + 1:] for r in rows[1:]])
               for j in range(n) if rows[0][j])


def psd_by_minors(rows):
    n = len(rows)
    return all(det([[rows[i][j] for j in s] for i in s]) >= 0
               for k in range(1, n + 1) for s in combinations(range(n), k))


sym_matrices = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-4, 4), min_size=n, max_size=n), min_size=n, max_size=n)
).map(lambda a: [[a[i][j] if i <= j else a[j][i] for j in range(len(a))] for i in range(len(a))])


def gram_of(a):
    n = len(a[0])
    return [[sum(r[i] * r[j] for r in a) for j in range(n)] for i in range(n)]


gram_matrices = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=1, max_size=n)
).map(gram_of)


# --- scalars

def test_scalar_lowest_terms_and_positive_denominator():
    x = scalar(Fraction(6, -4))
    assert (x.numerator, x.denominator) == (-3, 2)
    assert fmt(scalar("10/4")) == "5/2"


def test_scalar_interoperates_with_fraction():
    assert scalar(Fraction(1, 3)) == Fraction(1, 3)
    assert hash(scalar(Fraction(1, 3))) == hash(Fraction(1, 3))


@pytest.mark.parametrize("bad", [0.5, True, "x/y", None])
def test_scalar_refuses_inexact_or_garbage(bad):
    with pytest.raises(KernelError):
        scalar(bad)


def test_float_view_within_one_ulp():
    x = scalar("1/3")
    assert abs(float(x) - 1 / 3) <= np.spacing(1 / 3)


def test_square_roots():
    assert is_square(scalar("9/4")) and exact_sqrt(scalar("9/4")) == scalar("3/2")
    assert not is_square(scalar(2)) and not is_square(scalar(-1))
    with pytest.raises(KernelError):
        exact_sqrt(scalar(2))


def test_primitive_vector():
    assert primitive([scalar("1/2"), scalar("-1/3")]) == (3, -2)
    assert primitive([ZERO, ZERO]) == (0, 0)


# --- matrices

def test_symmatrix_rejects_asymmetric():
    with pytest.raises(KernelError):
        SymMatrix([[1, 2], [3, 1]])


def test_inverse_roundtrip():
    m = Matrix([[2, 1], [1, 1]])
    assert m @ inverse(m) == Matrix.identity(2)
    with pytest.raises(KernelError):
        inverse(Matrix([[1, 1], [1, 1]]))


def test_matrix_is_immutable():
    m = Matrix([[1]])
    with pytest.raises(AttributeError):
        m.rows = ()


# --- LDL certificates

@pytest.mark.parametrize("m, psd, rank", [
    ([[1, 1], [1, 1]], True, 1),
    ([[0]], True, 0),
    ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], True, 3),
])
def test_certificate_examples(m, psd, rank):
    cert = ldlt_psd_certificate(SymMatrix(m))
    assert (cert.psd, cert.rank) == (psd, rank)


def test_indefinite_example_witness():
    cert = ldlt_psd_certificate(SymMatrix([[1, 2], [2, 1]]))
    assert not cert.psd
    assert cert.witness == (1, -1) and cert.witness_value == -2


def test_certificate_rejects_asymmetric_input():
    with pytest.raises(KernelError):
        ldlt_psd_certificate([[1, 2], [0, 1]])


def test_pivot_tie_break_is_lowest_index():
    cert = ldlt_psd_certificate(SymMatrix([[2, 0], [0, 2]]))
    assert cert.order == (0, 1)


@settings(max_examples=200, deadline=None)
@given(sym_matrices)
def test_certificate_matches_minor_oracle(rows):
    cert = ldlt_psd_certificate(rows)
    assert cert.psd == psd_by_minors(rows)
    m = Matrix(rows)
    if cert.psd:
        assert cert.rank == np.linalg.matrix_rank(np.array(rows, dtype=float))
        assert all(p > 0 for p in cert.pivots)
    else:
        assert m.quad(cert.witness) == cert.witness_value < 0


@settings(max_examples=100, deadline=None)
@given(gram_matrices)
def test_gram_matrices_are_certified_psd(rows):
    cert = ldlt_psd_certificate(rows)
    assert cert.psd
    assert cert.rank == np.linalg.matrix_rank(np.array(rows, dtype=float))


@settings(max_examples=100, deadline=None)
@given(gram_matrices)
def test_lazy_ldl_agrees_with_full(rows):
    full = ldlt_psd_certificate(rows)
    part = lazy_pivoted_ldlt([r[i] for i, r in enumerate(rows)], lambda j: [r[j] for r in rows])
    assert part.order == full.order and part.pivots == full.pivots and part.complete


# --- eigenvalues

@pytest.mark.parametrize("m, want", [
    ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], (1, 1, 1)),
    ([[0, 1], [1, 0]], (1, -1)),
    ([[1, 1], [1, 1]], (2, 0)),
])
def test_eig_examples(m, want):
    assert np.allclose(symmetric_eigs(m), want, atol=1e-12)


def test_eig_rejects_bad_tol():
    with pytest.raises(KernelError):
        symmetric_eigs([[1]], tol=0)


@settings(max_examples=100, deadline=None)
@given(sym_matrices)
def test_eigs_match_numpy_and_are_descending(rows):
    got = symmetric_eigs(rows, tol=1e-12)
    want = sorted(np.linalg.eigvalsh(np.array(rows, dtype=float)), reverse=True)
    assert list(got) == sorted(got, reverse=True)
    assert np.allclose(got, want, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(sym_matrices)
def test_exact_and_float_definiteness_agree(rows):
    assert ldlt_psd_certificate(rows).psd == float_psd(rows, tol=1e-9)


# --- quotient basis

def test_quotient_rank_one():
    qb = quotient_basis([[1, 1], [1, 1]])
    assert qb.selected == (0,)
    assert qb.basis.column(0) == (1, 0)


def test_quotient_identity_and_zero():
    qb = quotient_basis(Matrix.identity(3))
    assert qb.selected == (0, 1, 2) and qb.basis == Matrix.identity(3) and qb.is_orthonormal()
    assert quotient_basis([[0, 0], [0, 0]]).selected == ()


def test_quotient_rejects_indefinite():
    with pytest.raises(KernelError):
        quotient_basis([[1, 2], [2, 1]])


@settings(max_examples=100, deadline=None)
@given(gram_matrices)
def test_quotient_basis_is_g_orthogonal(rows):
    g = Matrix(rows)
    qb = quotient_basis(g)
    assert qb.basis.T @ g @ qb.basis == Matrix.diag(qb.norms)
    assert all(x > 0 for x in qb.norms)
    b = qb.orthonormal_float()
    assert np.allclose(b.T @ g.to_numpy() @ b, np.eye(qb.rank), atol=1e-9)


def test_quotient_orthonormal_when_norms_are_squares():
    qb = quotient_basis([[4, 2], [2, 2]])
    g = Matrix([[4, 2], [2, 2]])
    assert qb.is_orthonormal() and qb.basis.T @ g @ qb.basis == Matrix.identity(2)


def test_quotient_float_mode():
    sel, b = quotient_basis([[1, 1], [1, 1]], exact=False, tol=1e-12)
    assert sel == (0,) and np.allclose(b.T @ np.ones((2, 2)) @ b, 1)
    with pytest.raises(KernelError):
        quotient_basis([[1]], exact=False)


def test_dot_length_mismatch():
    with pytest.raises(KernelError):
        dot([ONE], [ONE, ONE])
