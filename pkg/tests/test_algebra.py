import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import F, P, X, poly, random_polymat, ratmat
from uncoupling.algebra import (PolyMat, RatFun, RatMat, cramer_bounds, elementary, mat_det,
                                mat_inverse, mat_mul, poly_eval, poly_interpolate, poly_mul,
                                poly_mul_schoolbook, rot, solve_row_fast, solve_row_naive)
from uncoupling.algebra.kernels import batched_gauss_jordan, interpolate_columns, matmul_mod
from uncoupling.errors import DimensionMismatch, DuplicatePoint, InsufficientPoints, SingularMatrix

coeff_lists = st.lists(st.integers(0, P - 1), max_size=12)


# ---- oracles ----------------------------------------------------------------

def schoolbook(a, b):
    ca, cb = [int(x) for x in a.coeffs()], [int(x) for x in b.coeffs()]
    out = [0] * max(len(ca) + len(cb) - 1, 0)
    for i, x in enumerate(ca):
        for j, y in enumerate(cb):
            out[i + j] = (out[i + j] + x * y) % P
    return F.poly(out)


def cofactor_det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = F.zero
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * cofactor_det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def triple_loop(A, B):
    m, k, n = len(A), len(B), len(B[0])
    return [[sum((A[i][t] * B[t][j] for t in range(k)), F.zero) for j in range(n)] for i in range(m)]


# ---- polynomials ------------------------------------------------------------

def test_poly_mul_trivial():
    assert poly_mul(F.poly([1, 1]), F.poly([P - 1, 1])) == F.poly([P - 1, 0, 1])
    a = F.poly([3, 4, 5])
    assert poly_mul(F.one, a) == a


def test_poly_mul_matches_schoolbook_degree_64(rng):
    a = F.random_poly(rng, 64)
    b = F.random_poly(rng, 64)
    assert poly_mul(a, b) == schoolbook(a, b) == poly_mul_schoolbook(a, b)


@given(coeff_lists, coeff_lists, coeff_lists)
def test_poly_ring_axioms(a, b, c):
    a, b, c = F.poly(a), F.poly(b), F.poly(c)
    assert poly_mul(poly_mul(a, b), c) == poly_mul(a, poly_mul(b, c))
    assert poly_mul(a, b + c) == poly_mul(a, b) + poly_mul(a, c)
    if not a.is_zero() and not b.is_zero():
        assert poly_mul(a, b).degree() == a.degree() + b.degree()


def test_eval_and_interpolate():
    assert poly_eval(F.poly([P - 1, 0, 1]), 3) == 8
    assert poly_interpolate([0, 1], [1, 2], F) == F.poly([1, 1])
    with pytest.raises(DuplicatePoint):
        poly_interpolate([1, 1], [0, 0], F)


def test_interpolation_round_trip(rng):
    for _ in range(20):
        a = F.random_poly(rng, 9)
        xs = list(range(5, 15))
        assert poly_interpolate(xs, [poly_eval(a, x) for x in xs], F) == a


def test_interpolate_columns_many_points(rng):
    xs = rng.choice(P, size=700, replace=False)
    polys = [F.random_poly(rng, 699, exact=False) for _ in range(3)]
    vals = np.array([[poly_eval(a, x) for a in polys] for x in xs])
    out = interpolate_columns(xs, vals, P)
    assert [F.poly(out[:, i].tolist()) for i in range(3)] == polys


def test_matmul_mod_exact(rng):
    a = rng.integers(0, P, size=(37, 300))
    b = rng.integers(0, P, size=(300, 11))
    expect = np.array([[sum(int(a[i, t]) * int(b[t, j]) for t in range(300)) % P
                        for j in range(11)] for i in range(37)])
    assert np.array_equal(matmul_mod(a, b, P), expect)


def test_batched_gauss_jordan_detects_singular():
    mats = np.array([[[1, 2, 5], [2, 4, 6]], [[1, 2, 5], [3, 4, 6]]])
    det, sol, ok = batched_gauss_jordan(mats, P)
    assert list(ok) == [False, True]
    assert det[1] == (4 - 6) % P
    x = sol[1, :, 0]
    assert (x[0] + 2 * x[1]) % P == 5 and (3 * x[0] + 4 * x[1]) % P == 6


# ---- rational functions -----------------------------------------------------

@given(coeff_lists, coeff_lists.filter(lambda c: any(c)))
def test_ratfun_normal_form(num, den):
    r = RatFun(F.poly(num), F.poly(den))
    assert r.den.is_zero() is False and int(r.den.leading_coefficient()) == 1
    assert r.num.gcd(r.den).degree() == 0 or r.num.is_zero()
    again = RatFun(r.num, r.den)
    assert again == r and (again.num, again.den) == (r.num, r.den)
    assert r.degree() == max(r.num.degree(), r.den.degree(), 0)


def test_ratfun_arithmetic():
    a = RatFun(F.one, X)
    b = RatFun(X, X + 1)
    assert a + b == RatFun(X * X + X + 1, X * (X + 1))
    assert (a * b) == RatFun(F.one, X + 1)
    assert a.derivative() == RatFun(F.poly([P - 1]), X * X)
    assert (b / b) == RatFun.const(1, F)


# ---- matrices ---------------------------------------------------------------

def test_mat_mul_identities():
    A = PolyMat.from_coeffs([[[1, 2], 3], [0, [0, 0, 5]]], F)
    I = PolyMat.identity(2, P)
    assert mat_mul(I, A) == A
    R = RatMat.from_polymat(rot(4, P))
    assert R @ mat_inverse(R) == RatMat.identity(4, P)
    with pytest.raises(DimensionMismatch):
        mat_mul(A, PolyMat.identity(3, P))


def test_mat_mul_matches_triple_loop(rng):
    A = random_polymat(rng, 3, 3, 2)
    B = random_polymat(rng, 3, 3, 2)
    assert mat_mul(A, B).rows == triple_loop(A.rows, B.rows)


@given(st.integers(0, 2 ** 32))
def test_mat_mul_associative(seed):
    rng = np.random.default_rng(seed)
    A, B, C = (random_polymat(rng, 2, 2, 2) for _ in range(3))
    assert mat_mul(mat_mul(A, B), C) == mat_mul(A, mat_mul(B, C))
    assert mat_mul(A, B + C) == mat_mul(A, B) + mat_mul(A, C)


def test_det_identity_and_cofactor(rng):
    assert mat_det(PolyMat.identity(5, P)) == F.one
    for _ in range(5):
        A = random_polymat(rng, 4, 4, 1)
        assert mat_det(A) == cofactor_det(A.rows)


def test_det_degree_bound_reached(rng):
    """diag(X^a)·N with N constant invertible has degree exactly Σ a_i."""
    a = [0, 1, 3, 2]
    while True:
        N = PolyMat([[F.poly([int(rng.integers(0, P))]) for _ in range(4)] for _ in range(4)], P)
        if not mat_det(N).is_zero():
            break
    D = PolyMat([[X ** a[i] if i == j else F.zero for j in range(4)] for i in range(4)], P)
    A = mat_mul(D, N)
    assert mat_det(A).degree() == sum(a)
    for _ in range(10):
        B = random_polymat(rng, 3, 3, 2)
        rd = [max(r, 0) for r in B.row_degrees()]
        assert mat_det(B).degree() <= sum(rd)


def test_inverse_examples():
    t = RatFun(X + 3)
    assert mat_inverse(elementary(1, 0, t, 2, P)) == elementary(1, 0, -t, 2, P)
    assert mat_inverse(ratmat([[1, 0], [[0, 1], 1]])) == ratmat([[1, 0], [[0, P - 1], 1]])
    with pytest.raises(SingularMatrix):
        mat_inverse(ratmat([[1, 2], [2, 4]]))


def test_inverse_product_and_column_bounds(rng):
    for _ in range(5):
        A = random_polymat(rng, 3, 3, 2)
        Ar = RatMat.from_polymat(A)
        inv = mat_inverse(Ar)
        assert Ar @ inv == RatMat.identity(3, P)
        det = mat_det(A)
        rd = [max(r, 0) for r in A.row_degrees()]
        D = sum(rd)
        cleared = inv.scale(det)
        assert cleared.is_polynomial()
        for i in range(3):  # column i of det·A⁻¹
            assert max(cleared.num.rows[j][i].degree() for j in range(3)) <= D - rd[i]


# ---- solvers ----------------------------------------------------------------

def _solve_cases(rng):
    yield PolyMat.identity(3, P), PolyMat([[X, F.one, X * X]], P)
    yield rot(2, P), PolyMat([[F.one, F.zero]], P)
    for _ in range(3):
        yield random_polymat(rng, 3, 3, 2), random_polymat(rng, 1, 3, 2)


def test_solve_row_examples(rng):
    b = PolyMat([[X, F.one, X * X]], P)
    assert solve_row_naive(PolyMat.identity(3, P), b) == RatMat.from_polymat(b)
    e1 = PolyMat([[F.one, F.zero]], P)
    assert solve_row_naive(rot(2, P), e1) == ratmat([[0, 1]])
    for A, b in _solve_cases(rng):
        y = solve_row_naive(A, b)
        assert y @ RatMat.from_polymat(A) == RatMat.from_polymat(b)
        assert solve_row_fast(A, b) == y


def test_solve_fast_equals_naive_random(rng):
    for _ in range(100):
        n = int(rng.integers(1, 7))
        d = int(rng.integers(0, 5))
        A = random_polymat(rng, n, n, d)
        b = random_polymat(rng, 1, n, d)
        try:
            y = solve_row_naive(A, b)
        except SingularMatrix:
            with pytest.raises(SingularMatrix):
                solve_row_fast(A, b)
            continue
        fast = solve_row_fast(A, b, cramer_bounds(A, b))
        assert fast == y
        assert (fast.num, fast.den) == (y.num, y.den)


def test_solve_fast_singular_and_small_field():
    A = PolyMat.from_coeffs([[[0, 1], 1], [[0, 2], 2]], F)
    with pytest.raises(SingularMatrix):
        solve_row_fast(A, PolyMat([[F.one, F.one]], P))
    from uncoupling.algebra import field
    f7 = field(7)
    B = PolyMat.from_coeffs([[[1, 1, 1, 1, 1, 1], 0], [0, [1, 1, 1, 1, 1, 1]]], f7)
    with pytest.raises(InsufficientPoints):
        solve_row_fast(B, PolyMat.from_coeffs([[1, 1]], f7))


def test_cramer_bounds():
    A = PolyMat([[X, F.one], [F.one, X ** 3]], P)
    b = PolyMat([[X * X, F.zero]], P)
    assert cramer_bounds(A, b) == (4, [5, 3])


def test_elementary_constructors():
    t = poly([1, 2])
    E = elementary(0, 1, RatFun(t), 3, P)
    assert E.entry(0, 1) == RatFun(t) and E.entry(0, 0) == RatFun.const(1, F)
    assert all(E.entry(i, j) == RatFun.const(int(i == j), F)
               for i, j in itertools.product(range(3), range(3)) if (i, j) != (0, 1))
