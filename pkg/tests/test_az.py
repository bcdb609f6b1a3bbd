import pytest

from conftest import P, random_system, ratmat, record, system, unit
from uncoupling.algebra import RatMat
from uncoupling.az import (az_step1, az_step2, az_uncouple, beta_numerator_degree,
                           degree_constants)
from uncoupling.cvm import cv_trial
from uncoupling.delta import delta_iterate, gauge_transform
from uncoupling.errors import NonGeneric
from uncoupling.verify import check_annihilation


def is_lower_hessenberg_unit(beta):
    n = beta.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            e = beta.entry(i, j)
            if j == i + 1 and not (e.num == beta.num.field.one and e.den.degree() == 0):
                return False
            if j > i + 1 and not e.is_zero():
                return False
    return True


def is_upper_triangular(U):
    return all(U.num.rows[i][j].is_zero() for i in range(U.shape[0]) for j in range(i))


def test_worked_example():
    s = system([[[0, 1], 1], [1, 0]])
    U, beta = az_step1(s)
    assert U == RatMat.identity(2, P) and beta == s.M
    L, C = az_step2(s, U, beta)
    assert L == ratmat([[1, 0], [[0, 1], 1]])
    assert C.matrix(P) == ratmat([[0, 1], [2, [0, 1]]])
    res = az_uncouple(s)
    assert res.ell == 2 and res.P == L


def test_scalar_system():
    s = system([[[3, 1]]], q=[1, 1])
    res = az_uncouple(s)
    assert res.U == ratmat([[1]]) and res.beta == s.M and res.C.matrix(P) == s.M


def test_companion_beta_gives_identity_L():
    s = system([[0, 1], [[5, 1], [0, 2]]])
    res = az_uncouple(s)
    assert res.L == RatMat.identity(2, P) and res.C.matrix(P) == s.M


def test_structure_and_gauge_identities():
    for seed in range(10):
        n, d = 1 + seed % 5, 1 + seed % 3
        s = random_system(n, d, 300 + seed)
        res = az_uncouple(s)
        assert is_upper_triangular(res.U) and res.U.row(0) == unit(0, n)
        assert is_lower_hessenberg_unit(res.beta)
        assert gauge_transform(s, res.U) == res.beta
        assert gauge_transform(res.beta, res.L) == res.C.matrix(P)
        assert res.L @ res.U == delta_iterate(s, unit(0, n), n, check=False)
        cv = cv_trial(s, unit(0, n), "fast")
        assert res.C == cv.blocks[0]
        consts = degree_constants(s, res)
        assert consts["beta"] <= 3.0 and consts["U"] <= 3.0
    assert check_annihilation(s, record(s, res.to_uncoupling()))


def test_non_generic_reports_order():
    s = system([[0, 0, 0], [0, 0, 1], [0, 1, 0]])
    with pytest.raises(NonGeneric) as info:
        az_step1(s)
    assert info.value.ell == 1
    U, beta_rows = info.value.partial
    assert U.shape == (1, 3)
    with pytest.raises(NonGeneric):
        az_uncouple(s)


def test_beta_degree_small_cases():
    for n, expect in [(1, 1), (2, 2), (3, 5)]:
        degs = [beta_numerator_degree(az_uncouple(random_system(n, 1, seed, "unit")).beta)
                for seed in range(20)]
        assert max(degs) == expect
