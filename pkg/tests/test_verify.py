import numpy as np
import pytest

from conftest import F, P, mutate_result, random_system, ratmat, record, rotation, system, unit
from uncoupling.algebra import RatFun, RatMat
from uncoupling.delta import CompanionBlock
from uncoupling.cvm import UncouplingResult, cv_trial, degree_report, prob_cv
from uncoupling.dbz import dbz
from uncoupling.errors import BoundViolated, NotOrdinaryPoint
from uncoupling.verify import (arithmetic_size, check_annihilation, degree_audit, equation_size,
                               ordinary_point, series_residual, series_solve, validate)

EX2 = system([[[0, 1], 1], [1, 0]])


def test_series_constant_and_exponential():
    Y = series_solve(system([[0, 0], [0, 0]]), 0, [3, 4], 6)
    assert (Y.coeffs[0] == [3, 4]).all() and not Y.coeffs[1:].any()
    Y = series_solve(system([[1]]), 0, [1], 5)
    fact = [1, 1, 2, 6, 24]
    assert [int(c) for c in Y.component(0)] == [pow(f, -1, P) for f in fact]


def test_series_residual_zero_random():
    for seed in range(5):
        s = random_system(3, 2, seed)
        x0 = ordinary_point([s.q], P)
        Y = series_solve(s, x0, [1, 2, 3], 20)
        assert not series_residual(s, Y).any()


def test_series_rejects_singular_point():
    s = system([[1]], q=[0, 1])
    with pytest.raises(NotOrdinaryPoint):
        series_solve(s, 0, [1], 5)
    assert ordinary_point([s.q], P) == 1


def test_annihilation_examples():
    rs = rotation(3)
    assert check_annihilation(rs, record(rs, cv_trial(rs, unit(0, 3))))
    assert check_annihilation(EX2, cv_trial(EX2, unit(0, 2)), N=30)


def test_annihilation_negative_controls():
    rng = np.random.default_rng(0)
    bad = mutate_result(cv_trial(EX2, unit(0, 2)), rng)
    assert not check_annihilation(EX2, bad, N=30)
    for seed in range(5):
        s = random_system(3, 2, seed)
        res = prob_cv(s, seed)
        assert check_annihilation(s, res)
        assert not check_annihilation(s, mutate_result(res, rng))


def test_validate_examples():
    for rows in ([[[0, 1], 1], [1, 0]], [[0, 0, 0], [0, 0, 1], [0, 1, 0]], [[0, 0], [1, 0]]):
        s = system(rows)
        res, _ = dbz(s)
        rep = validate(s, res)
        assert rep.ok and rep.gauge_ok and rep.shape_ok and rep.seed_rows_ok and rep.annihilation_ok
    s = system([[[2, 1]]])
    assert validate(s, cv_trial(s, ratmat([[1]]))).ok


def test_validate_negative_controls():
    res = cv_trial(EX2, unit(0, 2))
    corrupt_P = UncouplingResult(ratmat([[1, 0], [[1, 1], 1]]), res.blocks, res.seeds)
    rep = validate(EX2, corrupt_P)
    assert not rep.gauge_ok and not rep.ok
    wrong_sizes = UncouplingResult(res.P, res.blocks * 2, res.seeds * 2)
    assert not validate(EX2, wrong_sizes).shape_ok
    singular = UncouplingResult(ratmat([[1, 0], [1, 0]]), res.blocks, res.seeds)
    assert not validate(EX2, singular).ok


def test_arithmetic_size_convention():
    assert arithmetic_size(RatMat.identity(2, P)) == 8
    C = ratmat([[0, 1], [2, [0, 1]]])
    assert arithmetic_size(C) == 2 + 2 + 2 + 3
    res = cv_trial(EX2, unit(0, 2))
    assert arithmetic_size(res) == 2 + 3


def test_equation_size_formula():
    for n, d in [(2, 1), (3, 2), (5, 1), (4, 3)]:
        s = random_system(n, d, 40 + n + d)
        res = cv_trial(s, unit(0, n), "fast")
        assert arithmetic_size(res) == equation_size(n, d)
    assert (equation_size(5, 100), equation_size(100, 1), equation_size(30, 30)) == \
        (13010, 1000300, 810960)


def test_arithmetic_size_band():
    ratios = []
    for n in (4, 8, 12, 16):
        for d in (1, 2, 4):
            s = random_system(n, d, n * 10 + d)
            res = cv_trial(s, unit(0, n), "fast")
            ratios.append(arithmetic_size(res) / (n ** 3 * d))
    assert max(ratios) / min(ratios) < 2


def test_degree_audit_cvm_report():
    res = cv_trial(EX2, unit(0, 2))
    audit = degree_audit(degree_report(EX2, res))
    assert audit.ok
    rep = degree_report(EX2, res)
    rep.entries[0].measured = 99
    with pytest.raises(BoundViolated):
        degree_audit(rep)
    assert not degree_audit(rep, strict=False).ok


def test_degree_audit_dbz_traces():
    _, tr = dbz(rotation(4))
    audit = degree_audit(tr)
    assert all(i.measured == 0 for i in audit.items if i.hard)
    _, tr = dbz(EX2)
    first = [i for i in degree_audit(tr).items if i.name.startswith("q^")]
    assert [(i.measured, i.bound) for i in first] == [(0, 0), (1, 1)]


def test_degree_audit_growth_is_quadratic():
    s = random_system(6, 2, 1)
    _, tr = dbz(s)
    audit = degree_audit(tr)
    g = audit.growth
    assert g["quadratic"] and g["quad_fit_residual"] < g["exp_fit_residual"]
    assert all(m <= b for m, b in zip(g["measured"], g["quadratic_bound"]))


def test_annihilation_sees_high_degree_perturbation():
    s = random_system(6, 4, 2039)
    res = cv_trial(s, unit(0, 6), "fast")
    row = list(res.blocks[0].last_row)
    num = [int(c) for c in row[4].num.coeffs()]
    num[42] = (num[42] + 1) % P
    row[4] = RatFun(F.poly(num), row[4].den)
    bad = UncouplingResult(res.P, [CompanionBlock(tuple(row))], res.seeds)
    assert check_annihilation(s, res) and not check_annihilation(s, bad)
    # expanded at 0 the change is O(T^42), beyond the checked order
    assert check_annihilation(s, bad, x0=0)
