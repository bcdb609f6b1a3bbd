"""Abramov-Zima partial uncoupling.

The first stage triangularises: an upper-triangular U with first row e_1
such that β = U[M] is lower-Hessenberg with ones on the superdiagonal.
The second stage runs the cyclic construction on β from e_1, which gives
a lower-unitriangular L with L[β] = C companion.  Generically P = L·U is
Δⁿ(e_1).
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra.matrix import RatMat, e_row, vjoin
from .algebra.poly import RatFun
from .cvm import UncouplingResult, last_row
from .delta import CompanionBlock, RatMatSystem, delta_apply, delta_iterate
from .errors import NonGeneric


@dataclass
class AzResult:
    U: RatMat
    beta: RatMat
    L: RatMat
    C: CompanionBlock
    ell: int

    @property
    def P(self) -> RatMat:
        return self.L @ self.U

    def to_uncoupling(self) -> UncouplingResult:
        return UncouplingResult(self.P, [self.C], [self.U.row(0)])


def az_step1(sys: RatMatSystem) -> tuple[RatMat, RatMat]:
    """U upper-triangular with U_1 = e_1 and β = U[M] lower-Hessenberg.

    Row i+1 of U is the residual of δ(U_i) after clearing coordinates 1..i
    against U_1..U_i; the multipliers form row i of β.  Raises NonGeneric
    with ``ell`` and the rows built so far if a diagonal entry of U vanishes.
    """
    n, p = sys.n, sys.p
    fld = sys.field
    zero = RatFun.const(0, fld)
    one = RatFun.const(1, fld)
    U = [RatMat.from_polymat(e_row(0, n, p))]
    diag = [one]
    beta: list[list[RatFun]] = []
    for i in range(n):
        w = delta_apply(sys, U[i])
        row = [zero] * n
        for j in range(i + 1):
            t = w.entry(0, j)
            if t.is_zero():
                continue
            b = t / diag[j]
            row[j] = b
            w = w - U[j].scale(b)
        if i + 1 < n:
            row[i + 1] = one
            pivot = w.entry(0, i + 1)
            if pivot.is_zero():
                raise NonGeneric(f"U has a zero diagonal entry at row {i + 2}",
                                 ell=i + 1, partial=(vjoin(*U), beta + [row]))
            U.append(w)
            diag.append(pivot)
        beta.append(row)
    return vjoin(*U), RatMat.from_entries(beta, p)


def az_step2(sys: RatMatSystem, U: RatMat, beta: RatMat) -> tuple[RatMat, CompanionBlock]:
    """L = Δⁿ_β(e_1) for δ_β(w) = wβ + w', and C = L[β]."""
    n, p = sys.n, sys.p
    sb = RatMatSystem.from_matrix(beta)
    e1 = RatMat.from_polymat(e_row(0, n, p))
    L = delta_iterate(sb, e1, n, check=False)
    c = last_row(sb, L, e1, "naive")
    return L, CompanionBlock(tuple(c))


def az_uncouple(sys: RatMatSystem, *, check: bool = True) -> AzResult:
    """Both steps; with ``check`` asserts L·U = Δⁿ(e_1)."""
    U, beta = az_step1(sys)
    L, C = az_step2(sys, U, beta)
    res = AzResult(U, beta, L, C, sys.n)
    if check:
        e1 = RatMat.from_polymat(e_row(0, sys.n, sys.p))
        if L @ U != delta_iterate(sys, e1, sys.n, check=False):
            raise AssertionError("L·U differs from Δⁿ(e_1)")
    return res


def beta_numerator_degree(beta: RatMat) -> int:
    """Largest numerator degree over the reduced entries of β."""
    n, m = beta.shape
    return max(beta.entry(i, j).num.degree() for i in range(n) for j in range(m))


def degree_constants(sys: RatMatSystem, res: AzResult) -> dict[str, float]:
    """deg(U)/(n·d) and deg(β)/(n²·d), entry degrees taken as max(num, den)."""
    n, d = sys.n, max(sys.d, 1)
    dU = max(res.U.num.degree(), res.U.den.degree(), 0)
    dB = max(res.beta.num.degree(), res.beta.den.degree(), 0)
    return {"U": dU / (n * d), "beta": dB / (n * n * d)}
