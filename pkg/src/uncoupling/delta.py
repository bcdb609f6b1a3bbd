"""The derivation δ(u) = uM + u' attached to a system Y' = MY, gauge
transformations P[A] = (PA + P')P⁻¹, and block-shape predicates."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import flint

from .algebra.field import PrimeField, field
from .algebra.matrix import PolyMat, RatMat, _as_ratmat, companion, mat_inverse, vjoin
from .algebra.poly import RatFun
from .errors import BoundViolated, DimensionMismatch

Poly = flint.nmod_poly


@dataclass(frozen=True, eq=False)
class RatMatSystem:
    """Y' = MY with M = N/q, deg N ≤ d and deg q ≤ d."""

    N: PolyMat
    q: Poly
    d: int

    def __post_init__(self):
        n, m = self.N.shape
        if n != m:
            raise DimensionMismatch("system matrix must be square")
        if self.q.is_zero():
            raise ZeroDivisionError("denominator q is zero")
        if self.q.degree() > self.d or self.N.degree() > self.d:
            raise ValueError(f"degrees exceed the declared bound d = {self.d}")
        if int(self.q.modulus()) != self.N.p:
            raise ValueError("q and N live over different fields")

    @classmethod
    def from_matrix(cls, M, d: int | None = None) -> RatMatSystem:
        """System for an arbitrary rational matrix, using its common denominator as q."""
        M = _as_ratmat(M)
        if d is None:
            d = max(M.num.degree(), M.den.degree(), 0)
        return cls(M.num, M.den, d)

    @property
    def n(self) -> int:
        return self.N.shape[0]

    @property
    def p(self) -> int:
        return self.N.p

    @property
    def field(self) -> PrimeField:
        return field(self.p)

    @property
    def M(self) -> RatMat:
        return RatMat(self.N, self.q)

    def __eq__(self, other):
        return (isinstance(other, RatMatSystem) and self.d == other.d
                and self.q == other.q and self.N == other.N)

    def __hash__(self):
        return hash((self.d, hash(self.N)))


@dataclass(frozen=True)
class CompanionBlock:
    """VJoin(e_2, ..., e_k, c) stored through its last row c."""

    last_row: tuple[RatFun, ...]

    @property
    def k(self) -> int:
        return len(self.last_row)

    def matrix(self, p: int) -> RatMat:
        return companion(self.last_row, p)

    @classmethod
    def from_matrix(cls, C: RatMat) -> CompanionBlock:
        k = C.shape[0]
        return cls(tuple(C.entry(k - 1, j) for j in range(k)))


@dataclass
class GaugeState:
    """A pair (A, P) meant to satisfy A = P[M] for the origin's M."""

    origin: RatMatSystem
    A: RatMat
    P: RatMat

    @classmethod
    def initial(cls, sys: RatMatSystem) -> GaugeState:
        return cls(sys, sys.M, RatMat.identity(sys.n, sys.p))

    def invariant_holds(self) -> bool:
        # A = δ(P)P⁻¹  <=>  δ(P) = A·P, which avoids inverting P
        return delta_apply(self.origin, self.P) == self.A @ self.P


def delta_apply(sys: RatMatSystem, u) -> RatMat:
    """δ(u) = uM + u', row by row when u has several rows."""
    u = _as_ratmat(u)
    if u.shape[1] != sys.n:
        raise DimensionMismatch(f"row length {u.shape[1]} differs from n = {sys.n}")
    return u @ sys.M + u.derivative()


def cleared_degree(row: RatMat, mult: Poly) -> int | None:
    """deg(mult·row) if it is a polynomial vector, otherwise None."""
    if row.den.degree() > 0:
        quo, rem = divmod(mult, row.den)
        if not rem.is_zero():
            return None
        return row.num.degree() + quo.degree() if not row.num.is_zero() else -1
    return row.num.degree() + mult.degree() if not row.num.is_zero() else -1


def delta_iterate(sys: RatMatSystem, u, k: int, *, check: bool = True) -> RatMat:
    """Δ^k(u) = VJoin(u, δ(u), ..., δ^{k-1}(u)).

    For polynomial u, ``check`` asserts that q^j·δ^j(u) is polynomial of
    degree at most deg(u) + j·d, raising BoundViolated otherwise.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    u = _as_ratmat(u)
    if u.shape != (1, sys.n):
        raise DimensionMismatch("u must be a single row of length n")
    rows = [u]
    for _ in range(k - 1):
        rows.append(delta_apply(sys, rows[-1]))
    if check and u.is_polynomial():
        check_cleared_degrees(sys, rows)
    return vjoin(*rows)


def check_cleared_degrees(sys: RatMatSystem, rows: Sequence[RatMat]) -> list[int]:
    """Cleared degrees deg(q^j·δ^j(u)); raises BoundViolated past deg u + j·d."""
    du = max(rows[0].num.degree(), 0)
    qj = sys.field.one
    out = []
    for j, r in enumerate(rows):
        deg = cleared_degree(r, qj)
        if deg is None:
            raise BoundViolated(f"q^{j}·δ^{j}(u) is not polynomial")
        if deg > du + j * sys.d:
            raise BoundViolated(f"deg q^{j}·δ^{j}(u) = {deg} exceeds {du + j * sys.d}")
        out.append(deg)
        qj = qj * sys.q
    return out


def cleared_iterate(sys: RatMatSystem, u: PolyMat, k: int) -> list[list[Poly]]:
    """The polynomial rows R_j = q^{j-1}·δ^{j-1}(u) for j = 1..k.

    Uses R_{j+1} = R_j·N + q·R_j' - (j-1)·q'·R_j.
    """
    if u.shape != (1, sys.n):
        raise DimensionMismatch("u must be a single row of length n")
    q, dq, N = sys.q, sys.q.derivative(), sys.N
    n = sys.n
    rows = [list(u.rows[0])]
    for j in range(1, k):
        r = rows[-1]
        new = []
        for c in range(n):
            acc = q * r[c].derivative()
            if j > 1 and not dq.is_zero():
                acc -= (j - 1) * dq * r[c]
            for t in range(n):
                if not r[t].is_zero():
                    acc += r[t] * N.rows[t][c]
            new.append(acc)
        rows.append(new)
    return rows


def gauge_transform(A, P) -> RatMat:
    """P[A] = (PA + P')P⁻¹; A may be a matrix or a RatMatSystem."""
    if isinstance(A, RatMatSystem):
        A = A.M
    A, P = _as_ratmat(A), _as_ratmat(P)
    if A.shape != P.shape or A.shape[0] != A.shape[1]:
        raise DimensionMismatch("gauge transform needs square matrices of equal size")
    return (P @ A + P.derivative()) @ mat_inverse(P)


# ---- shapes -----------------------------------------------------------------

@dataclass
class ShapeReport:
    n: int
    k: int                       # rows 1..k-1 are in companion shape
    companion: bool
    shape_I: bool
    shape_II: bool
    diagonal_companion: bool
    block_sizes: tuple[int, ...] | None
    alpha: RatMat | None = dc_field(default=None, repr=False)
    beta: RatMat | None = dc_field(default=None, repr=False)
    v: RatMat | None = dc_field(default=None, repr=False)


def _is_unit_row(row, j: int) -> bool:
    """row == e_j (0-based) for a numerator row over a monic common denominator."""
    return all(e.is_zero() for c, e in enumerate(row) if c != j)


def _row_is_e(A: RatMat, i: int, j: int) -> bool:
    row = A.num.rows[i]
    if not _is_unit_row(row, j):
        return False
    return row[j] == A.den


def companion_prefix(A: RatMat) -> int:
    """Largest k such that rows 0..k-2 equal e_1..e_{k-1} (0-based unit rows)."""
    n = A.shape[0]
    k = 1
    while k < n and _row_is_e(A, k - 1, k):
        k += 1
    return k


def _block_zero(A: RatMat, rows, cols) -> bool:
    return all(A.num.rows[i][j].is_zero() for i in rows for j in cols)


def _sub(A: RatMat, rows: range, cols: range) -> RatMat:
    return RatMat(PolyMat([[A.num.rows[i][j] for j in cols] for i in rows], A.p), A.den)


def diagonal_blocks(A: RatMat) -> tuple[int, ...] | None:
    """Block sizes if A = diag of companion matrices, else None."""
    n = A.shape[0]
    sizes = []
    o = 0
    while o < n:
        s = 1
        while o + s < n and _row_is_e(A, o + s - 1, o + s):
            s += 1
        last = o + s - 1
        outside = [j for j in range(n) if j < o or j >= o + s]
        if not _block_zero(A, [last], outside):
            return None
        sizes.append(s)
        o += s
    return tuple(sizes)


def shape_detect(A) -> ShapeReport:
    A = _as_ratmat(A)
    n, m = A.shape
    if n != m:
        raise DimensionMismatch("shape detection needs a square matrix")
    k = companion_prefix(A)
    companion_flag = k == n
    shape_I = companion_flag or _block_zero(A, [k - 1], range(k, n))
    alpha = beta = v = None
    shape_II = False
    if shape_I and not companion_flag:
        alpha = _sub(A, range(k, n), range(0, k))
        beta = _sub(A, range(k, n), range(k, n))
        v = _sub(A, range(k, n), range(0, 1))
        shape_II = _block_zero(A, range(k, n), range(1, k))
    elif companion_flag:
        shape_II = True
    blocks = diagonal_blocks(A)
    return ShapeReport(n, k, companion_flag, shape_I, shape_II, blocks is not None, blocks,
                       alpha, beta, v)


def is_shape_III(A: RatMat, k: int) -> bool:
    """Shape III around a companion block C occupying rows and columns 1..k."""
    n = A.shape[0]
    if k + 1 > n:
        return False
    if not (A.num.rows[0][1] == A.den and _block_zero(A, [0], range(2, k + 1))):
        return False
    for i in range(1, k):
        if not _row_is_e(A, i, i + 1):
            return False
    if not _block_zero(A, [k], [0] + list(range(k + 1, n))):
        return False
    return _block_zero(A, range(k + 1, n), range(1, k + 1))
