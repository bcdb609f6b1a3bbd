"""Matrices over K[X] and K(X).

``PolyMat`` is a rectangular array of polynomials.  ``RatMat`` stores a
rational matrix as ``num / den`` with one monic common denominator and no
polynomial factor shared by ``den`` and every numerator entry, which makes
the representation canonical: two RatMats are equal iff their fields are.

Indices are 0-based throughout the code.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import flint

from ..errors import DimensionMismatch, SingularMatrix
from .field import PrimeField, field
from .poly import RatFun, coeffs, lcm, monic

Poly = flint.nmod_poly


def _zero(p: int) -> Poly:
    return flint.nmod_poly([], p)


def _one(p: int) -> Poly:
    return flint.nmod_poly([1], p)


class PolyMat:
    __slots__ = ("rows", "p")

    def __init__(self, rows: Sequence[Sequence[Poly]], p: int):
        self.rows = [list(r) for r in rows]
        self.p = int(p)
        if self.rows:
            w = len(self.rows[0])
            if any(len(r) != w for r in self.rows):
                raise DimensionMismatch("ragged rows")

    @classmethod
    def from_coeffs(cls, data, fld: PrimeField) -> PolyMat:
        """Build from nested lists whose leaves are ints or coefficient lists."""
        return cls([[fld.poly(c) for c in row] for row in data], fld.p)

    @classmethod
    def zeros(cls, m: int, n: int, p: int) -> PolyMat:
        return cls([[_zero(p) for _ in range(n)] for _ in range(m)], p)

    @classmethod
    def identity(cls, n: int, p: int) -> PolyMat:
        z, o = _zero(p), _one(p)
        return cls([[o if i == j else z for j in range(n)] for i in range(n)], p)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    @property
    def field(self) -> PrimeField:
        return field(self.p)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        if isinstance(other, RatMat):
            return other == RatMat.from_polymat(self)
        return isinstance(other, PolyMat) and self.p == other.p and self.rows == other.rows

    def __hash__(self):
        return hash(tuple(tuple(tuple(coeffs(e)) for e in r) for r in self.rows))

    def __repr__(self):
        body = ", ".join("[" + ", ".join(str(e) for e in r) + "]" for r in self.rows)
        return f"PolyMat([{body}])"

    def degree(self) -> int:
        """Largest entry degree; -1 for the zero matrix."""
        return max((e.degree() for r in self.rows for e in r), default=-1)

    def row_degrees(self) -> list[int]:
        return [max((e.degree() for e in r), default=-1) for r in self.rows]

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.rows for e in r)

    def transpose(self) -> PolyMat:
        m, n = self.shape
        return PolyMat([[self.rows[i][j] for i in range(m)] for j in range(n)], self.p)

    def derivative(self) -> PolyMat:
        return PolyMat([[e.derivative() for e in r] for r in self.rows], self.p)

    def scale(self, c: Poly) -> PolyMat:
        return PolyMat([[e * c for e in r] for r in self.rows], self.p)

    def __add__(self, other: PolyMat) -> PolyMat:
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return PolyMat([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.p)

    def __sub__(self, other: PolyMat) -> PolyMat:
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} - {other.shape}")
        return PolyMat([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.p)

    def __neg__(self) -> PolyMat:
        return PolyMat([[-a for a in r] for r in self.rows], self.p)

    def __matmul__(self, other: PolyMat) -> PolyMat:
        return mat_mul(self, other)


def mat_mul(a: PolyMat, b: PolyMat) -> PolyMat:
    """Product by the naive triple loop over K[X]."""
    m, k = a.shape
    k2, n = b.shape
    if k != k2:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    p = a.p
    cols = [[b.rows[t][j] for t in range(k)] for j in range(n)]
    out = []
    for row in a.rows:
        live = [(t, x) for t, x in enumerate(row) if not x.is_zero()]
        new = []
        for j in range(n):
            col = cols[j]
            acc = _zero(p)
            for t, x in live:
                y = col[t]
                if not y.is_zero():
                    acc += x * y
            new.append(acc)
        out.append(new)
    return PolyMat(out, p)


def mat_det(a: PolyMat) -> Poly:
    """Determinant by fraction-free (Bareiss) elimination."""
    n, m = a.shape
    if n != m:
        raise DimensionMismatch("determinant of a non-square matrix")
    p = a.p
    if n == 0:
        return _one(p)
    w = [list(r) for r in a.rows]
    sign = 1
    prev = _one(p)
    for k in range(n - 1):
        r = next((i for i in range(k, n) if not w[i][k].is_zero()), None)
        if r is None:
            return _zero(p)
        if r != k:
            w[k], w[r] = w[r], w[k]
            sign = -sign
        pk = w[k][k]
        for i in range(k + 1, n):
            wik = w[i][k]
            row_i, row_k = w[i], w[k]
            for j in range(k + 1, n):
                row_i[j] = (pk * row_i[j] - wik * row_k[j]) // prev
        prev = pk
    det = w[n - 1][n - 1]
    return det if sign == 1 else -det


def fraction_free_gauss_jordan(a: PolyMat, rhs: PolyMat):
    """Solve a·X = rhs over K(X) without fractions.

    Returns ``(g, Y)`` with ``g = ±det(a)`` nonzero and ``Y = g·a⁻¹·rhs`` a
    polynomial matrix.  Raises SingularMatrix when ``det(a) = 0``.
    """
    n, m = a.shape
    if n != m:
        raise DimensionMismatch("coefficient matrix is not square")
    if rhs.shape[0] != n:
        raise DimensionMismatch("right-hand side has the wrong number of rows")
    p = a.p
    w = [list(ra) + list(rb) for ra, rb in zip(a.rows, rhs.rows)]
    width = n + rhs.shape[1]
    prev = _one(p)
    for k in range(n):
        r = next((i for i in range(k, n) if not w[i][k].is_zero()), None)
        if r is None:
            raise SingularMatrix("matrix is singular")
        if r != k:
            w[k], w[r] = w[r], w[k]
        pk = w[k][k]
        row_k = w[k]
        for i in range(n):
            if i == k:
                continue
            row_i = w[i]
            f = row_i[k]
            if f.is_zero():
                # row_i[j] = pk·row_i[j] / prev for the remaining columns
                if pk != prev:
                    for j in range(k + 1, width):
                        if not row_i[j].is_zero():
                            row_i[j] = (pk * row_i[j]) // prev
            else:
                for j in range(k + 1, width):
                    row_i[j] = (pk * row_i[j] - f * row_k[j]) // prev
            row_i[k] = _zero(p)
        prev = pk
    return prev, PolyMat([r[n:] for r in w], p)


class RatMat:
    """A matrix over K(X) in common-denominator normal form."""

    __slots__ = ("num", "den")

    def __init__(self, num: PolyMat, den: Poly | None = None, *, normalized: bool = False):
        if den is None:
            den = _one(num.p)
            normalized = True
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if not normalized:
            num, den = _normalize(num, den)
        self.num = num
        self.den = den

    @classmethod
    def from_polymat(cls, a: PolyMat) -> RatMat:
        return cls(a, _one(a.p), normalized=True)

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence[RatFun]], p: int) -> RatMat:
        den = _one(p)
        for r in entries:
            for e in r:
                if not e.is_polynomial():
                    den = lcm(den, e.den) if den.degree() > 0 else e.den
        rows = [[e.num * (den // e.den) for e in r] for r in entries]
        return cls(PolyMat(rows, p), den, normalized=True)

    @classmethod
    def identity(cls, n: int, p: int) -> RatMat:
        return cls.from_polymat(PolyMat.identity(n, p))

    @classmethod
    def zeros(cls, m: int, n: int, p: int) -> RatMat:
        return cls.from_polymat(PolyMat.zeros(m, n, p))

    @property
    def p(self) -> int:
        return self.num.p

    @property
    def shape(self):
        return self.num.shape

    @property
    def rows(self):
        return self.num.rows

    def entry(self, i: int, j: int) -> RatFun:
        return RatFun(self.num.rows[i][j], self.den)

    def __getitem__(self, ij) -> RatFun:
        return self.entry(*ij)

    def entries(self) -> list[list[RatFun]]:
        m, n = self.shape
        return [[self.entry(i, j) for j in range(n)] for i in range(m)]

    def row(self, i: int) -> RatMat:
        return RatMat(PolyMat([self.num.rows[i]], self.p), self.den)

    def is_polynomial(self) -> bool:
        return self.den.degree() == 0

    def to_polymat(self) -> PolyMat:
        if not self.is_polynomial():
            raise ValueError("matrix has a nontrivial denominator")
        return self.num

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def degree(self) -> int:
        """Largest degree of a reduced entry (max of numerator and denominator)."""
        m, n = self.shape
        if self.den.degree() == 0:
            return max(self.num.degree(), 0)
        return max((self.entry(i, j).degree() for i in range(m) for j in range(n)), default=0)

    def __eq__(self, other):
        if isinstance(other, PolyMat):
            other = RatMat.from_polymat(other)
        if not isinstance(other, RatMat):
            return NotImplemented
        return self.den == other.den and self.num == other.num

    def __hash__(self):
        return hash((hash(self.num), tuple(coeffs(self.den))))

    def __repr__(self):
        if self.is_polynomial():
            return f"RatMat({self.num!r})"
        return f"RatMat({self.num!r} / ({self.den}))"

    def transpose(self) -> RatMat:
        return RatMat(self.num.transpose(), self.den, normalized=True)

    def __neg__(self) -> RatMat:
        return RatMat(-self.num, self.den, normalized=True)

    def _combine(self, other: RatMat, sign: int) -> RatMat:
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} vs {other.shape}")
        if self.den == other.den:
            num = self.num + other.num if sign > 0 else self.num - other.num
            return RatMat(num, self.den)
        g = self.den.gcd(other.den)
        fa, fb = other.den // g, self.den // g
        a, b = self.num.scale(fa), other.num.scale(fb)
        return RatMat(a + b if sign > 0 else a - b, self.den * fa)

    def __add__(self, other):
        return self._combine(_as_ratmat(other), 1)

    def __sub__(self, other):
        return self._combine(_as_ratmat(other), -1)

    def __matmul__(self, other):
        other = _as_ratmat(other)
        return RatMat(mat_mul(self.num, other.num), self.den * other.den)

    def __rmatmul__(self, other):
        return _as_ratmat(other) @ self

    def scale(self, c) -> RatMat:
        """Multiply every entry by a polynomial or RatFun."""
        if isinstance(c, RatFun):
            return RatMat(self.num.scale(c.num), self.den * c.den)
        return RatMat(self.num.scale(c), self.den)

    def derivative(self) -> RatMat:
        """Entrywise formal derivative."""
        if self.den.degree() <= 0:
            return RatMat(self.num.derivative(), self.den, normalized=True)
        dd = self.den.derivative()
        rows = [[e.derivative() * self.den - e * dd for e in r] for r in self.num.rows]
        return RatMat(PolyMat(rows, self.p), self.den * self.den)

    def vjoin(self, *others: RatMat) -> RatMat:
        return vjoin(self, *others)


def _as_ratmat(x) -> RatMat:
    if isinstance(x, RatMat):
        return x
    if isinstance(x, PolyMat):
        return RatMat.from_polymat(x)
    raise TypeError(f"cannot use {type(x).__name__} as a matrix")


def _mix_coeff(k: int, p: int) -> int:
    return (k * 2654435761 + 97) % p or 1


def _normalize(num: PolyMat, den: Poly):
    """Remove the common factor of den and all entries; make den monic."""
    p = num.p
    if num.is_zero():
        return num, _one(p)
    if den.degree() > 0:
        comb = _zero(p)
        k = 0
        for r in num.rows:
            for e in r:
                if not e.is_zero():
                    comb += e * _mix_coeff(k, p)
                k += 1
        g = den.gcd(comb)
        if g.degree() > 0:
            divided = _divide_all(num, g)
            if divided is None:
                g = den
                for r in num.rows:
                    for e in r:
                        if g.degree() == 0:
                            break
                        if not e.is_zero():
                            g = g.gcd(e)
                divided = _divide_all(num, g) if g.degree() > 0 else num
            num, den = divided, den // g
    lc = int(den.leading_coefficient())
    if lc != 1:
        inv = pow(lc, -1, p)
        num = num.scale(flint.nmod_poly([inv], p))
        den = den * inv
    return num, den


def _divide_all(num: PolyMat, g: Poly):
    rows = []
    for r in num.rows:
        new = []
        for e in r:
            if e.is_zero():
                new.append(e)
                continue
            qt, rm = divmod(e, g)
            if not rm.is_zero():
                return None
            new.append(qt)
        rows.append(new)
    return PolyMat(rows, num.p)


def vjoin(*mats) -> RatMat:
    """Stack matrices vertically over a common denominator."""
    mats = [_as_ratmat(m) for m in mats]
    if not mats:
        raise ValueError("nothing to join")
    p = mats[0].p
    width = mats[0].shape[1]
    den = mats[0].den
    for m in mats[1:]:
        if m.shape[1] != width:
            raise DimensionMismatch("column counts differ")
        den = lcm(den, m.den) if (den.degree() > 0 or m.den.degree() > 0) else den
    rows = []
    for m in mats:
        f = den // m.den
        rows.extend([[e * f for e in r] for r in m.num.rows] if f.degree() > 0 else m.num.rows)
    return RatMat(PolyMat(rows, p), monic(den), normalized=den.degree() == 0)


def block_diag(*mats) -> RatMat:
    mats = [_as_ratmat(m) for m in mats]
    p = mats[0].p
    n = sum(m.shape[0] for m in mats)
    pieces = []
    off = 0
    for m in mats:
        k = m.shape[0]
        rows = [[_zero(p)] * off + list(r) + [_zero(p)] * (n - off - k) for r in m.num.rows]
        pieces.append(RatMat(PolyMat(rows, p), m.den, normalized=True))
        off += k
    return vjoin(*pieces)


def mat_inverse(a) -> RatMat:
    """Exact inverse over K(X); raises SingularMatrix when det = 0."""
    a = _as_ratmat(a)
    n, m = a.shape
    if n != m:
        raise DimensionMismatch("inverse of a non-square matrix")
    p = a.p
    g, y = fraction_free_gauss_jordan(a.num, PolyMat.identity(n, p))
    # a = N/den, so a^{-1} = den·N^{-1} = den·y/g
    return RatMat(y.scale(a.den), g)


def adjugate(a: PolyMat) -> tuple[Poly, PolyMat]:
    """(det a, adj a) for an invertible polynomial matrix."""
    g, y = fraction_free_gauss_jordan(a, PolyMat.identity(a.shape[0], a.p))
    det = mat_det(a)
    # y = g·a^{-1} and adj = det·a^{-1}; g = ±det
    if g == det:
        return det, y
    return det, -y


def solve_row_naive(a, b) -> RatMat:
    """The row vector y with y·a = b, by fraction-free elimination."""
    a = _as_ratmat(a)
    b = _as_ratmat(b)
    n = a.shape[0]
    if a.shape != (n, n):
        raise DimensionMismatch("coefficient matrix is not square")
    if b.shape[1] != n:
        raise DimensionMismatch("row vector length differs from matrix size")
    g, y = fraction_free_gauss_jordan(a.num.transpose(), b.num.transpose())
    # y·(N/da) = Nb/db  =>  y = da·Nb·N^{-1}/db
    return RatMat(y.transpose().scale(a.den), g * b.den)


# ---- constructors ---------------------------------------------------------

def e_row(i: int, n: int, p: int) -> PolyMat:
    """The unit row vector e_i (0-based)."""
    z, o = _zero(p), _one(p)
    return PolyMat([[o if j == i else z for j in range(n)]], p)


def elementary(i: int, j: int, t, n: int, p: int) -> RatMat:
    """E_{i,j}(t): the identity with its (i, j) entry replaced by t."""
    t = _as_ratfun(t, p)
    entries = [[RatFun.const(1 if a == b else 0, field(p)) for b in range(n)] for a in range(n)]
    if i == j:
        entries[i][i] = t
    else:
        entries[i][j] = t
    return RatMat.from_entries(entries, p)


def row_replace(i: int, u, n: int) -> RatMat:
    """E_i(u): the identity with row i replaced by the row vector u."""
    u = _as_ratmat(u)
    p = u.p
    rows = [RatMat.from_polymat(e_row(a, n, p)) if a != i else u for a in range(n)]
    return vjoin(*rows)


def swap_matrix(j: int, k: int, n: int, p: int) -> PolyMat:
    """Inv^{(j,k)}: the permutation matrix exchanging indices j and k."""
    perm = list(range(n))
    perm[j], perm[k] = perm[k], perm[j]
    return PolyMat([e_row(perm[a], n, p).rows[0] for a in range(n)], p)


def rot(n: int, p: int) -> PolyMat:
    """Rot = VJoin(e_n, e_1, ..., e_{n-1})."""
    return PolyMat([e_row((a - 1) % n, n, p).rows[0] for a in range(n)], p)


def companion(last_row: Sequence[RatFun], p: int) -> RatMat:
    """VJoin(e_2, ..., e_k, c) for c = last_row."""
    k = len(last_row)
    fld = field(p)
    entries = [[RatFun.const(1 if b == a + 1 else 0, fld) for b in range(k)] for a in range(k - 1)]
    entries.append(list(last_row))
    return RatMat.from_entries(entries, p)


def _as_ratfun(t, p: int) -> RatFun:
    if isinstance(t, RatFun):
        return t
    if isinstance(t, flint.nmod_poly):
        return RatFun(t, reduced=True)
    return RatFun.const(int(t), field(p))


def from_rows(rows: Iterable[RatMat]) -> RatMat:
    return vjoin(*rows)
