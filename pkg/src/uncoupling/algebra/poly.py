"""Dense univariate polynomials over Z/pZ and reduced rational functions.

Polynomials are ``flint.nmod_poly`` values; the helpers here give them the
vocabulary the rest of the package uses.  The zero polynomial has degree -1.
"""

from __future__ import annotations

import flint
import numpy as np

from ..errors import DuplicatePoint
from .field import PrimeField, field_of
from .kernels import interpolate_columns

Poly = flint.nmod_poly


def degree(a: Poly) -> int:
    return a.degree()


def coeffs(a: Poly) -> list[int]:
    """Coefficients low to high; the zero polynomial gives ``[]``."""
    return [int(c) for c in a.coeffs()]


def poly_mul(a: Poly, b: Poly) -> Poly:
    """Product in K[X] (FLINT's multiplication)."""
    return a * b


def poly_mul_schoolbook(a: Poly, b: Poly) -> Poly:
    """Product in K[X] by the quadratic double loop."""
    p = int(a.modulus())
    ca, cb = coeffs(a), coeffs(b)
    if not ca or not cb:
        return flint.nmod_poly([], p)
    out = [0] * (len(ca) + len(cb) - 1)
    for i, x in enumerate(ca):
        if x:
            for j, y in enumerate(cb):
                out[i + j] += x * y
    return flint.nmod_poly([c % p for c in out], p)


def poly_eval(a: Poly, x: int) -> int:
    return int(a(int(x) % int(a.modulus())))


def poly_interpolate(points, values, fld: PrimeField) -> Poly:
    """The unique polynomial of degree < len(points) through the given values."""
    points = [int(x) % fld.p for x in points]
    if len(set(points)) != len(points):
        raise DuplicatePoint("interpolation points are not pairwise distinct")
    if len(points) != len(values):
        raise ValueError("points and values differ in length")
    if not points:
        return fld.zero
    out = interpolate_columns(np.array(points), np.array([int(v) % fld.p for v in values]), fld.p)
    return flint.nmod_poly(out[:, 0].tolist(), fld.p)


def monic(a: Poly) -> Poly:
    if a.is_zero():
        return a
    lc = int(a.leading_coefficient())
    if lc == 1:
        return a
    return a * pow(lc, -1, int(a.modulus()))


def lcm(a: Poly, b: Poly) -> Poly:
    """Monic least common multiple of two nonzero polynomials."""
    if a.degree() <= 0:
        return monic(b)
    if b.degree() <= 0:
        return monic(a)
    return monic((a // a.gcd(b)) * b)


def shift(a: Poly, x0: int) -> Poly:
    """a(X + x0)."""
    if x0 == 0 or a.degree() <= 0:
        return a
    p = int(a.modulus())
    return a.compose(flint.nmod_poly([x0 % p, 1], p))


class RatFun:
    """A reduced fraction num/den with den monic."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, *, reduced=False):
        if not isinstance(num, flint.nmod_poly):
            raise TypeError("numerator must be an nmod_poly")
        if den is None:
            den = flint.nmod_poly([1], int(num.modulus()))
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if not reduced:
            if num.is_zero():
                den = flint.nmod_poly([1], int(num.modulus()))
            else:
                g = num.gcd(den)
                if g.degree() > 0:
                    num, den = num // g, den // g
            lc = int(den.leading_coefficient())
            if lc != 1:
                inv = pow(lc, -1, int(den.modulus()))
                num, den = num * inv, den * inv
        self.num = num
        self.den = den

    @classmethod
    def const(cls, c: int, fld: PrimeField) -> RatFun:
        return cls(fld.const(c), fld.one, reduced=True)

    @property
    def modulus(self) -> int:
        return int(self.num.modulus())

    def degree(self) -> int:
        """max(deg num, deg den); 0 for the zero function."""
        return max(self.num.degree(), self.den.degree(), 0)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.degree() == 0

    def _coerce(self, other):
        if isinstance(other, RatFun):
            return other
        if isinstance(other, flint.nmod_poly):
            return RatFun(other, reduced=True)
        if isinstance(other, int):
            p = self.modulus
            return RatFun(flint.nmod_poly([other % p], p), reduced=True)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RatFun(self.num + other.num, self.den)
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den, reduced=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RatFun(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> RatFun:
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFun(self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def derivative(self) -> RatFun:
        n, d = self.num, self.den
        return RatFun(n.derivative() * d - n * d.derivative(), d * d)

    def __call__(self, x: int) -> int:
        dv = int(self.den(x))
        if dv == 0:
            raise ZeroDivisionError(f"pole at {x}")
        return int(self.num(x)) * pow(dv, -1, self.modulus) % self.modulus

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((tuple(coeffs(self.num)), tuple(coeffs(self.den))))

    def __repr__(self):
        if self.is_polynomial():
            return f"RatFun({self.num})"
        return f"RatFun(({self.num}) / ({self.den}))"

    @property
    def field(self) -> PrimeField:
        return field_of(self.num)
