"""Prime fields Z/pZ and constructors for polynomials over them."""

from __future__ import annotations

from functools import lru_cache

import flint
import numpy as np

DEFAULT_PRIME = 1048583

# The numpy kernels multiply two residues in int64 before reducing.
MAX_PRIME = 2**31 - 1


class PrimeField:
    """The field K = Z/pZ.

    Polynomials over K are ``flint.nmod_poly`` objects; this class only
    builds them and carries the modulus around.
    """

    __slots__ = ("p", "zero", "one", "x")

    def __init__(self, p: int = DEFAULT_PRIME):
        p = int(p)
        if p < 3 or not flint.fmpz(p).is_prime():
            raise ValueError(f"modulus {p} is not an odd prime")
        if p > MAX_PRIME:
            raise ValueError(f"modulus {p} exceeds {MAX_PRIME}")
        self.p = p
        self.zero = flint.nmod_poly([], p)
        self.one = flint.nmod_poly([1], p)
        self.x = flint.nmod_poly([0, 1], p)

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("PrimeField", self.p))

    def __reduce__(self):
        return (field, (self.p,))

    def poly(self, coeffs) -> flint.nmod_poly:
        """Polynomial with the given coefficients, low degree first."""
        if isinstance(coeffs, flint.nmod_poly):
            return coeffs
        if isinstance(coeffs, (int, np.integer)):
            return flint.nmod_poly([int(coeffs) % self.p], self.p)
        return flint.nmod_poly([int(c) % self.p for c in coeffs], self.p)

    def const(self, c: int) -> flint.nmod_poly:
        return flint.nmod_poly([int(c) % self.p], self.p)

    def inv(self, a: int) -> int:
        a = int(a) % self.p
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p)

    def random_poly(self, rng: np.random.Generator, degree: int, *, exact: bool = True,
                    monic: bool = False) -> flint.nmod_poly:
        """Uniform coefficients; ``exact`` forces a nonzero leading coefficient."""
        if degree < 0:
            return self.zero
        c = rng.integers(0, self.p, size=degree + 1).tolist()
        if monic:
            c[-1] = 1
        elif exact and c[-1] == 0:
            c[-1] = int(rng.integers(1, self.p))
        return flint.nmod_poly(c, self.p)


@lru_cache(maxsize=None)
def field(p: int = DEFAULT_PRIME) -> PrimeField:
    """Shared field instance for modulus ``p``."""
    return PrimeField(p)


def field_of(a: flint.nmod_poly) -> PrimeField:
    return field(int(a.modulus()))
