"""Exact arithmetic over Z/pZ, K[X], K(X) and matrices over them."""

from .field import DEFAULT_PRIME, PrimeField, field, field_of
from .matrix import (
    PolyMat,
    RatMat,
    adjugate,
    block_diag,
    companion,
    e_row,
    elementary,
    fraction_free_gauss_jordan,
    mat_det,
    mat_inverse,
    mat_mul,
    rot,
    row_replace,
    solve_row_naive,
    swap_matrix,
    vjoin,
)
from .poly import (
    Poly,
    RatFun,
    coeffs,
    degree,
    monic,
    poly_eval,
    poly_interpolate,
    poly_mul,
    poly_mul_schoolbook,
)
from .solve import cramer_bounds, solve_row_fast

__all__ = [
    "DEFAULT_PRIME", "PrimeField", "field", "field_of",
    "PolyMat", "RatMat", "adjugate", "block_diag", "companion", "e_row", "elementary",
    "fraction_free_gauss_jordan", "mat_det", "mat_inverse", "mat_mul", "rot", "row_replace",
    "solve_row_naive", "swap_matrix", "vjoin",
    "Poly", "RatFun", "coeffs", "degree", "monic", "poly_eval", "poly_interpolate",
    "poly_mul", "poly_mul_schoolbook",
    "cramer_bounds", "solve_row_fast",
]
