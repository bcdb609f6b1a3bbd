"""Row solves y·A = b by evaluation and interpolation.

With g = det A, Cramer's rule makes g and every g·y_i polynomials whose
degrees the caller bounds.  We evaluate A and b at 0, 1, 2, ..., solve
over K at every point where A(x) is invertible, and interpolate g(x) and
g(x)·y(x).  The result goes through the same normal form as the naive
solver, so both agree bit for bit.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch, InsufficientPoints, SingularMatrix
from .kernels import batched_gauss_jordan, evaluate_rows, interpolate_columns, poly_to_array
from .matrix import PolyMat, RatMat, _as_ratmat


def cramer_bounds(a: PolyMat, b: PolyMat) -> tuple[int, list[int]]:
    """Degree bounds for det(a) and det(a)·y_i when y·a = b.

    With a_i the degree of row i of ``a`` and D their sum, det(a) has
    degree at most D; y_i = det(a_i ← b)/det(a) where row i is replaced
    by b, so det(a)·y_i has degree at most D - a_i + deg b.
    """
    rd = [max(r, 0) for r in a.row_degrees()]
    D = sum(rd)
    db = max(b.degree(), 0)
    return D, [D - r + db for r in rd]


def _coeff_tensor(rows, length: int) -> np.ndarray:
    m, n = len(rows), len(rows[0])
    out = np.zeros((m, n, length), dtype=np.int64)
    for i, r in enumerate(rows):
        for j, e in enumerate(r):
            if not e.is_zero():
                c = poly_to_array(e)
                out[i, j, :c.size] = c
    return out


def solve_row_fast(a, b, deg_bounds: tuple[int, int | Sequence[int]] | None = None) -> RatMat:
    """The row vector y with y·a = b for polynomial ``a`` and ``b``.

    ``deg_bounds = (det_bound, num_bounds)`` bounds deg det(a) and each
    deg(det(a)·y_i); ``num_bounds`` is one integer or one per entry.  When
    omitted, :func:`cramer_bounds` supplies them.
    """
    a = _as_ratmat(a).to_polymat()
    b = _as_ratmat(b).to_polymat()
    n = a.shape[0]
    if a.shape != (n, n):
        raise DimensionMismatch("coefficient matrix is not square")
    if b.shape != (1, n):
        raise DimensionMismatch("right-hand side must be a row of length n")
    p = a.p
    if deg_bounds is None:
        deg_bounds = cramer_bounds(a, b)
    det_bound, num_bounds = deg_bounds
    if isinstance(num_bounds, int):
        num_bounds = [num_bounds] * n
    det_bound = max(int(det_bound), 0)
    need = max([det_bound] + [int(x) for x in num_bounds]) + 1

    L = max(a.degree(), b.degree(), 0) + 1
    # transposed system: a(x)^T y^T = b(x)^T
    ca = _coeff_tensor(a.transpose().rows, L)
    cb = _coeff_tensor(b.transpose().rows, L)

    xs_ok, dets, sols = [], [], []
    have = singular = start = 0
    while have < need:
        want = need - have
        if start + want > p:
            raise InsufficientPoints(f"field of size {p} has too few evaluation points")
        xs = np.arange(start, start + want, dtype=np.int64)
        start += want
        va = evaluate_rows(ca, xs, p)  # (n, n, B)
        vb = evaluate_rows(cb, xs, p)  # (n, 1, B)
        aug = np.concatenate([va, vb], axis=1).transpose(2, 0, 1)
        det, sol, ok = batched_gauss_jordan(aug, p)
        singular += int((~ok).sum())
        if singular > det_bound:
            raise SingularMatrix("determinant vanishes at more points than its degree allows")
        xs_ok.append(xs[ok])
        dets.append(det[ok])
        sols.append(sol[ok, :, 0])
        have += int(ok.sum())
    xs = np.concatenate(xs_ok)
    det = np.concatenate(dets)
    sol = np.concatenate(sols)
    values = np.concatenate([det[:, None], sol * det[:, None] % p], axis=1)
    coeffs = interpolate_columns(xs, values, p)
    fld = a.field
    g = fld.poly(coeffs[:, 0].tolist())
    if g.is_zero():
        raise SingularMatrix("matrix is singular")
    nums = [fld.poly(coeffs[:, 1 + i].tolist()) for i in range(n)]
    return RatMat(PolyMat([nums], p), g)
