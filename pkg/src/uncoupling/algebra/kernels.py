"""Vectorised modular kernels over int64 arrays.

All arrays hold residues in [0, p) with p < 2**31, so the product of two
residues fits in int64.
"""

from __future__ import annotations

import flint
import numpy as np

from ..errors import DuplicatePoint

# float64 represents integers exactly below 2**53
_EXACT = float(2**53)


def poly_to_array(a: flint.nmod_poly, length: int | None = None) -> np.ndarray:
    c = [int(v) for v in a.coeffs()]
    if length is not None:
        if len(c) > length:
            raise ValueError("polynomial longer than requested length")
        c.extend([0] * (length - len(c)))
    return np.array(c, dtype=np.int64)


def array_to_poly(arr, p: int) -> flint.nmod_poly:
    return flint.nmod_poly([int(v) for v in np.asarray(arr).ravel()], p)


def inv_mod(a: np.ndarray, p: int) -> np.ndarray:
    """Elementwise inverse by Fermat exponentiation; zeros map to zero."""
    a = np.asarray(a, dtype=np.int64) % p
    result = np.ones_like(a)
    base = a.copy()
    e = p - 2
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


def _chunked_product(a: np.ndarray, b: np.ndarray, bound: int, p: int) -> np.ndarray:
    """(a @ b) mod p through float64 BLAS.

    ``bound`` bounds the product of two entries; the inner dimension is cut
    into chunks whose partial sums stay below 2**53.
    """
    k = a.shape[1]
    step = max(1, int(_EXACT // bound) - 1)
    out = None
    for s in range(0, k, step):
        part = np.asarray(a[:, s:s + step], dtype=np.float64) @ np.asarray(b[s:s + step], dtype=np.float64)
        part = np.fmod(part, p).astype(np.int64)
        out = part if out is None else (out + part) % p
    return out


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """(a @ b) mod p for 2-d residue arrays."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    bound = (p - 1) ** 2
    if bound * 64 < _EXACT:
        return _chunked_product(a, b, bound, p)
    # split both operands into 16-bit halves: a = a1*2^16 + a0
    a1, a0 = a >> 16, a & 0xFFFF
    b1, b0 = b >> 16, b & 0xFFFF
    half = 2**32
    hh = _chunked_product(a1, b1, half, p)
    mid = (_chunked_product(a1, b0, half, p) + _chunked_product(a0, b1, half, p)) % p
    ll = _chunked_product(a0, b0, half, p)
    shift = pow(2, 16, p)
    return ((hh * shift % p) * shift % p + mid * shift % p + ll) % p


def powers(xs: np.ndarray, length: int, p: int) -> np.ndarray:
    """Matrix V with V[k, i] = xs[i]**k mod p, shape (length, len(xs))."""
    xs = np.asarray(xs, dtype=np.int64) % p
    v = np.empty((length, xs.size), dtype=np.int64)
    if length == 0:
        return v
    v[0] = 1
    for k in range(1, length):
        v[k] = v[k - 1] * xs % p
    return v


def evaluate_rows(coeffs: np.ndarray, xs: np.ndarray, p: int) -> np.ndarray:
    """Evaluate the polynomials stored along the last axis of ``coeffs``.

    ``coeffs`` has shape (..., L); the result has shape (..., len(xs)).
    """
    lead = coeffs.shape[:-1]
    L = coeffs.shape[-1]
    flat = coeffs.reshape(-1, L)
    out = matmul_mod(flat, powers(xs, L, p), p)
    return out.reshape(*lead, len(xs))


def _master_poly(xs: np.ndarray, p: int) -> np.ndarray:
    """Coefficients of Π (X - x_j), low degree first (length N + 1)."""
    layer = [flint.nmod_poly([(-int(x)) % p, 1], p) for x in xs]
    while len(layer) > 1:
        nxt = [layer[i] * layer[i + 1] for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return poly_to_array(layer[0], xs.size + 1)


def interpolate_columns(xs, values, p: int, block: int = 256) -> np.ndarray:
    """Lagrange interpolation of every column of ``values`` at points ``xs``.

    ``values`` has shape (N, m); returns coefficients of shape (N, m), low
    degree first, each column of degree < N.

    With Π = Π_j (X - x_j) and Π/(X - x_i) = Σ_k b_{i,k} X^k, the answer is
    coeff_k = Σ_i b_{i,k}·v_i/Π'(x_i).  The b_{i,k} come out of synthetic
    division one k at a time for all i at once, so the sum over i is a
    matrix product done in blocks of ``block`` coefficients.
    """
    xs = np.asarray(xs, dtype=np.int64) % p
    vals = np.asarray(values, dtype=np.int64) % p
    if vals.ndim == 1:
        vals = vals[:, None]
    N = xs.size
    if N == 0:
        return np.zeros((0, vals.shape[1]), dtype=np.int64)
    if np.unique(xs).size != N:
        raise DuplicatePoint("interpolation points are not pairwise distinct")
    a = _master_poly(xs, p)
    # pass 1: h_i = (Π/(X - x_i))(x_i) = Π'(x_i), by Horner along the division
    b = np.ones(N, dtype=np.int64)
    h = b.copy()
    for k in range(N - 1, 0, -1):
        b = (a[k] + xs * b) % p
        h = (h * xs + b) % p
    wv = vals * inv_mod(h, p)[:, None] % p
    # pass 2: rows b_{., k} for k = N-1 down to 0, multiplied blockwise
    out = np.zeros((N, vals.shape[1]), dtype=np.int64)
    buf = np.empty((min(block, N), N), dtype=np.int64)
    b = np.ones(N, dtype=np.int64)
    filled = 0
    top = N - 1  # coefficient index held by buf[0]
    for k in range(N - 1, -1, -1):
        if k < N - 1:
            b = (a[k + 1] + xs * b) % p
        buf[filled] = b
        filled += 1
        if filled == buf.shape[0] or k == 0:
            res = matmul_mod(buf[:filled], wv, p)
            out[top - filled + 1: top + 1] = res[::-1]
            top -= filled
            filled = 0
    return out


def batched_gauss_jordan(mats: np.ndarray, p: int):
    """Gauss-Jordan elimination on a stack of augmented matrices.

    ``mats`` has shape (B, n, n + m). Returns ``(det, sol, ok)`` where
    ``det[b]`` is the determinant of the left n x n block, ``sol[b]`` the
    solution block of shape (n, m) and ``ok[b]`` tells whether the block
    was invertible. Entries of ``sol`` for singular blocks are garbage.
    """
    a = np.array(mats, dtype=np.int64) % p
    B, n, _ = a.shape
    det = np.ones(B, dtype=np.int64)
    ok = np.ones(B, dtype=bool)
    idx = np.arange(B)
    for k in range(n):
        nz = a[:, k:, k] != 0
        has = nz.any(axis=1)
        ok &= has
        piv = np.argmax(nz, axis=1) + k
        swap = (piv != k) & has
        if swap.any():
            rows_k = a[idx, k].copy()
            a[idx, k] = a[idx, piv]
            a[idx, piv] = rows_k
            det = np.where(swap, (p - det) % p, det)
        pv = a[:, k, k]
        det = det * pv % p
        inv = inv_mod(np.where(has, pv, 1), p)
        a[:, k, :] = a[:, k, :] * inv[:, None] % p
        f = a[:, :, k].copy()
        f[:, k] = 0
        a = (a - f[:, :, None] * a[:, None, k, :]) % p
    det = np.where(ok, det, 0)
    return det, a[:, :, n:], ok
