"""Independent checks on uncoupling results.

The central witness is a truncated power-series solution Y of Y' = MY at
an ordinary point.  If P[M] = diag(C^(1), ..., C^(t)), then Z = PY splits
into blocks whose rows are successive derivatives of one series z^(i), and
z^(i) satisfies the scalar equation read off the last row of C^(i).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import flint
import numpy as np

from .algebra.kernels import matmul_mod
from .algebra.matrix import RatMat, _as_ratmat, mat_det
from .algebra.poly import RatFun, lcm, shift
from .delta import RatMatSystem, check_cleared_degrees, delta_apply
from .errors import BoundViolated, NotOrdinaryPoint

# ---- power series -----------------------------------------------------------


def _series(a: flint.nmod_poly, x0: int, N: int) -> np.ndarray:
    """Coefficients of a(x0 + T) up to T^{N-1}."""
    c = [int(v) for v in shift(a, x0).coeffs()][:N]
    out = np.zeros(N, dtype=np.int64)
    out[:len(c)] = c
    return out


def series_mul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Truncated product of two series of equal length."""
    N = a.shape[0]
    fa = flint.nmod_poly(a.tolist(), p)
    fb = flint.nmod_poly(b.tolist(), p)
    c = [int(v) for v in (fa * fb).coeffs()][:N]
    out = np.zeros(N, dtype=np.int64)
    out[:len(c)] = c
    return out


def series_inverse(a: np.ndarray, p: int) -> np.ndarray:
    N = a.shape[0]
    a0 = int(a[0]) % p
    if a0 == 0:
        raise ZeroDivisionError("series with zero constant term")
    inv0 = pow(a0, -1, p)
    out = [0] * N
    out[0] = inv0
    al = [int(v) for v in a]
    for m in range(1, N):
        s = 0
        for j in range(1, m + 1):
            if al[j]:
                s += al[j] * out[m - j]
        out[m] = (-s * inv0) % p
    return np.array(out, dtype=np.int64)


def series_derivative(a: np.ndarray, p: int) -> np.ndarray:
    """Derivative, still of length N (last coefficient unknown, set to 0)."""
    N = a.shape[0]
    out = np.zeros(N, dtype=np.int64)
    out[:N - 1] = a[1:] * np.arange(1, N, dtype=np.int64) % p
    return out


@dataclass
class SeriesVector:
    """Y(x0 + T) mod T^N; ``coeffs[m]`` is the vector coefficient of T^m."""

    x0: int
    N: int
    coeffs: np.ndarray  # (N, n)
    p: int

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    def component(self, i: int) -> np.ndarray:
        return self.coeffs[:, i]


def ordinary_point(polys, p: int, start: int = 0) -> int:
    """Smallest x ≥ start at which no polynomial in ``polys`` vanishes."""
    x = start
    while x < p:
        if all(int(a(x)) != 0 for a in polys):
            return x
        x += 1
    raise NotOrdinaryPoint("no ordinary point in the field")


def series_solve(sys: RatMatSystem, x0: int, y0, N: int) -> SeriesVector:
    """Unique solution of Y' = MY with Y(x0) = y0, modulo (X - x0)^N.

    With T = X - x0, write q(T)·Y' = N(T)·Y coefficientwise:
    q_0 (m+1) y_{m+1} = Σ_j N_j y_{m-j} - Σ_{j≥1} q_j (m+1-j) y_{m+1-j}.
    """
    p, n = sys.p, sys.n
    if N < 2:
        raise ValueError("series order must be at least 2")
    x0 = int(x0) % p
    if int(sys.q(x0)) == 0:
        raise NotOrdinaryPoint(f"q vanishes at {x0}")
    L = sys.d + 1
    qs = _series(sys.q, x0, max(L, 1))
    Ns = np.zeros((L, n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            Ns[:, i, j] = _series(sys.N.rows[i][j], x0, L)
    # stacked[:, j*n:(j+1)*n] = N_j so that stacked @ [y_m; y_{m-1}; ...] = Σ N_j y_{m-j}
    stacked = np.concatenate([Ns[j] for j in range(L)], axis=1)
    y = np.zeros((N, n), dtype=np.int64)
    y[0] = np.asarray(y0, dtype=np.int64).reshape(n) % p
    inv_q0 = pow(int(qs[0]), -1, p)
    for m in range(N - 1):
        hist = np.zeros(L * n, dtype=np.int64)
        for j in range(min(L, m + 1)):
            hist[j * n:(j + 1) * n] = y[m - j]
        rhs = matmul_mod(stacked, hist[:, None], p)[:, 0]
        for j in range(1, min(L, m + 2)):
            if qs[j]:
                rhs = (rhs - int(qs[j]) * ((m + 1 - j) % p) % p * y[m + 1 - j]) % p
        y[m + 1] = rhs * (inv_q0 * pow(m + 1, -1, p) % p) % p
    return SeriesVector(x0, N, y, p)


def series_residual(sys: RatMatSystem, Y: SeriesVector) -> np.ndarray:
    """q·Y' - N·Y modulo T^{N-1}, as an (N-1, n) array."""
    p, n, N = sys.p, sys.n, Y.N
    qs = _series(sys.q, Y.x0, N)
    res = np.zeros((N, n), dtype=np.int64)
    for i in range(n):
        acc = series_mul(qs, series_derivative(Y.component(i), p), p)
        for j in range(n):
            acc = (acc - series_mul(_series(sys.N.rows[i][j], Y.x0, N), Y.component(j), p)) % p
        res[:, i] = acc
    return res[:N - 1]


def _matrix_series(A: RatMat, x0: int, N: int, Y: np.ndarray) -> np.ndarray:
    """A(x0 + T)·Y(T) mod T^N for a rational matrix A with den(x0) ≠ 0."""
    p = A.p
    m, n = A.shape
    inv_den = series_inverse(_series(A.den, x0, N), p)
    out = np.zeros((N, m), dtype=np.int64)
    for i in range(m):
        acc = np.zeros(N, dtype=np.int64)
        for j in range(n):
            e = A.num.rows[i][j]
            if not e.is_zero():
                acc = (acc + series_mul(_series(e, x0, N), Y[:, j], p)) % p
        out[:, i] = series_mul(acc, inv_den, p)
    return out


def _result_denominators(sys: RatMatSystem, result) -> list:
    polys = [sys.q, result.P.den]
    for b in result.blocks:
        polys.extend(e.den for e in b.last_row)
    return polys


def check_annihilation(sys: RatMatSystem, result, x0: int | None = None, N: int | None = None,
                       seed: int = 0) -> bool:
    """Series witness that each block's scalar equation annihilates its part of PY.

    Z = P·Y is computed exactly mod T^N.  Inside a block of size k starting
    at row o, Z_{o+j+1} must equal Z_{o+j}' and z = Z_o must satisfy
    z^{(k)} = Σ_j c_j z^{(j)}; both are checked modulo T^{N-n-1}.
    By default x0 is the first ordinary point after a random start, so a
    perturbation of high degree in X still shows up in low orders of T.
    """
    p, n = sys.p, sys.n
    if N is None:
        N = 4 * n + 16
    rng = np.random.default_rng(seed)
    if x0 is None:
        start = int(rng.integers(1, p))
        dens = _result_denominators(sys, result)
        try:
            x0 = ordinary_point(dens, p, start)
        except NotOrdinaryPoint:
            x0 = ordinary_point(dens, p, 1)
    y0 = rng.integers(1, p, size=n)
    Y = series_solve(sys, x0, y0, N)
    Z = _matrix_series(result.P, x0, N, Y.coeffs)
    order = N - n - 1
    if order < 1:
        raise ValueError("series order too small for this system")
    o = 0
    for block in result.blocks:
        k = block.k
        z = Z[:, o]
        # derivatives of z: ders[j] = z^{(j)}, each valid well beyond `order`
        ders = [z]
        for _ in range(k):
            ders.append(series_derivative(ders[-1], p))
        for j in range(k):
            if not np.array_equal(ders[j][:order] % p, Z[:order, o + j] % p):
                return False
        # γ·z^{(k)} - Σ γ·c_j·z^{(j)} with γ the lcm of the c_j denominators
        gamma = sys.field.one
        for c in block.last_row:
            gamma = lcm(gamma, c.den) if c.den.degree() > 0 else gamma
        res = series_mul(_series(gamma, x0, N), ders[k], p)
        for j, c in enumerate(block.last_row):
            if c.is_zero():
                continue
            coef = c.num * (gamma // c.den)
            res = (res - series_mul(_series(coef, x0, N), ders[j], p)) % p
        if np.any(res[:order] % p):
            return False
        o += k
    return True


# ---- validation -------------------------------------------------------------

@dataclass
class ValidationReport:
    gauge_ok: bool
    shape_ok: bool
    seed_rows_ok: bool
    annihilation_ok: bool
    degree_flags: dict = dc_field(default_factory=dict)
    messages: list = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.gauge_ok and self.shape_ok and self.seed_rows_ok and self.annihilation_ok
                and all(v != "violated" for v in self.degree_flags.values()))


def validate(sys: RatMatSystem, result, *, annihilation: bool = True,
             N: int | None = None) -> ValidationReport:
    msgs = []
    n = sys.n
    P = result.P
    sizes = [b.k for b in result.blocks]
    shape_ok = sum(sizes) == n and len(result.seeds) == len(sizes) and all(s >= 1 for s in sizes)
    if not shape_ok:
        msgs.append(f"block sizes {sizes} do not partition n = {n}")
    invertible = P.shape == (n, n) and not mat_det(P.num).is_zero()
    if not invertible:
        msgs.append("P is singular")
    gauge_ok = False
    if invertible and shape_ok:
        gauge_ok = delta_apply(sys, P) == result.companion_matrix() @ P
        if not gauge_ok:
            msgs.append("δ(P) differs from C·P")
    seed_ok = shape_ok
    flags = {}
    if shape_ok:
        o = 0
        for i, (k, u) in enumerate(zip(sizes, result.seeds)):
            u = _as_ratmat(u)
            rows = [P.row(o + j) for j in range(k)]
            if rows[0] != u:
                seed_ok = False
                msgs.append(f"first row of block {i} differs from its seed")
            cur = rows[0]
            for j in range(1, k):
                cur = delta_apply(sys, cur)
                if cur != rows[j]:
                    seed_ok = False
                    msgs.append(f"row {j} of block {i} is not δ^{j}(u)")
                    break
            if seed_ok and u.is_polynomial():
                try:
                    check_cleared_degrees(sys, rows)
                    flags[f"cleared_degrees_block{i}"] = "met"
                except BoundViolated:
                    flags[f"cleared_degrees_block{i}"] = "violated"
            o += k
    ann = True
    if annihilation and shape_ok and invertible:
        try:
            ann = check_annihilation(sys, result, N=N)
        except (NotOrdinaryPoint, ZeroDivisionError) as exc:
            ann = False
            msgs.append(f"annihilation check impossible: {exc}")
        if not ann:
            msgs.append("scalar equations do not annihilate PY")
    elif annihilation:
        ann = False
    return ValidationReport(gauge_ok, shape_ok, seed_ok, ann, flags, msgs)


# ---- sizes ------------------------------------------------------------------

def _entry_size(e: RatFun) -> int:
    return max(e.num.degree(), 0) + 1 + e.den.degree() + 1


def arithmetic_size(obj) -> int:
    """Number of field elements in the dense representation.

    Every reduced entry counts deg(num) + 1 numerator and deg(den) + 1
    denominator coefficients; the zero entry counts one numerator
    coefficient.  For an uncoupling result the object measured is its
    output, the scalar equations, i.e. the last rows of the companion
    blocks.
    """
    if hasattr(obj, "blocks"):
        return sum(_entry_size(e) for b in obj.blocks for e in b.last_row)
    A = _as_ratmat(obj)
    m, n = A.shape
    return sum(_entry_size(A.entry(i, j)) for i in range(m) for j in range(n))


def equation_size(n: int, d: int) -> int:
    """Predicted size of the generic scalar equation for u of degree 0.

    Entry i of the last row has numerator and denominator of degree
    n(n+1)d/2 - (i-1)d; summing 2(deg + 1) over i gives n³d + n(d + 2).
    """
    return n ** 3 * d + n * (d + 2)


# ---- degree audits ----------------------------------------------------------

@dataclass
class AuditItem:
    name: str
    measured: int
    bound: int | None
    hard: bool

    @property
    def flag(self) -> str:
        if self.bound is None:
            return "reported"
        if self.measured > self.bound:
            return "violated"
        return "tight" if self.measured == self.bound else "met"


@dataclass
class AuditReport:
    items: list[AuditItem]
    constants: dict = dc_field(default_factory=dict)
    growth: dict = dc_field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(i.flag != "violated" for i in self.items if i.hard)


def degree_audit(trace, *, strict: bool = True) -> AuditReport:
    """Measured degrees against their bounds; raises BoundViolated on a hard bound.

    Accepts a :class:`~uncoupling.cvm.DegreeReport` or a DBZ trace.
    """
    items: list[AuditItem] = []
    constants: dict = {}
    growth: dict = {}
    if hasattr(trace, "entries"):
        for e in trace.entries:
            items.append(AuditItem(e.name, e.measured, e.bound, True))
    else:
        d = trace.d
        ks, degs = [], []
        for it in trace.iterations:
            k = it.k
            items.append(AuditItem(f"q^{k - 1} P^({k})", it.deg_P, (k - 1) * d, True))
            if it.deg_M is not None:
                items.append(AuditItem(f"L_{k} M^({k})", it.deg_M, k * k * d, True))
                ks.append(k)
                degs.append(it.deg_M)
        if ks:
            growth["k"] = ks
            growth["measured"] = degs
            growth["quadratic_bound"] = [k * k * d for k in ks]
            growth["naive_exponential_bound"] = [3 ** (k - 1) * max(d, 1) for k in ks]
            growth["quadratic"] = all(m <= k * k * d for k, m in zip(ks, degs))
            if len(ks) >= 3 and max(degs) > 0:
                # least-squares fits of the measured curve by c·k² and by c·3^k
                k_arr = np.array(ks, dtype=float)
                m_arr = np.array(degs, dtype=float)
                quad = k_arr ** 2
                expo = 3.0 ** k_arr
                cq = float(quad @ m_arr / (quad @ quad))
                ce = float(expo @ m_arr / (expo @ expo))
                growth["quad_fit_residual"] = float(np.linalg.norm(m_arr - cq * quad))
                growth["exp_fit_residual"] = float(np.linalg.norm(m_arr - ce * expo))
        for name, (meas, kk, dd) in getattr(trace, "block_degrees", {}).items():
            constants[name] = meas / max(kk * dd, 1)
            items.append(AuditItem(name, meas, None, False))
        for r in getattr(trace, "restarts", []):
            items.append(AuditItem(f"restart k={r.k}", r.k, None, False))
    report = AuditReport(items, constants, growth)
    if strict:
        bad = [i for i in items if i.hard and i.flag == "violated"]
        if bad:
            raise BoundViolated("; ".join(f"{i.name}: {i.measured} > {i.bound}" for i in bad))
    return report


def fit_exponent(xs, ys) -> float:
    """Slope of log y against log x."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


__all__ = [
    "SeriesVector", "series_solve", "series_residual", "check_annihilation", "ordinary_point",
    "ValidationReport", "validate", "arithmetic_size", "equation_size",
    "AuditItem", "AuditReport", "degree_audit", "fit_exponent",
]

