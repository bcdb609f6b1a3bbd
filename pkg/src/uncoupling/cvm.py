"""The cyclic-vector method.

For a row u, P = Δⁿ(u) satisfies P[M] = C with C companion as soon as P is
invertible; only the last row c = δⁿ(u)·P⁻¹ of C has to be computed.  Two
paths produce P and c:

* naive: repeated δ over K(X) and a fraction-free row solve;
* fast: q-cleared polynomial rows built with one balanced matrix product
  per step, and an evaluation-interpolation solve.

Both paths end in the same normal forms and therefore agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Literal

import flint
import numpy as np

from .algebra.kernels import matmul_mod, poly_to_array
from .algebra.matrix import PolyMat, RatMat, _as_ratmat, block_diag, solve_row_naive
from .algebra.poly import RatFun
from .algebra.solve import solve_row_fast
from .delta import CompanionBlock, RatMatSystem, delta_apply, delta_iterate
from .errors import DimensionMismatch, ExhaustedTries, NotCyclic, SingularMatrix

Mode = Literal["naive", "fast"]


@dataclass
class UncouplingResult:
    """P together with the companion blocks of P[M] and their seed rows."""

    P: RatMat
    blocks: list[CompanionBlock]
    seeds: list[RatMat]
    extra: dict = dc_field(default_factory=dict, compare=False, repr=False)

    @property
    def t(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(b.k for b in self.blocks)

    def companion_matrix(self) -> RatMat:
        p = self.P.p
        return block_diag(*[b.matrix(p) for b in self.blocks])


# ---- construction of P ------------------------------------------------------

def _check_candidate(sys: RatMatSystem, u) -> PolyMat:
    u = _as_ratmat(u)
    if u.shape != (1, sys.n):
        raise DimensionMismatch("candidate must be a row of length n")
    if not u.is_polynomial():
        raise ValueError("candidate vector must be polynomial")
    return u.num


def build_P_naive(sys: RatMatSystem, u) -> RatMat:
    """Δⁿ(u) by n - 1 applications of δ over K(X)."""
    return delta_iterate(sys, u, sys.n, check=False)


class _BalancedProduct:
    """Row-vector times N over K[X] as one dense matrix product.

    A row R of degree < m·w is cut into chunks R = Σ_k A_k X^{kw} with
    deg A_k < w.  Stacking the A_k gives an (m × n·w) coefficient matrix;
    N becomes the block-Toeplitz matrix mapping a chunk's coefficients to
    the coefficients of chunk·N.
    """

    def __init__(self, N: PolyMat, d: int):
        self.p = N.p
        self.n = N.shape[0]
        self.d = max(N.degree(), 0)
        self.w = max(d, 1)
        n, w, dn = self.n, self.w, self.d
        width = w + dn
        big = np.zeros((n * w, n * width), dtype=np.int64)
        for t in range(n):
            for j in range(n):
                c = poly_to_array(N.rows[t][j])
                if c.size == 0:
                    continue
                for a in range(w):
                    big[t * w + a, j * width + a: j * width + a + c.size] = c
        self.big = big
        self.width = width

    def apply(self, row: list[flint.nmod_poly]) -> list[flint.nmod_poly]:
        n, w, width, p = self.n, self.w, self.width, self.p
        L = max(max((e.degree() for e in row), default=-1) + 1, 1)
        m = -(-L // w)
        flat = np.zeros((n, m * w), dtype=np.int64)
        for t, e in enumerate(row):
            c = poly_to_array(e)
            flat[t, :c.size] = c
        # chunks as rows: afl[k, t*w + a] = coeff of X^{k w + a} in row[t]
        afl = flat.reshape(n, m, w).transpose(1, 0, 2).reshape(m, n * w)
        prod = matmul_mod(afl, self.big, p).reshape(m, n, width)
        out = np.zeros((n, m * w + self.d), dtype=np.int64)
        for k in range(m):
            out[:, k * w: k * w + width] += prod[k]
        out %= p
        return [flint.nmod_poly(out[j].tolist(), p) for j in range(n)]


def cleared_rows_balanced(sys: RatMatSystem, u, k: int) -> list[list[flint.nmod_poly]]:
    """R_j = q^{j-1}·δ^{j-1}(u) for j = 1..k, through balanced products."""
    u = _check_candidate(sys, u)
    bp = _BalancedProduct(sys.N, sys.d)
    q, dq = sys.q, sys.q.derivative()
    rows = [list(u.rows[0])]
    for j in range(1, k):
        r = rows[-1]
        rn = bp.apply(r)
        new = []
        for c in range(sys.n):
            acc = rn[c] + q * r[c].derivative()
            if j > 1 and not dq.is_zero():
                acc -= (j - 1) * dq * r[c]
            new.append(acc)
        rows.append(new)
    return rows


def _uncleared(sys: RatMatSystem, rows) -> RatMat:
    """VJoin(R_j / q^{j-1}) over the common denominator q^{k-1}."""
    k = len(rows)
    q = sys.q
    pw = [sys.field.one]
    for _ in range(k):
        pw.append(pw[-1] * q)
    num = [[e * pw[k - 1 - j] for e in r] for j, r in enumerate(rows)]
    return RatMat(PolyMat(num, sys.p), pw[k - 1])


def build_P_balanced(sys: RatMatSystem, u) -> RatMat:
    """Δⁿ(u) from q-cleared polynomial rows; equal to build_P_naive."""
    return _uncleared(sys, cleared_rows_balanced(sys, u, sys.n))


# ---- last row of C ----------------------------------------------------------

def _solve_cleared(sys: RatMatSystem, rows, deg_u: int, mode: Mode) -> list[RatFun]:
    """c with c·P = δⁿ(u), given R_1..R_{n+1}.

    With P~ = diag(q^{i-1})·P, y·P~ = R_{n+1} gives c_i = y_i·q^{i-1}/q^n.
    """
    n, p, d = sys.n, sys.p, sys.d
    pt = PolyMat(rows[:n], p)
    b = PolyMat([rows[n]], p)
    if mode == "fast":
        a = [deg_u + i * d for i in range(n)]
        D = sum(a)
        db = deg_u + n * d
        y = solve_row_fast(pt, b, (D, [D - ai + db for ai in a]))
    else:
        y = solve_row_naive(pt, b)
    q = sys.q
    qpow = sys.field.one
    out = []
    qn = q ** n
    for i in range(n):
        out.append(RatFun(y.num.rows[0][i] * qpow, y.den * qn))
        qpow = qpow * q
    return out


def last_row(sys: RatMatSystem, P: RatMat, u, mode: Mode = "naive") -> list[RatFun]:
    """c = δⁿ(u)·P⁻¹ for P = Δⁿ(u)."""
    P = _as_ratmat(P)
    if mode == "fast":
        u_poly = _check_candidate(sys, u)
        rows = cleared_rows_balanced(sys, u_poly, sys.n + 1)
        return _solve_cleared(sys, rows, max(u_poly.degree(), 0), "fast")
    dn = delta_apply(sys, P.row(sys.n - 1))
    y = solve_row_naive(P, dn)
    return [y.entry(0, j) for j in range(sys.n)]


def cv_trial(sys: RatMatSystem, u, mode: Mode = "naive") -> UncouplingResult:
    """Test whether u is a cyclic vector; on success return P = Δⁿ(u) and C."""
    u = _as_ratmat(u)
    if u.shape != (1, sys.n):
        raise DimensionMismatch("candidate must be a row of length n")
    try:
        if mode == "fast":
            u_poly = _check_candidate(sys, u)
            rows = cleared_rows_balanced(sys, u_poly, sys.n + 1)
            P = _uncleared(sys, rows[:sys.n])
            c = _solve_cleared(sys, rows, max(u_poly.degree(), 0), "fast")
        elif mode == "naive":
            P = build_P_naive(sys, u)
            c = last_row(sys, P, u, "naive")
        else:
            raise ValueError(f"unknown mode {mode!r}")
    except SingularMatrix as exc:
        raise NotCyclic("det Δⁿ(u) = 0") from exc
    return UncouplingResult(P, [CompanionBlock(tuple(c))], [u])


def random_candidate(sys: RatMatSystem, rng: np.random.Generator, degree: int | None = None) -> RatMat:
    """A row with uniform coefficients of degree ``degree`` (default n - 1)."""
    fld = sys.field
    deg = sys.n - 1 if degree is None else degree
    row = [fld.random_poly(rng, deg, exact=False) for _ in range(sys.n)]
    return RatMat.from_polymat(PolyMat([row], sys.p))


def prob_cv(sys: RatMatSystem, rng_seed: int = 0, max_tries: int = 10, *,
            mode: Mode = "fast", u_degree: int | None = None,
            verify: bool = True) -> UncouplingResult:
    """Las Vegas cyclic-vector method: random u until cv_trial succeeds.

    Success is certified by checking δ(P) = C·P unless ``verify`` is off.
    """
    if max_tries < 1:
        raise ValueError("max_tries must be at least 1")
    rng = np.random.default_rng(rng_seed)
    for attempt in range(1, max_tries + 1):
        u = random_candidate(sys, rng, u_degree)
        if u.is_zero():
            continue
        try:
            res = cv_trial(sys, u, mode)
        except NotCyclic:
            continue
        if verify and delta_apply(sys, res.P) != res.companion_matrix() @ res.P:
            continue
        res.extra["tries"] = attempt
        return res
    raise ExhaustedTries(f"no cyclic vector found in {max_tries} tries")


# ---- degree table -----------------------------------------------------------

@dataclass
class DegreeEntry:
    name: str
    measured: int
    bound: int

    @property
    def flag(self) -> str:
        if self.measured > self.bound:
            return "violated"
        return "tight" if self.measured == self.bound else "met"


@dataclass
class DegreeReport:
    n: int
    d: int
    deg_u: int
    entries: list[DegreeEntry]
    sizes: dict

    @property
    def ok(self) -> bool:
        return all(e.flag != "violated" for e in self.entries)

    @property
    def tight(self) -> bool:
        return all(e.flag == "tight" for e in self.entries)


def degree_report(sys: RatMatSystem, result: UncouplingResult) -> DegreeReport:
    """Measured degrees of a cv_trial result next to their a priori bounds.

    * q^{n-1}·P is polynomial of degree ≤ deg u + (n-1)d;
    * q^n·δⁿ(u) is polynomial of degree ≤ deg u + n·d;
    * numerators and denominators of C have degree ≤ n·deg u + n(n+1)d/2.
    """
    from .verify import arithmetic_size

    n, d = sys.n, sys.d
    u = result.seeds[0]
    deg_u = max(u.num.degree(), 0)
    q = sys.q
    qn1 = q ** (n - 1)
    P = result.P
    quo, rem = divmod(qn1, P.den)
    if not rem.is_zero():
        deg_P = 10**9
    else:
        deg_P = P.num.degree() + quo.degree()
    dn = delta_apply(sys, P.row(n - 1))
    quo, rem = divmod(q ** n, dn.den)
    deg_dn = dn.num.degree() + quo.degree() if rem.is_zero() else 10**9
    c = result.blocks[0].last_row
    deg_num = max(e.num.degree() for e in c)
    deg_den = max(e.den.degree() for e in c)
    bound_c = n * deg_u + n * (n + 1) * d // 2
    entries = [
        DegreeEntry("q^(n-1) P", deg_P, deg_u + (n - 1) * d),
        DegreeEntry("q^n delta^n(u)", deg_dn, deg_u + n * d),
        DegreeEntry("num C", deg_num, bound_c),
        DegreeEntry("den C", deg_den, bound_c),
    ]
    sizes = {"P": arithmetic_size(P), "C": arithmetic_size(result.companion_matrix())}
    return DegreeReport(n, d, deg_u, entries, sizes)
