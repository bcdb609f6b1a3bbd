"""Danilevski-Barkatou-Zürcher uncoupling.

Every step is a pivot (A, P) -> (T[A], T·P) with T[A] = (TA + T')T⁻¹.  The
pivots used here are all of the form T = I + D with T⁻¹ = I + E for sparse
D and E (or permutations), so T[A] = (A + DA + D')(I + E) touches only the
rows of D and the columns of E.

Sign conventions.  Under T[A] = (TA + T')T⁻¹ the matrix E_{i,j}(t) adds t
times row j to row i and subtracts t times column i from column j.  Each
phase below picks the sign that reaches its target shape:

* phase I clears row i with E_{i+1,j}(+A_{i,j}) after scaling column i+1
  by E_{i+1,i+1}(A_{i,i+1}); the product of these is the row replacement
  E_{i+1}(Row_i(A)), which is what the default mode applies;
* phase II uses E_{i,j-1}(-A_{i,j}); for fixed j these commute and are
  applied as one batch;
* phase III uses E_{n,n}(1/A_{n,1}), then E_{i,n}(-A_{i,1}), then Rot.

Indices in code are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Literal, Mapping, Sequence

import flint

from .algebra.field import field
from .algebra.matrix import PolyMat, RatMat, _as_ratmat, _normalize, e_row, vjoin
from .algebra.poly import RatFun, lcm
from .cvm import UncouplingResult
from .delta import (CompanionBlock, GaugeState, RatMatSystem, cleared_degree, delta_apply,
                    is_shape_III, shape_detect)
from .errors import DimensionMismatch, ShapeError, SingularPivot

Poly = flint.nmod_poly

# ---- pivot matrices ---------------------------------------------------------


class PivotMatrix:
    """An invertible matrix T with a cheap action A -> T[A]."""

    def matrix(self, n: int, p: int) -> RatMat:
        raise NotImplementedError

    def inverse_matrix(self, n: int, p: int) -> RatMat:
        raise NotImplementedError


@dataclass(frozen=True)
class Permutation(PivotMatrix):
    """Row a of T is e_{perm[a]}."""

    perm: tuple[int, ...]

    def matrix(self, n, p):
        return RatMat.from_polymat(PolyMat([e_row(j, n, p).rows[0] for j in self.perm], p))

    def inverse_matrix(self, n, p):
        return self.matrix(n, p).transpose()


def Swap(j: int, k: int, n: int) -> Permutation:
    """Inv^(j,k): exchange indices j and k."""
    perm = list(range(n))
    perm[j], perm[k] = perm[k], perm[j]
    return Permutation(tuple(perm))


def Rot(n: int) -> Permutation:
    """VJoin(e_n, e_1, ..., e_{n-1})."""
    return Permutation(tuple((a - 1) % n for a in range(n)))


_SparseRows = Mapping[int, tuple[Mapping[int, Poly], Poly]]


@dataclass(frozen=True)
class Sparse(PivotMatrix):
    """T = I + D with T⁻¹ = I + E.

    D and E map a row index to ``({col: numerator}, denominator)``; the
    fractions need not be reduced.
    """

    D: _SparseRows
    E: _SparseRows

    def _dense(self, S, n, p):
        fld = field(p)
        entries = [[RatFun.const(1 if a == b else 0, fld) for b in range(n)] for a in range(n)]
        for i, (row, den) in S.items():
            for j, t in row.items():
                entries[i][j] = entries[i][j] + RatFun(t, den)
        return RatMat.from_entries(entries, p)

    def matrix(self, n, p):
        return self._dense(self.D, n, p)

    def inverse_matrix(self, n, p):
        return self._dense(self.E, n, p)


def _frac(t) -> tuple[Poly, Poly]:
    if isinstance(t, RatFun):
        return t.num, t.den
    num, den = t
    return num, den


def Scale(i: int, s) -> Sparse:
    """E_{i,i}(s): the identity with s at (i, i)."""
    num, den = _frac(s)
    if num.is_zero():
        raise SingularPivot("scaling by zero")
    # s - 1 = (num - den)/den and 1/s - 1 = (den - num)/num
    return Sparse({i: ({i: num - den}, den)}, {i: ({i: den - num}, num)})


def Elementary(entries) -> Sparse:
    """Π E_{i,j}(t_ij) for off-diagonal entries whose row and column sets are disjoint.

    Then D² = 0, the factors commute, and T⁻¹ = I - D.  Values are RatFuns
    or (numerator, denominator) pairs; one row must share one denominator.
    """
    rows = {i for i, _ in entries}
    cols = {j for _, j in entries}
    if rows & cols:
        raise ValueError("row and column index sets must be disjoint")
    D: dict[int, tuple[dict[int, Poly], Poly]] = {}
    for (i, j), t in entries.items():
        num, den = _frac(t)
        if num.is_zero():
            continue
        if i in D:
            row, rden = D[i]
            if rden != den:
                g = lcm(rden, den)
                fa = g // rden
                D[i] = ({c: v * fa for c, v in row.items()}, g)
                row, rden = D[i]
                num = num * (g // den)
            row[j] = num
        else:
            D[i] = ({j: num}, den)
    E = {i: ({j: -v for j, v in row.items()}, den) for i, (row, den) in D.items()}
    return Sparse(D, E)


def RowReplace(r: int, u: Sequence[Poly], den: Poly) -> Sparse:
    """E_r(u) for the row u = nums/den: the identity with row r replaced by u.

    T = I + e_r·w with w = u - e_r, and T⁻¹ = I - e_r·w/u_r.  Needs u_r ≠ 0.
    """
    if u[r].is_zero():
        raise SingularPivot("row replacement with a zero diagonal entry")
    w = {j: (t - den if j == r else t) for j, t in enumerate(u)}
    w = {j: t for j, t in w.items() if not t.is_zero()}
    return Sparse({r: (w, den)}, {r: ({j: -t for j, t in w.items()}, u[r])})


# ---- row arithmetic ---------------------------------------------------------

_Row = tuple  # (list[Poly], Poly)


def _reduce_row(nums: list[Poly], den: Poly) -> _Row:
    num, den = _normalize(PolyMat([nums], int(den.modulus())), den)
    return num.rows[0], den


def _combine_rows(rows: list[_Row], p: int, stale: set[int] = frozenset()) -> RatMat:
    """Rows over their lcm.  Rows outside ``stale`` are reduced, which makes
    the result normal; stale rows force one renormalisation."""
    L = None
    for _, d in rows:
        L = d if L is None else (L if d == L else lcm(L, d))
    out = []
    for nums, d in rows:
        f = L // d
        out.append(nums if f.is_one() else [e * f for e in nums])
    if any(rows[i][1].degree() > 0 for i in stale):
        num, den = _normalize(PolyMat(out, p), L)
        return RatMat(num, den, normalized=True)
    return RatMat(PolyMat(out, p), L, normalized=True)


def _apply_sparse(A: RatMat, P: RatMat, T: Sparse) -> tuple[RatMat, RatMat]:
    """(A + DA + D')(I + E) and (I + D)P, with D = dn/τ row by row.

    Row i of A + DA + D' is [N_i τ² + τ Σ dn_j N_j + (dn' τ - dn τ') δ] / (δ τ²)
    for A = N/δ; it collapses to [N_i + Σ dn_j N_j + dn' δ]/δ when τ = 1.
    """
    p = A.p
    n = A.shape[0]
    N, delta = A.num.rows, A.den
    PN, pden = P.num.rows, P.den
    rows: list[_Row] = [(r, delta) for r in N]
    prow: list[_Row] = [(r, pden) for r in PN]
    for i, (dn, tau) in T.D.items():
        const = tau.degree() == 0
        if const and not tau.is_one():
            inv = pow(int(tau.coeffs()[0]), -1, p)
            dn = {j: v * inv for j, v in dn.items()}
        if const:
            new = list(N[i])
            pnew = list(PN[i])
            for j, t in dn.items():
                Nj, Pj = N[j], PN[j]
                for c in range(n):
                    if not Nj[c].is_zero():
                        new[c] += t * Nj[c]
                    if not Pj[c].is_zero():
                        pnew[c] += t * Pj[c]
                dt = t.derivative()
                if not dt.is_zero():
                    new[j] += dt * delta
            rows[i] = _reduce_row(new, delta)
            prow[i] = _reduce_row(pnew, pden)
            continue
        dtau = tau.derivative()
        tau2 = tau * tau
        new = [e * tau2 for e in N[i]]
        pnew = [e * tau for e in PN[i]]
        mix = [flint.nmod_poly([], p) for _ in range(n)]
        for j, t in dn.items():
            Nj, Pj = N[j], PN[j]
            for c in range(n):
                if not Nj[c].is_zero():
                    mix[c] += t * Nj[c]
                if not Pj[c].is_zero():
                    pnew[c] += t * Pj[c]
            new[j] += (t.derivative() * tau - t * dtau) * delta
        for c in range(n):
            if not mix[c].is_zero():
                new[c] += tau * mix[c]
        rows[i] = _reduce_row(new, delta * tau2)
        prow[i] = _reduce_row(pnew, pden * tau)
    touched: set[int] = set()
    if T.E:
        eps = None
        for _, ed in T.E.values():
            eps = ed if eps is None else (eps if ed == eps else lcm(eps, ed))
        scaled = {i: {j: v * (eps // ed) for j, v in er.items()} for i, (er, ed) in T.E.items()}
        const_eps = eps.degree() == 0
        if const_eps and not eps.is_one():
            inv = pow(int(eps.coeffs()[0]), -1, p)
            scaled = {i: {j: v * inv for j, v in er.items()} for i, er in scaled.items()}
        for a in range(n):
            nums, den = rows[a]
            hits = [(i, nums[i]) for i in scaled if not nums[i].is_zero()]
            if not hits:
                continue
            new = list(nums) if const_eps else [e * eps for e in nums]
            for i, b in hits:
                for j, e in scaled[i].items():
                    new[j] = new[j] + b * e
            rows[a] = _reduce_row(new, den if const_eps else den * eps)
            touched.add(a)
    stale = set(range(n)) - set(T.D) - touched
    return _combine_rows(rows, p, stale), _combine_rows(prow, p, set(range(n)) - set(T.D))


def _apply_perm(A: RatMat, P: RatMat, T: Permutation) -> tuple[RatMat, RatMat]:
    perm = T.perm
    an = [[A.num.rows[perm[a]][perm[b]] for b in range(len(perm))] for a in range(len(perm))]
    pn = [P.num.rows[perm[a]] for a in range(len(perm))]
    return (RatMat(PolyMat(an, A.p), A.den, normalized=True),
            RatMat(PolyMat(pn, P.p), P.den, normalized=True))


def pivot(state: GaugeState, T: PivotMatrix, *, check: bool = False) -> GaugeState:
    """(A, P) -> (T[A], T·P)."""
    n = state.A.shape[0]
    if isinstance(T, Permutation):
        if len(T.perm) != n:
            raise DimensionMismatch("pivot size differs from state size")
        A, P = _apply_perm(state.A, state.P, T)
    elif isinstance(T, Sparse):
        A, P = _apply_sparse(state.A, state.P, T)
    else:
        raise TypeError(f"unsupported pivot {type(T).__name__}")
    new = GaugeState(state.origin, A, P)
    if check and not new.invariant_holds():
        raise AssertionError("gauge invariant A = P[M] broken by a pivot")
    return new


# ---- traces -----------------------------------------------------------------

@dataclass
class IterationRecord:
    """Measurements before iteration k of the first phase I (1-based k)."""

    k: int
    deg_P: int           # deg(q^{k-1}·P^(k)), or a huge value if not polynomial
    deg_M: int | None    # deg(L_k·M^(k)) with L_k = q^{k(k+1)/2}·det P^(k)
    prefix_ok: bool | None


@dataclass
class RoundRecord:
    """One pass of phase I: the seed row and the companion block size reached."""

    k: int
    u: RatMat
    seed_rows_ok: bool | None


@dataclass
class RestartRecord:
    k: int
    h: int
    w: RatFun
    u: RatMat
    shape_III: bool


@dataclass
class DbzTrace:
    n: int
    d: int
    phases: list[str] = dc_field(default_factory=list)
    iterations: list[IterationRecord] = dc_field(default_factory=list)
    rounds: list[RoundRecord] = dc_field(default_factory=list)
    restarts: list[RestartRecord] = dc_field(default_factory=list)
    block_degrees: dict = dc_field(default_factory=dict)
    gamma_ok: list[bool] = dc_field(default_factory=list)
    children: list["DbzTrace"] = dc_field(default_factory=list)

    @property
    def ks(self) -> list[int]:
        return [r.k for r in self.rounds]


# ---- phase I ----------------------------------------------------------------

def _row_is_unit(A: RatMat, i: int, j: int) -> bool:
    row = A.num.rows[i]
    return all(e.is_zero() for c, e in enumerate(row) if c != j) and row[j] == A.den


def _measure(state: GaugeState, k: int, det_P: RatFun, trace: DbzTrace, deep: bool) -> None:
    sys = state.origin
    q = sys.q
    deg_P = cleared_degree(state.P, q ** (k - 1))
    deg_M = None
    prefix_ok = None
    if deep:
        L = RatFun(q ** (k * (k + 1) // 2)) * det_P
        LM = state.A.scale(L)
        deg_M = LM.num.degree() if LM.is_polynomial() else 10**9
        # P = VJoin(Δ^k(e_1), Q) with the rows of Q unit rows e_2..e_n
        n = sys.n
        prefix_ok = True
        cur = state.P.row(0)
        if not _row_is_unit(state.P, 0, 0):
            prefix_ok = False
        for j in range(1, k):
            cur = delta_apply(sys, cur)
            if cur != state.P.row(j):
                prefix_ok = False
                break
        if prefix_ok:
            for j in range(k, n):
                if not any(_row_is_unit(state.P, j, c) for c in range(1, n)):
                    prefix_ok = False
    trace.iterations.append(IterationRecord(k, 10**9 if deg_P is None else deg_P, deg_M, prefix_ok))


def dbz_one(state: GaugeState, *, mode: Literal["combined", "elementary"] = "combined",
            check: bool = False, trace: DbzTrace | None = None, deep: bool = False):
    """Phase I: put rows 1, 2, ... in companion shape until a row has no pivot.

    Returns (state, k) with the top-left k × k block companion and the
    top-right block zero.  When ``trace`` is given, per-iteration degrees
    are recorded (``deep`` adds the cleared degree of M^(k) and the prefix check).
    """
    n = state.A.shape[0]
    det_P = RatFun.const(1, state.origin.field)
    for i in range(n - 1):
        if trace is not None:
            _measure(state, i + 1, det_P, trace, deep)
        A = state.A
        if _row_is_unit(A, i, i + 1):
            continue
        row = A.num.rows[i]
        r = next((j for j in range(i + 1, n) if not row[j].is_zero()), None)
        if r is None:
            return state, i + 1
        if r != i + 1:
            state = pivot(state, Swap(i + 1, r, n), check=check)
            det_P = -det_P
            A = state.A
        piv = RatFun(A.num.rows[i][i + 1], A.den)
        if mode == "combined":
            state = pivot(state, RowReplace(i + 1, A.num.rows[i], A.den), check=check)
        elif mode == "elementary":
            s = piv
            state = pivot(state, Scale(i + 1, s), check=check)
            for j in range(n):
                if j == i + 1:
                    continue
                t = state.A.entry(i, j)
                if not t.is_zero():
                    state = pivot(state, Elementary({(i + 1, j): t}), check=check)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        det_P = det_P * piv
        if not _row_is_unit(state.A, i, i + 1):
            raise ShapeError(f"row {i} did not reach companion shape")
    if trace is not None:
        _measure(state, n, det_P, trace, deep)
    return state, n


# ---- phase II ---------------------------------------------------------------

def gamma_apply(beta, v) -> RatMat:
    """Γ(v) = βv - v' for a column (or matrix of columns) v."""
    beta, v = _as_ratmat(beta), _as_ratmat(v)
    if beta.shape[1] != v.shape[0]:
        raise DimensionMismatch("β and v do not conform")
    return beta @ v - v.derivative()


def _column(A: RatMat, rows: range, j: int) -> RatMat:
    return RatMat(PolyMat([[A.num.rows[i][j]] for i in rows], A.p), A.den)


def _phase_two(state: GaugeState, k: int, check: bool):
    n = state.A.shape[0]
    cols: dict[int, list[tuple[Poly, Poly]]] = {}
    for j in range(k - 1, 0, -1):
        A = state.A
        entries = {}
        for i in range(k, n):
            if not A.num.rows[i][j].is_zero():
                entries[(i, j - 1)] = (-A.num.rows[i][j], A.den)
        zero = (A.den * 0, A.den)
        cols[j - 1] = [entries.get((i, j - 1), zero) for i in range(k, n)]
        if entries:
            state = pivot(state, Elementary(entries), check=check)
    if not shape_detect(state.A).shape_II:
        raise ShapeError("phase II did not reach Shape II")
    return state, cols


def dbz_two(state: GaugeState, k: int, *, check: bool = False) -> GaugeState:
    """Phase II: clear columns k, ..., 2 of the lower-left block, last first."""
    n = state.A.shape[0]
    if k >= n or k <= 1:
        return state
    return _phase_two(state, k, check)[0]


def _check_gamma_recurrence(A1: RatMat, A2: RatMat, k: int, cols: dict[int, list[RatFun]]) -> bool:
    """Columns of the accumulated lower-left block satisfy the Γ recurrence.

    With the block of P^II written as [c_1 ... c_k]: c_k = 0,
    c_a = Γ(c_{a+1}) - α_{a+1}, and v = α_1 - Γ(c_1).
    """
    n = A1.shape[0]
    p = A1.p
    beta = RatMat(PolyMat([[A1.num.rows[i][j] for j in range(k, n)] for i in range(k, n)], p), A1.den)

    def col(vals):
        return RatMat.from_entries([[RatFun(*v)] for v in vals], p)

    fld = field(p)
    zero = col([(fld.poly([]), fld.one)] * (n - k))
    c = {k - 1: zero}
    for a in range(k - 2, -1, -1):
        c[a] = col(cols[a])
    for a in range(k - 2, -1, -1):
        alpha_next = _column(A1, range(k, n), a + 1)
        if c[a] != gamma_apply(beta, c[a + 1]) - alpha_next:
            return False
    v = _column(A2, range(k, n), 0)
    return v == _column(A1, range(k, n), 0) - gamma_apply(beta, c[0])


# ---- phase III --------------------------------------------------------------

def dbz_three(state: GaugeState, k: int, *, check: bool = False):
    """Phase III: move a nonzero entry of v to the bottom, normalise it to 1,
    clear the rest of v with it, and rotate.  Returns (state, h, w)."""
    n = state.A.shape[0]
    A = state.A
    nz = [i for i in range(k, n) if not A.num.rows[i][0].is_zero()]
    if not nz:
        raise ValueError("phase III needs v ≠ 0")
    h = max(nz)
    if h != n - 1:
        state = pivot(state, Swap(h, n - 1, n), check=check)
    w = state.A.entry(n - 1, 0).inverse()
    state = pivot(state, Scale(n - 1, w), check=check)
    A = state.A
    entries = {(i, n - 1): (-A.num.rows[i][0], A.den)
               for i in range(k, n - 1) if not A.num.rows[i][0].is_zero()}
    if entries:
        state = pivot(state, Elementary(entries), check=check)
    state = pivot(state, Rot(n), check=check)
    return state, h, w


# ---- driver -----------------------------------------------------------------

def _block_degrees(trace: DbzTrace, A1: RatMat, A2: RatMat, P2_block: dict, k: int) -> None:
    """Cleared degrees of P^II and M^II against k·d_I."""
    qI = A1.den
    dI = max(A1.num.degree(), A1.den.degree(), 1)
    n = A1.shape[0]
    p = A1.p
    fld = _field(p)
    entries = [[RatFun.const(1 if a == b else 0, fld) for b in range(n)] for a in range(n)]
    for a, colvals in P2_block.items():
        for i, t in enumerate(colvals):
            entries[k + i][a] = RatFun(*t)
    P2 = RatMat.from_entries(entries, p)
    dP = cleared_degree(P2, qI ** (k - 1))
    dM = cleared_degree(A2, qI ** k)
    trace.block_degrees[f"q_I^{k - 1} P^II"] = (10**9 if dP is None else dP, k, dI)
    trace.block_degrees[f"q_I^{k} M^II"] = (10**9 if dM is None else dM, k, dI)


def _field(p):
    return field(p)


def _block_row(A: RatMat, o: int, k: int) -> CompanionBlock:
    i = o + k - 1
    return CompanionBlock(tuple(A.entry(i, o + j) for j in range(k)))


def dbz(sys: RatMatSystem, *, check: bool = False, measure: bool = True,
        mode: Literal["combined", "elementary"] = "combined",
        _top: bool = True) -> tuple[UncouplingResult, DbzTrace]:
    """Uncouple Y' = MY into companion blocks.

    ``check`` verifies the gauge invariant after every pivot (cubic cost);
    ``measure`` records degrees, the seed-row identities and the Γ
    recurrence in the trace.
    """
    n = sys.n
    trace = DbzTrace(n, sys.d)
    state = GaugeState.initial(sys)
    prev_k = 0
    first = True
    while True:
        trace.phases.append("I")
        state, k = dbz_one(state, mode=mode, check=check,
                           trace=trace if (measure and first and _top) else None,
                           deep=measure and first and _top)
        if k <= prev_k:
            raise ShapeError(f"block size did not grow after a restart ({prev_k} -> {k})")
        u = state.P.row(0)
        seed_ok = None
        if measure:
            cur, seed_ok = u, True
            for j in range(1, k):
                cur = delta_apply(sys, cur)
                if cur != state.P.row(j):
                    seed_ok = False
                    break
        trace.rounds.append(RoundRecord(k, u, seed_ok))
        first = False
        if k == n:
            C = _block_row(state.A, 0, n)
            return UncouplingResult(state.P, [C], [u]), trace
        A1 = state.A
        trace.phases.append("II")
        cols: dict = {}
        if k > 1:
            state, cols = _phase_two(state, k, check)
        rep = shape_detect(state.A)
        if measure and k > 1:
            trace.gamma_ok.append(_check_gamma_recurrence(A1, state.A, k, cols))
            _block_degrees(trace, A1, state.A, cols, k)
        if rep.v.is_zero():
            beta = rep.beta
            sub = RatMatSystem.from_matrix(beta)
            sub_res, sub_trace = dbz(sub, check=check, measure=measure, mode=mode, _top=False)
            trace.children.append(sub_trace)
            P = _embed(state.P, sub_res.P, k)
            blocks = [_block_row(state.A, 0, k)] + list(sub_res.blocks)
            seeds = []
            o = 0
            for b in blocks:
                seeds.append(P.row(o))
                o += b.k
            return UncouplingResult(P, blocks, seeds), trace
        trace.phases.append("III")
        state, h, w = dbz_three(state, k, check=check)
        shape3 = is_shape_III(state.A, k)
        trace.restarts.append(RestartRecord(k, h, w, state.P.row(0), shape3))
        prev_k = k


def _embed(P: RatMat, Pb: RatMat, k: int) -> RatMat:
    """diag(I_k, Pb)·P."""
    p = P.p
    n = P.shape[0]
    top = RatMat(PolyMat(P.num.rows[:k], p), P.den) if k else None
    bottom = Pb @ RatMat(PolyMat(P.num.rows[k:], p), P.den)
    if top is None:
        return bottom
    out = vjoin(top, bottom)
    if out.shape != (n, n):
        raise DimensionMismatch("embedding produced the wrong shape")
    return out


__all__ = [
    "PivotMatrix", "Permutation", "Sparse", "Swap", "Rot", "Scale", "Elementary", "RowReplace",
    "pivot", "dbz_one", "dbz_two", "dbz_three", "gamma_apply", "dbz", "DbzTrace",
    "IterationRecord", "RoundRecord", "RestartRecord",
]

