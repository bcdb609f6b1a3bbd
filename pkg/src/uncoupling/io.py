"""Text formats for systems and uncoupling results, and random instances.

A system file::

    p 1048583
    n 2
    d 1
    q: 1 0
    M[1][1]: 0 1
    M[1][2]: 1 0
    ...

lists d + 1 coefficients per polynomial, low to high, indices 1-based.
The numerators N of M = N/q are stored.  A result file holds P and the
last row of each companion block, one entry per line as
``num coeffs / den coeffs``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import flint
import numpy as np

from .algebra.field import DEFAULT_PRIME, field
from .algebra.matrix import PolyMat, RatMat
from .algebra.poly import RatFun
from .cvm import UncouplingResult
from .delta import CompanionBlock, RatMatSystem
from .errors import ParseError

_ENTRY = re.compile(r"^(?P<name>[A-Za-z]\w*)\[(?P<i>\d+)\]\[(?P<j>\d+)\]:(?P<rest>.*)$")


def _coeff_list(text: str, p: int, where: str) -> list[int]:
    try:
        vals = [int(tok) for tok in text.split()]
    except ValueError:
        raise ParseError(f"{where}: coefficients must be integers") from None
    if not vals:
        raise ParseError(f"{where}: empty coefficient list")
    if any(v < 0 or v >= p for v in vals):
        raise ParseError(f"{where}: coefficient outside [0, p)")
    return vals


def _fmt_poly(a: flint.nmod_poly, width: int | None = None) -> str:
    c = [int(x) for x in a.coeffs()] or [0]
    if width is not None:
        c = c + [0] * (width - len(c))
    return " ".join(map(str, c))


def _header(lines, keys):
    out = {}
    for key in keys:
        if not lines:
            raise ParseError(f"missing header line '{key}'")
        parts = lines.pop(0).split()
        if len(parts) != 2 or parts[0] != key:
            raise ParseError(f"expected '{key} <int>'")
        try:
            out[key] = int(parts[1])
        except ValueError:
            raise ParseError(f"header '{key}' is not an integer") from None
    return out


def _content_lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


@dataclass(frozen=True)
class SystemFile:
    """Parse and print the system format; print(parse(s)) == s for printed s."""

    system: RatMatSystem

    @classmethod
    def parse(cls, text: str) -> SystemFile:
        lines = _content_lines(text)
        h = _header(lines, ["p", "n", "d"])
        p, n, d = h["p"], h["n"], h["d"]
        if n < 1 or d < 0 or p < 2:
            raise ParseError("invalid header values")
        fld = field(p)
        if not lines or not lines[0].startswith("q:"):
            raise ParseError("missing 'q:' line")
        qc = _coeff_list(lines.pop(0)[2:], p, "q")
        if len(qc) > d + 1:
            raise ParseError("q has more than d + 1 coefficients")
        entries: dict[tuple[int, int], list[int]] = {}
        for ln in lines:
            m = _ENTRY.match(ln)
            if not m or m["name"] != "M":
                raise ParseError(f"unexpected line: {ln!r}")
            i, j = int(m["i"]), int(m["j"])
            if not (1 <= i <= n and 1 <= j <= n):
                raise ParseError(f"index out of range in {ln!r}")
            if (i, j) in entries:
                raise ParseError(f"duplicate entry M[{i}][{j}]")
            c = _coeff_list(m["rest"], p, f"M[{i}][{j}]")
            if len(c) > d + 1:
                raise ParseError(f"M[{i}][{j}] has more than d + 1 coefficients")
            entries[(i, j)] = c
        if len(entries) != n * n:
            raise ParseError(f"expected {n * n} matrix entries, found {len(entries)}")
        N = PolyMat([[fld.poly(entries[(i, j)]) for j in range(1, n + 1)] for i in range(1, n + 1)], p)
        q = fld.poly(qc)
        try:
            return cls(RatMatSystem(N, q, d))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(str(exc)) from exc

    def format(self) -> str:
        s = self.system
        w = s.d + 1
        out = [f"p {s.p}", f"n {s.n}", f"d {s.d}", f"q: {_fmt_poly(s.q, w)}"]
        for i in range(s.n):
            for j in range(s.n):
                out.append(f"M[{i + 1}][{j + 1}]: {_fmt_poly(s.N.rows[i][j], w)}")
        return "\n".join(out) + "\n"


def read_system(path) -> RatMatSystem:
    with open(path) as fh:
        return SystemFile.parse(fh.read()).system


def write_system(sys: RatMatSystem, path) -> None:
    with open(path, "w") as fh:
        fh.write(SystemFile(sys).format())


# ---- results ----------------------------------------------------------------

def _fmt_entry(e: RatFun) -> str:
    return f"{_fmt_poly(e.num)} / {_fmt_poly(e.den)}"


def _parse_entry(text: str, p: int, where: str) -> RatFun:
    if "/" not in text:
        raise ParseError(f"{where}: expected 'num / den'")
    a, b = text.split("/", 1)
    fld = field(p)
    num, den = fld.poly(_coeff_list(a, p, where)), fld.poly(_coeff_list(b, p, where))
    if den.is_zero():
        raise ParseError(f"{where}: zero denominator")
    return RatFun(num, den)


def format_result(result: UncouplingResult, algo: str | None = None) -> str:
    P = result.P
    n = P.shape[0]
    out = []
    if algo:
        out.append(f"# algorithm: {algo}")
    out += [f"p {P.p}", f"n {n}", f"t {result.t}", "sizes " + " ".join(map(str, result.sizes))]
    for i in range(n):
        for j in range(n):
            out.append(f"P[{i + 1}][{j + 1}]: {_fmt_entry(P.entry(i, j))}")
    for b, block in enumerate(result.blocks, 1):
        k = block.k
        for j, e in enumerate(block.last_row):
            out.append(f"C{b}[{k}][{j + 1}]: {_fmt_entry(e)}")
    return "\n".join(out) + "\n"


def parse_result(text: str) -> UncouplingResult:
    lines = _content_lines(text)
    h = _header(lines, ["p", "n", "t"])
    p, n, t = h["p"], h["n"], h["t"]
    if not lines or not lines[0].startswith("sizes"):
        raise ParseError("missing 'sizes' line")
    try:
        sizes = [int(x) for x in lines.pop(0).split()[1:]]
    except ValueError:
        raise ParseError("block sizes must be integers") from None
    if len(sizes) != t or any(s < 1 for s in sizes):
        raise ParseError("'sizes' does not list t positive block sizes")
    Pent: dict = {}
    Cent: dict = {}
    for ln in lines:
        m = _ENTRY.match(ln)
        if not m:
            raise ParseError(f"unexpected line: {ln!r}")
        i, j = int(m["i"]), int(m["j"])
        e = _parse_entry(m["rest"], p, ln.split(":")[0])
        if m["name"] == "P":
            Pent[(i, j)] = e
        elif m["name"].startswith("C") and m["name"][1:].isdigit():
            b = int(m["name"][1:])
            if not 1 <= b <= t or i != sizes[b - 1] or not 1 <= j <= i:
                raise ParseError(f"bad block entry {ln!r}")
            Cent[(b, j)] = e
        else:
            raise ParseError(f"unexpected entry {m['name']!r}")
    if len(Pent) != n * n or any(not (1 <= i <= n and 1 <= j <= n) for i, j in Pent):
        raise ParseError("P must have n × n entries")
    if len(Cent) != sum(sizes):
        raise ParseError("companion rows are incomplete")
    P = RatMat.from_entries([[Pent[(i, j)] for j in range(1, n + 1)] for i in range(1, n + 1)], p)
    blocks = [CompanionBlock(tuple(Cent[(b, j)] for j in range(1, k + 1)))
              for b, k in enumerate(sizes, 1)]
    seeds, o = [], 0
    for k in sizes:
        if o < n:
            seeds.append(P.row(o))
        o += k
    return UncouplingResult(P, blocks, seeds)


def read_result(path) -> UncouplingResult:
    with open(path) as fh:
        return parse_result(fh.read())


def write_result(result: UncouplingResult, path, algo: str | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(format_result(result, algo))


# ---- random instances -------------------------------------------------------

def gen_random(n: int, d: int, p: int = DEFAULT_PRIME, seed: int = 0,
               q_mode: str = "random") -> RatMatSystem:
    """Uniform entries of degree ≤ d; q = 1 (``unit``) or monic of degree d."""
    if n < 1 or d < 0:
        raise ValueError("need n ≥ 1 and d ≥ 0")
    if q_mode not in ("unit", "random"):
        raise ValueError(f"unknown q_mode {q_mode!r}")
    fld = field(p)
    rng = np.random.default_rng(seed)
    N = PolyMat([[fld.random_poly(rng, d, exact=False) for _ in range(n)] for _ in range(n)], p)
    q = fld.one if q_mode == "unit" else fld.random_poly(rng, d, exact=True, monic=True)
    return RatMatSystem(N, q, d)
