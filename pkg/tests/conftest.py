import numpy as np
import pytest
from hypothesis import settings

from uncoupling.algebra import PolyMat, RatFun, RatMat, field
from uncoupling.cvm import UncouplingResult
from uncoupling.delta import CompanionBlock, RatMatSystem
from uncoupling.io import gen_random

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

P = 1048583
F = field(P)
X = F.poly([0, 1])

# (criterion, verdict, detail) lines from test_acceptance, echoed at the end
ACCEPTANCE: list[tuple[str, str, str]] = []
# (system, result) pairs produced by tests, re-checked by the annihilation criterion
PRODUCED: list = []


def poly(c):
    if isinstance(c, int):
        return F.poly([c % P])
    if isinstance(c, list):
        return F.poly([x % P for x in c])
    return c


def system(rows, d=None, q=1):
    """A system from nested lists of ints, coefficient lists or nmod_polys."""
    N = PolyMat([[poly(e) for e in r] for r in rows], P)
    q = poly(q)
    if d is None:
        d = max(N.degree(), q.degree(), 0)
    return RatMatSystem(N, q, d)


def ratmat(rows):
    return RatMat.from_polymat(PolyMat([[poly(e) for e in r] for r in rows], P))


def unit(i, n):
    return ratmat([[1 if j == i else 0 for j in range(n)]])


def rotation(n):
    """VJoin(e_2, ..., e_n, e_1)."""
    return system([[1 if j == (i + 1) % n else 0 for j in range(n)] for i in range(n)])


def random_system(n, d, seed, q_mode="random"):
    return gen_random(n, d, P, seed, q_mode)


def random_polymat(rng, m, n, d):
    return PolyMat([[F.random_poly(rng, d, exact=False) for _ in range(n)] for _ in range(m)], P)


def record(sys, result):
    PRODUCED.append((sys, result))
    return result


def mutate_result(result, rng):
    """Add 1 to one coefficient of one numerator in one block's last row."""
    b = int(rng.integers(0, result.t))
    row = list(result.blocks[b].last_row)
    j = int(rng.integers(0, len(row)))
    num = [int(c) for c in row[j].num.coeffs()] or [0]
    i = int(rng.integers(0, len(num)))
    num[i] = (num[i] + 1) % P
    row[j] = RatFun(F.poly(num), row[j].den)
    blocks = list(result.blocks)
    blocks[b] = CompanionBlock(tuple(row))
    return UncouplingResult(result.P, blocks, result.seeds)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_collection_modifyitems(items):
    # acceptance last, so its annihilation sweep sees everything recorded before
    items.sort(key=lambda it: it.nodeid.startswith("tests/test_acceptance.py"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for crit, verdict, detail in sorted(ACCEPTANCE, key=lambda t: int(t[0])):
            terminalreporter.write_line(f"criterion {crit}: {verdict}  {detail}")
