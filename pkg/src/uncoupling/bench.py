"""Timing harness: run algorithms over an (n, d) grid and fit power laws.

Records are written as CSV with columns algo,n,d,seed,rep,seconds,out_size.
A cell that exceeds its timeout is recorded once with out_size ``censored``
and is left out of the fits.  Fits regress log(seconds) on log d and log n;
an exponent is fitted only along an axis that has at least three distinct
values.
"""

from __future__ import annotations

import csv
import math
import multiprocessing as mp
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .algebra.field import DEFAULT_PRIME, field
from .algebra.matrix import PolyMat, RatMat
from .az import az_uncouple
from .cvm import UncouplingResult, cv_trial, prob_cv
from .dbz import dbz
from .delta import RatMatSystem
from .io import gen_random
from .verify import arithmetic_size

ALGOS = ("cvm", "cvm-fast", "dbz", "az")
CSV_COLUMNS = ("algo", "n", "d", "seed", "rep", "seconds", "out_size")
CENSORED = "censored"


def run_algo(sys: RatMatSystem, algo: str, *, seed: int = 0, u: RatMat | None = None,
             u_degree: int | None = None, check: bool = False, trace: bool = False):
    """Dispatch to one algorithm; returns (UncouplingResult, trace or None).

    Without an explicit ``u`` the cyclic-vector variants draw random
    candidates from ``seed``.
    """
    if algo in ("cvm", "cvm-fast"):
        mode = "fast" if algo == "cvm-fast" else "naive"
        if u is not None:
            return cv_trial(sys, u, mode), None
        return prob_cv(sys, seed, mode=mode, u_degree=u_degree, verify=check), None
    if algo == "dbz":
        return dbz(sys, check=check, measure=trace)
    if algo == "az":
        return az_uncouple(sys, check=check).to_uncoupling(), None
    raise ValueError(f"unknown algorithm {algo!r}")


@dataclass
class BenchRecord:
    algo: str
    n: int
    d: int
    seed: int
    rep: int
    seconds: float
    out_size: int | None      # None marks a censored (timed out) cell

    @property
    def censored(self) -> bool:
        return self.out_size is None

    def row(self) -> list:
        return [self.algo, self.n, self.d, self.seed, self.rep, f"{self.seconds:.6f}",
                CENSORED if self.censored else self.out_size]


@dataclass
class PowerLawFit:
    """log t = log c + e·log d + p·log n; an exponent is None when its axis is too short."""

    algo: str
    c: float
    e: float | None
    p: float | None
    residual: float
    points: int


def _time_cell(sys, algo, seed, reps, u_degree):
    out = []
    run_algo(sys, algo, seed=seed, u_degree=u_degree)  # warmup, discarded
    for rep in range(reps):
        t0 = time.perf_counter()
        res, _ = run_algo(sys, algo, seed=seed, u_degree=u_degree)
        dt = time.perf_counter() - t0
        out.append((rep, dt, arithmetic_size(res)))
    return out


def _child(conn, args):
    try:
        conn.send(("ok", _time_cell(*args)))
    except Exception as exc:  # reported to the parent
        conn.send(("error", repr(exc)))
    finally:
        conn.close()


def bench_cell(algo: str, n: int, d: int, *, seed: int = 0, reps: int = 1, p: int = DEFAULT_PRIME,
               q_mode: str = "random", timeout: float | None = None,
               u_degree: int | None = 0) -> list[BenchRecord]:
    """Time one grid cell.  With a timeout the cell runs in a child process."""
    sys = gen_random(n, d, p, seed, q_mode)
    args = (sys, algo, seed, reps, u_degree)
    if timeout is None:
        rows = _time_cell(*args)
    else:
        ctx = mp.get_context("fork")
        parent, child = ctx.Pipe(duplex=False)
        proc = ctx.Process(target=_child, args=(child, args))
        proc.start()
        child.close()
        if parent.poll(timeout):
            status, payload = parent.recv()
            proc.join()
        else:
            proc.kill()
            proc.join()
            return [BenchRecord(algo, n, d, seed, 0, float(timeout), None)]
        if status != "ok":
            raise RuntimeError(f"{algo} failed on n={n}, d={d}: {payload}")
        rows = payload
    return [BenchRecord(algo, n, d, seed, rep, dt, size) for rep, dt, size in rows]


def run_bench(algos: Sequence[str], n_list: Sequence[int], d_list: Sequence[int], *,
              reps: int = 1, seed: int = 0, p: int = DEFAULT_PRIME, q_mode: str = "random",
              timeout: float | None = None, u_degree: int | None = 0,
              progress=None) -> list[BenchRecord]:
    if not algos or not n_list or not d_list:
        raise ValueError("benchmark grid is empty")
    for a in algos:
        if a not in ALGOS:
            raise ValueError(f"unknown algorithm {a!r}")
    records = []
    for algo in algos:
        for n in n_list:
            for d in d_list:
                recs = bench_cell(algo, n, d, seed=seed, reps=reps, p=p, q_mode=q_mode,
                                  timeout=timeout, u_degree=u_degree)
                records.extend(recs)
                if progress:
                    progress(recs)
    return records


def fit_power_law(records: Iterable[BenchRecord], algo: str | None = None) -> PowerLawFit | None:
    """Least-squares fit over the uncensored records.

    Each cell contributes its fastest rep: interference only adds time, so
    the minimum is the least noisy estimate.
    """
    cells: dict[tuple[int, int], list[float]] = {}
    name = algo
    for r in records:
        if (algo is not None and r.algo != algo) or r.censored:
            continue
        name = r.algo
        cells.setdefault((r.n, r.d), []).append(r.seconds)
    if not cells:
        return None
    ns = {n for n, _ in cells}
    ds = {d for _, d in cells}
    use_d, use_n = len(ds) >= 3, len(ns) >= 3
    if not (use_d or use_n):
        return None
    keys = sorted(cells)
    cols = [np.ones(len(keys))]
    if use_d:
        cols.append(np.log([d for _, d in keys]))
    if use_n:
        cols.append(np.log([n for n, _ in keys]))
    X = np.stack(cols, axis=1)
    y = np.log([max(min(cells[k]), 1e-9) for k in keys])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = float(np.sqrt(np.mean((X @ coef - y) ** 2)))
    it = iter(coef[1:])
    e = float(next(it)) if use_d else None
    pexp = float(next(it)) if use_n else None
    return PowerLawFit(name, float(math.exp(coef[0])), e, pexp, resid, len(keys))


def write_csv(records: Iterable[BenchRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.row())


def read_csv(path) -> list[BenchRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            size = None if row["out_size"] == CENSORED else int(row["out_size"])
            out.append(BenchRecord(row["algo"], int(row["n"]), int(row["d"]), int(row["seed"]),
                                   int(row["rep"]), float(row["seconds"]), size))
    return out


def write_series(records: Iterable[BenchRecord], path) -> None:
    """Per (algo, d) log-log series: columns algo,d,n,log_n,log_seconds."""
    cells: dict[tuple[str, int, int], list[float]] = {}
    for r in records:
        if not r.censored:
            cells.setdefault((r.algo, r.d, r.n), []).append(r.seconds)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["algo", "d", "n", "log_n", "log_seconds"])
        for (algo, d, n), ts in sorted(cells.items()):
            w.writerow([algo, d, n, f"{math.log(n):.6f}", f"{math.log(min(ts)):.6f}"])


def _verify_cell(args) -> tuple:
    from .verify import validate

    algo, n, d, seed, p, q_mode = args
    sys = gen_random(n, d, p, seed, q_mode)
    res, _ = run_algo(sys, algo, seed=seed, u_degree=0)
    return algo, n, d, validate(sys, res).ok


def verify_sweep(algos, n_list, d_list, *, seed=0, p=DEFAULT_PRIME, q_mode="random", jobs=1):
    """Validate every grid instance, optionally across worker processes."""
    cells = [(a, n, d, seed, p, q_mode) for a in algos for n in n_list for d in d_list]
    if jobs <= 1:
        return [_verify_cell(c) for c in cells]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(jobs, mp_context=mp.get_context("fork")) as ex:
        return list(ex.map(_verify_cell, cells))


def unit_row(n: int, p: int = DEFAULT_PRIME) -> RatMat:
    fld = field(p)
    return RatMat.from_polymat(PolyMat([[fld.one] + [fld.zero] * (n - 1)], p))


__all__ = ["ALGOS", "BenchRecord", "PowerLawFit", "run_algo", "bench_cell", "run_bench",
           "fit_power_law", "write_csv", "read_csv", "write_series", "verify_sweep",
           "UncouplingResult"]
