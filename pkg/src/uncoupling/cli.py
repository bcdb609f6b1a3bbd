"""Command-line front end: ``gen``, ``uncouple``, ``verify`` and ``bench``.

The modulus comes from ``--prime`` or the UNCOUPLING_PRIME environment
variable, defaulting to 1048583.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from .algebra.field import DEFAULT_PRIME, field
from .algebra.matrix import PolyMat, RatMat
from .bench import ALGOS, fit_power_law, run_algo, run_bench, verify_sweep, write_csv, write_series
from .cvm import degree_report
from .errors import ExhaustedTries, NonGeneric, NotCyclic, ParseError, UncouplingError
from .io import SystemFile, format_result, gen_random, read_result, read_system
from .verify import degree_audit, validate


def _prime(args) -> int:
    if args.prime is not None:
        return args.prime
    env = os.environ.get("UNCOUPLING_PRIME")
    return int(env) if env else DEFAULT_PRIME


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None


def _parse_u(text: str, n: int, p: int) -> RatMat:
    """``"1 0;0"`` → the row (1, 0): entries separated by ';', coefficients by spaces."""
    parts = [s.strip() for s in text.split(";")]
    if len(parts) != n:
        raise ParseError(f"--u needs {n} entries, got {len(parts)}")
    fld = field(p)
    row = []
    for s in parts:
        try:
            row.append(fld.poly([int(c) % p for c in s.split()] if s else []))
        except ValueError:
            raise ParseError(f"bad coefficient in --u entry {s!r}") from None
    return RatMat.from_polymat(PolyMat([row], p))


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _print_trace(algo, system, result, trace, out) -> None:
    if algo in ("cvm", "cvm-fast"):
        rep = degree_report(system, result)
        for e in rep.entries:
            print(f"degree {e.name}: {e.measured} (bound {e.bound}, {e.flag})", file=out)
        print(f"tries: {result.extra.get('tries', 1)}", file=out)
    elif algo == "dbz" and trace is not None:
        print("phases: " + " ".join(trace.phases), file=out)
        print(f"restarts: {len(trace.restarts)}", file=out)
        for r in trace.restarts:
            print(f"restart k={r.k} h={r.h + 1} w={r.w}", file=out)
        audit = degree_audit(trace, strict=False)
        for it in audit.items:
            bound = "-" if it.bound is None else it.bound
            print(f"degree {it.name}: {it.measured} (bound {bound}, {it.flag})", file=out)
    print("block sizes: " + " ".join(map(str, result.sizes)), file=out)


def cmd_gen(args) -> int:
    s = gen_random(args.n, args.d, _prime(args), args.seed, args.q_mode)
    _write(SystemFile(s).format(), args.output)
    return 0


def cmd_uncouple(args) -> int:
    p = _prime(args)
    if args.input:
        system = read_system(args.input)
    elif args.gen:
        n, d = _int_list(args.gen)
        system = gen_random(n, d, p, args.seed, args.q_mode)
    else:
        print("error: give an input file or --gen n,d", file=sys.stderr)
        return 2
    u = _parse_u(args.u, system.n, system.p) if args.u else None
    if u is not None and args.algo not in ("cvm", "cvm-fast"):
        print("error: --u only applies to cvm and cvm-fast", file=sys.stderr)
        return 2
    try:
        result, trace = run_algo(system, args.algo, seed=args.seed, u=u, trace=args.trace,
                                 check=args.verify)
    except NotCyclic as exc:
        print(f"not cyclic: {exc}", file=sys.stderr)
        return 3
    except NonGeneric as exc:
        print(f"non-generic input (order reached {exc.ell}): {exc}", file=sys.stderr)
        return 3
    except ExhaustedTries as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 3
    _write(format_result(result, args.algo), args.output)
    if args.trace:
        _print_trace(args.algo, system, result, trace, sys.stderr)
    if args.verify:
        rep = validate(system, result)
        for m in rep.messages:
            print(f"verify: {m}", file=sys.stderr)
        print(f"verify: {'ok' if rep.ok else 'FAILED'}", file=sys.stderr)
        return 0 if rep.ok else 1
    return 0


def cmd_verify(args) -> int:
    system = read_system(args.system)
    result = read_result(args.result)
    if result.P.p != system.p:
        print("verify: result and system use different moduli", file=sys.stderr)
        return 1
    rep = validate(system, result)
    print(f"gauge_ok={rep.gauge_ok} shape_ok={rep.shape_ok} seed_rows_ok={rep.seed_rows_ok} "
          f"annihilation_ok={rep.annihilation_ok}")
    for m in rep.messages:
        print(m)
    return 0 if rep.ok else 1


def cmd_bench(args) -> int:
    p = _prime(args)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]

    def progress(recs):
        r = recs[-1]
        state = "censored" if r.censored else f"{min(x.seconds for x in recs):.4f}s"
        print(f"{r.algo} n={r.n} d={r.d}: {state}", file=sys.stderr)

    records = run_bench(algos, args.n, args.d, reps=args.reps, seed=args.seed, p=p,
                        q_mode=args.q_mode, timeout=args.timeout, u_degree=args.u_degree,
                        progress=progress if not args.quiet else None)
    write_csv(records, args.out)
    if args.series:
        write_series(records, args.series)
    for algo in algos:
        fit = fit_power_law(records, algo)
        if fit is None:
            print(f"{algo}: no fit (need at least 3 values along n or d)")
            continue
        e = "-" if fit.e is None else f"{fit.e:.2f}"
        pe = "-" if fit.p is None else f"{fit.p:.2f}"
        print(f"{algo}: c={fit.c:.3g} e={e} p={pe} rms_residual={fit.residual:.3f} cells={fit.points}")
    status = 0
    if args.verify:
        for algo, n, d, ok in verify_sweep(algos, args.n, args.d, seed=args.seed, p=p,
                                           q_mode=args.q_mode, jobs=args.jobs):
            if not ok:
                print(f"verification failed: {algo} n={n} d={d}", file=sys.stderr)
                status = 1
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uncouple",
                                 description="Uncouple Y' = MY over Z/pZ(X) into scalar equations.")
    ap.add_argument("--prime", type=int, default=None,
                    help="field modulus (default: $UNCOUPLING_PRIME or 1048583)")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a random system")
    g.add_argument("n", type=int)
    g.add_argument("d", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--q-mode", choices=["unit", "random"], default="random")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    u = sub.add_parser("uncouple", help="uncouple a system")
    u.add_argument("input", nargs="?", help="system file")
    u.add_argument("--gen", help="generate a random system 'n,d' instead of reading a file")
    u.add_argument("--q-mode", choices=["unit", "random"], default="random")
    u.add_argument("--algo", choices=ALGOS, default="cvm-fast")
    u.add_argument("--u", help="explicit candidate row, e.g. '1;0' or '1 2;0'")
    u.add_argument("--seed", type=int, default=0)
    u.add_argument("--verify", action="store_true", help="validate; exit 1 on failure")
    u.add_argument("--trace", action="store_true", help="print degrees and phases to stderr")
    u.add_argument("-o", "--output")
    u.set_defaults(func=cmd_uncouple)

    v = sub.add_parser("verify", help="check a result file against a system file")
    v.add_argument("system")
    v.add_argument("result")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="time algorithms over an (n, d) grid")
    b.add_argument("--algos", default="cvm-fast,dbz")
    b.add_argument("--n", type=_int_list, default=[4, 8, 12, 16])
    b.add_argument("--d", type=_int_list, default=[2, 4])
    b.add_argument("--reps", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--q-mode", choices=["unit", "random"], default="random")
    b.add_argument("--u-degree", type=int, default=0, help="degree of random cyclic candidates")
    b.add_argument("--timeout", type=float, default=600.0, help="seconds per cell; 0 disables")
    b.add_argument("--out", default="bench.csv")
    b.add_argument("--series", help="also write per-d log-log series to this CSV")
    b.add_argument("--verify", action="store_true", help="validate every grid instance afterwards")
    b.add_argument("--jobs", type=int, default=1, help="worker processes for --verify")
    b.add_argument("--quiet", action="store_true")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "timeout", None) == 0:
        args.timeout = None
    try:
        return args.func(args)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UncouplingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
