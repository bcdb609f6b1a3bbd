import time

import pytest

from conftest import P, random_system, record, system, unit
from uncoupling.bench import (BenchRecord, bench_cell, fit_power_law, read_csv, run_algo,
                              run_bench, unit_row, write_csv, write_series)
from uncoupling.cli import main
from uncoupling.cvm import cv_trial
from uncoupling.errors import ParseError
from uncoupling.io import (SystemFile, format_result, gen_random, parse_result, read_system,
                           write_system)

EX2_TEXT = """p 1048583
n 2
d 1
q: 1 0
M[1][1]: 0 1
M[1][2]: 1 0
M[2][1]: 1 0
M[2][2]: 0 0
"""


# ---- system files -----------------------------------------------------------

def test_system_file_example():
    s = SystemFile.parse(EX2_TEXT).system
    assert s.M == system([[[0, 1], 1], [1, 0]]).M and s.d == 1
    assert SystemFile(s).format() == EX2_TEXT


def test_system_file_round_trip_random():
    for seed in range(100):
        s = random_system(1 + seed % 6, seed % 5, seed, "unit" if seed % 3 == 0 else "random")
        text = SystemFile(s).format()
        back = SystemFile.parse(text).system
        assert back.N == s.N and back.q == s.q and back.d == s.d
        assert SystemFile(back).format() == text


def test_system_file_comments_and_short_lists():
    text = "# a comment\n" + EX2_TEXT.replace("M[2][2]: 0 0", "M[2][2]: 0")
    assert SystemFile.parse(text).system.N == SystemFile.parse(EX2_TEXT).system.N


@pytest.mark.parametrize("bad", [
    EX2_TEXT.replace("p 1048583", "p x"),
    EX2_TEXT.replace("q: 1 0\n", ""),
    EX2_TEXT.replace("q: 1 0", "q: 0"),
    EX2_TEXT.replace("M[2][2]: 0 0\n", ""),
    EX2_TEXT.replace("M[2][2]", "M[3][2]"),
    EX2_TEXT.replace("M[2][2]", "M[2][1]"),
    EX2_TEXT.replace("M[1][1]: 0 1", "M[1][1]: 0 1 5"),
    EX2_TEXT.replace("M[1][1]: 0 1", "M[1][1]: 0 1048583"),
    EX2_TEXT.replace("M[1][1]: 0 1", "M[1][1]: a"),
    EX2_TEXT + "garbage\n",
])
def test_system_file_rejects(bad):
    with pytest.raises(ParseError):
        SystemFile.parse(bad)


def test_result_round_trip():
    for seed in range(20):
        s = random_system(1 + seed % 5, 1 + seed % 3, 900 + seed)
        res, _ = run_algo(s, ["cvm", "cvm-fast", "dbz", "az"][seed % 4], seed=seed)
        back = parse_result(format_result(res, "x"))
        assert back.P == res.P and back.blocks == res.blocks and back.seeds == res.seeds
    structured = system([[0, 0, 0], [0, 0, 1], [0, 1, 0]])
    res, _ = run_algo(structured, "dbz")
    back = parse_result(format_result(res))
    assert back.sizes == (1, 2) and back.blocks == res.blocks


def test_result_rejects():
    text = format_result(cv_trial(system([[[0, 1], 1], [1, 0]]), unit(0, 2)))
    for bad in (text.replace("t 1", "t 2"), text.replace(" / 1", " / 0", 1),
                text.replace("C1[2][2]", "C1[1][2]"), "\n".join(text.splitlines()[:-1])):
        with pytest.raises(ParseError):
            parse_result(bad)


def test_gen_random_deterministic():
    a, b = gen_random(5, 3, P, 7), gen_random(5, 3, P, 7)
    assert a.N == b.N and a.q == b.q
    assert gen_random(5, 3, P, 8).N != a.N
    q = gen_random(3, 2, P, 0, "unit").q
    assert q.degree() == 0 and int(q.coeffs()[0]) == 1
    assert a.q.degree() == 3 and int(a.q.coeffs()[-1]) == 1
    with pytest.raises(ValueError):
        gen_random(0, 1)


# ---- command line -----------------------------------------------------------

def test_cli_gen_uncouple_verify(tmp_path, capsys):
    sysf, resf = tmp_path / "s.txt", tmp_path / "r.txt"
    assert main(["gen", "4", "2", "--seed", "3", "-o", str(sysf)]) == 0
    assert read_system(sysf).N == gen_random(4, 2, P, 3).N
    outputs = {}
    for algo in ("cvm", "cvm-fast", "dbz", "az"):
        out = tmp_path / f"{algo}.txt"
        assert main(["uncouple", str(sysf), "--algo", algo, "--verify", "-o", str(out)]) == 0
        assert main(["verify", str(sysf), str(out)]) == 0
        outputs[algo] = out.read_text()
    body = [ln for ln in outputs["dbz"].splitlines() if ln.startswith("C")]
    assert body == [ln for ln in outputs["az"].splitlines() if ln.startswith("C")]
    # the same result file is reproduced by the same seed
    assert main(["uncouple", str(sysf), "--seed", "0", "-o", str(resf)]) == 0
    assert resf.read_text() == outputs["cvm-fast"]
    capsys.readouterr()


def test_cli_verify_detects_corruption(tmp_path, capsys):
    sysf, resf = tmp_path / "s.txt", tmp_path / "r.txt"
    write_system(random_system(3, 2, 5), sysf)
    assert main(["uncouple", str(sysf), "--algo", "dbz", "-o", str(resf)]) == 0
    lines = resf.read_text().splitlines()
    i = next(k for k, ln in enumerate(lines) if ln.startswith("C1["))
    head, rest = lines[i].split(": ", 1)
    num, den = rest.split(" / ")
    coeffs = num.split()
    coeffs[0] = str((int(coeffs[0]) + 1) % P)
    lines[i] = f"{head}: {' '.join(coeffs)} / {den}"
    resf.write_text("\n".join(lines) + "\n")
    assert main(["verify", str(sysf), str(resf)]) == 1
    resf.write_text("nonsense\n")
    assert main(["verify", str(sysf), str(resf)]) == 2
    assert main(["verify", str(sysf), str(tmp_path / "missing")]) == 2
    capsys.readouterr()


def test_cli_exit_codes(tmp_path, capsys):
    zero = tmp_path / "z.txt"
    write_system(system([[0, 0], [0, 0]]), zero)
    assert main(["uncouple", str(zero), "--algo", "cvm", "--u", "1;0"]) == 3
    assert main(["uncouple", str(zero), "--algo", "az"]) == 3
    assert main(["uncouple", str(zero), "--algo", "dbz", "--verify"]) == 0
    assert main(["uncouple", str(zero), "--algo", "dbz", "--u", "1;0"]) == 2
    assert main(["uncouple", str(zero), "--u", "1"]) == 2
    assert main(["uncouple"]) == 2
    capsys.readouterr()


def test_cli_trace_and_gen_flag(capsys):
    assert main(["uncouple", "--gen", "3,1", "--algo", "dbz", "--trace"]) == 0
    err = capsys.readouterr().err
    assert "phases: I" in err and "block sizes: 3" in err
    assert main(["uncouple", "--gen", "3,1", "--trace", "--u", "1;0;0"]) == 0
    assert "degree" in capsys.readouterr().err


def test_cli_prime_option(tmp_path, capsys, monkeypatch):
    f = tmp_path / "s.txt"
    assert main(["--prime", "101", "gen", "3", "1", "-o", str(f)]) == 0
    assert read_system(f).p == 101
    monkeypatch.setenv("UNCOUPLING_PRIME", "211")
    assert main(["gen", "2", "1", "-o", str(f)]) == 0
    assert read_system(f).p == 211
    assert main(["uncouple", str(f), "--verify"]) == 0
    capsys.readouterr()


def test_cli_bench(tmp_path, capsys):
    out, series = tmp_path / "b.csv", tmp_path / "s.csv"
    code = main(["bench", "--algos", "cvm-fast,dbz", "--n", "2,3,4", "--d", "1", "--out", str(out),
                 "--series", str(series), "--verify", "--quiet", "--timeout", "0"])
    assert code == 0
    recs = read_csv(out)
    assert len(recs) == 6 and not any(r.censored for r in recs)
    text = capsys.readouterr().out
    assert "cvm-fast: c=" in text and "e=-" in text
    assert series.read_text().splitlines()[0] == "algo,d,n,log_n,log_seconds"
    main(["bench", "--algos", "dbz", "--n", "2", "--d", "1", "--out", str(out), "--quiet"])
    assert "no fit" in capsys.readouterr().out


# ---- benchmark harness ------------------------------------------------------

def test_fit_recovers_synthetic_exponents():
    recs = [BenchRecord("x", n, d, 0, 0, 0.01 * d ** 1.5 * n ** 3, 1)
            for n in (4, 8, 16) for d in (1, 2, 4)]
    fit = fit_power_law(recs)
    assert fit.e == pytest.approx(1.5) and fit.p == pytest.approx(3.0) and fit.residual < 1e-9
    assert fit_power_law(recs[:1]) is None
    only_n = fit_power_law([r for r in recs if r.d == 1])
    assert only_n.e is None and only_n.p == pytest.approx(3.0)


def test_censored_cells(tmp_path):
    recs = bench_cell("cvm", 30, 8, timeout=0.05)
    assert len(recs) == 1 and recs[0].censored
    ok = bench_cell("cvm-fast", 2, 1, timeout=30)
    assert not ok[0].censored
    path = tmp_path / "c.csv"
    write_csv(recs + ok, path)
    assert "censored" in path.read_text()
    back = read_csv(path)
    assert back[0].censored and back[1].out_size == ok[0].out_size
    assert fit_power_law(back) is None


def test_run_bench_records_and_series(tmp_path):
    recs = run_bench(["cvm-fast", "az"], [2, 3, 4], [1, 2], reps=2)
    assert len(recs) == 2 * 3 * 2 * 2
    # same seed, same instance, same output size
    again = run_bench(["cvm-fast"], [2, 3, 4], [1, 2], reps=1)
    sizes = {(r.n, r.d): r.out_size for r in recs if r.algo == "cvm-fast"}
    assert all(sizes[(r.n, r.d)] == r.out_size for r in again)
    path = tmp_path / "series.csv"
    write_series(recs, path)
    assert len(path.read_text().splitlines()) == 1 + 2 * 3 * 2
    with pytest.raises(ValueError):
        run_bench(["nope"], [2], [1])


@pytest.mark.slow
def test_fast_beats_naive_at_moderate_size():
    s = random_system(24, 8, 1)
    u = unit_row(24)
    t0 = time.perf_counter()
    fast = cv_trial(s, u, "fast")
    t1 = time.perf_counter()
    naive = cv_trial(s, u, "naive")
    t2 = time.perf_counter()
    assert fast.P == naive.P and fast.blocks == naive.blocks
    record(s, fast)
    assert t1 - t0 < t2 - t1
