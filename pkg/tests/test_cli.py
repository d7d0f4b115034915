import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rlq import ValidationError
from rlq.cli import parse_values, run
from rlq.output import read_csv


def test_solve_writes_policy(bench_config, tmp_path):
    out = tmp_path / "p.csv"
    assert run(["solve", "--config", str(bench_config()), "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["t", "alpha_1", "h_1", "L", "H", "F", "M", "N", "Gamma", "Delta", "E", "P_tt", "Sigma_min"]
    last = dict(zip(header, map(float, rows[-1])))
    assert last["t"] == 1.0
    assert last["alpha_1"] == pytest.approx(0.5357142857, abs=1e-10)
    assert last["h_1"] == pytest.approx(-0.1071428571, abs=1e-10)


def test_output_is_byte_identical(bench_config, tmp_path):
    cfg = str(bench_config())
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["solve", "--config", cfg, "--out", str(a)])
    run(["solve", "--config", cfg, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_steps_doubling_converged(bench_config, tmp_path):
    cfg = str(bench_config())
    a0 = []
    for n in (2000, 4000):
        out = tmp_path / f"p{n}.csv"
        assert run(["solve", "--config", cfg, "--out", str(out), "--steps", str(n)]) == 0
        a0.append(float(read_csv(out)[1][0][1]))
    assert abs(a0[0] - a0[1]) < 1e-6


def test_sweep(bench_config, tmp_path, monkeypatch):
    monkeypatch.setenv("RLQ_THREADS", "0")
    out = tmp_path / "f.csv"
    cfg = str(bench_config(steps=400))
    assert run(["sweep", "--config", cfg, "--vary", "mu1", "--values", "0:10:0.5", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["swept", "mu1", "xi", "mean", "std", "alpha0_1", "status"]
    assert len(rows) == 21 and float(rows[0][4]) == 0.0


def test_sweep_values_file(bench_config, tmp_path):
    vals = tmp_path / "v.txt"
    vals.write_text("5\n10\n", encoding="utf-8")
    out = tmp_path / "f.csv"
    cfg = str(bench_config(steps=200))
    assert run(["sweep", "--config", cfg, "--vary", "xi", "--values-file", str(vals), "--out", str(out)]) == 0
    assert [r[2] for r in read_csv(out)[1]] == ["5", "10"]


def test_relation(bench_config, tmp_path):
    out = tmp_path / "r.csv"
    cfg = str(bench_config(steps=200))
    args = ["relation", "--config", cfg, "--form", "linear", "--a0", "5", "--a1", "2", "--values", "1,2",
            "--out", str(out)]
    assert run(args) == 0
    assert [float(r[2]) for r in read_csv(out)[1]] == [7.0, 9.0]
    assert run(args[:6] + args[8:]) == 1  # linear without --a0


@pytest.mark.parametrize("kind", ["open", "closed"])
def test_baseline(kind, bench_config, tmp_path):
    out = tmp_path / "b.csv"
    assert run(["baseline", "--config", str(bench_config()), "--kind", kind, "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["t", "alpha_1"] and float(rows[-1][1]) == pytest.approx(0.75)


def test_certify_exit_codes(bench_config, tmp_path, capsys):
    assert run(["certify", "--config", str(bench_config(T=0.02))]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] is True
    assert run(["certify", "--config", str(bench_config(T=0.05))]) == 3
    assert json.loads(capsys.readouterr().out)["failed"] == ["2 L_lo - H_hi - F_hi >= e_lo"]
    k = tmp_path / "k.json"
    k.write_text(json.dumps({"m_lo": 0.0}), encoding="utf-8")
    assert run(["certify", "--config", str(bench_config(T=0.02)), "--constants", str(k)]) == 1


def test_verify(bench_config, capsys):
    code = run(["verify", "--config", str(bench_config()), "--mc-paths", "100000", "--seed", "7",
                "--spike", "h", "--mag", "0.5"])
    report = json.loads(capsys.readouterr().out)
    assert code == 0 and report["ok"] and report["spike"]["quotients"][-1] < 0


@pytest.mark.parametrize(
    "changes,args,code,field",
    [
        ({"xi": -1.0}, [], 1, "xi"),
        ({"bogus": 1}, [], 1, "bogus"),
        ({"mu1": 10.0, "xi": 200.0}, [], 2, "positive definite"),
        ({}, ["--steps", "0"], 1, "steps"),
    ],
)
def test_error_codes(changes, args, code, field, bench_config, tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert run(["solve", "--config", str(bench_config(**changes)), "--out", str(out)] + args) == code
    assert field in capsys.readouterr().err


def test_bad_flags_are_validation_errors(capsys):
    assert run(["solve"]) == 1
    assert run(["nope"]) == 1
    assert run(["solve", "--config", "/nonexistent.json", "--out", "x.csv"]) == 1
    assert "config" in capsys.readouterr().err


def test_threads_env(bench_config, tmp_path, monkeypatch):
    monkeypatch.setenv("RLQ_THREADS", "many")
    out = tmp_path / "f.csv"
    assert run(["sweep", "--config", str(bench_config()), "--vary", "mu1", "--values", "1", "--out", str(out)]) == 1


@pytest.mark.parametrize("text,expected", [("0:1:0.25", [0, 0.25, 0.5, 0.75, 1.0]), ("0:1:0.3", [0, 0.3, 0.6, 0.9]),
                                           ("1,2.5", [1, 2.5]), ("0:0.3:0.1", [0, 0.1, 0.2, 0.3])])
def test_parse_values(text, expected):
    assert parse_values(text) == pytest.approx(expected)


@given(st.integers(0, 50), st.integers(1, 40), st.sampled_from([0.1, 0.25, 0.5, 1.0]))
def test_parse_values_inclusive(start, count, step):
    a = start * step
    b = a + count * step
    vals = parse_values(f"{a!r}:{b!r}:{step!r}")
    assert len(vals) == count + 1 and math.isclose(vals[-1], b, rel_tol=1e-9, abs_tol=1e-12)


@pytest.mark.parametrize("text", ["1:0:0.1", "0:1:0", "a:b:c", "1,x"])
def test_parse_values_rejects(text):
    with pytest.raises(ValidationError):
        parse_values(text)
