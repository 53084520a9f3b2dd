"""Grammar round-trips and end-to-end CLI behavior."""

import json
import random
from fractions import Fraction as F

import pytest

from vandermoments.cli import main
from vandermoments.errors import WordSyntaxError
from vandermoments.funcspace import ONE, T, const, from_poly, piecewise
from vandermoments.moments import Word, word_power
from vandermoments.parsing import (parse_function, parse_word, render_function,
                                   render_word)

HALF = F(1, 2)


def test_parse_function_basics():
    assert parse_function("1/2 + t - t^2") == const(HALF) + T - T * T
    assert parse_function("3*t^2 - 2") == from_poly([-2, 0, 3])
    assert parse_function("(1 - t) * (1 + t)") == from_poly([1, 0, -1])
    assert parse_function("-t^2") == from_poly([0, 0, -1])
    assert parse_function("7/3") == const(F(7, 3))
    assert parse_function("t^0") == ONE


def test_parse_piecewise():
    f = parse_function("piecewise{ [0,1/2]: 1 - t; (1/2,1]: t^2 }")
    assert f == piecewise([0, HALF, 1], [(F(1), F(-1)), (F(0), F(0), F(1))])
    with pytest.raises(WordSyntaxError):
        parse_function("piecewise{ [0,1/2]: 1 }")  # gap before 1
    with pytest.raises(WordSyntaxError):
        parse_function("piecewise{ [1/4,1]: 1 }")  # must start at 0


def test_parse_function_errors():
    for bad in ("1/0", "t^-1", "t^(1/2)", "2 +", "q", "(t"):
        with pytest.raises(WordSyntaxError):
            parse_function(bad)


def test_parse_word_examples():
    w = parse_word("(X* X)^4")
    assert w == word_power(Word.of(["X*", "X"]), 4)
    assert w.matrix_count() == 8 and w.is_alternating()
    w2 = parse_word("X [t] X* X [t] X*")
    assert w2 == Word.of(["X", T, "X*", "X", T, "X*"])
    with pytest.raises(WordSyntaxError):
        parse_word("X [1/0]")
    with pytest.raises(WordSyntaxError):
        parse_word("(X X)^-1")
    with pytest.raises(WordSyntaxError):
        parse_word("")
    with pytest.raises(WordSyntaxError):
        parse_word("X $ X")


def test_function_render_round_trip():
    rng = random.Random(1)
    for _ in range(60):
        coeffs = [F(rng.randint(-5, 5), rng.randint(1, 6)) for _ in range(4)]
        f = from_poly(coeffs)
        assert parse_function(render_function(f)) == f
    pw = piecewise([0, F(1, 3), 1], [(F(1, 2),), (F(0), F(2))])
    assert parse_function(render_function(pw)) == pw


def test_word_render_round_trip():
    rng = random.Random(2)
    for _ in range(40):
        items = []
        for _ in range(rng.randint(1, 7)):
            pick = rng.random()
            if pick < 0.4:
                items.append("X")
            elif pick < 0.8:
                items.append("X*")
            else:
                items.append(from_poly(
                    [F(rng.randint(-3, 3), rng.randint(1, 4))
                     for _ in range(rng.randint(1, 3))]))
        w = Word.of(items)
        assert parse_word(render_word(w)) == w


# ---------------------------------------------------------------------------
# CLI end to end (in-process)
# ---------------------------------------------------------------------------

def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_trace_and_moment(capsys):
    code, out, _ = run_cli(capsys, "trace", "--word", "(X* X)^4")
    assert code == 0 and out.strip() == "44/3"
    code, out, _ = run_cli(capsys, "moment", "--word", "(X* X)^4")
    assert code == 0 and out.strip() == "29/2 + t - t^2"
    code, out, _ = run_cli(capsys, "--json", "moment", "--word", "X X*")
    payload = json.loads(out)
    assert code == 0 and payload["text"] == "1"


def test_cli_diag_lambda_gamma_cumulant(capsys):
    code, out, _ = run_cli(capsys, "diag", "--word", "(X* X)^4", "--t", "1/2")
    assert code == 0 and out.strip() == "59/4"
    code, out, _ = run_cli(capsys, "lambda", "--partition", "{1,3|2,4}",
                           "--g", "1;1;1")
    assert code == 0 and out.strip() == "1/2 + t - t^2"
    code, out, _ = run_cli(capsys, "lambda", "--partition", "{1,3|2,4}",
                           "--g", "1;1;1", "--t", "1/3")
    assert code == 0 and out.strip() == "13/18"
    code, out, _ = run_cli(capsys, "gamma", "--partition", "{1,2|3}",
                           "--g", "t;1;t")
    assert code == 0 and out.strip() == "1/2*t"
    code, out, _ = run_cli(capsys, "cumulant", "--order", "4")
    assert code == 0 and out.strip() == "2/3"


def test_cli_exit_codes(capsys):
    code, _, err = run_cli(capsys, "moment", "--word", "X [1/0]")
    assert code == 2 and "denominator" in err
    code, _, err = run_cli(capsys, "trace", "--word", "(X* X)^9")
    assert code == 3 and "guard" in err.lower()
    code, _, err = run_cli(capsys, "cumulant", "--order", "9")
    assert code == 3
    code, _, err = run_cli(capsys, "lambda", "--partition", "{1,3|2,4}",
                           "--g", "1;1")
    assert code == 2


def test_cli_mc_trace_json_schema(capsys):
    code, out, _ = run_cli(capsys, "--json", "--trials", "60", "--seed", "3",
                           "mc", "--word", "X* X", "--N", "30")
    assert code == 0
    rec = json.loads(out.strip().splitlines()[-1])
    assert {"word", "N", "trials", "seed", "mean_re", "mean_im",
            "stderr"} <= set(rec)
    assert rec["verdict"] == "PASS"


def test_cli_mc_odd_word_verdict(capsys):
    code, out, _ = run_cli(capsys, "--json", "--trials", "80", "--seed", "5",
                           "mc", "--word", "X", "--N", "40")
    assert code == 0
    rec = json.loads(out.strip().splitlines()[-1])
    assert rec["analytic"] == 0.0 and rec["verdict"] == "PASS"


def test_cli_mc_report_files(tmp_path, capsys):
    out_dir = tmp_path / "reports"
    code, _, _ = run_cli(capsys, "--trials", "80", "--seed", "7", "mc",
                         "decay", "--eps", "11", "--Ns", "20,40",
                         "--out", str(out_dir))
    assert code == 0
    data = (out_dir / "mc_decay.jsonl").read_text().strip()
    assert json.loads(data)["eps"] == "11"
    assert (out_dir / "decay.png").stat().st_size > 1000
    code, _, _ = run_cli(capsys, "--trials", "60", "--seed", "7", "mc",
                         "growth", "--p", "1", "--Ns", "20,40",
                         "--out", str(out_dir))
    assert code == 0
    assert (out_dir / "growth.png").stat().st_size > 1000
    code, _, _ = run_cli(capsys, "--trials", "50", "--seed", "7", "mc",
                         "--word", "X* X", "--Ns", "20,40",
                         "--out", str(out_dir))
    assert code == 0
    assert (out_dir / "estimates.png").stat().st_size > 1000
    assert (out_dir / "mc_trace.jsonl").read_text().count("\n") == 2


def test_cli_cache_commands(tmp_path, capsys):
    path = str(tmp_path / "c.jsonl")
    code, out, _ = run_cli(capsys, "--cache-path", path, "lambda",
                           "--partition", "{1,3|2,4}", "--g", "1;1;1")
    assert code == 0
    code, out, _ = run_cli(capsys, "--json", "--cache-path", path,
                           "cache", "stats")
    stats = json.loads(out)
    assert stats["entries"] >= 1
    code, _, _ = run_cli(capsys, "--cache-path", path, "cache", "clear")
    assert code == 0
    import os
    assert not os.path.exists(path)


def test_cli_consistency_report(capsys):
    code, out, _ = run_cli(capsys, "cumulant", "--consistency", "1")
    assert code == 0
    assert "EQUAL" in out and "DIFFER" not in out


@pytest.mark.slow
def test_cli_table(tmp_path, capsys):
    out_dir = tmp_path / "t"
    code, out, _ = run_cli(capsys, "--json", "table", "--out", str(out_dir))
    assert code == 0
    rows = [json.loads(line) for line in out.strip().splitlines()]
    assert len(rows) == 7
    assert all(r["pass"] for r in rows)
    assert {r["computed"] for r in rows} >= {"2", "5", "44/3", "1/270"}
    tsv = (out_dir / "table.tsv").read_text().splitlines()
    assert tsv[0].startswith("check\t") and len(tsv) == 8
