import json
import subprocess
import sys
from pathlib import Path

import pytest

from regreg.cli import main

GRAMMARS = Path(__file__).resolve().parent.parent / "grammars"
PARSE_KEYS = {"matched", "end", "value", "stats"}
STATS_KEYS = {"match_calls", "memo_hits", "memo_misses", "peak_memo_entries", "compactions",
              "recalculations"}


def cli(capsys, *args):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def g(name):
    return GRAMMARS / name


def test_parse_calc(capsys):
    code, out, _ = cli(capsys, "parse", "-g", g("calc.g"), "-e", "1+2*3")
    doc = json.loads(out)
    assert code == 0
    assert set(doc) == PARSE_KEYS and set(doc["stats"]) == STATS_KEYS
    assert (doc["matched"], doc["end"], doc["value"]) == (True, 5, 7)


def test_parse_no_match_exits_one(capsys):
    code, out, _ = cli(capsys, "parse", "-g", g("peg.g"), "-e", "ab")
    doc = json.loads(out)
    assert code == 1
    assert set(doc) == PARSE_KEYS
    assert (doc["matched"], doc["end"], doc["value"]) == (False, None, None)


def test_peg_flag(capsys):
    assert cli(capsys, "parse", "-g", g("prefix.g"), "-e", "ab")[0] == 0
    assert cli(capsys, "parse", "-g", g("prefix.g"), "-e", "ab", "--peg")[0] == 1


def test_input_file_and_sexpr(capsys, tmp_path):
    f = tmp_path / "in.txt"
    f.write_text("a(b)")
    code, out, _ = cli(capsys, "parse", "-g", g("parens.g"), "-i", f, "--emit=sexpr")
    assert code == 0
    assert json.loads(out)["value"] == '(doc (item "a") (item "(" (item "b") ")"))'


@pytest.mark.parametrize("args", [
    ["parse", "-g", "missing.g", "-e", "x"],
    ["parse", "-g", str(GRAMMARS / "calc.g")],
    ["parse", "-g", str(GRAMMARS / "calc.g"), "-e", "1", "-i", "x"],
    ["parse", "-g", str(GRAMMARS / "calc.g"), "-e", "1", "--start", "nope"],
    ["parse", "-g", str(GRAMMARS / "leftrec.g"), "-e", "abc"],
    ["parse", "-g", str(GRAMMARS / "paradox.g"), "-e", "", "--left-rec=rewrite"],
    ["frobnicate"],
    [],
    ["bench", "nope", "-n", "3"],
    ["bench", "calc-linear", "-n", "x"],
])
def test_errors_exit_two(capsys, args):
    code, out, err = cli(capsys, *args)
    assert code == 2
    assert out == ""
    assert err


def test_left_recursion_rewrite(capsys):
    code, out, _ = cli(capsys, "parse", "-g", g("leftrec.g"), "-e", "abc",
                       "--left-rec=rewrite", "--emit=sexpr")
    doc = json.loads(out)
    assert code == 0 and doc["end"] == 3 and doc["value"] == '(L (L "ab") "c")'
    code, out, _ = cli(capsys, "parse", "-g", g("leftsum.g"), "-e", "10-2-3",
                       "--left-rec=rewrite")
    assert json.loads(out)["value"] == 5


def test_engine_flags_keep_results(capsys):
    base = json.loads(cli(capsys, "parse", "-g", g("calc.g"), "-e", "(1+2)*3-4")[1])
    for flag in ("--no-memo", "--no-compact", "--fail-fast-bound", "--validate-structured"):
        doc = json.loads(cli(capsys, "parse", "-g", g("calc.g"), "-e", "(1+2)*3-4", flag)[1])
        assert (doc["matched"], doc["end"], doc["value"]) == (True, 9, base["value"])


def test_trace_goes_to_stderr(capsys):
    code, out, err = cli(capsys, "parse", "-g", g("prefix.g"), "-e", "ab", "--trace")
    assert code == 0 and json.loads(out)["matched"]
    assert len(err.splitlines()) == json.loads(out)["stats"]["match_calls"]


def test_output_is_byte_identical(capsys):
    args = ("parse", "-g", g("calc.g"), "-e", "12*(3+4)-5")
    assert cli(capsys, *args) == cli(capsys, *args)
    args = ("analyze", "-g", g("calc.g"))
    assert cli(capsys, *args) == cli(capsys, *args)


def test_analyze(capsys):
    code, out, _ = cli(capsys, "analyze", "-g", g("calc.g"))
    doc = json.loads(out)
    assert code == 0
    assert set(doc) == {"start", "rules", "diagnostics"}
    for name in ("add", "mul"):
        assert doc["rules"][name]["nullable"] is False
        assert doc["rules"][name]["minsize"] == 1


def test_analyze_overlap(capsys, tmp_path):
    f = tmp_path / "ab.g"
    f.write_text("S = 'a' | 'b'\n")
    code, out, _ = cli(capsys, "analyze", "-g", f)
    assert code == 0
    assert json.loads(out)["rules"]["S"]["overlaps"] == [{"alternatives": [0, 1], "overlap": False}]


def test_analyze_paradox(capsys):
    code, out, err = cli(capsys, "analyze", "-g", g("paradox.g"))
    assert code == 2
    assert json.loads(out)["rules"]["L"]["left_recursion"]["paradox"] is True
    assert "lookahead-left-recursion" in err


def test_analyze_unresolved(capsys, tmp_path):
    f = tmp_path / "bad.g"
    f.write_text("S = T\n")
    code, out, err = cli(capsys, "analyze", "-g", f)
    assert code == 2 and "unresolved-rule" in err


def test_bench_csv(capsys):
    code, out, _ = cli(capsys, "bench", "exponential-R", "-n", "8,10", "--oracle-limit", "8")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "benchmark,n,match_calls,oracle_steps,peak_memo,wall_ms"
    first, second = (l.split(",") for l in lines[1:])
    assert first[:2] == ["exponential-R", "8"] and first[3].isdigit()
    assert second[3] == "skipped"


def test_console_script_runs():
    res = subprocess.run([sys.executable, "-m", "regreg.cli", "parse", "-g",
                          str(GRAMMARS / "calc.g"), "-e", "2*21"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["value"] == 42
