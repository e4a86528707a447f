import io

import pytest

from regreg import ActionError, RecursionGuardError
from regreg.actions import to_sexpr
from regreg.bench import CALC, CALC_RIGHT, EXPONENTIAL, NON_MONOTONE, PARENS, gen_calc
from regreg.engine import EngineOptions, run
from regreg.frontend import compile_grammar
from regreg.oracle import oracle_match

from corpus import STRUCTURED, seeded_inputs


def outcome(grammar_text, text, **opts):
    out = run(compile_grammar(grammar_text), None, text, EngineOptions(**opts))
    return out.matched, out.end, (to_sexpr(out.value) if out.matched else None)


@pytest.mark.parametrize("grammar, text, expected", [
    ("S = 'a' | 'ab'\n", "ab", (True, 2, '(S "ab")')),
    ("S = 'a' / 'ab'\n", "ab", (False, None, None)),
    ("S = ' '* ' foo'\n", " foo", (True, 4, '(S " foo")')),
    ("S = 'a'*? 'a' 'b' {text}\n", "aaab", (True, 4, '"aaab"')),
    ("S = 'a' ~('b' 'c') .*\n", "abd", (True, 3, '(S "abd")')),
    ("S = 'a' ~('b' 'c') .*\n", "abc", (False, None, None)),
    ("S = 'a' &('b' 'c') 'b' 'c'\n", "abc", (True, 3, '(S "abc")')),
    ("S = [0-9]+:n &{n.size < 3} 'x'\n", "12x", (True, 3, '(S "12x")')),
    ("S = [0-9]+:n &{n.size < 3} 'x'\n", "123x", (False, None, None)),
    ("S = X:x {x}\nX = 'a' {1} | 'a' 'b' {2}\n", "ab", (True, 2, "2")),
    ("S = num:n ',' {n}\nnum = [0-9]+\n", "42,", (True, 3, '(num "42")')),
    ("S = ([a-z]+)[T]:v ',' {v}\nT = 'ab' 'c'*:c {c}\n", "abcc,", (True, 5, '"cc"')),
    ("S = ([a-z]+)[T] '!'\nT = 'ab' 'c'*\n", "abd!", (False, None, None)),
])
def test_semantics(grammar, text, expected):
    assert outcome(grammar, text) == expected


def test_prefix_match_reports_end():
    assert outcome("S = 'a'+\n", "aab", full_match=False) == (True, 2, '(S "aa")')


def test_calculator_values():
    g = compile_grammar(CALC)
    for text, value in [("1+2*3", 7), ("(1+2)*3", 9), ("12-(3*4)-5", -5), ("((7))", 7)]:
        out = run(g, None, text)
        assert (out.matched, out.end, out.value) == (True, len(text), value)
    g = compile_grammar(CALC_RIGHT)
    assert run(g, None, "2*3+4").value == 10


def test_action_errors_propagate():
    with pytest.raises(ActionError):
        run(compile_grammar("S = 'x' {1 / 0}\n"), None, "x")
    with pytest.raises(ActionError):
        run(compile_grammar("S = 'x':a {a + 1}\n"), None, "x")


def test_recursion_guard_on_unchecked_left_recursion():
    g = compile_grammar("L = L 'a' | 'b'\n", check=False)
    with pytest.raises(RecursionGuardError):
        run(g, None, "baa")


def test_recursion_limit_is_configurable():
    g = compile_grammar("S = 'a' S 'b' | ''\n")
    text = "a" * 300 + "b" * 300
    assert run(g, None, text).matched
    with pytest.raises(RecursionGuardError):
        run(g, None, text, EngineOptions(recursion_limit=50))


def test_trace_writes_one_line_per_call():
    buf = io.StringIO()
    out = run(compile_grammar("S = 'a'+ 'b'\n"), None, "aab",
              EngineOptions(trace=True, trace_file=buf))
    lines = buf.getvalue().splitlines()
    assert len(lines) == out.stats.match_calls
    assert lines[0].split("\t")[0] == "0"


@pytest.mark.parametrize("name", sorted(STRUCTURED))
def test_options_do_not_change_outcomes(name):
    g = compile_grammar(STRUCTURED[name][0])
    variants = [EngineOptions(memo=False), EngineOptions(compact=False),
                EngineOptions(fail_fast=True), EngineOptions(validate_structured=True)]
    for text in seeded_inputs(name, 120, seed=3):
        base = run(g, None, text)
        for opts in variants:
            other = run(g, None, text, opts)
            assert (other.matched, other.end, other.value) == (base.matched, base.end, base.value)


def test_fail_fast_saves_work_on_short_inputs():
    g = compile_grammar("S = ('a' | 'b')* 'cccccccc'\n")
    slow = run(g, None, "ab" * 20)
    fast = run(g, None, "ab" * 20, EngineOptions(fail_fast=True))
    assert not slow.matched and not fast.matched
    assert fast.stats.match_calls < slow.stats.match_calls


def test_statistics_are_deterministic():
    g = compile_grammar(CALC)
    text = gen_calc(500, seed=4)
    a = run(g, None, text).stats.as_dict()
    b = run(g, None, text).stats.as_dict()
    assert a == b
    assert a["memo_misses"] > 0 and a["peak_memo_entries"] > 0


def test_memo_off_records_nothing():
    out = run(compile_grammar(CALC), None, "1+2", EngineOptions(memo=False))
    s = out.stats
    assert (s.memo_hits, s.memo_misses, s.peak_memo_entries) == (0, 0, 0)


def test_memo_hits_need_a_shared_continuation():
    # both alternatives of R continue with the same R, so their results are shared
    g = compile_grammar(EXPONENTIAL)
    assert run(g, None, "a" * 10 + "b").stats.memo_hits > 0
    # here the continuations differ ('a' against 'b'), so nothing can be reused
    g = compile_grammar("S = X 'a' | X 'b'\nX = 'x'+\n")
    assert run(g, None, "xxxb").stats.memo_hits == 0


def test_structured_warnings():
    g = compile_grammar(PARENS)
    for text in seeded_inputs("parens", 50, seed=9):
        assert run(g, None, text, EngineOptions(validate_structured=True)).warnings == []
    out = run(compile_grammar(NON_MONOTONE), None, "xx", EngineOptions(validate_structured=True))
    assert out.matched and out.warnings


def test_matches_oracle_on_a_sample():
    g = compile_grammar(CALC)
    for text in seeded_inputs("calc", 60, seed=11):
        a = run(g, None, text)
        b = oracle_match(g, None, text)
        assert (a.matched, a.end, a.value) == (b.matched, b.end, b.value)
