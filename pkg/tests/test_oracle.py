import pytest

from regreg.actions import to_sexpr
from regreg.bench import CALC, EXPONENTIAL
from regreg.frontend import compile_grammar
from regreg.oracle import oracle_language, oracle_match, oracle_match_expr


def fib(n):
    a, b = 1, 1
    for _ in range(n):
        a, b = b, a + b
    return a


@pytest.mark.parametrize("n", range(1, 9))
def test_counts_every_derivation(n):
    # 'aa' R | 'a' R | '' covers a^n once per composition of n into 1s and 2s
    g = compile_grammar(EXPONENTIAL)
    out = oracle_match(g, None, "a" * n, all_derivations=True)
    assert len(out.derivations) == fib(n)


def test_derivations_come_in_priority_order():
    g = compile_grammar(EXPONENTIAL)
    out = oracle_match(g, None, "aaa", all_derivations=True)
    trees = [to_sexpr(v) for _, v in out.derivations]
    assert trees == [
        '(R "aa" (R "a" (R)))',
        '(R "a" (R "aa" (R)))',
        '(R "a" (R "a" (R "a" (R))))',
    ]


def test_prefix_mode_lists_every_end():
    g = compile_grammar("S = 'a'*\n")
    out = oracle_match(g, None, "aaa", full_match=False, all_derivations=True)
    assert [end for end, _ in out.derivations] == [3, 2, 1, 0]


def test_max_derivations_stops_early():
    g = compile_grammar(EXPONENTIAL)
    out = oracle_match(g, None, "a" * 12, all_derivations=True, max_derivations=5)
    assert len(out.derivations) == 5


def test_nesting_is_read_as_a_sequence():
    # the reference parser backtracks into a nesting; the matcher does not
    g = compile_grammar("S = 'a' / 'ab'\n")
    assert oracle_match(g, None, "ab").matched


def test_budget_exhaustion_is_flagged():
    g = compile_grammar(EXPONENTIAL)
    out = oracle_match(g, None, "a" * 25 + "b", budget=1000)
    assert out.budget_exhausted and not out.matched
    assert out.derivations_tried == 1001


def test_unchecked_left_recursion_ends_as_exhausted():
    g = compile_grammar("L = L 'a' | 'b'\n", check=False)
    out = oracle_match(g, None, "ba", budget=10 ** 5)
    assert out.budget_exhausted and not out.matched


def test_values_and_lookahead():
    g = compile_grammar(CALC)
    assert oracle_match(g, None, "2*(3+4)").value == 14
    g = compile_grammar("S = [0-9]+:n &{n.size < 3} 'x' {n}\n")
    assert oracle_match(g, None, "12x").value == "12"
    assert not oracle_match(g, None, "123x").matched


def test_enter_takes_first_inner_derivation():
    g = compile_grammar("S = ([a-z]+)[T]:v ',' {v}\nT = 'a'*:x 'a'* {x}\n")
    assert oracle_match(g, None, "aaa,").value == "aaa"


def test_expression_entry_and_language():
    g = compile_grammar("S = 'a' 'b'* | 'c'\n")
    out = oracle_match_expr(g, g.rules["S"], "abb")
    assert (out.matched, out.end) == (True, 3)
    lang = oracle_language(g, g.rules["S"], ["", "a", "ab", "b", "c", "cc"])
    assert sorted(lang) == ["a", "ab", "c"]


def test_unknown_start_rule():
    g = compile_grammar("S = 'a'\n")
    with pytest.raises(KeyError):
        oracle_match(g, "T", "a")
