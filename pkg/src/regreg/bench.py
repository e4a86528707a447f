"""Built-in benchmark grammars, input generators and the benchmark runner.

Grammars are produced in code so that counters are reproducible byte for byte.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional

from .engine import EngineOptions, run
from .frontend import compile_grammar
from .grammar import Grammar

CALC = r"""
# integer calculator; iteration form keeps memory near constant
add   = mul:x ('+' mul:y {x+y}:x | '-' mul:y {x-y}:x)* {x}
mul   = atom:x ('*' atom:y {x*y}:x)* {x}
atom  = num | nested('(', add:x, ')') {x}
num   = digit:n (digit:d {n*10+d}:n)* {n}
digit = '0' {0} | '1' {1} | '2' {2} | '3' {3} | '4' {4}
      | '5' {5} | '6' {6} | '7' {7} | '8' {8} | '9' {9}
"""

CALC_RIGHT = r"""
# right-recursive calculator
add    = mul:x '+' add:y {x+y}
       | mul
mul    = number:x '*' mul:y {x*y}
       | number
number = digit:n (digit:d {n*10+d}:n)* {n}
       | nested('(', add:x, ')') {x}
digit  = '0' {0} | '1' {1} | '2' {2} | '3' {3} | '4' {4}
       | '5' {5} | '6' {6} | '7' {7} | '8' {8} | '9' {9}
"""

PARENS = r"""
# balanced parentheses with letters in between
doc  = item*
item = 'a' | 'b' | nested('(', item*, ')')
"""

WHILE = r"""
# a fragment of C: while loops, blocks and assignments
prog  = ws stmt*
stmt  = 'while' ws nested('(', ws cond, ')') ws stmt
      | nested('{', ws stmt*, '}') ws
      | id ws '=' ws expr ';' ws
cond  = expr ('<' ws expr | '')
expr  = term ('+' ws term)*
term  = id ws | [0-9]+ ws | nested('(', ws expr, ')') ws
id    = ~('while' ~[a-z]) [a-z]+
ws    = ' '*
"""

NON_MONOTONE = r"""
# two invocations of the same nested expression share an end position
T = nested('x', T | '', '')
"""

COUNTEREXAMPLE = r"""
S   = exp* 'x' | exp* 'y'
exp = 'a'
"""

EXPONENTIAL = r"""
R = 'aa' R | 'a' R | ''
"""


def pathological_grammar(k: int) -> str:
    """Loops nested k deep, each failing at the end of an all-'a' input."""
    if k < 1:
        raise ValueError("k must be at least 1")
    ends = "bcdefghijklmnopqrstuvwxyz"
    lines = [f"L{k} = " + ("(L{} / 'a')* '{}'".format(k - 1, ends[k - 1]) if k > 1
                          else "'a'* 'b'")]
    for i in range(k - 1, 0, -1):
        body = "'a'* 'b'" if i == 1 else f"(L{i - 1} / 'a')* '{ends[i - 1]}'"
        lines.append(f"L{i} = {body}")
    return "\n".join(lines) + "\n"


def gen_calc(n: int, seed: int = 0) -> str:
    """A random calculator expression of exactly ``n`` characters."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = random.Random(seed)
    out: List[str] = []
    # explicit work stack: ints are lengths still to generate, strs are literal text
    todo: List[object] = [n]
    while todo:
        item = todo.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        m = item
        if m <= 3:
            out.append("".join(rng.choice("0123456789") for _ in range(m)))
            continue
        if m >= 5 and rng.random() < 0.15:
            todo.append(")")
            todo.append(m - 2)
            todo.append("(")
            continue
        left = rng.randint(1, min(m - 2, 3) if rng.random() < 0.7 else m - 2)
        op = rng.choices("+-*", weights=(45, 40, 15))[0]
        todo.append(m - left - 1)
        todo.append(op)
        todo.append(left)
    text = "".join(out)
    assert len(text) == n
    return text


def gen_parens(n: int, rng: random.Random) -> str:
    """Random strings over a, b, ( and ); about half are balanced."""
    if rng.random() < 0.5:
        return "".join(rng.choice("ab()") for _ in range(n))
    out = []
    depth = 0
    for _ in range(n):
        r = rng.random()
        if r < 0.3:
            out.append("(")
            depth += 1
        elif r < 0.6 and depth:
            out.append(")")
            depth -= 1
        else:
            out.append(rng.choice("ab"))
    out.append(")" * depth)
    return "".join(out)


@dataclass
class Benchmark:
    name: str
    grammar: Callable[[], str]
    input: Callable[[int], str]
    peg: bool = False


def _benchmarks() -> Dict[str, Benchmark]:
    table = {
        "exponential-R": Benchmark("exponential-R", lambda: EXPONENTIAL, lambda n: "a" * n + "b"),
        "calc-linear": Benchmark("calc-linear", lambda: CALC, lambda n: gen_calc(n, seed=n)),
        "memory-counterexample": Benchmark("memory-counterexample", lambda: COUNTEREXAMPLE,
                                           lambda n: "a" * n + "y"),
    }
    return table


def get_benchmark(name: str) -> Benchmark:
    table = _benchmarks()
    if name in table:
        return table[name]
    if name.startswith("pathological-"):
        try:
            k = int(name.split("-", 1)[1])
        except ValueError:
            k = 0
        if k >= 1:
            return Benchmark(name, lambda: pathological_grammar(k), lambda n: "a" * n)
    raise KeyError(f"unknown benchmark {name!r}; known: {', '.join(benchmark_names())}")


def benchmark_names() -> List[str]:
    return sorted(_benchmarks()) + ["pathological-<k>"]


@dataclass
class BenchRow:
    benchmark: str
    n: int
    match_calls: int
    oracle_steps: Optional[int]
    peak_memo: int
    wall_ms: float

    def csv(self) -> str:
        oracle = "skipped" if self.oracle_steps is None else str(self.oracle_steps)
        return f"{self.benchmark},{self.n},{self.match_calls},{oracle},{self.peak_memo},{self.wall_ms:.1f}"


CSV_HEADER = "benchmark,n,match_calls,oracle_steps,peak_memo,wall_ms"


def run_benchmark(name: str, sizes: Iterable[int], options: Optional[EngineOptions] = None,
                  oracle_limit: int = 0, oracle_budget: int = 10 ** 7) -> List[BenchRow]:
    """Run the engine (and the oracle for n <= oracle_limit) on each size."""
    from .oracle import oracle_match

    bench = get_benchmark(name)
    grammar: Grammar = compile_grammar(bench.grammar(), peg=bench.peg)
    rows = []
    for n in sizes:
        text = bench.input(n)
        t0 = time.perf_counter()
        out = run(grammar, None, text, options)
        wall = (time.perf_counter() - t0) * 1000
        steps = None
        if n <= oracle_limit:
            steps = oracle_match(grammar, None, text, budget=oracle_budget).derivations_tried
        rows.append(BenchRow(name, n, out.stats.match_calls, steps,
                             out.stats.peak_memo_entries, wall))
    return rows
