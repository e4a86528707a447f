"""Reference parser: plain backtracking over every derivation, no memoization.

Nested is read as an ordinary sequence, so this parser explores alternatives
the matcher commits away.  On structured grammars the first derivation found
here must equal the matcher's result; that is what the differential tests check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Tuple

from . import expr as X
from ._stack import deep_call
from .actions import NOVALUE, ActionError, Closure, ParseNode, eval_action
from .grammar import Grammar

DEFAULT_BUDGET = 10 ** 7


class BudgetExhausted(Exception):
    pass


@dataclass
class OracleOutcome:
    matched: bool
    end: Optional[int]
    value: object
    derivations_tried: int
    budget_exhausted: bool = False
    derivations: List[Tuple[int, object]] = field(default_factory=list)


# a parse state: (position, stop set, closure, returned value)
State = Tuple[int, int, Closure, object]
Cont = Callable[[State], Iterator[State]]


class _Oracle:
    def __init__(self, g: Grammar, text: str, budget: int, counter: Optional[list] = None) -> None:
        self.g = g
        self.pool = g.pool
        self.text = text
        self.n = len(text)
        self.budget = budget
        self.count = counter if counter is not None else [0]

    def _text_for(self, action, clo: Closure, s: int):
        return eval_action(action, clo, self.text[clo.start:s])

    def m(self, e: int, st: State, k: Cont, scope: Cont) -> Iterator[State]:
        self.count[0] += 1
        if self.count[0] > self.budget:
            raise BudgetExhausted()
        node = self.pool[e]
        tag = node[0]
        s, stops, clo, ret = st
        text = self.text
        if tag == X.LIT:
            if text.startswith(node[1], s):
                yield from k((s + len(node[1]), stops, clo, ret))
        elif tag == X.ANY:
            if s < self.n:
                yield from k((s + 1, stops, clo, ret))
        elif tag == X.CLASS:
            if s < self.n and (text[s] in node[1]) != node[2]:
                yield from k((s + 1, stops, clo, ret))
        elif tag == X.EPS:
            yield from k(st)
        elif tag == X.FAIL:
            return
        elif tag == X.SUCCESS:
            yield from scope(st)
        elif tag == X.SEQ:
            tail = node[2]
            yield from self.m(node[1], st, lambda st2: self.m(tail, st2, k, scope), scope)
        elif tag == X.CHOICE:
            yield from self.m(node[1], st, k, scope)
            yield from self.m(node[2], st, k, scope)
        elif tag == X.SWITCH:
            head = node[1]
            if not self.g.haspred[head]:
                head = self.pool.forget(head)
            found = next(iter(self.m(head, st, _halt, _halt)), None)
            state = X.FAIL_STATE if found is None else X.SUCCESS_STATE
            yield from self.m(dict(node[2])[state], st, k, scope)
        elif tag == X.MANY:
            bit, body = node[1], node[2]

            def loop(st2: State) -> Iterator[State]:
                if st2[1] & bit:
                    yield from k((st2[0], st2[1] & ~bit, st2[2], st2[3]))
                else:
                    yield from self.m(body, st2, loop, scope)

            yield from loop(st)
        elif tag == X.STOP:
            yield from k((s, stops | node[1], clo, ret))
        elif tag == X.NESTED:
            # a plain sequence; a success state inside ends just the nesting
            yield from self.m(self.pool.nested_inner(e), st, k, k)
        elif tag == X.RULE:
            name = node[1]
            if node[2]:
                yield from self.m(self.g.fbody[name], st, k, scope)
                return
            value_rule = self.g.value_rule[name]

            def back(st2: State) -> Iterator[State]:
                s2, stops2, inner, ret2 = st2
                if value_rule:
                    v = ret2
                else:
                    v = ParseNode(name, inner.children(), inner.start, s2, text)
                yield from k((s2, stops2, clo.add_child(v), v))

            yield from self.m(self.g.rules[name], (s, stops, Closure(start=s), NOVALUE), back, scope)
        elif tag == X.ACT:
            yield from k((s, stops, clo, self._text_for(node[1], clo, s)))
        elif tag == X.PRED:
            if self._text_for(node[1], clo, s):
                yield from k(st)
        elif tag == X.BIND:
            name = node[1]

            def bound(st2: State) -> Iterator[State]:
                v = st2[3] if st2[3] is not NOVALUE else text[s:st2[0]]
                yield from k((st2[0], st2[1], st2[2].bind(name, v), v))

            yield from self.m(node[2], (s, stops, clo, NOVALUE), bound, scope)
        elif tag == X.ENTER:
            inner = node[2]

            def entered(st2: State) -> Iterator[State]:
                v = st2[3] if st2[3] is not NOVALUE else text[s:st2[0]]
                if isinstance(v, ParseNode):
                    v = v.text
                if not isinstance(v, str):
                    raise ActionError(f"enter needs a text value, got {v!r}")
                sub = _Oracle(self.g, v, self.budget, self.count)
                first = next(iter(sub.run(inner, Closure())), None)
                if first is not None:
                    yield from k((st2[0], st2[1], st2[2], first[3]))

            yield from self.m(node[1], (s, stops, clo, NOVALUE), entered, scope)
        elif tag == X.FOLD:
            if node[2] is not None:
                yield from k((s, stops, clo.bind(node[2], ret), ret))
            else:
                v = ParseNode(node[1], clo.children(), clo.start, s, text)
                yield from k((s, stops, clo.replace_children((v,)), v))
        else:
            raise ValueError(f"unknown node {node!r}")

    def run(self, e: int, clo: Closure, full: bool = True,
            rule: Optional[str] = None) -> Iterator[State]:
        """Derivations of ``e`` (or of rule ``rule``) from position 0."""
        n = self.n
        text = self.text

        def accept(st: State) -> Iterator[State]:
            if not full or st[0] == n:
                yield st

        if rule is None:
            return self.m(e, (0, 0, clo, NOVALUE), accept, accept)
        value_rule = self.g.value_rule[rule]

        def back(st2: State) -> Iterator[State]:
            s2, stops2, inner, ret2 = st2
            v = ret2 if value_rule else ParseNode(rule, inner.children(), inner.start, s2, text)
            yield from accept((s2, stops2, clo.add_child(v), v))

        return self.m(self.g.rules[rule], (0, 0, Closure(start=0), NOVALUE), back, accept)


def _halt(st: State) -> Iterator[State]:
    yield st


def oracle_match(g: Grammar, start: Optional[str], text: str, budget: int = DEFAULT_BUDGET,
                 full_match: bool = True, all_derivations: bool = False,
                 max_derivations: Optional[int] = None) -> OracleOutcome:
    """Enumerate derivations of ``start`` over ``text`` in priority order.

    Only the first is computed unless ``all_derivations`` is set.  Exceeding
    ``budget`` match invocations (or the Python stack) sets budget_exhausted.
    """
    start = start or g.start
    return deep_call(_oracle, g, ("rule", start), text, budget, full_match,
                     all_derivations, max_derivations)


def oracle_match_expr(g: Grammar, e: int, text: str, budget: int = DEFAULT_BUDGET,
                      full_match: bool = True, all_derivations: bool = False) -> OracleOutcome:
    return deep_call(_oracle, g, ("expr", e), text, budget, full_match, all_derivations, None)


def _oracle(g, target, text, budget, full, all_derivations, max_derivations) -> OracleOutcome:
    o = _Oracle(g, text, budget)
    if target[0] == "rule":
        if target[1] not in g.rules:
            raise KeyError(f"no rule named {target[1]!r}")
        derivations = o.run(-1, Closure(), full, rule=target[1])
    else:
        derivations = o.run(target[1], Closure(), full)
    found: List[Tuple[int, object]] = []
    exhausted = False
    try:
        for st in derivations:
            found.append((st[0], st[3]))
            if not all_derivations:
                break
            if max_derivations is not None and len(found) >= max_derivations:
                break
    except (BudgetExhausted, RecursionError):
        exhausted = True
    if found:
        end, value = found[0]
        return OracleOutcome(True, end, value, o.count[0], exhausted, found)
    return OracleOutcome(False, None, None, o.count[0], exhausted, found)


def oracle_language(g: Grammar, e: int, strings, budget: int = DEFAULT_BUDGET,
                    full_match: bool = True) -> dict:
    """First derivation of ``e`` on each string, as {string: (end, value)} for the
    strings that match.  One deep-stack thread serves the whole batch."""
    return deep_call(_language, g, e, list(strings), budget, full_match)


def _language(g, e, strings, budget, full) -> dict:
    out = {}
    for text in strings:
        o = _Oracle(g, text, budget)
        first = next(iter(o.run(e, Closure(), full)), None)
        if first is not None:
            out[text] = (first[0], first[3])
    return out
