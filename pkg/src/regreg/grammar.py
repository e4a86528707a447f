"""A rule table over an expression pool, plus the static tables the matcher reads.

All tables are computed once in the constructor; afterwards a Grammar is
read-only and can be shared by concurrent parse sessions.
"""

from __future__ import annotations

import math
from typing import Dict, List, Optional

from . import expr as X
from .expr import ExprId, Pool

INF = math.inf


class AllChars:
    """Character set containing every character."""

    def __contains__(self, c) -> bool:
        return True

    def __or__(self, other):
        return self

    __ror__ = __or__

    def __eq__(self, other) -> bool:
        return isinstance(other, AllChars)

    def __hash__(self) -> int:
        return 7

    def __repr__(self) -> str:
        return "ALL"


ALL = AllChars()
NO_CHARS: frozenset = frozenset()


def union_chars(a, b):
    if a is ALL or b is ALL:
        return ALL
    if not b:
        return a
    if not a:
        return b
    return a | b


class Summary:
    """What an expression can do first: consume one of ``chars``, finish
    without consuming (``nullable``), or end its scope early through a
    SuccessState (``early``)."""

    __slots__ = ("chars", "nullable", "early")

    def __init__(self, chars=NO_CHARS, nullable=False, early=False):
        self.chars = chars
        self.nullable = nullable
        self.early = early

    def key(self):
        return (self.chars, self.nullable, self.early)

    def __repr__(self) -> str:
        return f"Summary({self.chars!r}, nullable={self.nullable}, early={self.early})"


class Grammar:
    def __init__(self, pool: Pool, rules: Dict[str, ExprId], start: Optional[str] = None,
                 order: Optional[List[str]] = None) -> None:
        self.pool = pool
        self.rules = dict(rules)
        self.order = list(order) if order is not None else list(rules)
        if start is None and self.order:
            start = self.order[0]
        self.start = start
        self.fbody = {name: pool.forget(body) for name, body in self.rules.items()}
        # every id that exists now must have a forgotten twin before tables are built
        n = 0
        while n != len(pool):
            n = len(pool)
            for e in range(n):
                pool.forget(e)
                if pool[e][0] == X.NESTED:
                    pool.forget(pool.nested_inner(e))
        self.size = len(pool)
        self._build_haspred()
        self._build_summaries()
        self._build_minsize()
        self.value_rule = {name: self._has_own_action(body) for name, body in self.rules.items()}

    def body(self, name: str, forgotten: bool = False) -> ExprId:
        return self.fbody[name] if forgotten else self.rules[name]

    def rule_body_of(self, e: ExprId) -> Optional[ExprId]:
        n = self.pool[e]
        table = self.fbody if n[2] else self.rules
        return table.get(n[1])

    def with_rules(self, rules: Dict[str, ExprId], order: Optional[List[str]] = None) -> "Grammar":
        return Grammar(self.pool, rules, self.start, order or self.order)

    # predicates -----------------------------------------------------------

    def _build_haspred(self) -> None:
        pool = self.pool
        hp = [False] * self.size
        changed = True
        while changed:
            changed = False
            for e in range(self.size):
                if hp[e]:
                    continue
                n = pool[e]
                tag = n[0]
                if tag in (X.PRED, X.ENTER):
                    v = True
                elif tag == X.RULE:
                    b = self.rule_body_of(e)
                    v = b is not None and hp[b]
                else:
                    v = any(hp[c] for c in pool.children(e))
                if v:
                    hp[e] = True
                    changed = True
        self.haspred = hp

    def has_predicate(self, e: ExprId) -> bool:
        """True iff a predicate (or an Enter, whose outcome depends on values) is reachable."""
        return self.haspred[e]

    # first-character summaries -------------------------------------------

    def _build_summaries(self) -> None:
        pool = self.pool
        sm = [Summary() for _ in range(self.size)]
        changed = True
        while changed:
            changed = False
            for e in range(self.size):
                new = self._summary_of(e, sm, pool)
                if new.key() != sm[e].key():
                    sm[e] = new
                    changed = True
        self.summary = sm

    def _summary_of(self, e, sm, pool) -> Summary:
        n = pool[e]
        tag = n[0]
        if tag == X.LIT:
            return Summary(frozenset(n[1][0]))
        if tag == X.ANY:
            return Summary(ALL)
        if tag == X.CLASS:
            return Summary(ALL if n[2] else n[1])
        if tag == X.SEQ:
            h, t = sm[n[1]], sm[n[2]]
            chars = union_chars(h.chars, t.chars) if h.nullable else h.chars
            return Summary(chars, h.nullable and t.nullable, h.early or (h.nullable and t.early))
        if tag == X.CHOICE:
            a, b = sm[n[1]], sm[n[2]]
            return Summary(union_chars(a.chars, b.chars), a.nullable or b.nullable,
                           a.early or b.early)
        if tag == X.SWITCH:
            out = Summary()
            for _, t in n[2]:
                s = sm[t]
                out = Summary(union_chars(out.chars, s.chars), out.nullable or s.nullable,
                              out.early or s.early)
            return out
        if tag == X.MANY:
            return sm[n[2]]
        if tag in (X.STOP, X.ACT, X.PRED, X.FOLD, X.EPS):
            return Summary(NO_CHARS, True)
        if tag == X.NESTED:
            s = sm[pool.nested_inner(e)]
            return Summary(s.chars, s.nullable or s.early, False)
        if tag == X.RULE:
            b = self.rule_body_of(e)
            return sm[b] if b is not None else Summary()
        if tag == X.BIND:
            return sm[n[2]]
        if tag == X.ENTER:
            return sm[n[1]]
        if tag == X.SUCCESS:
            return Summary(NO_CHARS, False, True)
        return Summary()  # FAIL

    # minimal consumed length ---------------------------------------------

    def _build_minsize(self) -> None:
        pool = self.pool
        ms = [INF] * self.size
        changed = True
        while changed:
            changed = False
            for e in range(self.size):
                v = self._min_of(e, ms, pool)
                if v < ms[e]:
                    ms[e] = v
                    changed = True
        self.minsize = ms

    def _min_of(self, e, ms, pool):
        if self.summary[e].early:
            return 0    # a success state can end the scope before anything is consumed
        n = pool[e]
        tag = n[0]
        if tag == X.LIT:
            return len(n[1])
        if tag in (X.ANY, X.CLASS):
            return 1
        if tag == X.SEQ:
            return ms[n[1]] + ms[n[2]]
        if tag == X.CHOICE:
            return min(ms[n[1]], ms[n[2]])
        if tag == X.SWITCH:
            return min(ms[t] for _, t in n[2])
        if tag == X.MANY:
            return ms[n[2]]
        if tag == X.NESTED:
            return ms[n[1]] + ms[n[2]] + ms[n[3]]
        if tag == X.RULE:
            b = self.rule_body_of(e)
            return ms[b] if b is not None else INF
        if tag == X.BIND:
            return ms[n[2]]
        if tag == X.ENTER:
            return ms[n[1]]
        if tag == X.FAIL:
            return INF
        return 0

    def _has_own_action(self, body: ExprId) -> bool:
        seen = set()
        todo = [body]
        while todo:
            e = todo.pop()
            if e in seen:
                continue
            seen.add(e)
            tag = self.pool[e][0]
            if tag == X.ACT:
                return True
            if tag == X.RULE:
                continue
            todo.extend(self.pool.children(e))
        return False

    def show_rules(self) -> str:
        return "\n".join(f"{name} = {self.pool.show(self.rules[name])}" for name in self.order)


def has_predicate(grammar: Grammar, e: ExprId) -> bool:
    return grammar.has_predicate(e)


def forget_semantic_actions(pool: Pool, e: ExprId) -> ExprId:
    return pool.forget(e)
