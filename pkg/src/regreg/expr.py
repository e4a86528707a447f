"""Interned, immutable expression nodes.

Every node is a plain tuple ``(tag, *payload)`` stored once in a :class:`Pool`;
an ``ExprId`` is the node's index in the pool.  Children are referenced by id,
so two structurally equal trees always get the same id.  A handful of
language-preserving identities are applied before lookup (see ``intern``).
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Tuple

ExprId = int

# node tags
LIT = 0       # (LIT, text)            len(text) >= 1
ANY = 1       # (ANY,)
CLASS = 2     # (CLASS, frozenset, negated)
SEQ = 3       # (SEQ, head, tail)
CHOICE = 4    # (CHOICE, first, second)
SWITCH = 5    # (SWITCH, head, ((state, id), ...), merge)
MANY = 6      # (MANY, stop_bit, body)
STOP = 7      # (STOP, stop_mask)
NESTED = 8    # (NESTED, start, mid, end)
RULE = 9      # (RULE, name, forgotten)
ACT = 10      # (ACT, action)
BIND = 11     # (BIND, name, body)
PRED = 12     # (PRED, action)
ENTER = 13    # (ENTER, source, inner)
SUCCESS = 14  # (SUCCESS,)
FAIL = 15     # (FAIL,)
EPS = 16      # (EPS,)
FOLD = 17     # (FOLD, rule, name)   internal action emitted by left-recursion rewriting

TAG_NAMES = {
    LIT: "Literal", ANY: "AnyChar", CLASS: "CharClass", SEQ: "Seq",
    CHOICE: "Choice", SWITCH: "Switch", MANY: "Many", STOP: "Stop",
    NESTED: "Nested", RULE: "RuleRef", ACT: "Act", BIND: "Bind", PRED: "Pred",
    ENTER: "Enter", SUCCESS: "SuccessState", FAIL: "FailState", EPS: "Epsilon",
    FOLD: "Fold",
}

SUCCESS_STATE = "success"
FAIL_STATE = "fail"
IDENTITY_MERGE = "identity"

_ACTIONISH = (ACT, BIND, PRED, ENTER, FOLD, RULE)


class Pool:
    """Append-only hash-consing table for expression nodes."""

    def __init__(self) -> None:
        self.nodes: List[tuple] = []
        self._index: Dict[tuple, ExprId] = {}
        self._forget: Dict[ExprId, ExprId] = {}
        self._nested_inner: Dict[ExprId, ExprId] = {}
        self.stop_bits = 0
        self.EPS = self._raw((EPS,))
        self.FAIL = self._raw((FAIL,))
        self.SUCCESS = self._raw((SUCCESS,))
        self.ANY = self._raw((ANY,))

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, e: ExprId) -> tuple:
        return self.nodes[e]

    def _raw(self, node: tuple) -> ExprId:
        e = self._index.get(node)
        if e is None:
            e = len(self.nodes)
            self.nodes.append(node)
            self._index[node] = e
        return e

    def intern(self, node: tuple) -> ExprId:
        """Return the canonical id of ``node`` after simplification.

        Identities applied: Seq(eps, e) = e, Seq(e, eps) = e,
        Choice(fail, e) = e, Choice(e, fail) = e, Literal('') = eps, and a
        Switch whose branches are all one id collapses to that branch when its
        head cannot run actions or predicates.
        """
        tag = node[0]
        if tag == SEQ:
            if node[1] == self.EPS:
                return node[2]
            if node[2] == self.EPS:
                return node[1]
        elif tag == CHOICE:
            if node[1] == self.FAIL:
                return node[2]
            if node[2] == self.FAIL:
                return node[1]
        elif tag == LIT:
            if node[1] == "":
                return self.EPS
        elif tag == SWITCH:
            targets = {t for _, t in node[2]}
            if len(targets) == 1 and self.is_inert(node[1]):
                return targets.pop()
        elif tag == STOP:
            if not node[1]:
                raise ValueError("Stop needs a nonempty stop set")
        e = self._raw(node)
        if tag == NESTED and e not in self._nested_inner:
            self._nested_inner[e] = self.seq(node[1], node[2], node[3])
        return e

    def is_inert(self, e: ExprId) -> bool:
        """True when no action, binding, predicate or rule call is reachable."""
        seen = set()
        todo = [e]
        while todo:
            x = todo.pop()
            if x in seen:
                continue
            seen.add(x)
            if self.nodes[x][0] in _ACTIONISH:
                return False
            todo.extend(self.children(x))
        return True

    # constructors

    def lit(self, text: str) -> ExprId:
        return self.intern((LIT, text))

    def any_char(self) -> ExprId:
        return self.ANY

    def char_class(self, chars: Iterable[str], negated: bool = False) -> ExprId:
        return self.intern((CLASS, frozenset(chars), bool(negated)))

    def seq(self, *items: ExprId) -> ExprId:
        if not items:
            return self.EPS
        e = items[-1]
        for h in reversed(items[:-1]):
            e = self.intern((SEQ, h, e))
        return e

    def choice(self, *items: ExprId) -> ExprId:
        if not items:
            return self.FAIL
        e = items[-1]
        for h in reversed(items[:-1]):
            e = self.intern((CHOICE, h, e))
        return e

    def switch(self, head: ExprId, alts: Dict[str, ExprId],
               merge: str = IDENTITY_MERGE) -> ExprId:
        if SUCCESS_STATE not in alts or FAIL_STATE not in alts:
            raise ValueError("Switch must cover success and fail")
        return self.intern((SWITCH, head, tuple(sorted(alts.items())), merge))

    def new_stop(self) -> int:
        bit = 1 << self.stop_bits
        self.stop_bits += 1
        return bit

    def many(self, stop: int, body: ExprId) -> ExprId:
        return self.intern((MANY, stop, body))

    def stop(self, mask: int) -> ExprId:
        return self.intern((STOP, mask))

    def star(self, body: ExprId) -> ExprId:
        st = self.new_stop()
        return self.many(st, self.choice(body, self.stop(st)))

    def lazy_star(self, body: ExprId) -> ExprId:
        st = self.new_stop()
        return self.many(st, self.choice(self.stop(st), body))

    def plus(self, body: ExprId) -> ExprId:
        return self.seq(body, self.star(body))

    def not_ahead(self, body: ExprId) -> ExprId:
        return self.switch(self.seq(body, self.SUCCESS),
                           {SUCCESS_STATE: self.FAIL, FAIL_STATE: self.EPS})

    def ahead(self, body: ExprId) -> ExprId:
        return self.switch(self.seq(body, self.SUCCESS),
                           {SUCCESS_STATE: self.EPS, FAIL_STATE: self.FAIL})

    def nested(self, start: ExprId, mid: ExprId, end: ExprId) -> ExprId:
        return self.intern((NESTED, start, mid, end))

    def ordered(self, *items: ExprId) -> ExprId:
        """PEG ordered choice: a backtracking choice under an empty-delimiter nesting."""
        return self.nested(self.EPS, self.choice(*items), self.EPS)

    def rule(self, name: str) -> ExprId:
        return self.intern((RULE, name, False))

    def act(self, action: tuple) -> ExprId:
        return self.intern((ACT, action))

    def bind(self, name: str, body: ExprId) -> ExprId:
        return self.intern((BIND, name, body))

    def pred(self, action: tuple) -> ExprId:
        return self.intern((PRED, action))

    def enter(self, source: ExprId, inner: ExprId) -> ExprId:
        return self.intern((ENTER, source, inner))

    def fold(self, rule: str, name: Optional[str]) -> ExprId:
        return self.intern((FOLD, rule, name))

    # structure

    def children(self, e: ExprId) -> Tuple[ExprId, ...]:
        n = self.nodes[e]
        tag = n[0]
        if tag in (SEQ, CHOICE, ENTER):
            return (n[1], n[2])
        if tag == SWITCH:
            return (n[1],) + tuple(t for _, t in n[2])
        if tag == MANY:
            return (n[2],)
        if tag == NESTED:
            return (n[1], n[2], n[3])
        if tag == BIND:
            return (n[2],)
        return ()

    def nested_inner(self, e: ExprId) -> ExprId:
        """The Seq(start, mid, end) matched inside a Nested node."""
        return self._nested_inner[e]

    def forget(self, e: ExprId) -> ExprId:
        """Erase semantic actions and bindings; predicates stay.

        Rule references switch to their action-free twin, so the result never
        reaches an action through any edge.
        """
        got = self._forget.get(e)
        if got is not None:
            return got
        # iterative post-order so deep Seq chains do not hit the recursion limit
        stack = [e]
        while stack:
            x = stack[-1]
            if x in self._forget:
                stack.pop()
                continue
            pending = [c for c in self.children(x) if c not in self._forget]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            self._forget[x] = self._forget_node(x)
        return self._forget[e]

    def _forget_node(self, e: ExprId) -> ExprId:
        n = self.nodes[e]
        tag = n[0]
        f = self._forget
        if tag in (ACT, FOLD):
            r = self.EPS
        elif tag == BIND:
            r = f[n[2]]
        elif tag == RULE:
            r = self.intern((RULE, n[1], True))
        elif tag in (SEQ, CHOICE, ENTER):
            r = self.intern((tag, f[n[1]], f[n[2]]))
        elif tag == SWITCH:
            r = self.intern((SWITCH, f[n[1]], tuple((s, f[t]) for s, t in n[2]), n[3]))
        elif tag == MANY:
            r = self.intern((MANY, n[1], f[n[2]]))
        elif tag == NESTED:
            r = self.intern((NESTED, f[n[1]], f[n[2]], f[n[3]]))
        else:
            r = e
        # the result is already action-free
        self._forget.setdefault(r, r)
        return r

    # display

    def show(self, e: ExprId) -> str:
        """Render an expression in grammar-file syntax (resugaring loops and lookaheads)."""
        return _Printer(self).show(e, 0)


def _quote(text: str) -> str:
    out = text.replace("\\", "\\\\").replace("'", "\\'")
    out = out.replace("\n", "\\n").replace("\t", "\\t")
    return "'" + out + "'"


def _class_text(chars: frozenset, negated: bool) -> str:
    body = "".join(_esc_class(c) for c in sorted(chars))
    return "[" + ("^" if negated else "") + body + "]"


def _esc_class(c: str) -> str:
    if c in "]\\-^":
        return "\\" + c
    return {"\n": "\\n", "\t": "\\t"}.get(c, c)


class _Printer:
    # precedence: 0 choice, 1 sequence, 2 prefixed/postfixed term
    def __init__(self, pool: Pool) -> None:
        self.pool = pool

    def show(self, e: ExprId, prec: int) -> str:
        text, own = self._render(e)
        if own < prec:
            return "(" + text + ")"
        return text

    def _loop_parts(self, n: tuple):
        body = self.pool[n[2]]
        st = self.pool.stop(n[1])
        if body[0] == CHOICE:
            if body[2] == st:
                return "*", body[1]
            if body[1] == st:
                return "*?", body[2]
        return None, None

    def _render(self, e: ExprId) -> Tuple[str, int]:
        p = self.pool
        n = p[e]
        tag = n[0]
        if tag == LIT:
            return _quote(n[1]), 3
        if tag == ANY:
            return ".", 3
        if tag == CLASS:
            return _class_text(n[1], n[2]), 3
        if tag == EPS:
            return "''", 3
        if tag == SUCCESS:
            return "success", 3
        if tag == FAIL:
            return "fail", 3
        if tag == RULE:
            return n[1], 3
        if tag == SEQ:
            return self.show(n[1], 2) + " " + self.show(n[2], 1), 1
        if tag == CHOICE:
            return self.show(n[1], 1) + " | " + self.show(n[2], 0), 0
        if tag == MANY:
            op, body = self._loop_parts(n)
            if op is not None:
                return self.show(body, 3) + op, 2
            return self.show(n[2], 3) + "**", 2
        if tag == STOP:
            return "Stop", 3
        if tag == NESTED:
            if n[1] == p.EPS and n[3] == p.EPS and p[n[2]][0] == CHOICE:
                alts = []
                x = n[2]
                while p[x][0] == CHOICE:
                    alts.append(self.show(p[x][1], 1))
                    x = p[x][2]
                alts.append(self.show(x, 1))
                return " / ".join(alts), 0
            return ("nested(" + self.show(n[1], 0) + ", " + self.show(n[2], 0)
                    + ", " + self.show(n[3], 0) + ")"), 3
        if tag == SWITCH:
            alts = dict(n[2])
            head = p[n[1]]
            if head[0] == SEQ and head[2] == p.SUCCESS:
                if alts == {SUCCESS_STATE: p.FAIL, FAIL_STATE: p.EPS}:
                    return "~" + self.show(head[1], 3), 2
                if alts == {SUCCESS_STATE: p.EPS, FAIL_STATE: p.FAIL}:
                    return "&" + self.show(head[1], 3), 2
            inner = ", ".join(f"{k}: {self.show(v, 0)}" for k, v in n[2])
            return f"Switch[{self.show(n[1], 0)} {{{inner}}}]", 3
        if tag == ACT:
            return "{" + format_action(n[1]) + "}", 3
        if tag == PRED:
            return "&{" + format_action(n[1]) + "}", 3
        if tag == BIND:
            return self.show(n[2], 3) + ":" + n[1], 2
        if tag == ENTER:
            return self.show(n[1], 3) + "[" + self.show(n[2], 0) + "]", 3
        if tag == FOLD:
            return "{fold " + n[1] + (":" + n[2] if n[2] else "") + "}", 3
        raise ValueError(f"unknown node {n!r}")


def format_action(a: tuple) -> str:
    """Render an action-language AST back to source text."""
    kind = a[0]
    if kind == "int":
        return str(a[1])
    if kind == "str":
        return _quote(a[1])
    if kind == "var":
        return a[1]
    if kind == "size":
        return a[1] + ".size"
    if kind in ("bin", "cmp"):
        return "(" + format_action(a[2]) + " " + a[1] + " " + format_action(a[3]) + ")"
    raise ValueError(f"bad action {a!r}")
