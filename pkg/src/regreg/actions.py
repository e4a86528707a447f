"""Semantic values, closures and the built-in action language.

Actions are tiny expressions: integer and string literals, variable
references, ``name.size``, ``+ - * /`` and, inside predicates only, one
top-level comparison (``<``, ``>``, ``==``).  The name ``text`` refers to the
input matched so far by the current rule invocation.
"""

from __future__ import annotations

import re
from typing import Any, List, Optional, Tuple


class ActionError(Exception):
    """Raised when an action cannot be evaluated (unbound name, bad types, division by zero)."""


class ActionSyntaxError(ValueError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(message)
        self.offset = offset


class _NoValue:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "NOVALUE"

    def __reduce__(self):
        return (_NoValue, ())


NOVALUE = _NoValue()


class ParseNode:
    """Default value of a rule without actions: rule name, child values and span."""

    __slots__ = ("rule", "children", "start", "end", "src", "_hash")

    def __init__(self, rule: str, children: tuple, start: int, end: int, src: str) -> None:
        self.rule = rule
        self.children = children
        self.start = start
        self.end = end
        self.src = src
        self._hash = hash((rule, children, start, end))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, ParseNode) or self._hash != other._hash:
            return False
        return (self.rule == other.rule and self.start == other.start
                and self.end == other.end and self.children == other.children
                and self.src[self.start:self.end] == other.src[other.start:other.end])

    @property
    def text(self) -> str:
        return self.src[self.start:self.end]

    def __repr__(self) -> str:
        return f"ParseNode({self.rule!r}, {self.start}, {self.end}, {self.children!r})"


class _Kid:
    __slots__ = ("value", "prev", "count", "hash")

    def __init__(self, value, prev: Optional["_Kid"]) -> None:
        self.value = value
        self.prev = prev
        self.count = 1 if prev is None else prev.count + 1
        self.hash = hash((value, 0 if prev is None else prev.hash))


def _kids_equal(a: Optional[_Kid], b: Optional[_Kid]) -> bool:
    while a is not b:
        if a is None or b is None or a.hash != b.hash or a.count != b.count:
            return False
        if a.value != b.value:
            return False
        a, b = a.prev, b.prev
    return True


class Closure:
    """Variables of one rule invocation, plus the values of its sub-rule calls.

    Immutable: ``bind`` and ``add_child`` return new closures sharing structure.
    """

    __slots__ = ("vars", "kids", "start", "_hash")

    def __init__(self, vars: tuple = (), kids: Optional[_Kid] = None, start: int = 0) -> None:
        self.vars = vars
        self.kids = kids
        self.start = start
        self._hash = None

    def lookup(self, name: str):
        for k, v in reversed(self.vars):
            if k == name:
                return v
        raise ActionError(f"unbound variable {name!r}")

    def bind(self, name: str, value) -> "Closure":
        vars = tuple((k, v) for k, v in self.vars if k != name) + ((name, value),)
        return Closure(vars, self.kids, self.start)

    def add_child(self, value) -> "Closure":
        return Closure(self.vars, _Kid(value, self.kids), self.start)

    def replace_children(self, values) -> "Closure":
        kids = None
        for v in values:
            kids = _Kid(v, kids)
        return Closure(self.vars, kids, self.start)

    def children(self) -> tuple:
        out = []
        k = self.kids
        while k is not None:
            out.append(k.value)
            k = k.prev
        out.reverse()
        return tuple(out)

    def as_dict(self) -> dict:
        return dict(self.vars)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.vars, self.kids.hash if self.kids else 0, self.start))
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Closure):
            return False
        return (self.start == other.start and self.vars == other.vars
                and _kids_equal(self.kids, other.kids))

    def __repr__(self) -> str:
        return f"Closure({dict(self.vars)!r}, children={len(self.children())})"


# action language -----------------------------------------------------------

_TOKEN = re.compile(r"""
    \s*(?:
      (?P<int>\d+)
    | (?P<str>'(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*")
    | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>==|[-+*/<>().])
    )""", re.VERBOSE)

_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", "'": "'", '"': '"'}


def unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            if nxt not in _ESCAPES:
                raise ValueError(f"unknown escape \\{nxt}")
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _tokenize(src: str) -> List[Tuple[str, Any, int]]:
    toks = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos >= len(src):
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ActionSyntaxError(f"unexpected character {src[pos]!r} in action", pos)
        kind = m.lastgroup
        text = m.group(kind)
        at = m.start(kind)
        if kind == "int":
            toks.append(("int", int(text), at))
        elif kind == "str":
            toks.append(("str", unescape(text[1:-1]), at))
        elif kind == "name":
            toks.append(("name", text, at))
        else:
            toks.append(("op", text, at))
        pos = m.end()
    toks.append(("end", None, len(src)))
    return toks


class _ActionParser:
    def __init__(self, src: str) -> None:
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str):
        t = self.take()
        if t[0] != "op" or t[1] != op:
            raise ActionSyntaxError(f"expected {op!r}", t[2])

    def parse(self, predicate: bool):
        e = self.expr()
        t = self.peek()
        if t[0] == "op" and t[1] in ("<", ">", "=="):
            if not predicate:
                raise ActionSyntaxError("comparisons are only allowed in predicates", t[2])
            self.take()
            e = ("cmp", t[1], e, self.expr())
        t = self.peek()
        if t[0] != "end":
            raise ActionSyntaxError(f"unexpected {t[1]!r}", t[2])
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-" and len(self.peek()[1]) == 1:
            op = self.take()[1]
            e = ("bin", op, e, self.term())
        return e

    def term(self):
        e = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            e = ("bin", op, e, self.factor())
        return e

    def factor(self):
        t = self.take()
        if t[0] == "int":
            return ("int", t[1])
        if t[0] == "str":
            return ("str", t[1])
        if t[0] == "name":
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == ".":
                self.take()
                attr = self.take()
                if attr[0] != "name" or attr[1] != "size":
                    raise ActionSyntaxError("only '.size' is supported", attr[2])
                return ("size", t[1])
            return ("var", t[1])
        if t[0] == "op" and t[1] == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ActionSyntaxError("expected a value", t[2])


def parse_action(src: str, predicate: bool = False) -> tuple:
    """Parse action source text into a hashable AST."""
    return _ActionParser(src).parse(predicate)


def eval_action(action: tuple, closure: Closure, span_text: Optional[str] = None):
    """Evaluate an action AST against ``closure``; ``span_text`` backs the name ``text``."""
    kind = action[0]
    if kind == "int" or kind == "str":
        return action[1]
    if kind == "var":
        name = action[1]
        if name == "text" and span_text is not None:
            try:
                return closure.lookup(name)
            except ActionError:
                return span_text
        return closure.lookup(name)
    if kind == "size":
        v = eval_action(("var", action[1]), closure, span_text)
        if not isinstance(v, str):
            raise ActionError(f"'.size' needs a string, got {type(v).__name__}")
        return len(v)
    left = eval_action(action[2], closure, span_text)
    right = eval_action(action[3], closure, span_text)
    op = action[1]
    if kind == "cmp":
        if type(left) is not type(right) or not isinstance(left, (int, str)):
            raise ActionError(f"cannot compare {left!r} and {right!r}")
        if op == "<":
            return left < right
        if op == ">":
            return left > right
        return left == right
    if op == "+":
        if isinstance(left, str) and isinstance(right, str):
            return left + right
        _ints(left, right, op)
        return left + right
    _ints(left, right, op)
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if right == 0:
        raise ActionError("division by zero")
    q = abs(left) // abs(right)
    return q if (left >= 0) == (right >= 0) else -q


def _ints(a, b, op) -> None:
    if type(a) is not int or type(b) is not int:
        raise ActionError(f"operator {op!r} needs integers, got {a!r} and {b!r}")


# rendering -----------------------------------------------------------------

def to_json(value):
    if value is NOVALUE:
        return None
    if isinstance(value, ParseNode):
        return {"rule": value.rule, "start": value.start, "end": value.end,
                "text": value.text, "children": [to_json(c) for c in value.children]}
    if isinstance(value, tuple):
        return [to_json(v) for v in value]
    return value


def to_sexpr(value) -> str:
    """Render a value; parse nodes show their children with the text between them."""
    if value is NOVALUE:
        return "()"
    if isinstance(value, ParseNode):
        parts = [value.rule]
        pos = value.start
        for c in value.children:
            if isinstance(c, ParseNode) and c.src is value.src:
                if c.start > pos:
                    parts.append(_sq(value.src[pos:c.start]))
                parts.append(to_sexpr(c))
                pos = max(pos, c.end)
            else:
                parts.append(to_sexpr(c))
        if pos < value.end:
            parts.append(_sq(value.src[pos:value.end]))
        return "(" + " ".join(parts) + ")"
    if isinstance(value, tuple):
        return "(" + " ".join(to_sexpr(v) for v in value) + ")"
    if isinstance(value, bool):
        return "#t" if value else "#f"
    if isinstance(value, str):
        return _sq(value)
    return str(value)


def _sq(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
