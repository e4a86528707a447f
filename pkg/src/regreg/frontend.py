"""Grammar files: lexing, parsing into a surface tree, printing, desugaring, validation.

Format::

    # comment
    add = mul:x '+' add:y {x+y}
        | mul

``|`` is the backtracking choice, ``/`` the PEG ordered choice; mixing the two
in one chain is a syntax error.  The first rule is the start rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import expr as X
from .actions import ActionSyntaxError, parse_action, unescape
from .expr import ExprId, Pool
from .grammar import Grammar


class GrammarError(Exception):
    def __init__(self, diagnostics: List["Diagnostic"]) -> None:
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class Diagnostic:
    severity: str          # "error" | "warning"
    code: str
    message: str
    rule: Optional[str] = None
    line: int = 0
    column: int = 0

    def __str__(self) -> str:
        where = f"{self.line}:{self.column}: " if self.line else ""
        rule = f" [{self.rule}]" if self.rule else ""
        return f"{where}{self.severity} {self.code}{rule}: {self.message}"


def errors(diags: List[Diagnostic]) -> List[Diagnostic]:
    return [d for d in diags if d.severity == "error"]


# surface tree ---------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    text: str


@dataclass(frozen=True)
class AnyChar:
    pass


@dataclass(frozen=True)
class CharClass:
    ranges: Tuple[Tuple[str, str], ...]
    negated: bool = False

    def chars(self) -> frozenset:
        out = set()
        for lo, hi in self.ranges:
            out.update(chr(c) for c in range(ord(lo), ord(hi) + 1))
        return frozenset(out)


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Seq:
    items: Tuple


@dataclass(frozen=True)
class Alt:
    op: str            # "|" or "/"
    items: Tuple


@dataclass(frozen=True)
class Loop:
    op: str            # "*", "+", "*?"
    body: object


@dataclass(frozen=True)
class Look:
    op: str            # "&" or "~"
    body: object


@dataclass(frozen=True)
class Action:
    source: str
    ast: tuple = field(compare=False, default=())


@dataclass(frozen=True)
class Predicate:
    source: str
    ast: tuple = field(compare=False, default=())


@dataclass(frozen=True)
class Bind:
    body: object
    name: str


@dataclass(frozen=True)
class NestedExpr:
    start: object
    mid: object
    end: object


@dataclass(frozen=True)
class Enter:
    source: object
    inner: object


@dataclass(frozen=True)
class Rule:
    name: str
    expr: object
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass
class SurfaceGrammar:
    rules: List[Rule]

    def names(self) -> List[str]:
        return [r.name for r in self.rules]

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)


# lexer -----------------------------------------------------------------------

class _SyntaxError(Exception):
    def __init__(self, message: str, pos: int) -> None:
        super().__init__(message)
        self.pos = pos


_ATOM_END = ("string", "name", ")", "class", "]", ".", "action")


@dataclass
class _Tok:
    kind: str
    value: object
    pos: int


def _lex(text: str) -> List[_Tok]:
    toks: List[_Tok] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start = i
        if c.isalpha() or c == "_":
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            toks.append(_Tok("name", text[start:i], start))
            continue
        if c in "'\"":
            i += 1
            while i < n and text[i] != c:
                if text[i] == "\\":
                    i += 1
                if text[i] == "\n":
                    raise _SyntaxError("unterminated string", start)
                i += 1
            if i >= n:
                raise _SyntaxError("unterminated string", start)
            i += 1
            try:
                toks.append(_Tok("string", unescape(text[start + 1:i - 1]), start))
            except ValueError as exc:
                raise _SyntaxError(str(exc), start)
            continue
        if c == "{":
            depth = 0
            while i < n:
                ch = text[i]
                if ch in "'\"":
                    q = ch
                    i += 1
                    while i < n and text[i] != q:
                        i += 2 if text[i] == "\\" else 1
                elif ch == "{":
                    depth += 1
                elif ch == "}":
                    depth -= 1
                    if depth == 0:
                        break
                i += 1
            if i >= n:
                raise _SyntaxError("unterminated action", start)
            i += 1
            toks.append(_Tok("action", text[start + 1:i - 1].strip(), start))
            continue
        if c == "[":
            prev = toks[-1] if toks else None
            adjacent = prev is not None and prev.kind in _ATOM_END and _tok_end(text, prev) == start
            if adjacent:
                toks.append(_Tok("enter[", None, start))
                i += 1
                continue
            i += 1
            negated = False
            if i < n and text[i] == "^":
                negated = True
                i += 1
            items = []
            while i < n and text[i] != "]":
                lo, i = _class_char(text, i, start)
                hi = lo
                if i + 1 < n and text[i] == "-" and text[i + 1] != "]":
                    hi, i = _class_char(text, i + 1, start)
                    if hi < lo:
                        raise _SyntaxError("bad range in character class", start)
                items.append((lo, hi))
            if i >= n:
                raise _SyntaxError("unterminated character class", start)
            i += 1
            toks.append(_Tok("class", CharClass(tuple(items), negated), start))
            toks[-1].end = i
            continue
        if text.startswith("*?", i):
            toks.append(_Tok("*?", None, i))
            i += 2
            continue
        if c in "=|/&~*+:.(),]":
            toks.append(_Tok(c, None, i))
            i += 1
            continue
        raise _SyntaxError(f"unexpected character {c!r}", i)
    toks.append(_Tok("eof", None, n))
    return toks


def _class_char(text: str, i: int, start: int) -> Tuple[str, int]:
    c = text[i]
    if c == "\\":
        if i + 1 >= len(text):
            raise _SyntaxError("unterminated character class", start)
        nxt = text[i + 1]
        return {"n": "\n", "t": "\t"}.get(nxt, nxt), i + 2
    return c, i + 1


def _tok_end(text: str, tok: _Tok) -> int:
    end = getattr(tok, "end", None)
    if end is not None:
        return end
    if tok.kind == "name":
        return tok.pos + len(tok.value)
    if tok.kind in (")", "]", "."):
        return tok.pos + 1
    if tok.kind == "string":
        q = text[tok.pos]
        i = tok.pos + 1
        while text[i] != q:
            i += 2 if text[i] == "\\" else 1
        return i + 1
    if tok.kind == "action":
        depth = 0
        i = tok.pos
        while True:
            if text[i] == "{":
                depth += 1
            elif text[i] == "}":
                depth -= 1
                if depth == 0:
                    return i + 1
            elif text[i] in "'\"":
                q = text[i]
                i += 1
                while text[i] != q:
                    i += 2 if text[i] == "\\" else 1
            i += 1
    return tok.pos + 1


# parser ------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.toks = _lex(text)
        self.i = 0

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> _Tok:
        t = self.take()
        if t.kind != kind:
            raise _SyntaxError(f"expected {kind!r}, found {_describe(t)}", t.pos)
        return t

    def at_rule_start(self) -> bool:
        return self.peek().kind == "name" and self.peek(1).kind == "="

    def grammar(self) -> List[Rule]:
        rules = []
        while self.peek().kind != "eof":
            t = self.expect("name")
            self.expect("=")
            e = self.expr()
            line, col = _line_col(self.text, t.pos)
            rules.append(Rule(t.value, e, line, col))
            if self.peek().kind not in ("eof", "name"):
                raise _SyntaxError(f"unexpected {_describe(self.peek())}", self.peek().pos)
        return rules

    def expr(self):
        items = [self.alt()]
        op = None
        while self.peek().kind in ("|", "/"):
            t = self.take()
            if op is not None and t.kind != op:
                raise _SyntaxError("'|' and '/' cannot be mixed in one choice; add parentheses", t.pos)
            op = t.kind
            items.append(self.alt())
        if op is None:
            return items[0]
        return Alt(op, tuple(items))

    def starts_term(self) -> bool:
        k = self.peek().kind
        if k == "name":
            return not self.at_rule_start()
        return k in ("string", ".", "class", "(", "action", "&", "~")

    def alt(self):
        if not self.starts_term():
            raise _SyntaxError(f"expected an expression, found {_describe(self.peek())}",
                               self.peek().pos)
        items = []
        while self.starts_term():
            items.append(self.term())
        return items[0] if len(items) == 1 else Seq(tuple(items))

    def term(self):
        prefix = None
        if self.peek().kind in ("&", "~"):
            if self.peek().kind == "&" and self.peek(1).kind == "action":
                self.take()
                a = self.take()
                node = Predicate(a.value, self._action(a, True))
                return self.postfix_and_binding(node)
            prefix = self.take().kind
        node = self.atom()
        node = self.postfix(node)
        if prefix is not None:
            node = Look(prefix, node)
        return self.binding(node)

    def postfix_and_binding(self, node):
        return self.binding(self.postfix(node))

    def postfix(self, node):
        k = self.peek().kind
        if k in ("*", "+", "*?"):
            self.take()
            return Loop(k, node)
        return node

    def binding(self, node):
        if self.peek().kind == ":":
            self.take()
            name = self.expect("name")
            return Bind(node, name.value)
        return node

    def _action(self, tok: _Tok, predicate: bool) -> tuple:
        try:
            return parse_action(tok.value, predicate)
        except ActionSyntaxError as exc:
            raise _SyntaxError(str(exc), tok.pos + 1)

    def atom(self):
        t = self.take()
        if t.kind == "string":
            node = Lit(t.value)
        elif t.kind == ".":
            node = AnyChar()
        elif t.kind == "class":
            node = t.value
        elif t.kind == "name":
            if t.value == "nested" and self.peek().kind == "(":
                self.take()
                a = self.expr()
                self.expect(",")
                b = self.expr()
                self.expect(",")
                c = self.expr()
                self.expect(")")
                node = NestedExpr(a, b, c)
            else:
                node = Ref(t.value)
        elif t.kind == "(":
            node = self.expr()
            self.expect(")")
        elif t.kind == "action":
            node = Action(t.value, self._action(t, False))
        else:
            raise _SyntaxError(f"expected an expression, found {_describe(t)}", t.pos)
        while self.peek().kind == "enter[":
            self.take()
            inner = self.expr()
            self.expect("]")
            node = Enter(node, inner)
        return node


def _describe(t: _Tok) -> str:
    if t.kind == "eof":
        return "end of input"
    if t.kind in ("name", "string"):
        return f"{t.kind} {t.value!r}"
    return repr(t.kind)


def _line_col(text: str, pos: int) -> Tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def parse_grammar(text: str) -> Tuple[SurfaceGrammar, List[Diagnostic]]:
    """Parse grammar text; problems come back as diagnostics, never as exceptions."""
    try:
        rules = _Parser(text).grammar()
    except _SyntaxError as exc:
        line, col = _line_col(text, exc.pos)
        return SurfaceGrammar([]), [Diagnostic("error", "syntax", str(exc), None, line, col)]
    diags = []
    seen: Dict[str, Rule] = {}
    kept = []
    for r in rules:
        if r.name in seen:
            diags.append(Diagnostic("error", "duplicate-rule",
                                    f"rule {r.name!r} is already defined on line {seen[r.name].line}",
                                    r.name, r.line, r.column))
            continue
        seen[r.name] = r
        kept.append(r)
    if not kept:
        diags.append(Diagnostic("error", "no-start-rule", "grammar defines no rules"))
    return SurfaceGrammar(kept), diags


# printer -----------------------------------------------------------------------

def _quote(text: str) -> str:
    out = text.replace("\\", "\\\\").replace("'", "\\'").replace("\n", "\\n").replace("\t", "\\t")
    return "'" + out + "'"


def _class_src(c: CharClass) -> str:
    def esc(ch):
        if ch in "]\\-^":
            return "\\" + ch
        return {"\n": "\\n", "\t": "\\t"}.get(ch, ch)
    body = "".join(esc(lo) if lo == hi else esc(lo) + "-" + esc(hi) for lo, hi in c.ranges)
    return "[" + ("^" if c.negated else "") + body + "]"


def _level(node) -> int:
    if isinstance(node, Alt):
        return 0
    if isinstance(node, Seq):
        return 1
    if isinstance(node, Bind):
        return 2
    if isinstance(node, Look):
        return 3
    if isinstance(node, Loop):
        return 4
    return 5


def format_expr(node, need: int = 0) -> str:
    text = _format(node)
    if _level(node) < need:
        return "(" + text + ")"
    return text


def _format(node) -> str:
    if isinstance(node, Alt):
        return f" {node.op} ".join(format_expr(i, 1) for i in node.items)
    if isinstance(node, Seq):
        return " ".join(format_expr(i, 2) for i in node.items)
    if isinstance(node, Bind):
        return format_expr(node.body, 3) + ":" + node.name
    if isinstance(node, Look):
        return node.op + format_expr(node.body, 4)
    if isinstance(node, Loop):
        return format_expr(node.body, 5) + node.op
    if isinstance(node, Lit):
        return _quote(node.text)
    if isinstance(node, AnyChar):
        return "."
    if isinstance(node, CharClass):
        return _class_src(node)
    if isinstance(node, Ref):
        return node.name
    if isinstance(node, Action):
        return "{" + node.source + "}"
    if isinstance(node, Predicate):
        return "&{" + node.source + "}"
    if isinstance(node, NestedExpr):
        return f"nested({_format(node.start)}, {_format(node.mid)}, {_format(node.end)})"
    if isinstance(node, Enter):
        src = format_expr(node.source, 5)
        if isinstance(node.source, (CharClass,)):
            src = "(" + src + ")"
        return src + "[" + _format(node.inner) + "]"
    raise TypeError(f"not a surface node: {node!r}")


def format_grammar(g: SurfaceGrammar) -> str:
    return "\n".join(f"{r.name} = {format_expr(r.expr)}" for r in g.rules) + "\n"


# desugaring ---------------------------------------------------------------------

def desugar(node, pool: Pool, peg: bool = False) -> ExprId:
    """Lower a surface tree to interned core expressions.

    With ``peg`` set, ``|`` behaves like ``/`` and loops are possessive, which
    is how a PEG reads the same text.
    """
    def d(n):
        return desugar(n, pool, peg)

    if isinstance(node, Lit):
        return pool.lit(node.text)
    if isinstance(node, AnyChar):
        return pool.any_char()
    if isinstance(node, CharClass):
        return pool.char_class(node.chars(), node.negated)
    if isinstance(node, Ref):
        return pool.rule(node.name)
    if isinstance(node, Seq):
        return pool.seq(*[d(i) for i in node.items])
    if isinstance(node, Alt):
        items = [d(i) for i in node.items]
        if node.op == "/" or peg:
            return pool.ordered(*items)
        return pool.choice(*items)
    if isinstance(node, Loop):
        body = d(node.body)
        if node.op == "*":
            e = pool.star(body)
        elif node.op == "*?":
            e = pool.lazy_star(body)
        else:
            e = pool.plus(body)
        if peg:
            e = pool.nested(pool.EPS, e, pool.EPS)
        return e
    if isinstance(node, Look):
        body = d(node.body)
        return pool.ahead(body) if node.op == "&" else pool.not_ahead(body)
    if isinstance(node, Action):
        return pool.act(node.ast)
    if isinstance(node, Predicate):
        return pool.pred(node.ast)
    if isinstance(node, Bind):
        return pool.bind(node.name, d(node.body))
    if isinstance(node, NestedExpr):
        return pool.nested(d(node.start), d(node.mid), d(node.end))
    if isinstance(node, Enter):
        return pool.enter(d(node.source), d(node.inner))
    raise TypeError(f"not a surface node: {node!r}")


def build_grammar(sg: SurfaceGrammar, start: Optional[str] = None, peg: bool = False,
                  pool: Optional[Pool] = None) -> Grammar:
    pool = pool or Pool()
    rules = {r.name: desugar(r.expr, pool, peg) for r in sg.rules}
    return Grammar(pool, rules, start or (sg.rules[0].name if sg.rules else None),
                   order=[r.name for r in sg.rules])


def load_grammar(text: str, start: Optional[str] = None, peg: bool = False
                 ) -> Tuple[Optional[Grammar], List[Diagnostic]]:
    """Parse and desugar; returns (None, diagnostics) when parsing failed."""
    sg, diags = parse_grammar(text)
    if errors(diags):
        return None, diags
    if start is not None and start not in sg.names():
        return None, diags + [Diagnostic("error", "unknown-start", f"no rule named {start!r}", start)]
    return build_grammar(sg, start, peg), diags


def compile_grammar(text: str, start: Optional[str] = None, peg: bool = False,
                    check: bool = True) -> Grammar:
    """Parse, desugar and (optionally) validate; raises GrammarError on any error."""
    g, diags = load_grammar(text, start, peg)
    if g is None:
        raise GrammarError(errors(diags))
    if check:
        bad = errors(validate(g))
        if bad:
            raise GrammarError(bad)
    return g


# validation ----------------------------------------------------------------------

def validate(g: Grammar) -> List[Diagnostic]:
    """Report unresolved rules, left recursion, lookaheads into left recursion and
    recursion that is neither left, right nor wrapped in ``nested``."""
    from .analysis import detect_left_recursion, lookahead_rules

    diags: List[Diagnostic] = []
    pool = g.pool
    if g.start is None or g.start not in g.rules:
        diags.append(Diagnostic("error", "no-start-rule", "grammar has no start rule", g.start))
        return diags
    for name in g.order:
        for e in _reachable_local(pool, g.rules[name]):
            n = pool[e]
            if n[0] == X.RULE and n[1] not in g.rules:
                diags.append(Diagnostic("error", "unresolved-rule",
                                        f"rule {n[1]!r} is not defined", name))
    if errors(diags):
        return _dedupe(diags)

    for name in g.order:
        for e in _reachable_local(pool, g.rules[name]):
            if pool[e][0] == X.MANY and _empty_iteration(g, e):
                diags.append(Diagnostic("error", "nullable-iteration",
                                        f"iteration {pool.show(e)} can repeat without "
                                        "consuming input", name))

    report = detect_left_recursion(g)
    recursive ={r for r, info in report.items() if info.direct or info.cycle}
    for name in g.order:
        info = report[name]
        if info.paradox:
            diags.append(Diagnostic("error", "lookahead-left-recursion",
                                    f"rule {name!r} refers to itself through a lookahead "
                                    "before consuming input", name))
    for name in g.order:
        for la_rules in lookahead_rules(g, name):
            hit = sorted(la_rules & recursive)
            if hit and not report[name].paradox:
                diags.append(Diagnostic("error", "lookahead-left-recursion",
                                        f"lookahead in {name!r} reaches left-recursive rule(s) "
                                        + ", ".join(hit), name))
    for name in g.order:
        info = report[name]
        if info.direct:
            diags.append(Diagnostic("error", "left-recursion",
                                    f"rule {name!r} is directly left recursive", name))
        elif info.cycle:
            diags.append(Diagnostic("error", "left-recursion",
                                    f"rule {name!r} is left recursive through "
                                    + " -> ".join(info.cycle), name))
    for name, callee in _unstructured_calls(g):
        diags.append(Diagnostic("warning", "non-structured-recursion",
                                f"recursive call to {callee!r} is neither left, right nor "
                                "inside nested(); linear time is not guaranteed", name))
    return _dedupe(diags)


def _empty_iteration(g: Grammar, e: ExprId) -> bool:
    """True when the loop body other than its own exit can succeed on no input."""
    pool = g.pool
    bit, body = pool[e][1], pool[e][2]
    stop = pool.stop(bit)
    parts = [body]
    if pool[body][0] == X.CHOICE and stop in pool[body][1:]:
        parts = [x for x in pool[body][1:] if x != stop]
    return any(x < g.size and g.summary[x].nullable for x in parts)


def _dedupe(diags: List[Diagnostic]) -> List[Diagnostic]:
    out = []
    seen = set()
    for d in diags:
        if d not in seen:
            seen.add(d)
            out.append(d)
    return out


def _reachable_local(pool: Pool, e: ExprId):
    seen = set()
    todo = [e]
    while todo:
        x = todo.pop()
        if x in seen:
            continue
        seen.add(x)
        yield x
        todo.extend(pool.children(x))


def _bare_call_graph(g: Grammar) -> Dict[str, set]:
    """Calls that are not inside nested() or a lookahead head."""
    pool = g.pool
    graph = {}
    for name, body in g.rules.items():
        out = set()
        seen = set()
        todo = [body]
        while todo:
            e = todo.pop()
            if e in seen:
                continue
            seen.add(e)
            n = pool[e]
            if n[0] == X.RULE:
                if n[1] in g.rules:
                    out.add(n[1])
            elif n[0] == X.SWITCH:
                todo.extend(t for _, t in n[2])
            elif n[0] != X.NESTED:
                todo.extend(pool.children(e))
        graph[name] = out
    return graph


def _reaches(graph: Dict[str, set], src: str, dst: str) -> bool:
    seen = set()
    todo = [src]
    while todo:
        r = todo.pop()
        for c in graph.get(r, ()):
            if c == dst:
                return True
            if c not in seen:
                seen.add(c)
                todo.append(c)
    return False


def _unstructured_calls(g: Grammar):
    """Recursive calls that sit neither at the tail, the left edge, nor inside nested/lookahead."""
    pool = g.pool
    graph = _bare_call_graph(g)
    found = []

    def trivial(e: ExprId) -> bool:
        n = pool[e]
        if n[0] in (X.ACT, X.EPS, X.FOLD):
            return True
        if n[0] == X.SEQ:
            return trivial(n[1]) and trivial(n[2])
        return False

    def walk(e: ExprId, tail: bool, left: bool, rule: str, seen: set) -> None:
        key = (e, tail, left)
        if key in seen:
            return
        seen.add(key)
        n = pool[e]
        tag = n[0]
        if tag == X.RULE:
            callee = n[1]
            if callee in g.rules and not tail and not left and _reaches(graph, callee, rule):
                found.append((rule, callee))
        elif tag == X.SEQ:
            head_nullable = g.summary[n[1]].nullable
            walk(n[1], tail and trivial(n[2]), left, rule, seen)
            walk(n[2], tail, left and head_nullable, rule, seen)
        elif tag == X.CHOICE:
            walk(n[1], tail, left, rule, seen)
            walk(n[2], tail, left, rule, seen)
        elif tag == X.SWITCH:
            for _, t in n[2]:
                walk(t, tail, left, rule, seen)
        elif tag == X.MANY:
            walk(n[2], False, left, rule, seen)
        elif tag == X.BIND:
            walk(n[2], tail, left, rule, seen)
        elif tag == X.ENTER:
            walk(n[1], False, left, rule, seen)
        # NESTED and lookahead heads open their own scope

    for name in g.order:
        walk(g.rules[name], True, True, name, set())
    return sorted(set(found))
