"""The matcher: continuation-passing evaluation run on an explicit machine.

Continuations are linked frames (sequence tails, loop re-entry, rule return,
binding capture, enter).  Every frame knows a small integer ``fid`` naming its
action-free shape, so memo keys ``(forget(e), s, fid, stops)`` are value-free
and the number of distinct keys stays linear in the input.

Backtracking lives on a separate handler stack.  Three kinds of handler mark a
scope boundary: the top level, a Switch head and a Nested interior.  A scope
ends at its first success; pending alternatives inside it are cut.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, TextIO, Tuple

from . import expr as X
from .actions import NOVALUE, ActionError, Closure, ParseNode, eval_action
from .grammar import NO_CHARS, Grammar, union_chars
from .memo import COMMIT, DISCARD, OPEN, MemoStore, Statistics


class RecursionGuardError(RuntimeError):
    """The continuation/backtrack depth passed the configured limit."""


@dataclass
class EngineOptions:
    memo: bool = True
    compact: bool = True
    full_match: bool = True
    fail_fast: bool = False
    validate_structured: bool = False
    trace: bool = False
    trace_file: Optional[TextIO] = None
    recursion_limit: Optional[int] = None


@dataclass
class ParseOutcome:
    matched: bool
    end: Optional[int]
    value: object
    stats: Statistics
    warnings: List[str] = field(default_factory=list)


# frame kinds
F_SUCC, F_ACCEPT, F_SEQ, F_LOOP, F_RET, F_BIND, F_ENTER = range(7)

# handler kinds
H_TOP, H_CHOICE, H_MEMO, H_SWITCH, H_NESTED = range(5)

# machine modes
M_EVAL, M_CONT, M_FAIL, M_DONE = range(4)

FAILED = "fail"
_VALUE_KEY = "value"


class Frame:
    __slots__ = ("kind", "x", "y", "z", "next", "depth", "haspred", "fid", "cs", "cmin")

    def __init__(self, kind, x, y, z, nxt, haspred=False):
        self.kind = kind
        self.x = x
        self.y = y
        self.z = z
        self.next = nxt
        self.depth = nxt.depth + 1
        self.haspred = haspred or nxt.haspred
        self.fid = None
        self.cs = None
        self.cmin = None


class _Terminal(Frame):
    def __init__(self, kind, fid, cs, depth=0):
        self.kind = kind
        self.x = self.y = self.z = None
        self.next = None
        self.depth = depth
        self.haspred = False
        self.fid = fid
        self.cs = cs
        self.cmin = 0


_SUCC_CS = (NO_CHARS, True, True)
_FULL_CS = (NO_CHARS, False, True)
_PREFIX_CS = (NO_CHARS, True, True)


def _uses_text(action) -> bool:
    if action[0] == "var" or action[0] == "size":
        return action[1] == "text"
    if action[0] in ("bin", "cmp"):
        return _uses_text(action[2]) or _uses_text(action[3])
    return False


class Session:
    """One input, one memo store, one statistics record."""

    def __init__(self, grammar: Grammar, text: str, options: Optional[EngineOptions] = None,
                 stats: Optional[Statistics] = None) -> None:
        self.g = grammar
        self.text = text
        self.n = len(text)
        self.opts = options or EngineOptions()
        self.stats = stats if stats is not None else Statistics()
        self.store = MemoStore(self.stats, compact=self.opts.compact)
        self.limit = (self.opts.recursion_limit if self.opts.recursion_limit is not None
                      else 10 * self.n + 1000)
        self._fids: Dict[tuple, int] = {}
        self._text_actions: Dict[tuple, bool] = {}
        self.spans: Dict[int, Dict[int, int]] = {}
        self.span_conflicts: List[Tuple[int, int, int, int]] = []

    # continuation tables --------------------------------------------------

    def fid(self, f: Frame) -> int:
        if f.fid is not None:
            return f.fid
        chain = []
        g = f
        while g.fid is None:
            chain.append(g)
            g = g.next
        nxt = g.fid
        forget = self.g.pool.forget
        for g in reversed(chain):
            k = g.kind
            if k == F_SEQ:
                key = (F_SEQ, forget(g.x), nxt)
            elif k == F_LOOP:
                key = (F_LOOP, g.x, forget(g.y), nxt)
            elif k == F_ENTER:
                key = (F_ENTER, id(g), nxt)
            else:
                g.fid = nxt
                continue
            got = self._fids.get(key)
            if got is None:
                got = len(self._fids) + 3
                self._fids[key] = got
            g.fid = nxt = got
        return f.fid

    def cont_summary(self, f: Frame):
        """(chars, any, eof): the continuation can only succeed at s if input[s]
        is in chars, or s is the end and eof holds, or any holds."""
        if f.cs is not None:
            return f.cs
        chain = []
        g = f
        while g.cs is None:
            chain.append(g)
            g = g.next
        nxt = g.cs
        summary = self.g.summary
        for g in reversed(chain):
            k = g.kind
            if k == F_SEQ:
                t = summary[g.x]
                if t.nullable:
                    cs = (union_chars(t.chars, nxt[0]), t.early or nxt[1], nxt[2])
                else:
                    cs = (t.chars, t.early, False)
            elif k == F_LOOP:
                b = summary[g.y]
                cs = (union_chars(b.chars, nxt[0]), b.early or nxt[1], nxt[2])
            else:
                cs = nxt
            g.cs = nxt = cs
        return f.cs

    def cont_min(self, f: Frame) -> int:
        """Lower bound on the input the continuation must still consume."""
        if f.cmin is not None:
            return f.cmin
        chain = []
        g = f
        while g.cmin is None:
            chain.append(g)
            g = g.next
        nxt = g.cmin
        for g in reversed(chain):
            if g.kind == F_SEQ:
                if self.g.summary[g.x].early:
                    nxt = 0
                else:
                    nxt = self.g.minsize[g.x] + nxt
            g.cmin = nxt
        return f.cmin

    def live(self, x: int, cont: Frame, s: int) -> bool:
        sm = self.g.summary[x]
        if sm.early:
            return True
        if self.opts.fail_fast and self.g.minsize[x] + self.cont_min(cont) > self.n - s:
            return False
        if s < self.n:
            c = self.text[s]
            if c in sm.chars:
                return True
            if sm.nullable:
                cs = self.cont_summary(self._after(x, cont))
                return cs[1] or c in cs[0]
            return False
        if sm.nullable:
            cs = self.cont_summary(self._after(x, cont))
            return cs[1] or cs[2]
        return False

    def _after(self, x: int, cont: Frame) -> Frame:
        # a Stop directly under its loop frame always leaves the loop
        node = self.g.pool.nodes[x]
        if node[0] == X.STOP and cont.kind == F_LOOP and node[1] & cont.x:
            return cont.next
        return cont

    # helpers ----------------------------------------------------------------

    def _action(self, action, clo: Closure, s: int):
        uses = self._text_actions.get(action)
        if uses is None:
            uses = self._text_actions[action] = _uses_text(action)
        return eval_action(action, clo, self.text[clo.start:s] if uses else None)

    def _record_span(self, e: int, start: int, end: int) -> None:
        if not self.opts.validate_structured:
            return
        e = self.g.pool.forget(e)
        table = self.spans.setdefault(e, {})
        old = table.get(start)
        if old is None:
            table[start] = end
        elif old != end:
            self.span_conflicts.append((e, start, old, end))

    def structured_warnings(self) -> List[str]:
        """Nested spans must form a laminar family in which a later-starting span
        that overlaps an earlier one ends strictly before it."""
        out = []
        show = self.g.pool.show
        for e, start, a, b in self.span_conflicts:
            out.append(f"nested {show(e)} at {start} ended at both {a} and {b}")
        for e, table in self.spans.items():
            spans = sorted(table.items())
            open_spans: List[Tuple[int, int]] = []
            for s2, e2 in spans:
                while open_spans and open_spans[-1][1] <= s2:
                    open_spans.pop()
                if open_spans:
                    s1, e1 = open_spans[-1]
                    if e1 <= e2:
                        out.append(f"nested {show(e)} spans [{s1},{e1}) and [{s2},{e2}) "
                                   "are not strictly nested")
                        continue
                open_spans.append((s2, e2))
        return out

    def _enter(self, inner: int, value) -> Optional[tuple]:
        sub = Session(self.g, value, EngineOptions(
            memo=self.opts.memo, compact=self.opts.compact, full_match=True,
            fail_fast=self.opts.fail_fast, trace=self.opts.trace,
            trace_file=self.opts.trace_file))
        r = sub.execute(inner, Closure(), top_rule=None)
        self.stats.add(sub.stats)
        return r

    # the machine ------------------------------------------------------------

    def execute(self, e: int, clo: Closure, top_rule: Optional[str] = None, s: int = 0):
        """Match ``e`` at ``s`` to the end of the session; returns (end, stops, closure,
        value) of the first success or None."""
        g = self.g
        pool = g.pool
        nodes = pool.nodes
        forget = pool.forget
        nested_inner = pool.nested_inner
        haspred = g.haspred
        rules = g.rules
        fbody = g.fbody
        value_rule = g.value_rule
        text = self.text
        n = self.n
        store = self.store
        stats = self.stats
        memo = self.opts.memo
        trace = self.opts.trace
        tfile = self.opts.trace_file or sys.stderr
        limit = self.limit
        live = self.live
        fid = self.fid

        accept = _Terminal(F_ACCEPT, 1 if self.opts.full_match else 2,
                           _FULL_CS if self.opts.full_match else _PREFIX_CS)
        full = self.opts.full_match
        cont: Frame = accept
        stops = 0
        ret = NOVALUE
        look = False
        if top_rule is not None:
            cont = Frame(F_RET, top_rule, clo, False, cont)
            clo = Closure(start=s)
        rstack: list = [(H_TOP,)]
        nh = 0          # backtracking handlers on rstack (everything but memo records)
        calls = 0
        mode = M_EVAL

        try:
            while True:
                if mode == M_EVAL:
                    calls += 1
                    node = nodes[e]
                    tag = node[0]
                    if trace:
                        print(f"{s}\t{X.TAG_NAMES[tag]}\t{pool.show(e)}", file=tfile)
                    if tag == X.LIT:
                        lit = node[1]
                        if text.startswith(lit, s):
                            s += len(lit)
                            mode = M_CONT
                        else:
                            mode = M_FAIL
                    elif tag == X.SEQ:
                        cont = Frame(F_SEQ, node[2], None, None, cont, haspred[node[2]])
                        if cont.depth + nh > limit:
                            raise RecursionGuardError(f"recursion limit {limit} exceeded at {s}")
                        e = node[1]
                    elif tag == X.CHOICE:
                        key = None
                        if memo and not haspred[e] and not cont.haspred:
                            key = (forget(e), s, fid(cont), stops)
                            r = store.lookup(key, s)
                            if r is not None:
                                if r is FAILED:
                                    mode = M_FAIL
                                    continue
                                if look:
                                    s, stops = r
                                    mode = M_DONE
                                    continue
                                stats.recalculations += 1
                                key = None
                        # predication: skip alternatives that cannot start here
                        x = e
                        target = rest = None
                        while True:
                            xn = nodes[x]
                            if xn[0] != X.CHOICE:
                                if live(x, cont, s):
                                    target = x
                                break
                            if live(xn[1], cont, s):
                                target = xn[1]
                                r2 = xn[2]
                                while True:
                                    rn = nodes[r2]
                                    if rn[0] == X.CHOICE:
                                        if live(rn[1], cont, s):
                                            rest = r2
                                            break
                                        r2 = rn[2]
                                    else:
                                        if live(r2, cont, s):
                                            rest = r2
                                        break
                                break
                            x = xn[2]
                        if target is None:
                            if key is not None:
                                store.insert(key, s, FAILED)
                            mode = M_FAIL
                            continue
                        if key is not None:
                            rstack.append((H_MEMO, key, s))
                        if rest is not None:
                            rstack.append((H_CHOICE, rest, s, cont, stops, clo, ret, look))
                            nh += 1
                            store.on_choice(OPEN, s)
                            if cont.depth + nh > limit:
                                raise RecursionGuardError(f"recursion limit {limit} exceeded at {s}")
                        e = target
                    elif tag == X.RULE:
                        name = node[1]
                        if node[2]:
                            cont = Frame(F_RET, name, None, True, cont)
                            e = fbody[name]
                        else:
                            cont = Frame(F_RET, name, clo, False, cont)
                            clo = Closure(start=s)
                            ret = NOVALUE
                            e = rules[name]
                        if cont.depth + nh > limit:
                            raise RecursionGuardError(f"recursion limit {limit} exceeded at {s}")
                    elif tag == X.MANY:
                        if stops & node[1]:
                            stops &= ~node[1]
                            mode = M_CONT
                        else:
                            cont = Frame(F_LOOP, node[1], node[2], e, cont, haspred[node[2]])
                            e = node[2]
                    elif tag == X.STOP:
                        stops |= node[1]
                        mode = M_CONT
                    elif tag == X.CLASS:
                        if s < n and (text[s] in node[1]) != node[2]:
                            s += 1
                            mode = M_CONT
                        else:
                            mode = M_FAIL
                    elif tag == X.ANY:
                        if s < n:
                            s += 1
                            mode = M_CONT
                        else:
                            mode = M_FAIL
                    elif tag == X.EPS:
                        mode = M_CONT
                    elif tag == X.ACT:
                        ret = self._action(node[1], clo, s)
                        mode = M_CONT
                    elif tag == X.BIND:
                        cont = Frame(F_BIND, node[1], s, None, cont)
                        ret = NOVALUE
                        e = node[2]
                    elif tag == X.NESTED:
                        inner = nested_inner(e)
                        skey = vkey = None
                        if memo and not haspred[inner]:
                            skey = (forget(inner), s, 0, stops)
                            r = store.lookup(skey, s)
                            if r is FAILED:
                                mode = M_FAIL
                                continue
                            if r is not None:
                                if look:
                                    self._record_span(e, s, r[0])
                                    s, stops = r
                                    mode = M_CONT
                                    continue
                                vkey = (_VALUE_KEY, inner, s, stops, clo, ret)
                                v = store.lookup(vkey, s)
                                if v is not None:
                                    self._record_span(e, s, v[0])
                                    s, stops, clo, ret = v
                                    mode = M_CONT
                                    continue
                                stats.recalculations += 1
                                skey = None
                            elif not look:
                                vkey = (_VALUE_KEY, inner, s, stops, clo, ret)
                        rstack.append((H_NESTED, e, skey, vkey, s, cont, stops, clo, ret, look))
                        nh += 1
                        cont = _Terminal(F_SUCC, 0, _SUCC_CS, cont.depth + 1)
                        if cont.depth + nh > limit:
                            raise RecursionGuardError(f"recursion limit {limit} exceeded at {s}")
                        e = inner
                    elif tag == X.SWITCH:
                        head = node[1]
                        key = None
                        if not haspred[head]:
                            head = forget(head)
                            if memo:
                                key = (head, s, 0, stops)
                                r = store.lookup(key, s)
                                if r is not None:
                                    state = X.FAIL_STATE if r is FAILED else X.SUCCESS_STATE
                                    for st, t in node[2]:
                                        if st == state:
                                            e = t
                                    continue
                        rstack.append((H_SWITCH, e, key, s, cont, stops, clo, ret, look))
                        nh += 1
                        store.on_choice(OPEN, s)
                        cont = _Terminal(F_SUCC, 0, _SUCC_CS, cont.depth + 1)
                        if cont.depth + nh > limit:
                            raise RecursionGuardError(f"recursion limit {limit} exceeded at {s}")
                        look = True
                        e = head
                    elif tag == X.PRED:
                        mode = M_CONT if self._action(node[1], clo, s) else M_FAIL
                    elif tag == X.ENTER:
                        cont = Frame(F_ENTER, node[2], s, None, cont, True)
                        ret = NOVALUE
                        e = node[1]
                    elif tag == X.FOLD:
                        if node[2] is not None:
                            clo = clo.bind(node[2], ret)
                        else:
                            wrapped = ParseNode(node[1], clo.children(), clo.start, s, text)
                            clo = clo.replace_children((wrapped,))
                            ret = wrapped
                        mode = M_CONT
                    elif tag == X.SUCCESS:
                        while cont.kind != F_SUCC and cont.kind != F_ACCEPT:
                            cont = cont.next
                        mode = M_CONT
                    elif tag == X.FAIL:
                        mode = M_FAIL
                    else:
                        raise ValueError(f"unknown node {node!r}")

                elif mode == M_CONT:
                    f = cont
                    k = f.kind
                    if k == F_SEQ:
                        e = f.x
                        cont = f.next
                        mode = M_EVAL
                    elif k == F_LOOP:
                        if stops & f.x:
                            stops &= ~f.x
                            cont = f.next
                        else:
                            e = f.y
                            mode = M_EVAL
                    elif k == F_RET:
                        if not f.z:
                            name = f.x
                            if value_rule[name]:
                                v = ret
                            else:
                                v = ParseNode(name, clo.children(), clo.start, s, text)
                            clo = f.y.add_child(v)
                            ret = v
                        cont = f.next
                    elif k == F_BIND:
                        v = ret if ret is not NOVALUE else text[f.y:s]
                        clo = clo.bind(f.x, v)
                        ret = v
                        cont = f.next
                    elif k == F_SUCC:
                        mode = M_DONE
                    elif k == F_ACCEPT:
                        mode = M_DONE if (not full or s == n) else M_FAIL
                    elif k == F_ENTER:
                        v = ret if ret is not NOVALUE else text[f.y:s]
                        if isinstance(v, ParseNode):
                            v = v.text
                        if not isinstance(v, str):
                            raise ActionError(f"enter needs a text value, got {v!r}")
                        r = self._enter(f.x, v)
                        if r is None:
                            mode = M_FAIL
                        else:
                            ret = r[3]
                            cont = f.next

                elif mode == M_FAIL:
                    h = rstack.pop()
                    k = h[0]
                    if k == H_MEMO:
                        store.insert(h[1], h[2], FAILED)
                    elif k == H_CHOICE:
                        nh -= 1
                        store.on_choice(DISCARD, h[2])
                        _, e, s, cont, stops, clo, ret, look = h
                        mode = M_EVAL
                    elif k == H_SWITCH:
                        nh -= 1
                        _, sw, key, s, cont, stops, clo, ret, look = h
                        store.on_choice(DISCARD, s)
                        if key is not None:
                            store.insert(key, s, FAILED)
                        for st, t in nodes[sw][2]:
                            if st == X.FAIL_STATE:
                                e = t
                        mode = M_EVAL
                    elif k == H_NESTED:
                        nh -= 1
                        if h[2] is not None:
                            store.insert(h[2], h[4], FAILED)
                    else:
                        return None

                else:  # M_DONE: the current scope succeeded
                    h = rstack.pop()
                    k = h[0]
                    if k == H_MEMO:
                        if memo:
                            store.insert(h[1], h[2], (s, stops), s)
                    elif k == H_CHOICE:
                        nh -= 1
                        store.on_choice(COMMIT, s)
                    elif k == H_SWITCH:
                        nh -= 1
                        _, sw, key, s0, cont, stops0, clo, ret, look = h
                        store.on_choice(COMMIT, s0)
                        if key is not None:
                            store.insert(key, s0, (s, stops), s0)
                        s, stops = s0, stops0
                        for st, t in nodes[sw][2]:
                            if st == X.SUCCESS_STATE:
                                e = t
                        mode = M_EVAL
                    elif k == H_NESTED:
                        nh -= 1
                        _, ne, skey, vkey, s0, cont, _stops0, _clo0, _ret0, look = h
                        if skey is not None:
                            store.insert(skey, s0, (s, stops), s)
                        if vkey is not None:
                            store.insert(vkey, s0, (s, stops, clo, ret), s)
                        self._record_span(ne, s0, s)
                        mode = M_CONT
                    else:
                        return (s, stops, clo, ret)
        finally:
            stats.match_calls += calls


# public entry points -----------------------------------------------------------

def run(grammar: Grammar, start: Optional[str] = None, text: str = "",
        options: Optional[EngineOptions] = None) -> ParseOutcome:
    """Match the start rule against ``text`` and report the outcome with statistics."""
    start = start or grammar.start
    if start not in grammar.rules:
        raise KeyError(f"no rule named {start!r}")
    session = Session(grammar, text, options)
    r = session.execute(grammar.rules[start], Closure(), top_rule=start)
    return _outcome(session, r)


def match_expr(grammar: Grammar, e: int, text: str,
               options: Optional[EngineOptions] = None) -> ParseOutcome:
    """Match a bare expression (no enclosing rule) against ``text``."""
    session = Session(grammar, text, options)
    r = session.execute(e, Closure())
    return _outcome(session, r)


def _outcome(session: Session, r) -> ParseOutcome:
    warnings = session.structured_warnings() if session.opts.validate_structured else []
    if r is None:
        return ParseOutcome(False, None, None, session.stats, warnings)
    return ParseOutcome(True, r[0], r[3], session.stats, warnings)
