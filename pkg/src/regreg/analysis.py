"""Static analysis: a regular over-approximation of each expression, queries on
it (emptiness, first characters, overlap), size bounds, left-recursion
detection and Paull-style rewriting."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from . import expr as X
from .expr import ExprId, Pool
from .grammar import Grammar

INF = math.inf


# character sets ------------------------------------------------------------------

@dataclass(frozen=True)
class CharSet:
    """A set of characters, or (negated) everything except ``chars``."""
    chars: FrozenSet[str] = frozenset()
    negated: bool = False

    def __contains__(self, c: str) -> bool:
        return (c in self.chars) != self.negated

    def is_empty(self) -> bool:
        return not self.negated and not self.chars

    def union(self, other: "CharSet") -> "CharSet":
        a, b = self, other
        if not a.negated and not b.negated:
            return CharSet(a.chars | b.chars)
        if a.negated and b.negated:
            return CharSet(a.chars & b.chars, True)
        if a.negated:
            a, b = b, a
        return CharSet(b.chars - a.chars, True)

    def intersect(self, other: "CharSet") -> "CharSet":
        a, b = self, other
        if not a.negated and not b.negated:
            return CharSet(a.chars & b.chars)
        if a.negated and b.negated:
            return CharSet(a.chars | b.chars, True)
        if a.negated:
            a, b = b, a
        return CharSet(a.chars - b.chars)

    def to_json(self) -> dict:
        return {"chars": sorted(self.chars), "negated": self.negated}

    def __str__(self) -> str:
        body = "".join(sorted(self.chars))
        if self.negated:
            return "." if not body else f"[^{body}]"
        return f"[{body}]"


ANY_CHAR = CharSet(frozenset(), True)
NO_CHAR = CharSet()


# automata -------------------------------------------------------------------------

class NFA:
    """Nondeterministic automaton with epsilon edges and a single accepting state.

    Edge labels are :class:`CharSet` values; ``None`` marks an epsilon edge.
    """

    def __init__(self) -> None:
        self.edges: List[List[Tuple[Optional[CharSet], int]]] = []
        self.start = self.new_state()
        self.accept = self.new_state()

    def new_state(self) -> int:
        self.edges.append([])
        return len(self.edges) - 1

    def add(self, p: int, label: Optional[CharSet], q: int) -> None:
        if label is not None and label.is_empty():
            return
        self.edges[p].append((label, q))

    def __len__(self) -> int:
        return len(self.edges)

    def closure(self, states: Iterable[int]) -> Set[int]:
        out = set(states)
        todo = list(out)
        while todo:
            p = todo.pop()
            for label, q in self.edges[p]:
                if label is None and q not in out:
                    out.add(q)
                    todo.append(q)
        return out

    def accepts(self, text: str) -> bool:
        cur = self.closure([self.start])
        for c in text:
            nxt = set()
            for p in cur:
                for label, q in self.edges[p]:
                    if label is not None and c in label:
                        nxt.add(q)
            if not nxt:
                return False
            cur = self.closure(nxt)
        return self.accept in cur

    def _coreachable(self) -> Set[int]:
        back: List[List[int]] = [[] for _ in self.edges]
        for p, es in enumerate(self.edges):
            for _, q in es:
                back[q].append(p)
        seen = {self.accept}
        todo = [self.accept]
        while todo:
            q = todo.pop()
            for p in back[q]:
                if p not in seen:
                    seen.add(p)
                    todo.append(p)
        return seen

    def is_empty(self) -> bool:
        return self.start not in self._coreachable()

    def nullable(self) -> bool:
        return self.accept in self.closure([self.start])

    def first_chars(self) -> CharSet:
        useful = self._coreachable()
        out = NO_CHAR
        for p in self.closure([self.start]):
            for label, q in self.edges[p]:
                if label is not None and q in useful:
                    out = out.union(label)
        return out

    def copy_into(self, other: "NFA", p: int, q: int) -> None:
        """Embed this automaton into ``other`` between states p and q."""
        base = len(other.edges)
        for _ in self.edges:
            other.new_state()
        for s, es in enumerate(self.edges):
            for label, t in es:
                other.edges[base + s].append((label, base + t))
        other.add(p, None, base + self.start)
        other.add(base + self.accept, None, q)

    def prefix_closed(self) -> "NFA":
        out = NFA()
        self.copy_into(out, out.start, out.accept)
        shift = 2
        for s in self._coreachable():
            out.add(shift + s, None, out.accept)
        return out

    def concat_any(self) -> "NFA":
        """This language followed by any string."""
        out = NFA()
        mid = out.new_state()
        self.copy_into(out, out.start, mid)
        out.add(mid, ANY_CHAR, mid)
        out.add(mid, None, out.accept)
        return out

    def intersect(self, other: "NFA") -> "NFA":
        """Product construction, exploring only reachable pairs."""
        out = NFA()
        index: Dict[Tuple[int, int], int] = {}

        def state(pair):
            got = index.get(pair)
            if got is None:
                got = index[pair] = out.new_state()
                todo.append(pair)
            return got

        todo: List[Tuple[int, int]] = []
        first = state((self.start, other.start))
        out.add(out.start, None, first)
        while todo:
            a, b = pair = todo.pop()
            here = index[pair]
            if a == self.accept and b == other.accept:
                out.add(here, None, out.accept)
            for la, qa in self.edges[a]:
                if la is None:
                    out.add(here, None, state((qa, b)))
            for lb, qb in other.edges[b]:
                if lb is None:
                    out.add(here, None, state((a, qb)))
            for la, qa in self.edges[a]:
                if la is None:
                    continue
                for lb, qb in other.edges[b]:
                    if lb is None:
                        continue
                    lab = la.intersect(lb)
                    if not lab.is_empty():
                        out.add(here, lab, state((qa, qb)))
        return out


# the regular approximation ---------------------------------------------------------

class _RegBuilder:
    def __init__(self, g: Grammar) -> None:
        self.g = g
        self.pool = g.pool

    def standalone(self, e: ExprId, opaque: FrozenSet[str]) -> NFA:
        nfa = NFA()
        self.build(nfa, e, nfa.start, nfa.accept, frozenset(), {}, opaque, nfa.accept)
        return nfa

    def _anything(self, nfa: NFA, p: int, q: int) -> None:
        m = nfa.new_state()
        nfa.add(p, None, m)
        nfa.add(m, ANY_CHAR, m)
        nfa.add(m, None, q)

    def _trivial(self, e: ExprId) -> bool:
        n = self.pool[e]
        if n[0] in (X.ACT, X.EPS, X.FOLD, X.PRED, X.STOP):
            return True
        if n[0] == X.SEQ:
            return self._trivial(n[1]) and self._trivial(n[2])
        return False

    def build(self, nfa: NFA, e: ExprId, p: int, q: int, tail: FrozenSet[str],
              active: Dict[str, int], opaque: FrozenSet[str], scope: int) -> None:
        pool = self.pool
        n = pool[e]
        tag = n[0]
        if tag == X.LIT:
            cur = p
            for i, c in enumerate(n[1]):
                nxt = q if i == len(n[1]) - 1 else nfa.new_state()
                nfa.add(cur, CharSet(frozenset(c)), nxt)
                cur = nxt
        elif tag == X.ANY:
            nfa.add(p, ANY_CHAR, q)
        elif tag == X.CLASS:
            nfa.add(p, CharSet(n[1], n[2]), q)
        elif tag in (X.EPS, X.ACT, X.PRED, X.FOLD, X.STOP):
            nfa.add(p, None, q)
        elif tag == X.FAIL:
            pass
        elif tag == X.SUCCESS:
            nfa.add(p, None, scope)
        elif tag == X.SEQ:
            head = pool[n[1]]
            if head[0] == X.SWITCH and self._positive_lookahead(head):
                self._lookahead_seq(nfa, head, n[2], p, q, active, opaque)
                return
            mid = nfa.new_state()
            self.build(nfa, n[1], p, mid, tail if self._trivial(n[2]) else frozenset(),
                       active, opaque, scope)
            self.build(nfa, n[2], mid, q, tail, active, opaque, scope)
        elif tag == X.CHOICE:
            self.build(nfa, n[1], p, q, tail, active, opaque, scope)
            self.build(nfa, n[2], p, q, tail, active, opaque, scope)
        elif tag == X.SWITCH:
            for _, t in n[2]:
                self.build(nfa, t, p, q, tail, active, opaque, scope)
        elif tag == X.MANY:
            m = nfa.new_state()
            back = nfa.new_state()
            nfa.add(p, None, m)
            self.build(nfa, n[2], m, back, frozenset(), active, opaque, scope)
            nfa.add(back, None, m)
            nfa.add(m, None, q)
        elif tag == X.NESTED:
            a = nfa.new_state()
            b = nfa.new_state()
            self.build(nfa, n[1], p, a, frozenset(), active, opaque, q)
            self._anything(nfa, a, b)
            self.build(nfa, n[3], b, q, frozenset(), active, opaque, q)
        elif tag == X.RULE:
            name = n[1]
            body = self.g.rule_body_of(e)
            if body is None:
                return
            if name in active:
                if name in tail:
                    nfa.add(p, None, active[name])
                else:
                    self._anything(nfa, p, q)
            elif name in opaque:
                self._anything(nfa, p, q)
            else:
                rs = nfa.new_state()
                nfa.add(p, None, rs)
                inner = dict(active)
                inner[name] = rs
                self.build(nfa, body, rs, q, tail | {name}, inner, opaque, scope)
        elif tag == X.BIND:
            self.build(nfa, n[2], p, q, tail, active, opaque, scope)
        elif tag == X.ENTER:
            self.build(nfa, n[1], p, q, frozenset(), active, opaque, scope)
        else:
            raise ValueError(f"unknown node {n!r}")

    def _positive_lookahead(self, sw: tuple) -> bool:
        alts = dict(sw[2])
        head = self.pool[sw[1]]
        return (alts.get(X.SUCCESS_STATE) == self.pool.EPS and alts.get(X.FAIL_STATE) == self.pool.FAIL
                and head[0] == X.SEQ and head[2] == self.pool.SUCCESS)

    def _lookahead_seq(self, nfa, sw, rest, p, q, active, opaque) -> None:
        # what follows must be a prefix of, or extend, something the lookahead accepts
        hidden = opaque | frozenset(active)
        look = self.standalone(self.pool[sw[1]][1], hidden)
        body = self.standalone(rest, hidden)
        body.intersect(look.concat_any().prefix_closed()).copy_into(nfa, p, q)


def reg(g: Grammar, e: ExprId) -> NFA:
    """Regular over-approximation: if ``e`` accepts s then reg(g, e) accepts s."""
    return _RegBuilder(g).standalone(e, frozenset())


def empty(g: Grammar, e: ExprId) -> bool:
    """True iff the approximation of ``e`` contains the empty string."""
    return reg(g, e).nullable()


@dataclass(frozen=True)
class FirstChars:
    chars: CharSet
    empty: bool


def first_chars(g: Grammar, e: ExprId) -> FirstChars:
    nfa = reg(g, e)
    return FirstChars(nfa.first_chars(), nfa.nullable())


def overlap(g: Grammar, e1: ExprId, e2: ExprId) -> bool:
    """False means no string starts with a match of both; the choice order is then irrelevant."""
    a = reg(g, e1).concat_any()
    b = reg(g, e2).concat_any()
    return not a.intersect(b).is_empty()


# size bounds -------------------------------------------------------------------------

@dataclass(frozen=True)
class SizeBounds:
    minsize: float     # INF when nothing can match
    maxsize: float     # INF when unbounded


def size_bounds(g: Grammar, e: ExprId) -> SizeBounds:
    return SizeBounds(g.minsize[e], _MaxSize(g).of(e))


class _MaxSize:
    def __init__(self, g: Grammar) -> None:
        self.g = g
        self.done: Dict[str, float] = {}
        self.on_stack: Set[str] = set()

    def of(self, e: ExprId) -> float:
        pool = self.g.pool
        n = pool[e]
        tag = n[0]
        if tag == X.LIT:
            return len(n[1])
        if tag in (X.ANY, X.CLASS):
            return 1
        if tag == X.SEQ:
            if self.g.minsize[n[1]] == INF or self.g.minsize[n[2]] == INF:
                return 0
            return self.of(n[1]) + self.of(n[2])
        if tag == X.CHOICE:
            return max(self.of(n[1]), self.of(n[2]))
        if tag == X.SWITCH:
            return max(self.of(t) for _, t in n[2])
        if tag == X.MANY:
            return 0 if self.of(n[2]) == 0 else INF
        if tag == X.NESTED:
            return self.of(n[1]) + self.of(n[2]) + self.of(n[3])
        if tag == X.RULE:
            name = n[1]
            if name in self.done:
                return self.done[name]
            if name in self.on_stack:
                return INF
            body = self.g.rule_body_of(e)
            if body is None:
                return 0
            self.on_stack.add(name)
            v = self.of(body)
            self.on_stack.discard(name)
            self.done[name] = v
            return v
        if tag == X.BIND:
            return self.of(n[2])
        if tag == X.ENTER:
            return self.of(n[1])
        return 0


def continuation_min_bound(g: Grammar, e: ExprId, chain: Sequence[ExprId] = ()) -> float:
    """Input that any derivation of ``e`` followed by ``chain`` must still consume."""
    total = 0
    for x in (e, *chain):
        if g.summary[x].early:
            return total
        total += g.minsize[x]
    return total


# left recursion -------------------------------------------------------------------------

@dataclass
class LeftRecInfo:
    direct: bool = False
    cycle: List[str] = field(default_factory=list)
    paradox: bool = False

    def to_json(self) -> dict:
        return {"direct": self.direct, "cycle": list(self.cycle), "paradox": self.paradox}


def leftmost_calls(g: Grammar, e: ExprId) -> Set[Tuple[str, bool]]:
    """Rules callable before any input is consumed, each with a flag telling
    whether the call sits inside a lookahead."""
    pool = g.pool
    out: Set[Tuple[str, bool]] = set()
    seen: Set[Tuple[ExprId, bool]] = set()

    def nullable(x):
        sm = g.summary[x]
        return sm.nullable or sm.early

    todo = [(e, False)]
    while todo:
        x, la = todo.pop()
        if (x, la) in seen:
            continue
        seen.add((x, la))
        n = pool[x]
        tag = n[0]
        if tag == X.RULE:
            out.add((n[1], la))
        elif tag == X.SEQ:
            todo.append((n[1], la))
            if nullable(n[1]):
                todo.append((n[2], la))
        elif tag == X.CHOICE:
            todo.append((n[1], la))
            todo.append((n[2], la))
        elif tag == X.SWITCH:
            todo.append((n[1], True))
            for _, t in n[2]:
                todo.append((t, la))
        elif tag == X.MANY:
            todo.append((n[2], la))
        elif tag == X.NESTED:
            todo.append((n[1], la))
            if nullable(n[1]):
                todo.append((n[2], la))
                if nullable(n[2]):
                    todo.append((n[3], la))
        elif tag == X.BIND:
            todo.append((n[2], la))
        elif tag == X.ENTER:
            todo.append((n[1], la))
    return out


def detect_left_recursion(g: Grammar) -> Dict[str, LeftRecInfo]:
    calls = {r: leftmost_calls(g, b) for r, b in g.rules.items()}
    graph = {r: {c for c, _ in cs if c in g.rules} for r, cs in calls.items()}
    la_edges = [(r, c) for r, cs in calls.items() for c, la in cs if la and c in g.rules]
    reach = {r: _reachable(graph, r) for r in g.rules}
    report = {}
    for r in g.order:
        info = LeftRecInfo()
        info.direct = r in graph[r]
        if not info.direct and r in reach[r]:
            info.cycle = _shortest_cycle(graph, r)
        info.paradox = any((u == r or u in reach[r]) and (v == r or r in reach[v])
                           for u, v in la_edges)
        report[r] = info
    return report


def _reachable(graph: Dict[str, Set[str]], src: str) -> Set[str]:
    seen: Set[str] = set()
    todo = list(graph.get(src, ()))
    while todo:
        r = todo.pop()
        if r not in seen:
            seen.add(r)
            todo.extend(graph.get(r, ()))
    return seen


def _shortest_cycle(graph: Dict[str, Set[str]], src: str) -> List[str]:
    prev: Dict[str, str] = {}
    q = deque()
    for c in sorted(graph[src]):
        if c not in prev:
            prev[c] = src
            q.append(c)
    while q:
        r = q.popleft()
        if r == src:
            break
        for c in sorted(graph[r]):
            if c not in prev:
                prev[c] = r
                q.append(c)
    path = [src]
    cur = prev[src]
    while cur != src:
        path.append(cur)
        cur = prev[cur]
    return [src] + list(reversed(path[1:]))


def lookahead_rules(g: Grammar, name: str) -> List[Set[str]]:
    """For each lookahead head in ``name``'s body, the rules it can reach."""
    pool = g.pool
    graph = {}
    for r, body in g.rules.items():
        graph[r] = {pool[x][1] for x in _local(pool, body) if pool[x][0] == X.RULE
                    and pool[x][1] in g.rules}
    out = []
    for x in _local(pool, g.rules[name]):
        if pool[x][0] != X.SWITCH:
            continue
        direct = {pool[y][1] for y in _local(pool, pool[x][1]) if pool[y][0] == X.RULE
                  and pool[y][1] in g.rules}
        reached = set(direct)
        for r in direct:
            reached |= _reachable(graph, r)
        out.append(reached)
    return out


def _local(pool: Pool, e: ExprId):
    seen = set()
    todo = [e]
    while todo:
        x = todo.pop()
        if x in seen:
            continue
        seen.add(x)
        yield x
        todo.extend(pool.children(x))


# Paull rewriting ------------------------------------------------------------------------

class RewriteError(Exception):
    def __init__(self, problems: List[str]) -> None:
        self.problems = problems
        super().__init__("; ".join(problems))


class _Rewriter:
    def __init__(self, g: Grammar) -> None:
        self.g = g
        self.pool = g.pool
        self._null: Dict[ExprId, bool] = {}

    def nullable(self, e: ExprId) -> bool:
        if e < self.g.size:
            sm = self.g.summary[e]
            return sm.nullable or sm.early
        got = self._null.get(e)
        if got is not None:
            return got
        n = self.pool[e]
        tag = n[0]
        if tag == X.SEQ:
            v = self.nullable(n[1]) and self.nullable(n[2])
        elif tag == X.CHOICE:
            v = self.nullable(n[1]) or self.nullable(n[2])
        elif tag == X.SWITCH:
            v = any(self.nullable(t) for _, t in n[2])
        elif tag in (X.MANY, X.BIND):
            v = self.nullable(n[2])
        elif tag == X.NESTED:
            v = self.nullable(n[1]) and self.nullable(n[2]) and self.nullable(n[3])
        elif tag == X.ENTER:
            v = self.nullable(n[1])
        elif tag == X.RULE:
            body = self.g.rules.get(n[1])
            v = body is not None and self.nullable(body)
        else:
            v = tag in (X.EPS, X.ACT, X.PRED, X.FOLD, X.STOP, X.SUCCESS)
        self._null[e] = v
        return v

    def calls_leftmost(self, e: ExprId, name: str) -> bool:
        """Does ``e`` call ``name`` before consuming input, without going through other rules?"""
        pool = self.pool
        todo = [e]
        seen = set()
        while todo:
            x = todo.pop()
            if x in seen:
                continue
            seen.add(x)
            n = pool[x]
            tag = n[0]
            if tag == X.RULE:
                if n[1] == name:
                    return True
            elif tag == X.SEQ:
                todo.append(n[1])
                if self.nullable(n[1]):
                    todo.append(n[2])
            elif tag == X.CHOICE:
                todo.extend((n[1], n[2]))
            elif tag == X.SWITCH:
                todo.append(n[1])
                todo.extend(t for _, t in n[2])
            elif tag in (X.MANY, X.BIND):
                todo.append(n[2])
            elif tag == X.NESTED:
                todo.append(n[1])
                if self.nullable(n[1]):
                    todo.append(n[2])
            elif tag == X.ENTER:
                todo.append(n[1])
        return False

    def inline(self, e: ExprId, name: str, body: ExprId) -> ExprId:
        """Replace leftmost calls of ``name`` in ``e`` by ``body``."""
        if not self.calls_leftmost(e, name):
            return e
        pool = self.pool
        n = pool[e]
        tag = n[0]
        if tag == X.RULE:
            return body if n[1] == name else e
        if tag == X.SEQ:
            h = self.inline(n[1], name, body)
            t = self.inline(n[2], name, body) if self.nullable(n[1]) else n[2]
            return pool.seq(h, t)
        if tag == X.CHOICE:
            return pool.choice(self.inline(n[1], name, body), self.inline(n[2], name, body))
        if tag == X.BIND:
            return pool.bind(n[1], self.inline(n[2], name, body))
        if tag == X.MANY:
            return pool.many(n[1], self.inline(n[2], name, body))
        raise RewriteError([f"left recursion through {X.TAG_NAMES[tag]} reaching {name!r} "
                            "cannot be inlined"])

    def expand(self, e: ExprId, name: str) -> List[tuple]:
        """Split ``e`` into alternatives: ("lr", binding, rest) or ("base", expr)."""
        if not self.calls_leftmost(e, name):
            return [("base", e)]
        pool = self.pool
        n = pool[e]
        tag = n[0]
        if tag == X.CHOICE:
            return self.expand(n[1], name) + self.expand(n[2], name)
        if tag == X.RULE and n[1] == name and not n[2]:
            return [("lr", None, pool.EPS)]
        if tag == X.BIND and pool[n[2]][0] == X.RULE and pool[n[2]][1] == name:
            return [("lr", n[1], pool.EPS)]
        if tag == X.SEQ:
            if self.calls_leftmost(n[1], name):
                out = []
                for alt in self.expand(n[1], name):
                    if alt[0] == "lr":
                        out.append(("lr", alt[1], pool.seq(alt[2], n[2])))
                    else:
                        out.append(("base", pool.seq(alt[1], n[2])))
                return out
            raise RewriteError([f"left recursion on {name!r} behind a nullable prefix"])
        if tag == X.MANY:
            body = pool[n[2]]
            stop = pool.stop(n[1])
            # unroll one iteration: e* = e e* | ''
            if body[0] == X.CHOICE and body[2] == stop:
                return self.expand(pool.seq(body[1], e), name) + [("base", pool.EPS)]
            if body[0] == X.CHOICE and body[1] == stop:
                return [("base", pool.EPS)] + self.expand(pool.seq(body[2], e), name)
        raise RewriteError([f"left recursion on {name!r} through {X.TAG_NAMES[tag]} "
                            "cannot be rewritten"])

    def direct(self, name: str, body: ExprId) -> ExprId:
        pool = self.pool
        n = pool[body]
        if n[0] == X.NESTED and n[1] == pool.EPS and n[3] == pool.EPS:
            return pool.nested(pool.EPS, self.direct(name, n[2]), pool.EPS)
        alts = self.expand(body, name)
        if not any(a[0] == "lr" for a in alts):
            return body
        bases = [a[1] for a in alts if a[0] == "base"]
        if not bases:
            raise RewriteError([f"rule {name!r} has no alternative without left recursion"])
        value = self.g.value_rule.get(name, False)
        steps = []
        for a in alts:
            if a[0] != "lr":
                continue
            _, var, rest = a
            if rest == pool.EPS:
                continue        # L = L adds nothing
            if value:
                steps.append(pool.seq(pool.fold(name, var), rest) if var else rest)
            else:
                steps.append(pool.seq(pool.fold(name, None), rest))
        base = pool.choice(*bases)
        if not steps:
            return base
        return pool.seq(base, pool.star(pool.choice(*steps)))


def paull_rewrite(g: Grammar) -> Grammar:
    """Remove left recursion; grammars without any are returned as they are."""
    report = detect_left_recursion(g)
    lr = [r for r in g.order if report[r].direct or report[r].cycle]
    if not lr:
        return g
    bad = [r for r in lr if report[r].paradox]
    if bad:
        raise RewriteError([f"rule {r!r} is left recursive through a lookahead" for r in bad])
    rw = _Rewriter(g)
    rules = dict(g.rules)
    in_cycle = set(lr)
    order = [r for r in g.order if r in in_cycle]
    for i, ai in enumerate(order):
        for aj in order[:i]:
            rules[ai] = rw.inline(rules[ai], aj, rules[aj])
        rules[ai] = rw.direct(ai, rules[ai])
    out = Grammar(g.pool, rules, g.start, g.order)
    again = detect_left_recursion(out)
    left = [r for r in out.order if again[r].direct or again[r].cycle]
    if left:
        raise RewriteError([f"rule {r!r} is still left recursive after rewriting" for r in left])
    return out


# report ------------------------------------------------------------------------------------

def top_alternatives(g: Grammar, e: ExprId) -> List[ExprId]:
    pool = g.pool
    n = pool[e]
    if n[0] == X.NESTED and n[1] == pool.EPS and n[3] == pool.EPS:
        e = n[2]
    out = []
    while pool[e][0] == X.CHOICE:
        out.append(pool[e][1])
        e = pool[e][2]
    out.append(e)
    return out


def _num(v: float):
    return None if v == INF else int(v)


def analyze(g: Grammar) -> dict:
    """Per-rule report: nullability, first characters, size bounds, left recursion
    and pairwise overlap of the top-level alternatives."""
    report = detect_left_recursion(g)
    rules = {}
    for name in g.order:
        body = g.rules[name]
        nfa = reg(g, body)
        bounds = size_bounds(g, body)
        alts = top_alternatives(g, body)
        pairs = []
        for i in range(len(alts)):
            for j in range(i + 1, len(alts)):
                pairs.append({"alternatives": [i, j], "overlap": overlap(g, alts[i], alts[j])})
        rules[name] = {
            "nullable": nfa.nullable(),
            "first_chars": nfa.first_chars().to_json(),
            "minsize": _num(bounds.minsize),
            "maxsize": _num(bounds.maxsize),
            "left_recursion": report[name].to_json(),
            "overlaps": pairs,
        }
    return rules
