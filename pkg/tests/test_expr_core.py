from hypothesis import given, settings, strategies as st

from regreg import expr as X
from regreg.actions import parse_action
from regreg.expr import Pool
from regreg.grammar import Grammar

INF = float("inf")

leaves = st.one_of(
    st.sampled_from(["a", "b", "ab", ""]).map(lambda s: ("lit", s)),
    st.just(("any",)),
    st.just(("eps",)),
    st.just(("act",)),
    st.just(("rule",)),
)

trees = st.recursive(
    leaves,
    lambda sub: st.one_of(
        st.tuples(st.just("seq"), sub, sub),
        st.tuples(st.just("choice"), sub, sub),
        st.tuples(st.just("star"), sub),
        st.tuples(st.just("not"), sub),
        st.tuples(st.just("nested"), sub, sub, sub),
        st.tuples(st.just("bind"), sub),
    ),
    max_leaves=12,
)


def build(pool, t, stops=None):
    """Build a tree deterministically; ``stops`` replays stop-bit allocation."""
    k = t[0]
    if k == "lit":
        return pool.lit(t[1])
    if k == "any":
        return pool.ANY
    if k == "eps":
        return pool.EPS
    if k == "act":
        return pool.act(parse_action("1"))
    if k == "rule":
        return pool.rule("R")
    if k == "seq":
        return pool.seq(build(pool, t[1], stops), build(pool, t[2], stops))
    if k == "choice":
        return pool.choice(build(pool, t[1], stops), build(pool, t[2], stops))
    if k == "star":
        body = build(pool, t[1], stops)
        bit = stops.pop(0) if stops else pool.new_stop()
        return pool.many(bit, pool.choice(body, pool.stop(bit)))
    if k == "not":
        return pool.not_ahead(build(pool, t[1], stops))
    if k == "nested":
        return pool.nested(*(build(pool, x, stops) for x in t[1:]))
    if k == "bind":
        return pool.bind("x", build(pool, t[1], stops))
    raise AssertionError(k)


def count_stars(t):
    if t[0] == "star":
        return 1 + count_stars(t[1])
    return sum(count_stars(x) for x in t[1:] if isinstance(x, tuple))


def reachable(pool, e):
    seen, todo = set(), [e]
    while todo:
        x = todo.pop()
        if x not in seen:
            seen.add(x)
            todo.extend(pool.children(x))
    return seen


def test_interning_gives_one_id_per_node():
    p = Pool()
    a = p.seq(p.lit("a"), p.lit("b"))
    b = p.seq(p.lit("a"), p.lit("b"))
    assert a == b
    assert p.lit("a") != p.lit("b")


def test_simplification_identities():
    p = Pool()
    a = p.lit("a")
    assert p.seq(p.EPS, a) == a
    assert p.seq(a, p.EPS) == a
    assert p.choice(p.FAIL, a) == a
    assert p.choice(a, p.FAIL) == a
    assert p.lit("") == p.EPS


def test_inert_switch_collapses_to_its_branch():
    p = Pool()
    a = p.lit("a")
    sw = p.switch(p.seq(p.lit("x"), p.SUCCESS), {X.SUCCESS_STATE: a, X.FAIL_STATE: a})
    assert sw == a


def test_switch_with_action_in_head_is_kept():
    p = Pool()
    a = p.lit("a")
    head = p.seq(p.pred(parse_action("1", predicate=True)), p.SUCCESS)
    sw = p.switch(head, {X.SUCCESS_STATE: a, X.FAIL_STATE: a})
    assert p[sw][0] == X.SWITCH


def test_stop_needs_tokens():
    p = Pool()
    try:
        p.stop(0)
    except ValueError:
        return
    raise AssertionError("empty stop set accepted")


def test_star_and_lazy_star_shapes():
    p = Pool()
    a = p.lit("a")
    s = p.star(a)
    tag, bit, body = p[s]
    assert tag == X.MANY
    assert p[body] == (X.CHOICE, a, p.stop(bit))
    tag, bit2, body2 = p[p.lazy_star(a)]
    assert bit2 != bit
    assert p[body2] == (X.CHOICE, p.stop(bit2), a)


def test_forget_erases_actions_and_bindings():
    p = Pool()
    e = p.seq(p.bind("x", p.lit("a")), p.act(parse_action("x")), p.rule("R"))
    f = p.forget(e)
    assert p.show(f) == "'a' R"
    tags = {p[x][0] for x in reachable(p, f)}
    assert not tags & {X.ACT, X.BIND}
    assert (X.RULE, "R", True) in {p[x] for x in reachable(p, f)}


def test_forget_keeps_predicates():
    p = Pool()
    pr = p.pred(parse_action("1", predicate=True))
    e = p.seq(pr, p.lit("a"))
    assert p.forget(e) == e


def test_show_resugars_operators():
    p = Pool()
    a, b = p.lit("a"), p.lit("b")
    assert p.show(p.star(p.choice(a, b))) == "('a' | 'b')*"
    assert p.show(p.not_ahead(a)) == "~'a'"
    assert p.show(p.ahead(a)) == "&'a'"
    assert p.show(p.ordered(a, b)) == "'a' / 'b'"
    assert p.show(p.nested(p.lit("("), a, p.lit(")"))) == "nested('(', 'a', ')')"


@settings(max_examples=150, deadline=None)
@given(trees)
def test_interning_is_deterministic(t):
    p = Pool()
    stops = [p.new_stop() for _ in range(count_stars(t))]
    e1 = build(p, t, list(stops))
    size = len(p)
    e2 = build(p, t, list(stops))
    assert e1 == e2
    assert len(p) == size


@settings(max_examples=150, deadline=None)
@given(trees)
def test_forget_is_idempotent_and_action_free(t):
    p = Pool()
    e = build(p, t)
    f = p.forget(e)
    assert p.forget(f) == f
    for x in reachable(p, f):
        assert p[x][0] not in (X.ACT, X.BIND, X.FOLD)
        if p[x][0] == X.RULE:
            assert p[x][2]


@settings(max_examples=100, deadline=None)
@given(trees)
def test_summaries_survive_forgetting(t):
    p = Pool()
    e = build(p, t)
    g = Grammar(p, {"R": p.lit("r"), "T": e}, "T")
    f = p.forget(e)
    assert g.summary[e].nullable == g.summary[f].nullable
    assert g.minsize[e] == g.minsize[f]


def test_minsize_and_nullable_of_simple_grammar():
    p = Pool()
    a = p.lit("ab")
    s = p.star(p.lit("c"))
    e = p.seq(a, s)
    g = Grammar(p, {"S": e, "F": p.FAIL}, "S")
    assert g.minsize[e] == 2
    assert not g.summary[e].nullable
    assert g.summary[s].nullable
    assert g.minsize[s] == 0
    assert g.minsize[p.FAIL] == INF


def test_value_rule_detection():
    p = Pool()
    tree = p.seq(p.lit("a"), p.rule("V"))
    value = p.seq(p.bind("x", p.lit("a")), p.act(parse_action("x")))
    g = Grammar(p, {"T": tree, "V": value}, "T")
    assert g.value_rule == {"T": False, "V": True}
