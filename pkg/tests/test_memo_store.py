import pytest
from hypothesis import settings, strategies as st
from hypothesis.stateful import RuleBasedStateMachine, invariant, precondition, rule

from regreg.memo import COMMIT, DISCARD, OPEN, MemoStore, Statistics


def test_lookup_counts_hits_and_misses():
    stats = Statistics()
    m = MemoStore(stats)
    assert m.lookup("k", 0) is None
    m.insert("k", 0, "v")
    assert m.lookup("k", 0) == "v"
    assert (stats.memo_hits, stats.memo_misses, stats.peak_memo_entries) == (1, 1, 1)


def test_watermark_moves_only_without_live_alternatives():
    m = MemoStore()
    m.observe(5)
    assert m.watermark == 5
    m.on_choice(OPEN)
    m.observe(9)
    assert m.watermark == 5
    m.on_choice(COMMIT, 9)
    assert m.watermark == 9
    m.observe(3)
    assert m.watermark == 9


def test_underflow_is_an_error():
    m = MemoStore()
    with pytest.raises(AssertionError):
        m.on_choice(DISCARD)
    with pytest.raises(ValueError):
        m.on_choice("sideways")


def test_compaction_runs_when_full_and_drops_only_dead_entries():
    stats = Statistics()
    m = MemoStore(stats, capacity=4)
    for i in range(4):
        m.insert(i, i, i, current=0)
    m.observe(2)
    m.insert("new", 3, 0, current=2)
    assert stats.compactions == 1
    assert sorted(k for k in m.table if k != "new") == [2, 3]
    assert m.capacity == 4


def test_table_grows_when_still_half_full():
    m = MemoStore(capacity=4)
    for i in range(4):
        m.insert(i, 10, i)
    m.observe(1)
    m.insert("x", 10, 0)
    assert m.capacity == 8 and len(m) == 5 and m.expansions == 1


def test_compaction_can_be_disabled():
    stats = Statistics()
    m = MemoStore(stats, compact=False, capacity=2)
    m.observe(100)
    for i in range(10):
        m.insert(i, i, i)
    assert len(m) == 10 and stats.compactions == 0


class MemoMachine(RuleBasedStateMachine):
    """Random interleavings of the engine's calls; entries at or right of the
    watermark must survive and the counter must mirror the open alternatives."""

    def __init__(self):
        super().__init__()
        self.stats = Statistics()
        self.m = MemoStore(self.stats, capacity=4)
        self.pos = 0
        self.open = 0
        self.model = {}
        self.last_mark = 0

    @rule(step=st.integers(0, 3))
    def advance(self, step):
        self.pos += step
        self.m.observe(self.pos)

    @rule(key=st.integers(0, 30), back=st.integers(0, 3))
    def insert(self, key, back):
        pos = max(0, self.pos - back)
        self.m.insert(key, pos, (key, pos), current=self.pos)
        self.model[key] = (pos, (key, pos))

    @rule()
    def open_choice(self):
        self.m.on_choice(OPEN)
        self.open += 1

    @precondition(lambda self: self.open > 0)
    @rule(commit=st.booleans())
    def close_choice(self, commit):
        self.m.on_choice(COMMIT if commit else DISCARD, self.pos)
        self.open -= 1

    @rule(key=st.integers(0, 30))
    def lookup(self, key):
        got = self.m.peek(key)
        if got is not None:
            assert self.model[key][1] == got

    @invariant()
    def counter_matches(self):
        assert self.m.alternatives == self.open

    @invariant()
    def watermark_is_monotone_and_bounded(self):
        assert self.last_mark <= self.m.watermark <= self.pos
        self.last_mark = self.m.watermark

    @invariant()
    def live_entries_survive(self):
        for key, (pos, value) in self.model.items():
            if pos >= self.m.watermark:
                assert self.m.peek(key) == value

    @invariant()
    def peak_is_tracked(self):
        assert self.stats.peak_memo_entries >= len(self.m)


TestMemoMachine = MemoMachine.TestCase
TestMemoMachine.settings = settings(max_examples=150, stateful_step_count=60, deadline=None)
