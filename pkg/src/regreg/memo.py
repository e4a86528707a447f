"""Memo table with lazy compaction driven by a live-alternatives counter.

The matcher reports every backtrack point it opens and closes.  Whenever the
counter is zero at position ``p`` nothing can make the parse return to a
position before ``p``, so entries keyed there are dead.  They are not removed
right away: only when an insert finds the table full do we drop them, and the
table grows only if it is still more than half full afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Any, Dict, Hashable, Optional, Tuple

INITIAL_CAPACITY = 4096
GROWTH = 2

OPEN = "open"
COMMIT = "commit"
DISCARD = "discard"


@dataclass
class Statistics:
    match_calls: int = 0
    memo_hits: int = 0
    memo_misses: int = 0
    peak_memo_entries: int = 0
    compactions: int = 0
    recalculations: int = 0

    def as_dict(self) -> dict:
        return asdict(self)

    def add(self, other: "Statistics") -> None:
        self.match_calls += other.match_calls
        self.memo_hits += other.memo_hits
        self.memo_misses += other.memo_misses
        self.peak_memo_entries = max(self.peak_memo_entries, other.peak_memo_entries)
        self.compactions += other.compactions
        self.recalculations += other.recalculations


class MemoStore:
    """Keys are arbitrary hashables; each entry remembers the position it belongs to."""

    def __init__(self, stats: Optional[Statistics] = None, compact: bool = True,
                 capacity: int = INITIAL_CAPACITY) -> None:
        self.stats = stats if stats is not None else Statistics()
        self.compaction_enabled = compact
        self.capacity = capacity
        self.table: Dict[Hashable, Tuple[int, Any]] = {}
        self.alternatives = 0
        self.watermark = 0
        self.deletions = 0
        self.expansions = 0

    def __len__(self) -> int:
        return len(self.table)

    def observe(self, pos: int) -> None:
        if self.alternatives == 0 and pos > self.watermark:
            self.watermark = pos

    def lookup(self, key: Hashable, pos: int) -> Optional[Any]:
        self.observe(pos)
        got = self.table.get(key)
        if got is None:
            self.stats.memo_misses += 1
            return None
        self.stats.memo_hits += 1
        return got[1]

    def peek(self, key: Hashable) -> Optional[Any]:
        """Lookup without touching counters or the watermark."""
        got = self.table.get(key)
        return None if got is None else got[1]

    def insert(self, key: Hashable, pos: int, value: Any, current: Optional[int] = None) -> None:
        self.observe(pos if current is None else current)
        table = self.table
        if key not in table and len(table) >= self.capacity:
            if self.compaction_enabled:
                self.compact()
            if len(table) * 2 > self.capacity:
                self.capacity *= GROWTH
                self.expansions += 1
        table[key] = (pos, value)
        if len(table) > self.stats.peak_memo_entries:
            self.stats.peak_memo_entries = len(table)

    def compact(self) -> int:
        """Drop every entry left of the watermark; returns how many were removed."""
        mark = self.watermark
        if mark == 0:
            return 0
        dead = [k for k, (pos, _) in self.table.items() if pos < mark]
        for k in dead:
            del self.table[k]
        self.deletions += len(dead)
        self.stats.compactions += 1
        return len(dead)

    def on_choice(self, event: str, pos: Optional[int] = None) -> None:
        if event == OPEN:
            self.alternatives += 1
            return
        if event not in (COMMIT, DISCARD):
            raise ValueError(f"unknown choice event {event!r}")
        if self.alternatives <= 0:
            raise AssertionError("alternatives counter underflow")
        self.alternatives -= 1
        if pos is not None:
            self.observe(pos)
