"""Sliding windows and partitioning on top of the single-partition engines.

Each (window id, partition key) pair owns an independent engine instance.
Window ids are derived arithmetically from the event time: window ``w``
covers ``[w * slide, w * slide + within)`` milliseconds, so an event at
time ``t`` falls into a contiguous run of ids. Windows close as soon as an
event at or past their end boundary arrives (the stream is time-ordered),
or when the stream ends.

Routing rules:

* An event that can play at least one pattern variable must carry every
  partition attribute (``MissingGroupAttribute`` otherwise) and is fed to
  all windows it falls into, creating engine instances on demand.
* Under contiguous semantics an event that matches nothing still severs
  any open chain in its own partition. Such events are routed to already
  existing instances only - they cannot start anything, and an instance
  created later only sees events after the gap anyway. If the partition
  key cannot be extracted the event is dropped.
* Everything else that matches nothing is ignored.

Rows for windows whose trend count is zero are suppressed unless
``emit_empty`` is set; windows that never saw a matching event produce no
row either way.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engines import Engine
from .errors import MissingGroupAttribute
from .query import Query, RoleProbe, Semantics


@dataclass(frozen=True)
class WindowSpec:
    within_ms: int
    slide_ms: int

    def start_of(self, wid: int) -> int:
        return wid * self.slide_ms

    def end_of(self, wid: int) -> int:
        return wid * self.slide_ms + self.within_ms


def windows_of(time_ms: int, spec: WindowSpec) -> range:
    """Ids of every window containing ``time_ms``, in increasing order."""
    lo = max(0, (time_ms - spec.within_ms) // spec.slide_ms + 1)
    hi = time_ms // spec.slide_ms
    return range(lo, hi + 1)


@dataclass(frozen=True)
class ResultRow:
    wid: int
    window_start_ms: int
    window_end_ms: int
    key: tuple
    values: dict = field(compare=False)


class WindowManager:
    """Routes a time-ordered stream into per-window, per-key engines."""

    def __init__(self, query: Query, plan=None, backend=None, emit_empty=False):
        self.query = query
        self.plan = plan
        self.backend = backend
        self.emit_empty = emit_empty
        self.spec = WindowSpec(query.within_ms, query.slide_ms)
        self._cont = query.semantics is Semantics.CONT
        self._partition_attrs = query.partition_attrs
        self._matchable = RoleProbe(query)
        self._instances = {}
        self._entry_counts = {}
        self._min_end = float("inf")
        self.events_ingested = 0
        self.rows_emitted = 0
        self.current_entries = 0
        self.peak_entries = 0

    def _key_of(self, event, required: bool):
        values = []
        for attr in self._partition_attrs:
            if attr not in event.attrs:
                if required:
                    raise MissingGroupAttribute(
                        f"event at {event.time}ms lacks partition "
                        f"attribute {attr!r}"
                    )
                return None
            values.append(event.attrs[attr])
        return tuple(values)

    def _touch(self, slot, engine):
        before = self._entry_counts.get(slot, 0)
        after = engine.entries()
        self._entry_counts[slot] = after
        self.current_entries += after - before
        if self.current_entries > self.peak_entries:
            self.peak_entries = self.current_entries

    def ingest(self, event):
        """Feed one event; returns rows for windows that just closed."""
        rows = self.close_expired(event.time)
        self.events_ingested += 1
        roles = self._matchable(event)
        wids = windows_of(event.time, self.spec)
        if roles:
            key = self._key_of(event, required=True)
            for wid in wids:
                slot = (wid, key)
                engine = self._instances.get(slot)
                if engine is None:
                    engine = Engine(
                        self.query, plan=self.plan, backend=self.backend
                    )
                    self._instances[slot] = engine
                    end = self.spec.end_of(wid)
                    if end < self._min_end:
                        self._min_end = end
                engine.step_with_roles(event, roles)
                self._touch(slot, engine)
        elif self._cont:
            key = self._key_of(event, required=False)
            if key is not None:
                for wid in wids:
                    slot = (wid, key)
                    engine = self._instances.get(slot)
                    if engine is not None:
                        engine.step_with_roles(event, roles)
                        self._touch(slot, engine)
        return rows

    def run(self, events):
        """Feed a whole stream and yield result rows as windows close."""
        for event in events:
            yield from self.ingest(event)
        yield from self.finish()

    def close_expired(self, now_ms: int):
        """Emit and drop every window that ended at or before ``now_ms``."""
        if now_ms < self._min_end:
            return []
        due = [
            slot for slot in self._instances
            if self.spec.end_of(slot[0]) <= now_ms
        ]
        rows = self._drain(due)
        self._min_end = min(
            (self.spec.end_of(slot[0]) for slot in self._instances),
            default=float("inf"),
        )
        return rows

    def finish(self):
        """Emit everything still open, in (window id, key) order."""
        return self._drain(list(self._instances))

    def _drain(self, slots):
        rows = []
        for slot in sorted(slots):
            engine = self._instances.pop(slot)
            self.current_entries -= self._entry_counts.pop(slot)
            row = self._emit(slot, engine)
            if row is not None:
                rows.append(row)
        return rows

    def _emit(self, slot, engine):
        wid, key = slot
        if engine.final_count == 0 and not self.emit_empty:
            return None
        self.rows_emitted += 1
        return ResultRow(
            wid=wid,
            window_start_ms=self.spec.start_of(wid),
            window_end_ms=self.spec.end_of(wid),
            key=key,
            values=engine.results(),
        )
