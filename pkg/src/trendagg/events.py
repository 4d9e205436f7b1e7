"""Event model: events, schemas, and ordered stream sources.

Timestamps are application time in integer milliseconds. CSV files carry
time in (possibly fractional) seconds; values that do not land on a whole
millisecond are rejected rather than rounded.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from .errors import MalformedRow, OutOfOrder

_KINDS = ("int", "float", "str")


@dataclass(frozen=True, slots=True)
class Event:
    time: int  # milliseconds, >= 0
    etype: str
    attrs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.time < 0:
            raise ValueError(f"negative event time {self.time}")
        if not self.etype:
            raise ValueError("empty event type")

    def attr(self, name):
        return self.attrs[name]


class Schema:
    """Attribute names and value kinds per event type.

    Kinds are 'int', 'float' or 'str'.
    """

    def __init__(self, types: dict[str, dict[str, str]]):
        for etype, attrs in types.items():
            for attr, kind in attrs.items():
                if kind not in _KINDS:
                    raise ValueError(f"unknown kind {kind!r} for {etype}.{attr}")
        self.types = {t: dict(a) for t, a in types.items()}

    def has_type(self, etype):
        return etype in self.types

    def attrs_for(self, etype):
        return self.types.get(etype, {})

    def kind_of(self, etype, attr) -> Optional[str]:
        return self.types.get(etype, {}).get(attr)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls(json.load(fh))

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.types, fh, indent=2, sort_keys=True)
            fh.write("\n")


class StreamSource:
    """Iterator of events with a checked non-decreasing time order."""

    def __init__(self, events: Iterable[Event], ordered: bool = True):
        self._events = events
        self.ordered = ordered

    def __iter__(self) -> Iterator[Event]:
        last = -1
        for n, ev in enumerate(self._events, start=1):
            if self.ordered and ev.time < last:
                raise OutOfOrder(n, last, ev.time)
            last = ev.time
            yield ev


def _parse_time_ms(cell, row_number):
    try:
        seconds = Fraction(cell)
    except (ValueError, ZeroDivisionError):
        raise MalformedRow(row_number, f"bad time value {cell!r}") from None
    ms = seconds * 1000
    if ms.denominator != 1:
        raise MalformedRow(row_number, f"time {cell!r} is not a whole millisecond")
    if ms < 0:
        raise MalformedRow(row_number, f"negative time {cell!r}")
    return int(ms)


def _coerce(cell, kind, row_number, attr):
    try:
        if kind == "int":
            return int(cell)
        if kind == "float":
            return float(cell)
        return cell
    except ValueError:
        raise MalformedRow(
            row_number, f"value {cell!r} for {attr} is not a valid {kind}"
        ) from None


def _infer(cell):
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_csv_stream(path, schema: Optional[Schema] = None) -> StreamSource:
    """Read an event stream from a CSV file.

    Two layouts are accepted, chosen by the header:
      * ``time,type`` - every following cell in a row is a ``key=value`` pair;
      * ``time,type,<attr>,...`` - typed columns, empty cell means absent.

    Value kinds come from ``schema`` when it covers the event type, otherwise
    they are inferred (int, then float, then string). Rows must be in
    non-decreasing time order.
    """

    def rows():
        last_ms = -1
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                return
            if len(header) < 2 or [h.strip().lower() for h in header[:2]] != ["time", "type"]:
                raise MalformedRow(1, "header must start with time,type")
            columns = [h.strip() for h in header[2:]]
            kv_mode = not columns
            for row_number, row in enumerate(reader, start=2):
                if not row:
                    continue
                if kv_mode:
                    if len(row) < 2:
                        raise MalformedRow(row_number, "need at least time and type")
                else:
                    if len(row) != len(header):
                        raise MalformedRow(
                            row_number,
                            f"expected {len(header)} columns, got {len(row)}",
                        )
                time_ms = _parse_time_ms(row[0].strip(), row_number)
                if time_ms < last_ms:
                    raise OutOfOrder(row_number, last_ms, time_ms)
                last_ms = time_ms
                etype = row[1].strip()
                if not etype:
                    raise MalformedRow(row_number, "empty event type")
                attrs = {}
                if kv_mode:
                    for cell in row[2:]:
                        cell = cell.strip()
                        if not cell:
                            continue
                        if "=" not in cell:
                            raise MalformedRow(row_number, f"expected key=value, got {cell!r}")
                        key, value = cell.split("=", 1)
                        kind = schema.kind_of(etype, key) if schema else None
                        attrs[key] = _coerce(value, kind, row_number, key) if kind else _infer(value)
                else:
                    for attr, cell in zip(columns, row[2:]):
                        cell = cell.strip()
                        if cell == "":
                            continue
                        kind = schema.kind_of(etype, attr) if schema else None
                        attrs[attr] = _coerce(cell, kind, row_number, attr) if kind else _infer(cell)
                yield Event(time=time_ms, etype=etype, attrs=attrs)

    # Materialize eagerly so malformed rows and ordering problems surface
    # with their row number at read time rather than mid-pipeline.
    return StreamSource(list(rows()))


def _format_seconds(ms: int) -> str:
    if ms % 1000 == 0:
        return str(ms // 1000)
    return f"{ms // 1000}.{ms % 1000:03d}"


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv_stream(events: Iterable[Event], path, schema: Optional[Schema] = None):
    """Write events as a typed-column CSV that read_csv_stream round-trips."""
    events = list(events)
    columns = sorted({a for ev in events for a in ev.attrs})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "type", *columns])
        for ev in events:
            row = [_format_seconds(ev.time), ev.etype]
            for attr in columns:
                row.append(_format_value(ev.attrs[attr]) if attr in ev.attrs else "")
            writer.writerow(row)


def infer_schema(events: Iterable[Event]) -> Schema:
    """Schema observed from events, widening kinds int -> float -> str."""
    rank = {"int": 0, "float": 1, "str": 2}
    types: dict[str, dict[str, str]] = {}
    for ev in events:
        attrs = types.setdefault(ev.etype, {})
        for name, value in ev.attrs.items():
            if isinstance(value, int):
                kind = "int"
            elif isinstance(value, float):
                kind = "float"
            else:
                kind = "str"
            if name not in attrs or rank[kind] > rank[attrs[name]]:
                attrs[name] = kind
    return Schema(types)


TRANSPORT_SCHEMA = Schema(
    {"Trip": {"passenger": "int", "station": "int", "wait": "float"}}
)


def generate_transport_stream(passengers, stations, duration, seed) -> StreamSource:
    """Synthetic public-transport workload.

    Each of ``passengers`` passengers takes one trip per ~30 seconds of
    ``duration`` (at least one), at a uniformly random time within the
    duration, boarding at a random station with a uniformly random waiting
    time. Deterministic for a fixed seed.
    """
    if passengers < 1 or stations < 1 or duration < 1:
        raise ValueError("passengers, stations and duration must all be >= 1")
    rng = random.Random(seed)
    legs = max(1, int(duration) // 30)
    records = []
    for passenger in range(passengers):
        for _ in range(legs):
            records.append(
                (
                    rng.randint(0, int(duration) * 1000),
                    passenger,
                    rng.randrange(stations),
                    round(rng.uniform(0.0, 30.0), 3),
                )
            )
    records.sort(key=lambda r: r[0])
    events = [
        Event(
            time=t,
            etype="Trip",
            attrs={"passenger": passenger, "station": station, "wait": wait},
        )
        for (t, passenger, station, wait) in records
    ]
    return StreamSource(events)
