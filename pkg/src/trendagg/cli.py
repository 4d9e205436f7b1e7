"""Command line interface.

Subcommands:

    run     evaluate a query over a CSV stream with the incremental engine
    oracle  same, but by explicit trend enumeration (slow; for checking)
    bench   time the engine over a stream, optionally per kernel backend
    gen     write a synthetic public-transport stream

``run`` and ``oracle`` print the same CSV shape:

    wid,window_start_ms,window_end_ms,<partition attrs...>,<aggregates...>

one row per (window, partition key) that produced at least one trend
(``--emit-empty`` keeps the zero-trend rows of keys that did match events).
Everything diagnostic goes to stderr; stdout carries only rows.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys

from . import bench as bench_mod
from .errors import TrendAggError
from .events import (
    TRANSPORT_SCHEMA,
    Schema,
    generate_transport_stream,
    infer_schema,
    read_csv_stream,
    write_csv_stream,
)
from .oracle import DEFAULT_CAP, aggregate_trends, enumerate_trends
from .query import Query, Semantics, load_query, matchable_variables
from .windows import ResultRow, WindowManager, WindowSpec, windows_of


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def result_header(query: Query) -> list:
    return [
        "wid",
        "window_start_ms",
        "window_end_ms",
        *query.partition_attrs,
        *[str(spec) for spec in query.aggregates],
    ]


def write_rows(rows, query: Query, fh) -> int:
    writer = csv.writer(fh)
    writer.writerow(result_header(query))
    n = 0
    for row in rows:
        writer.writerow(
            [
                row.wid,
                row.window_start_ms,
                row.window_end_ms,
                *[_format_cell(v) for v in row.key],
                *[_format_cell(row.values[str(s)]) for s in query.aggregates],
            ]
        )
        n += 1
    return n


def _load(args):
    schema = Schema.from_json(args.schema) if args.schema else None
    events = list(read_csv_stream(args.input, schema=schema))
    if schema is None:
        schema = infer_schema(events)
    query = load_query(args.query, schema)
    if getattr(args, "semantics", None):
        query = dataclasses.replace(query, semantics=Semantics(args.semantics))
    return query, events


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def cmd_run(args) -> int:
    query, events = _load(args)
    manager = WindowManager(
        query, backend=args.backend, emit_empty=args.emit_empty
    )
    fh, owned = _open_out(args.output)
    try:
        n = write_rows(manager.run(events), query, fh)
    finally:
        if owned:
            fh.close()
    print(
        f"{manager.events_ingested} events -> {n} rows "
        f"(backend: {_resolved_backend_name(manager.backend)})",
        file=sys.stderr,
    )
    return 0


def _resolved_backend_name(backend) -> str:
    from . import kernels

    if hasattr(backend, "TypeKernel"):
        return kernels.backend_name(backend)
    return kernels.backend_name(kernels.get_backend(backend))


def oracle_rows(query: Query, events, cap: int = DEFAULT_CAP, emit_empty: bool = False):
    """Result rows computed by explicit enumeration, per window and key."""
    spec = WindowSpec(query.within_ms, query.slide_ms)
    cont = query.semantics is Semantics.CONT
    slots: dict = {}
    routed = []
    for event in events:
        if matchable_variables(query, event):
            key = _key_or_raise(query, event)
            for wid in windows_of(event.time, spec):
                slots.setdefault((wid, key), [])
            routed.append((event, key, True))
        elif cont:
            key = _key_or_none(query, event)
            if key is not None:
                routed.append((event, key, False))
    for event, key, _ in routed:
        for wid in windows_of(event.time, spec):
            slot = slots.get((wid, key))
            if slot is not None:
                slot.append(event)
    for (wid, key) in sorted(slots):
        trends = enumerate_trends(slots[(wid, key)], query, cap=cap)
        if not trends and not emit_empty:
            continue
        yield ResultRow(
            wid=wid,
            window_start_ms=spec.start_of(wid),
            window_end_ms=spec.end_of(wid),
            key=key,
            values=aggregate_trends(trends, query.aggregates),
        )


def _key_or_raise(query, event):
    from .errors import MissingGroupAttribute

    values = []
    for attr in query.partition_attrs:
        if attr not in event.attrs:
            raise MissingGroupAttribute(
                f"event at {event.time}ms lacks partition attribute {attr!r}"
            )
        values.append(event.attrs[attr])
    return tuple(values)


def _key_or_none(query, event):
    values = []
    for attr in query.partition_attrs:
        if attr not in event.attrs:
            return None
        values.append(event.attrs[attr])
    return tuple(values)


def cmd_oracle(args) -> int:
    query, events = _load(args)
    fh, owned = _open_out(args.output)
    try:
        n = write_rows(
            oracle_rows(query, events, args.oracle_cap, args.emit_empty),
            query,
            fh,
        )
    finally:
        if owned:
            fh.close()
    print(f"{len(events)} events -> {n} rows (oracle)", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    query, events = _load(args)
    if args.impl == "both":
        results = bench_mod.compare_backends(
            query, events, reps=args.reps, emit_empty=args.emit_empty
        )
        if len(results) < 2:
            print("compiled backend not available", file=sys.stderr)
    else:
        results = [
            bench_mod.run_benchmark(
                query,
                events,
                backend=args.impl,
                reps=args.reps,
                emit_empty=args.emit_empty,
            )
        ]
    print(bench_mod.format_results(results))
    return 0


def cmd_gen(args) -> int:
    events = list(
        generate_transport_stream(
            args.passengers, args.stations, args.duration, args.seed
        )
    )
    write_csv_stream(events, args.output)
    if args.schema_out:
        TRANSPORT_SCHEMA.to_json(args.schema_out)
    print(f"wrote {len(events)} events to {args.output}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trendagg",
        description="Aggregate event trends matched by Kleene patterns over sliding windows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def io_args(p, with_backend=False):
        p.add_argument("--query", required=True, help="query text file")
        p.add_argument("--input", required=True, help="input stream CSV")
        p.add_argument("--schema", help="schema JSON (inferred from the stream if omitted)")
        p.add_argument("--output", help="output CSV (default: stdout)")
        p.add_argument(
            "--emit-empty",
            action="store_true",
            help="keep zero-trend rows for keys that matched events",
        )
        p.add_argument(
            "--semantics",
            choices=("any", "next", "cont"),
            help="override the query's SEMANTICS clause",
        )
        if with_backend:
            p.add_argument(
                "--backend",
                choices=("auto", "python", "compiled"),
                default=None,
                help="kernel backend (default: auto, honoring TRENDAGG_KERNELS)",
            )

    p_run = sub.add_parser("run", help="evaluate a query with the incremental engine")
    io_args(p_run, with_backend=True)
    p_run.set_defaults(func=cmd_run)

    p_oracle = sub.add_parser(
        "oracle", help="evaluate a query by explicit trend enumeration (slow)"
    )
    io_args(p_oracle)
    p_oracle.add_argument(
        "--oracle-cap",
        type=int,
        default=DEFAULT_CAP,
        help=f"abort if a window exceeds this many trends (default {DEFAULT_CAP})",
    )
    p_oracle.set_defaults(func=cmd_oracle)

    p_bench = sub.add_parser("bench", help="time the engine over a stream")
    io_args(p_bench)
    p_bench.add_argument("--reps", type=int, default=3, help="timed passes to average")
    p_bench.add_argument(
        "--impl",
        choices=("auto", "python", "compiled", "both"),
        default="both",
        help="kernel backend(s) to time (default: both)",
    )
    p_bench.set_defaults(func=cmd_bench)

    p_gen = sub.add_parser("gen", help="write a synthetic public-transport stream")
    p_gen.add_argument("--output", required=True, help="output stream CSV")
    p_gen.add_argument("--passengers", type=int, default=100)
    p_gen.add_argument("--stations", type=int, default=10)
    p_gen.add_argument("--duration", type=int, default=3600, help="stream length in seconds")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--schema-out", help="also write the stream's schema JSON here")
    p_gen.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TrendAggError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:  # e.g. `trendagg run ... | head`
        return 0


if __name__ == "__main__":
    sys.exit(main())
