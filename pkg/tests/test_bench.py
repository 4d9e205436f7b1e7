"""Benchmark harness sanity: metrics, determinism, backend comparison."""

from trendagg import available_backends, compare_backends, run_benchmark
from trendagg.bench import format_results, run_pass
from trendagg.events import TRANSPORT_SCHEMA, generate_transport_stream
from trendagg.query import parse_query

QUERY = parse_query(
    "RETURN COUNT(*) PATTERN Trip T+ SEMANTICS any "
    "GROUP-BY passenger WITHIN 120 s",
    TRANSPORT_SCHEMA,
)


def _events(n_passengers=5, duration=600):
    return list(
        generate_transport_stream(
            passengers=n_passengers, stations=4, duration=duration, seed=11
        )
    )


def test_run_benchmark_fields():
    events = _events()
    result = run_benchmark(QUERY, events, reps=2)
    assert result.events == len(events) > 0
    assert result.reps == 2
    assert result.mean_elapsed_s > 0
    assert result.throughput_eps > 0
    assert result.mean_latency_ms > 0
    assert result.peak_entries > 0
    assert result.rows > 0
    assert result.backend in available_backends()


def test_rows_deterministic_across_reps_and_backends():
    events = _events()
    row_sets = []
    for name in sorted(available_backends()):
        first = list(run_pass(QUERY, events, backend=name))
        second = list(run_pass(QUERY, events, backend=name))
        assert first[1] == second[1]  # row counts
        assert first[0].peak_entries == second[0].peak_entries
        row_sets.append((first[1], first[0].peak_entries))
    assert len(set(row_sets)) == 1


def test_compare_backends_covers_all():
    results = compare_backends(QUERY, _events(), reps=1)
    assert [r.backend for r in results] == sorted(available_backends())
    assert len({r.rows for r in results}) == 1
    assert len({r.peak_entries for r in results}) == 1


def test_format_results_is_tabular():
    results = compare_backends(QUERY, _events(), reps=1)
    text = format_results(results)
    lines = text.splitlines()
    assert len(lines) == 1 + len(results)
    assert "backend" in lines[0] and "events/s" in lines[0]
    for line in lines[1:]:
        assert len(line.split()) == 9
