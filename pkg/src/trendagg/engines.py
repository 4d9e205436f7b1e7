"""Engine facade: compiles a query into a kernel and tracks instrumentation.

An Engine owns one kernel instance - the incremental state for a single
(window, partition) pair - plus bookkeeping the tests and the benchmark
read: per-step result cells, peak state-entry count, and predecessor-access
totals.
"""

from __future__ import annotations

from collections import namedtuple

from . import kernels
from .cells import build_accumulators, finalize
from .errors import UnsupportedQuery
from .events import Event
from .query import (
    Granularity,
    GranularityPlan,
    Op,
    Query,
    RoleProbe,
    Semantics,
    classify_and_plan,
)

_OPCODE = {Op.LT: 0, Op.LE: 1, Op.GT: 2, Op.GE: 3, Op.EQ: 4, Op.NE: 5}

KernelPlan = namedtuple(
    "KernelPlan",
    "roles start end preds accs theta event_grained cont",
)


def build_kernel_plan(query: Query, plan: GranularityPlan) -> KernelPlan:
    template = query.template
    roles = tuple(sorted(template.types))
    preds = {r: tuple(sorted(template.pred_types[r])) for r in roles}
    theta = {}
    for p in query.adjacent_predicates:
        if p.prev_variable in template.pred_types.get(p.next_variable, ()):
            theta.setdefault((p.prev_variable, p.next_variable), []).append(
                (p.prev_attr, _OPCODE[p.op], p.next_attr)
            )
    accs, _ = build_accumulators(query.aggregates)
    return KernelPlan(
        roles=roles,
        start=template.start_type,
        end=template.end_type,
        preds=preds,
        accs=accs,
        theta={k: tuple(v) for k, v in theta.items()},
        event_grained=plan.event_grained,
        cont=query.semantics is Semantics.CONT,
    )


class Engine:
    """Incremental aggregation state for one (window, partition) pair."""

    def __init__(self, query: Query, plan: GranularityPlan | None = None, backend=None):
        self.query = query
        self.plan = plan if plan is not None else classify_and_plan(query)
        self.kplan = build_kernel_plan(query, self.plan)
        _, self._extractors = build_accumulators(query.aggregates)
        module = backend if hasattr(backend, "TypeKernel") else kernels.get_backend(backend)
        self.backend_name = kernels.backend_name(module)
        mode = self.plan.mode
        if mode is Granularity.TYPE:
            self.kernel = module.TypeKernel(self.kplan)
        elif mode is Granularity.MIXED:
            self.kernel = module.MixedKernel(self.kplan)
        else:
            sources = list(query.aliases.values())
            if len(set(sources)) != len(sources):
                raise UnsupportedQuery(
                    "single-match-state semantics cannot run a pattern that "
                    "binds one stream type to several variables"
                )
            self.kernel = module.PatternKernel(self.kplan)
        self.peak_entries = self.kernel.entries()
        self.matchable = RoleProbe(query)

    @property
    def mode(self) -> Granularity:
        return self.plan.mode

    def step(self, event: Event):
        """Feed one event; returns the cells created for it (or None)."""
        return self.step_with_roles(event, self.matchable(event))

    def step_with_roles(self, event: Event, roles):
        out = self.kernel.step(event.time, roles, event.attrs)
        entries = self.kernel.entries()
        if entries > self.peak_entries:
            self.peak_entries = entries
        return out

    def run(self, events):
        for event in events:
            self.step(event)
        return self

    def entries(self) -> int:
        return self.kernel.entries()

    def results(self) -> dict:
        """Aggregate values keyed by their RETURN-clause spelling."""
        return finalize(self.kernel.final_cell(), self.query.aggregates, self._extractors)

    # ---- trace accessors (used by tests and the oracle CLI) ----

    @property
    def final_count(self):
        return self.kernel.final_cell()[0]

    def role_count(self, role):
        """Current per-variable trend count (type-grained cells only)."""
        if self.mode is Granularity.TYPE:
            return self.kernel.cells[role][0]
        if self.mode is Granularity.MIXED:
            return self.kernel.type_cells[role][0]
        raise ValueError("pattern-grained state has no per-variable cells")

    @property
    def last_count(self):
        """Trend count of the last matched event (pattern-grained only)."""
        if self.mode is not Granularity.PATTERN:
            raise ValueError("only pattern-grained state tracks a last event")
        if self.kernel.last is None:
            return 0
        return self.kernel.last_cell[0]

    def stored_events(self):
        """(time, role, count) for retained events (mixed-grained only)."""
        if self.mode is not Granularity.MIXED:
            return []
        return [(t, r, cell[0]) for (t, r, _, cell) in self.kernel.events]


def build_engine(query: Query, backend=None, plan=None) -> Engine:
    return Engine(query, plan=plan, backend=backend)
