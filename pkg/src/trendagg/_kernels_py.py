"""Pure-Python engine kernels.

One kernel class per aggregation granularity. All three share the step
contract:

    step(time_ms, roles, attrs) -> list of (role, cell) | None

``roles`` are the pattern variables the event may play, already filtered by
local predicates; an empty tuple marks an event that cannot match (which
only the contiguous-semantics kernel cares about). Events must arrive in
non-decreasing time order.

Events with equal timestamps can never sit next to each other inside a
trend, so all events sharing a timestamp are evaluated against the state as
it stood before the first of them ("shadow" copies keep the pre-batch cell
of every variable already updated in the current batch).

The compiled twin in ``_kernels_c.pyx`` mirrors this module operation for
operation; keep them in lockstep.
"""

from __future__ import annotations

from .cells import absorb_event, combine, identity_cell
from .errors import MissingAttribute

BACKEND_NAME = "python"


def _cmp(op, a, b):
    if op == 0:
        return a < b
    if op == 1:
        return a <= b
    if op == 2:
        return a > b
    if op == 3:
        return a >= b
    if op == 4:
        return a == b
    return a != b


def _theta_ok(checks, prev_attrs, next_attrs):
    for prev_attr, op, next_attr in checks:
        try:
            a = prev_attrs[prev_attr]
            b = next_attrs[next_attr]
        except KeyError as exc:
            raise MissingAttribute(
                f"adjacency predicate needs attribute {exc.args[0]}, absent on event"
            ) from None
        if not _cmp(op, a, b):
            return False
    return True


class TypeKernel:
    """One cell per pattern variable; state size fixed by the pattern."""

    def __init__(self, plan):
        self.plan = plan
        self.cells = {r: identity_cell(plan.accs) for r in plan.roles}
        self._shadow = {}
        self._batch_time = -1
        self.pred_accesses = 0

    def step(self, time, roles, attrs):
        if time != self._batch_time:
            self._shadow.clear()
            self._batch_time = time
        plan = self.plan
        accs = plan.accs
        out = []
        for r in roles:
            pred = identity_cell(accs)
            for p in plan.preds[r]:
                prev = self._shadow.get(p)
                if prev is None:
                    prev = self.cells[p]
                pred = combine(pred, prev, accs)
                self.pred_accesses += 1
            cell = absorb_event(pred, r, attrs, r == plan.start, accs)
            if r not in self._shadow:
                self._shadow[r] = self.cells[r]
            self.cells[r] = combine(self.cells[r], cell, accs)
            out.append((r, cell))
        return out

    def final_cell(self):
        return self.cells[self.plan.end]

    def entries(self):
        return len(self.cells) + len(self._shadow)


class MixedKernel:
    """Cells per variable, except that events of variables constrained by
    an adjacency predicate are kept individually and rechecked against
    every future successor."""

    def __init__(self, plan):
        self.plan = plan
        self.type_cells = {
            r: identity_cell(plan.accs)
            for r in plan.roles
            if r not in plan.event_grained
        }
        self.events = []  # (time, role, attrs, cell) in arrival order
        self.final_acc = identity_cell(plan.accs)
        self._shadow = {}
        self._batch_time = -1
        self._watermark = 0
        self.pred_accesses = 0

    def step(self, time, roles, attrs):
        if time != self._batch_time:
            self._shadow.clear()
            self._batch_time = time
            self._watermark = len(self.events)
        plan = self.plan
        accs = plan.accs
        theta = plan.theta
        out = []
        for r in roles:
            preds = plan.preds[r]
            pred = identity_cell(accs)
            for p in preds:
                if p in self.type_cells:
                    prev = self._shadow.get(p)
                    if prev is None:
                        prev = self.type_cells[p]
                    pred = combine(pred, prev, accs)
                    self.pred_accesses += 1
            for i in range(self._watermark):
                stored_time, p, stored_attrs, stored_cell = self.events[i]
                if p not in preds:
                    continue
                self.pred_accesses += 1
                checks = theta.get((p, r))
                if checks is not None and not _theta_ok(checks, stored_attrs, attrs):
                    continue
                pred = combine(pred, stored_cell, accs)
            cell = absorb_event(pred, r, attrs, r == plan.start, accs)
            if r in self.type_cells:
                if r not in self._shadow:
                    self._shadow[r] = self.type_cells[r]
                self.type_cells[r] = combine(self.type_cells[r], cell, accs)
            else:
                self.events.append((time, r, attrs, cell))
                if r == plan.end:
                    self.final_acc = combine(self.final_acc, cell, accs)
            out.append((r, cell))
        return out

    def final_cell(self):
        if self.plan.end in self.type_cells:
            return self.type_cells[self.plan.end]
        return self.final_acc

    def entries(self):
        return len(self.type_cells) + len(self.events) + len(self._shadow)


class PatternKernel:
    """Only the last matched event and a running final cell.

    Used for skip-till-next-match and contiguous runs. An event that cannot
    match is ignored under skip-till-next-match; under contiguous semantics
    it invalidates every open trend by clearing the last-event slot (the
    final cell survives).
    """

    def __init__(self, plan):
        self.plan = plan
        self.last = None  # (time, role, attrs)
        self.last_cell = identity_cell(plan.accs)
        self.final_acc = identity_cell(plan.accs)
        self.pred_accesses = 0

    def step(self, time, roles, attrs):
        plan = self.plan
        accs = plan.accs
        if roles:
            r = roles[0]
            is_start = r == plan.start
            adjacent = False
            if self.last is not None:
                last_time, last_role, last_attrs = self.last
                if last_role in plan.preds[r] and last_time < time:
                    checks = plan.theta.get((last_role, r))
                    self.pred_accesses += 1
                    adjacent = checks is None or _theta_ok(checks, last_attrs, attrs)
            if is_start or adjacent:
                pred = self.last_cell if adjacent else identity_cell(accs)
                cell = absorb_event(pred, r, attrs, is_start, accs)
                if r == plan.end:
                    self.final_acc = combine(self.final_acc, cell, accs)
                self.last = (time, r, attrs)
                self.last_cell = cell
                return [(r, cell)]
        # not matched
        if plan.cont:
            self.last = None
            self.last_cell = identity_cell(accs)
        return None

    def final_cell(self):
        return self.final_acc

    def entries(self):
        return 2 + (1 if self.last is not None else 0)
