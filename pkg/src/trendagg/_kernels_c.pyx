# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled engine kernels.

Mirrors ``_kernels_py`` operation for operation - same state layout, same
arithmetic, same evaluation order - so both backends return bit-identical
results (including float accumulation order). Only the loop bookkeeping is
compiled; cell values stay Python objects because trend counts need
arbitrary precision.

Keep this file in lockstep with ``_kernels_py.py``.
"""

from .errors import MissingAttribute

BACKEND_NAME = "compiled"

# Accumulator codes, as in cells.py
cdef enum:
    ACC_COUNT = 0
    ACC_SUM = 1
    ACC_MIN = 2
    ACC_MAX = 3


cdef bint _cmp(int op, object a, object b) except -1:
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


cdef bint _theta_ok(tuple checks, dict prev_attrs, dict next_attrs) except -1:
    cdef tuple chk
    for item in checks:
        chk = <tuple> item
        try:
            a = prev_attrs[chk[0]]
            b = next_attrs[chk[2]]
        except KeyError as exc:
            raise MissingAttribute(
                f"adjacency predicate needs attribute {exc.args[0]}, absent on event"
            ) from None
        if not _cmp(<int> chk[1], a, b):
            return False
    return True


cdef list _identity(tuple accs):
    cdef list cell = [0]
    cdef int code
    for acc in accs:
        code = <int> (<tuple> acc)[0]
        cell.append(0 if code == ACC_COUNT or code == ACC_SUM else None)
    return cell


cdef list _combine(list a, list b, tuple accs):
    cdef list out = [a[0] + b[0]]
    cdef Py_ssize_t i = 1
    cdef int code
    for acc in accs:
        code = <int> (<tuple> acc)[0]
        x = a[i]
        y = b[i]
        if code == ACC_COUNT or code == ACC_SUM:
            out.append(x + y)
        elif x is None:
            out.append(y)
        elif y is None:
            out.append(x)
        elif code == ACC_MIN:
            out.append(x if x <= y else y)
        else:
            out.append(x if x >= y else y)
        i += 1
    return out


cdef list _absorb(list pred_cell, object variable, dict attrs, bint is_start, tuple accs):
    count = pred_cell[0] + 1 if is_start else pred_cell[0]
    cdef list cell = [count]
    cdef Py_ssize_t i = 1
    cdef int code
    cdef tuple acc
    for item in accs:
        acc = <tuple> item
        code = <int> acc[0]
        prev = pred_cell[i]
        if variable != acc[1]:
            cell.append(prev)
        elif code == ACC_COUNT:
            cell.append(prev + count)
        else:
            try:
                value = attrs[acc[2]]
            except KeyError:
                raise MissingAttribute(
                    f"aggregate needs {acc[1]}.{acc[2]}, absent on event"
                ) from None
            if code == ACC_SUM:
                cell.append(prev + value * count)
            elif count == 0:
                cell.append(prev)
            elif prev is None:
                cell.append(value)
            elif code == ACC_MIN:
                cell.append(prev if prev <= value else value)
            else:
                cell.append(prev if prev >= value else value)
        i += 1
    return cell


cdef class TypeKernel:
    """One cell per pattern variable; state size fixed by the pattern."""

    cdef public object plan
    cdef public dict cells
    cdef public dict _shadow
    cdef public long long _batch_time
    cdef public long long pred_accesses
    cdef tuple _accs
    cdef dict _preds
    cdef object _start
    cdef object _end

    def __init__(self, plan):
        self.plan = plan
        self._accs = tuple(plan.accs)
        self._preds = dict(plan.preds)
        self._start = plan.start
        self._end = plan.end
        self.cells = {r: _identity(self._accs) for r in plan.roles}
        self._shadow = {}
        self._batch_time = -1
        self.pred_accesses = 0

    def step(self, long long time, roles, dict attrs):
        cdef list out = []
        cdef list pred, cell
        cdef tuple accs = self._accs
        if time != self._batch_time:
            self._shadow.clear()
            self._batch_time = time
        for r in roles:
            pred = _identity(accs)
            for p in <tuple> self._preds[r]:
                prev = self._shadow.get(p)
                if prev is None:
                    prev = self.cells[p]
                pred = _combine(pred, <list> prev, accs)
                self.pred_accesses += 1
            cell = _absorb(pred, r, attrs, r == self._start, accs)
            if r not in self._shadow:
                self._shadow[r] = self.cells[r]
            self.cells[r] = _combine(<list> self.cells[r], cell, accs)
            out.append((r, cell))
        return out

    def final_cell(self):
        return self.cells[self._end]

    def entries(self):
        return len(self.cells) + len(self._shadow)


cdef class MixedKernel:
    """Cells per variable, except that events of variables constrained by
    an adjacency predicate are kept individually and rechecked against
    every future successor."""

    cdef public object plan
    cdef public dict type_cells
    cdef public list events
    cdef public list final_acc
    cdef public dict _shadow
    cdef public long long _batch_time
    cdef public Py_ssize_t _watermark
    cdef public long long pred_accesses
    cdef tuple _accs
    cdef dict _preds
    cdef dict _theta
    cdef object _start
    cdef object _end

    def __init__(self, plan):
        self.plan = plan
        self._accs = tuple(plan.accs)
        self._preds = dict(plan.preds)
        self._theta = dict(plan.theta)
        self._start = plan.start
        self._end = plan.end
        self.type_cells = {
            r: _identity(self._accs)
            for r in plan.roles
            if r not in plan.event_grained
        }
        self.events = []  # (time, role, attrs, cell) in arrival order
        self.final_acc = _identity(self._accs)
        self._shadow = {}
        self._batch_time = -1
        self._watermark = 0
        self.pred_accesses = 0

    def step(self, long long time, roles, dict attrs):
        cdef list out = []
        cdef list pred, cell
        cdef tuple accs = self._accs
        cdef tuple preds, stored
        cdef Py_ssize_t i
        if time != self._batch_time:
            self._shadow.clear()
            self._batch_time = time
            self._watermark = len(self.events)
        for r in roles:
            preds = <tuple> self._preds[r]
            pred = _identity(accs)
            for p in preds:
                if p in self.type_cells:
                    prev = self._shadow.get(p)
                    if prev is None:
                        prev = self.type_cells[p]
                    pred = _combine(pred, <list> prev, accs)
                    self.pred_accesses += 1
            for i in range(self._watermark):
                stored = <tuple> self.events[i]
                if stored[1] not in preds:
                    continue
                self.pred_accesses += 1
                checks = self._theta.get((stored[1], r))
                if checks is not None and not _theta_ok(
                    <tuple> checks, <dict> stored[2], attrs
                ):
                    continue
                pred = _combine(pred, <list> stored[3], accs)
            cell = _absorb(pred, r, attrs, r == self._start, accs)
            if r in self.type_cells:
                if r not in self._shadow:
                    self._shadow[r] = self.type_cells[r]
                self.type_cells[r] = _combine(<list> self.type_cells[r], cell, accs)
            else:
                self.events.append((time, r, attrs, cell))
                if r == self._end:
                    self.final_acc = _combine(self.final_acc, cell, accs)
            out.append((r, cell))
        return out

    def final_cell(self):
        if self._end in self.type_cells:
            return self.type_cells[self._end]
        return self.final_acc

    def entries(self):
        return len(self.type_cells) + len(self.events) + len(self._shadow)


cdef class PatternKernel:
    """Only the last matched event and a running final cell.

    Used for skip-till-next-match and contiguous runs. An event that cannot
    match is ignored under skip-till-next-match; under contiguous semantics
    it invalidates every open trend by clearing the last-event slot (the
    final cell survives).
    """

    cdef public object plan
    cdef public object last  # (time, role, attrs) | None
    cdef public list last_cell
    cdef public list final_acc
    cdef public long long pred_accesses
    cdef tuple _accs
    cdef dict _preds
    cdef dict _theta
    cdef object _start
    cdef object _end
    cdef bint _cont

    def __init__(self, plan):
        self.plan = plan
        self._accs = tuple(plan.accs)
        self._preds = dict(plan.preds)
        self._theta = dict(plan.theta)
        self._start = plan.start
        self._end = plan.end
        self._cont = plan.cont
        self.last = None
        self.last_cell = _identity(self._accs)
        self.final_acc = _identity(self._accs)
        self.pred_accesses = 0

    def step(self, long long time, roles, dict attrs):
        cdef tuple accs = self._accs
        cdef list pred, cell
        cdef bint is_start, adjacent
        cdef tuple last
        if roles:
            r = roles[0]
            is_start = r == self._start
            adjacent = False
            if self.last is not None:
                last = <tuple> self.last
                if last[1] in <tuple> self._preds[r] and <long long> last[0] < time:
                    checks = self._theta.get((last[1], r))
                    self.pred_accesses += 1
                    adjacent = checks is None or _theta_ok(
                        <tuple> checks, <dict> last[2], attrs
                    )
            if is_start or adjacent:
                pred = self.last_cell if adjacent else _identity(accs)
                cell = _absorb(pred, r, attrs, is_start, accs)
                if r == self._end:
                    self.final_acc = _combine(self.final_acc, cell, accs)
                self.last = (time, r, attrs)
                self.last_cell = cell
                return [(r, cell)]
        # not matched
        if self._cont:
            self.last = None
            self.last_cell = _identity(accs)
        return None

    def final_cell(self):
        return self.final_acc

    def entries(self):
        return 2 + (1 if self.last is not None else 0)
