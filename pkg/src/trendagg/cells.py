"""Incremental aggregation cells.

A cell is a plain list: slot 0 holds the trend count (how many partial
trends end at the carrier of this cell), the remaining slots hold one
accumulator per requested aggregate. One cell carries every aggregate of a
query at once, so engines touch their predecessors a single time per event.

Counts are plain Python integers and therefore unbounded - under
skip-till-any-match they grow exponentially with window size and would
overflow any fixed width. Sums over integer attributes stay exact for the
same reason; float sums are accumulated in a fixed order so results are
reproducible bit for bit.

Accumulator update rules (``count`` is the carrier's trend count after the
start increment):

    count-of-variable: pred + count           when the event matches the target
    sum:               pred + value * count
    min/max:           lattice-merge of pred and value, but only when
                       count > 0 - an event on zero trends contributes to
                       no aggregate, and unlike the additive accumulators
                       min/max are not self-guarded by the * count factor.

AVG is never maintained incrementally; it is derived at read-out as
SUM/COUNT(variable) and is null when that count is zero.
"""

from __future__ import annotations

from .errors import MissingAttribute
from .query import AggKind, AggSpec

# Accumulator codes
ACC_COUNT = 0  # count of target-variable events, weighted by trend count
ACC_SUM = 1
ACC_MIN = 2
ACC_MAX = 3


def build_accumulators(specs):
    """Deduplicate specs into accumulator slots.

    Returns (accs, extractors): ``accs`` is a tuple of
    ``(code, variable, attr)`` describing cell slots 1..n; ``extractors``
    maps each original spec to how its value is read back -
    ``("star",)``, ``("acc", slot_index)`` or ``("avg", sum_slot, count_slot)``.
    """
    accs = []
    index = {}

    def slot(code, variable, attr=None):
        key = (code, variable, attr)
        if key not in index:
            index[key] = len(accs) + 1  # cell slot (0 is the trend count)
            accs.append(key)
        return index[key]

    extractors = []
    for spec in specs:
        if spec.kind is AggKind.COUNT_STAR:
            extractors.append(("star", 0, 0))
        elif spec.kind is AggKind.COUNT:
            extractors.append(("acc", slot(ACC_COUNT, spec.variable), 0))
        elif spec.kind is AggKind.SUM:
            extractors.append(("acc", slot(ACC_SUM, spec.variable, spec.attr), 0))
        elif spec.kind is AggKind.MIN:
            extractors.append(("acc", slot(ACC_MIN, spec.variable, spec.attr), 0))
        elif spec.kind is AggKind.MAX:
            extractors.append(("acc", slot(ACC_MAX, spec.variable, spec.attr), 0))
        elif spec.kind is AggKind.AVG:
            s = slot(ACC_SUM, spec.variable, spec.attr)
            c = slot(ACC_COUNT, spec.variable)
            extractors.append(("avg", s, c))
        else:  # pragma: no cover
            raise AssertionError(spec.kind)
    return tuple(accs), tuple(extractors)


def identity_cell(accs):
    cell = [0]
    for code, _, _ in accs:
        cell.append(0 if code in (ACC_COUNT, ACC_SUM) else None)
    return cell


def combine(a, b, accs):
    """Merge two cells: counts and sums add, min/max lattice-merge."""
    out = [a[0] + b[0]]
    for i, (code, _, _) in enumerate(accs, start=1):
        x, y = a[i], b[i]
        if code in (ACC_COUNT, ACC_SUM):
            out.append(x + y)
        elif x is None:
            out.append(y)
        elif y is None:
            out.append(x)
        elif code == ACC_MIN:
            out.append(x if x <= y else y)
        else:
            out.append(x if x >= y else y)
    return out


def combine_all(cells, accs):
    out = identity_cell(accs)
    for cell in cells:
        out = combine(out, cell, accs)
    return out


def absorb_event(pred_cell, variable, attrs, is_start, accs):
    """Cell for a fresh event given the merged cell of its predecessors.

    The event extends every partial trend counted in ``pred_cell`` and, when
    it is of the start variable, opens one more.
    """
    count = pred_cell[0] + 1 if is_start else pred_cell[0]
    cell = [count]
    for i, (code, target, attr) in enumerate(accs, start=1):
        prev = pred_cell[i]
        if variable != target:
            cell.append(prev)
            continue
        if code == ACC_COUNT:
            cell.append(prev + count)
            continue
        try:
            value = attrs[attr]
        except KeyError:
            raise MissingAttribute(
                f"aggregate needs {target}.{attr}, absent on event"
            ) from None
        if code == ACC_SUM:
            cell.append(prev + value * count)
        elif count == 0:
            # On zero trends this event contributes nothing; min/max must
            # not pick up its value.
            cell.append(prev)
        elif prev is None:
            cell.append(value)
        elif code == ACC_MIN:
            cell.append(prev if prev <= value else value)
        else:
            cell.append(prev if prev >= value else value)
    return cell


def finalize(cell, specs, extractors):
    """Read the requested aggregate values out of a final cell."""
    out = {}
    for spec, (how, a, b) in zip(specs, extractors):
        if how == "star":
            value = cell[0]
        elif how == "acc":
            value = cell[a]
        else:  # avg
            total, n = cell[a], cell[b]
            value = None if n == 0 else total / n
        out[str(spec)] = value
    return out
