"""Left-to-right edge sweep shared by several exact dynamic programs.

A sweep state holds the tasks crossing the current edge together with their
heights and a small per-task tag, plus one opaque ``extra`` value that a model
uses for global bookkeeping (a chosen pile, a segment baseline, ...).  Tasks
are decided exactly once, at their start edge, so the state summarises the
past completely and the sweep is exact over whatever the model allows.

Models subclass :class:`SweepModel`; the engine takes care of pairwise
disjointness and of capacities, so models only add their own restrictions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .core import Placement, RefusalError, SapInstance, Task

# (task id, height, tag)
Entry = tuple[str, int, Hashable]


class SweepModel:
    """Hooks for :func:`run_sweep`.  The defaults give plain SAP."""

    def initial(self) -> Hashable:
        return None

    def options(self, task: Task, edge: int, extra: Hashable) -> Iterable[tuple[int, Hashable]]:
        """Heights (with initial tag) allowed for ``task`` when it starts at ``edge``."""
        return ()

    def before_edge(self, edge: int, extra: Hashable,
                    active: tuple[Entry, ...]) -> Iterable[Hashable]:
        """Possible ``extra`` values on ``edge`` before tasks starting there are decided."""
        return (extra,)

    def at_edge(self, edge: int, extra: Hashable,
                active: tuple[Entry, ...]) -> Iterable[tuple[Hashable, tuple[Entry, ...], int]]:
        """Validate ``edge`` and yield ``(extra, active, bonus profit)`` continuations."""
        return ((extra, active, 0),)

    def may_leave(self, entry: Entry, extra: Hashable) -> bool:
        return True

    def accept(self, extra: Hashable) -> bool:
        return True


@dataclass
class SweepResult:
    profit: int
    placement: Placement
    extra: Hashable
    states: int
    trail: list = field(default_factory=list)  # every distinct ``extra`` along the best path


def _disjoint(instance: SapInstance, by_id, active: Sequence[Entry], edge: int) -> bool:
    cap = instance.capacities[edge]
    spans = []
    for tid, h, _ in active:
        top = h + by_id[tid].d
        if top > cap:
            return False
        spans.append((h, top))
    spans.sort()
    for (a0, a1), (b0, _) in zip(spans, spans[1:]):
        if b0 < a1:
            return False
    return True


def run_sweep(instance: SapInstance, tasks: Iterable[Task], model: SweepModel,
              max_states: int = 200_000) -> SweepResult:
    """Best placement of a subset of ``tasks`` admitted by ``model``.

    Ties are broken towards the first state reached, which makes the result
    deterministic given the iteration order of the model's hooks.
    """
    task_list = sorted(tasks, key=lambda t: (t.s, t.id))
    by_id = {t.id: t for t in task_list}
    starting: dict[int, list[Task]] = {}
    for t in task_list:
        starting.setdefault(t.s, []).append(t)

    # state -> (profit, chain) with chain a linked list of placements
    layer: dict[tuple, tuple[int, tuple | None]] = {(model.initial(), ()): (0, None)}
    total_states = 1
    for e in range(instance.m):
        # retire tasks ending at vertex e
        retired: dict[tuple, tuple[int, tuple | None]] = {}
        for (extra, active), val in layer.items():
            keep = []
            ok = True
            for entry in active:
                if by_id[entry[0]].t == e:
                    if not model.may_leave(entry, extra):
                        ok = False
                        break
                else:
                    keep.append(entry)
            if ok:
                for extra2 in model.before_edge(e, extra, tuple(keep)):
                    _offer(retired, (extra2, tuple(keep)), _note(val, extra, extra2))
        # decide tasks starting at e
        grown = retired
        for task in starting.get(e, ()):
            nxt: dict[tuple, tuple[int, tuple | None]] = {}
            for (extra, active), (p, chain) in grown.items():
                _offer(nxt, (extra, active), (p, chain))
                for h, tag in model.options(task, e, extra):
                    if h < 0 or h + task.d > instance.capacities[e]:
                        continue
                    # every active entry uses edge e, so overlaps can be pruned now
                    if any(h < h2 + by_id[t2].d and h2 < h + task.d for t2, h2, _ in active):
                        continue
                    new_active = tuple(sorted(active + ((task.id, h, tag),)))
                    _offer(nxt, (extra, new_active), (p + task.w, (chain, task.id, h)))
            grown = nxt
            if len(grown) > max_states:
                raise RefusalError(f"sweep exceeded {max_states} states at edge {e}")
        # validate edge e
        layer = {}
        for (extra, active), (p, chain) in grown.items():
            if not _disjoint(instance, by_id, active, e):
                continue
            for extra2, active2, bonus in model.at_edge(e, extra, active):
                p2, chain2 = _note((p, chain), extra, extra2)
                _offer(layer, (extra2, tuple(sorted(active2))), (p2 + bonus, chain2))
        total_states += len(layer)
        if len(layer) > max_states:
            raise RefusalError(f"sweep exceeded {max_states} states at edge {e}")

    best = None
    for (extra, active), (p, chain) in layer.items():
        if not all(model.may_leave(entry, extra) for entry in active):
            continue
        if not model.accept(extra):
            continue
        if best is None or p > best[0]:
            best = (p, chain, extra)
    if best is None:
        return SweepResult(0, Placement(), model.initial(), total_states)
    heights = {}
    trail = []
    chain = best[1]
    while chain is not None:
        chain, tid, h = chain
        if tid is None:
            trail.append(h)
        else:
            heights[tid] = h
    trail.reverse()
    return SweepResult(best[0], Placement(heights), best[2], total_states, trail)


def _note(val: tuple[int, tuple | None], old: Hashable, new: Hashable):
    if new == old:
        return val
    return (val[0], (val[1], None, new))


def _offer(table: dict, key: tuple, val: tuple[int, tuple | None]) -> None:
    cur = table.get(key)
    if cur is None or val[0] > cur[0]:
        table[key] = val
