"""Exact solvers for tiny instances.

They exist to produce ground truth for tests and benchmarks, so they refuse
(raise :class:`RefusalError`) rather than return anything approximate.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from . import lp
from .core import Placement, RefusalError, SapInstance, Task, bottleneck


@dataclass(frozen=True)
class OracleLimits:
    max_tasks: int = 10
    max_capacity: int = 16
    time_budget: float = 60.0

    def __post_init__(self) -> None:
        if self.max_tasks < 1 or self.max_capacity < 1 or self.time_budget <= 0:
            raise ValueError("oracle limits must be positive")


DEFAULT_LIMITS = OracleLimits()


def _check_limits(instance: SapInstance, tasks: list[Task], limits: OracleLimits) -> None:
    if len(tasks) > limits.max_tasks:
        raise RefusalError(f"{len(tasks)} tasks exceed the oracle limit {limits.max_tasks}")
    if instance.max_capacity > limits.max_capacity:
        raise RefusalError(
            f"capacity {instance.max_capacity} exceeds the oracle limit {limits.max_capacity}")


class _Clock:
    def __init__(self, budget: float) -> None:
        self.deadline = time.monotonic() + budget
        self.ticks = 0

    def tick(self) -> None:
        self.ticks += 1
        if self.ticks & 1023 == 0 and time.monotonic() > self.deadline:
            raise RefusalError("oracle time budget exhausted")


def _resolve(instance: SapInstance, task_set: Iterable) -> list[Task]:
    out = []
    for item in task_set:
        out.append(item if isinstance(item, Task) else instance.task(item))
    return out


def _pack(instance: SapInstance, tasks: list[Task], clock: _Clock) -> dict[str, int] | None:
    caps = instance.capacities
    load = [0] * instance.m
    for t in tasks:
        for e in t.edges:
            load[e] += t.d
            if load[e] > caps[e]:
                return None
    order = sorted(tasks, key=lambda t: (-t.d, t.id))
    occ = [0] * instance.m
    full = [(1 << u) - 1 for u in caps]
    remaining = load[:]
    heights: dict[str, int] = {}

    def place(k: int) -> bool:
        if k == len(order):
            return True
        clock.tick()
        task = order[k]
        edges = task.edges
        block = (1 << task.d) - 1
        for e in edges:
            remaining[e] -= task.d
        for h in range(bottleneck(instance, task) - task.d + 1):
            mask = block << h
            if any(occ[e] & mask for e in edges):
                continue
            for e in edges:
                occ[e] |= mask
            # free cells on each edge must still cover the demand to come
            if all(bin(full[e] & ~occ[e]).count("1") >= remaining[e] for e in edges):
                heights[task.id] = h
                if place(k + 1):
                    return True
                del heights[task.id]
            for e in edges:
                occ[e] &= ~mask
        for e in edges:
            remaining[e] += task.d
        return False

    return dict(heights) if place(0) else None


def can_pack(instance: SapInstance, task_set: Iterable,
             limits: OracleLimits = DEFAULT_LIMITS) -> Placement | None:
    """A feasible placement of exactly ``task_set``, or ``None`` if there is none."""
    tasks = _resolve(instance, task_set)
    _check_limits(instance, tasks, limits)
    found = _pack(instance, tasks, _Clock(limits.time_budget))
    return None if found is None else Placement(found)


def ufp_bound(instance: SapInstance, tasks: list[Task], residual: list[int]) -> float:
    """Fractional knapsack-on-a-path bound: max sum w x with per-edge load <= residual."""
    usable = [t for t in tasks if all(t.d <= residual[e] for e in t.edges)]
    if not usable:
        return 0.0
    model = lp.LpModel("max", exact=False, name="ufp")
    for t in usable:
        model.add_variable(t.id, t.w)
        model.add_constraint(f"ub:{t.id}", {t.id: 1}, "<=", 1)
    for e in range(instance.m):
        coeffs = {t.id: t.d for t in usable if t.uses(e)}
        if coeffs and sum(coeffs.values()) > residual[e]:
            model.add_constraint(f"e{e}", coeffs, "<=", residual[e])
    sol = lp.solve(model)
    return float(sol.objective)


def exact_opt(instance: SapInstance, limits: OracleLimits = DEFAULT_LIMITS) -> Placement:
    """Maximum-profit feasible placement by branch and bound over subsets."""
    tasks = sorted(instance.tasks, key=lambda t: t.id)
    _check_limits(instance, tasks, limits)
    clock = _Clock(limits.time_budget)
    best_profit = -1
    best: dict[str, int] = {}
    cache: dict[frozenset, dict | None] = {}

    def packs(ids: frozenset) -> dict | None:
        if ids not in cache:
            cache[ids] = _pack(instance, [instance.task(i) for i in sorted(ids)], clock)
        return cache[ids]

    suffix = [0] * (len(tasks) + 1)
    for k in range(len(tasks) - 1, -1, -1):
        suffix[k] = suffix[k + 1] + tasks[k].w

    def dfs(k: int, chosen: frozenset, value: int, residual: list[int], heights: dict) -> None:
        nonlocal best_profit, best
        clock.tick()
        if value > best_profit:
            best_profit, best = value, heights
        if k == len(tasks) or value + suffix[k] <= best_profit:
            return
        if value + ufp_bound(instance, tasks[k:], residual) + 1e-7 <= best_profit:
            return
        task = tasks[k]
        if all(task.d <= residual[e] for e in task.edges):
            grown = chosen | {task.id}
            found = packs(grown)
            if found is not None:
                res = residual[:]
                for e in task.edges:
                    res[e] -= task.d
                dfs(k + 1, grown, value + task.w, res, found)
        dfs(k + 1, chosen, value, residual, heights)

    dfs(0, frozenset(), 0, list(instance.capacities), {})
    return Placement(best)


def enumerate_placements(instance: SapInstance, tasks: list[Task],
                         height_filter: Callable[[Task, int], bool] | None = None,
                         clock: _Clock | None = None):
    """Every feasible placement of exactly ``tasks`` (heights increasing, lexicographic)."""
    clock = clock or _Clock(1e9)
    order = sorted(tasks, key=lambda t: t.id)
    occ = [0] * instance.m
    heights: dict[str, int] = {}

    def rec(k: int):
        if k == len(order):
            yield dict(heights)
            return
        clock.tick()
        task = order[k]
        block = (1 << task.d) - 1
        for h in range(bottleneck(instance, task) - task.d + 1):
            if height_filter is not None and not height_filter(task, h):
                continue
            mask = block << h
            if any(occ[e] & mask for e in task.edges):
                continue
            for e in task.edges:
                occ[e] |= mask
            heights[task.id] = h
            yield from rec(k + 1)
            del heights[task.id]
            for e in task.edges:
                occ[e] &= ~mask

    yield from rec(0)


def exact_opt_restricted(instance: SapInstance, limits: OracleLimits,
                         admissible: Callable[[Mapping[str, int]], bool],
                         height_filter: Callable[[Task, int], bool] | None = None,
                         tasks: Iterable[Task] | None = None) -> Placement:
    """Maximum-profit feasible placement among those ``admissible`` accepts.

    Subsets are visited by decreasing profit (ties: lexicographic by sorted
    ids), so the first admissible placement found is optimal.
    ``height_filter`` only prunes the enumeration; it must not exclude any
    height an admissible placement could use.
    """
    pool = sorted(instance.tasks if tasks is None else tasks, key=lambda t: t.id)
    _check_limits(instance, pool, limits)
    clock = _Clock(limits.time_budget)
    subsets = []
    for r in range(len(pool) + 1):
        for combo in itertools.combinations(pool, r):
            subsets.append(combo)
    subsets.sort(key=lambda c: (-sum(t.w for t in c), [t.id for t in c]))
    for combo in subsets:
        load = [0] * instance.m
        fits = True
        for t in combo:
            for e in t.edges:
                load[e] += t.d
                if load[e] > instance.capacities[e]:
                    fits = False
        if not fits:
            continue
        for heights in enumerate_placements(instance, list(combo), height_filter, clock):
            if admissible(heights):
                return Placement(heights)
    return Placement()
