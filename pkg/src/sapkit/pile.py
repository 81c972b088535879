"""Pile boxable solutions on uniform-capacity paths.

A pile is a stack of ``k <= beta`` equal boxes of size ``floor(U/k)`` sitting
on the floor, each box's path nested in the one below.  Small tasks go into
the boxes; large tasks go around them, pushed up against the ceiling or
against each other ("anti-gravity"), so their heights are ``U`` minus a sum of
at most ``1/delta`` large sizes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from ._rng import stream
from ._sweep import SweepModel, run_sweep
from .boxes import Box, _eps, _shelf_place, assign_tasks_to_boxes
from .core import InputError, Placement, RefusalError, SapInstance, Task, profit

DEFAULT_DELTA = Fraction(1, 4)


@dataclass(frozen=True)
class PileSpec:
    """Boxes bottom to top; box ``j`` (0-based) sits at ``j * d``."""

    boxes: tuple[Box, ...]

    def __post_init__(self) -> None:
        if not self.boxes:
            raise InputError("a pile needs at least one box")
        d = self.boxes[0].d
        for j, box in enumerate(self.boxes):
            if box.d != d or box.h != j * d:
                raise InputError("pile boxes must have equal size and stack from the floor")
            if j and not (self.boxes[j - 1].s <= box.s and box.t <= self.boxes[j - 1].t):
                raise InputError("pile box paths must be nested")

    @property
    def span(self) -> range:
        return self.boxes[0].edges

    def floor_at(self, e: int) -> int:
        """Height occupied by the pile on edge ``e``."""
        return sum(box.d for box in self.boxes if box.s <= e < box.t)

    @classmethod
    def stack(cls, intervals: Sequence[tuple[int, int]], U: int) -> "PileSpec":
        d = U // len(intervals)
        return cls(tuple(Box(s, t, d, j * d) for j, (s, t) in enumerate(intervals)))


def check_pile(spec: PileSpec, U: int, beta: int) -> bool:
    k = len(spec.boxes)
    return k <= beta and spec.boxes[0].d == U // k and spec.boxes[-1].h + spec.boxes[-1].d <= U


def _uniform(instance: SapInstance) -> int:
    if not instance.is_uniform:
        raise InputError("pile solvers need uniform capacities")
    return instance.capacities[0]


def split_pile_tasks(instance: SapInstance, delta=DEFAULT_DELTA) -> tuple[list[Task], list[Task]]:
    U = _uniform(instance)
    delta = Fraction(delta)
    large = [t for t in instance.tasks if t.d > delta * U]
    small = [t for t in instance.tasks if t.d <= delta * U]
    return small, large


def enumerate_piles(instance: SapInstance, beta: int, small: Sequence[Task],
                    limit: int = 5000) -> list[PileSpec]:
    """Nested stacks whose endpoints come from small-task endpoints (plus the path ends)."""
    U = _uniform(instance)
    if beta < 1:
        raise InputError("beta must be at least 1")
    points = sorted({0, instance.m} | {t.s for t in small} | {t.t for t in small})
    intervals = [(a, b) for a, b in itertools.combinations(points, 2)]
    out: list[PileSpec] = []

    def extend(chain: list[tuple[int, int]], k: int) -> None:
        if len(chain) == k:
            out.append(PileSpec.stack(chain, U))
            if len(out) > limit:
                raise RefusalError(f"more than {limit} piles to try")
            return
        s0, t0 = chain[-1]
        for a, b in intervals:
            if s0 <= a and b <= t0:
                chain.append((a, b))
                extend(chain, k)
                chain.pop()

    for k in range(1, beta + 1):
        if U // k < 1:
            break
        for iv in intervals:
            extend([iv], k)
    return out


def _greedy_pile(spec: PileSpec, small: Sequence[Task], eps) -> dict[str, int]:
    """Densest-first, each task into the top-most box that still shelf-packs it."""
    chosen: dict[int, list[Task]] = {k: [] for k in range(len(spec.boxes))}
    heights: dict[int, dict[str, int]] = {k: {} for k in chosen}
    for task in sorted(small, key=lambda t: (-Fraction(t.w, t.d), t.id)):
        for k in reversed(range(len(spec.boxes))):
            box = spec.boxes[k]
            if not box.contains(task) or task.d > box.d:
                continue
            trial = chosen[k] + [task]
            placed, failed = _shelf_place(box, trial, eps, drop=True)
            if not failed:
                chosen[k], heights[k] = trial, placed
                break
    out = {}
    for k, box in enumerate(spec.boxes):
        for tid, rel in heights[k].items():
            out[tid] = box.h + rel
    return out


def fill_pile(instance: SapInstance, spec: PileSpec, small: Iterable[Task], epsilon,
              seed: int = 0, trials: int = 2, smallness=None) -> dict[str, int]:
    """Best of a greedy packing and ``trials`` randomised LP roundings."""
    eps = _eps(epsilon)
    small = [t for t in small if spec.boxes[0].contains(t)]
    best = _greedy_pile(spec, small, eps)
    sm = eps if smallness is None else Fraction(smallness)
    for k in range(trials):
        res = assign_tasks_to_boxes(spec.boxes, small, eps, seed=seed + k, smallness=sm,
                                    augment=True)
        cand = dict(res.placement())
        if profit(instance, cand) > profit(instance, best):
            best = cand
    return best


def anti_gravity_heights(U: int, sizes: Iterable[int], delta=DEFAULT_DELTA) -> list[int]:
    """``U - h1`` for every sum ``h1`` of at most ``floor(1/delta)`` sizes."""
    sizes = sorted(set(sizes))
    sums = {0}
    for _ in range(math.floor(1 / Fraction(delta))):
        sums |= {a + d for a in sums for d in sizes if a + d <= U}
    return sorted(U - h for h in sums if h > 0)


class _PileSweep(SweepModel):
    """Extra: (index of the current pile or -1, piles used so far capped at ``cap``)."""

    def __init__(self, piles, values, heights, cap):
        self.piles = piles
        self.values = values
        self.heights = heights
        self.cap = cap
        self.starts: dict[int, list[int]] = {}
        for k, p in enumerate(piles):
            self.starts.setdefault(p.span.start, []).append(k)

    def initial(self):
        return (-1, 0)

    def before_edge(self, edge, extra, active):
        cur, used = extra
        if cur >= 0 and edge >= self.piles[cur].span.stop:
            cur = -1
        out = [(cur, used)]
        if cur < 0 and used < self.cap:
            out.extend((k, used + 1 if self.cap == 1 else 0) for k in self.starts.get(edge, ()))
        return out

    def options(self, task, edge, extra):
        return [(h, None) for h in self.heights]

    def at_edge(self, edge, extra, active):
        cur, _ = extra
        bonus = 0
        if cur >= 0:
            floor = self.piles[cur].floor_at(edge)
            if any(h < floor for _, h, _ in active):
                return ()
            if edge == self.piles[cur].span.start:
                bonus = self.values[cur]
        return ((extra, active, bonus),)


def _solve(instance: SapInstance, beta: int, epsilon, seed: int, delta, cap: int,
           max_piles: int, max_states: int) -> Placement:
    U = _uniform(instance)
    if instance.m > 24:
        raise RefusalError(f"{instance.m} edges exceed the pile enumeration cap of 24")
    small, large = split_pile_tasks(instance, delta)
    piles = enumerate_piles(instance, beta, small, limit=max_piles)
    fills = [fill_pile(instance, p, small, epsilon, seed=int(stream(seed, "pile", k).integers(2**30)))
             for k, p in enumerate(piles)]
    values = [profit(instance, f) for f in fills]
    keep = [k for k in range(len(piles)) if values[k] > 0]
    piles = [piles[k] for k in keep]
    fills = [fills[k] for k in keep]
    values = [values[k] for k in keep]
    model = _PileSweep(piles, values, anti_gravity_heights(U, [t.d for t in large], delta), cap)
    res = run_sweep(instance, large, model, max_states=max_states)
    heights = dict(res.placement)
    for k in sorted({cur for cur, _ in res.trail if cur >= 0}):
        heights.update(fills[k])
    return Placement(heights)


def solve_single_pile(instance: SapInstance, beta: int, epsilon, seed: int = 0,
                      delta=DEFAULT_DELTA, max_piles: int = 5000,
                      max_states: int = 200_000) -> Placement:
    """One pile of at most ``beta`` boxes plus large tasks around it."""
    return _solve(instance, beta, epsilon, seed, delta, 1, max_piles, max_states)


def solve_pile(instance: SapInstance, beta: int, epsilon, seed: int = 0,
               delta=DEFAULT_DELTA, max_piles: int = 5000,
               max_states: int = 200_000) -> Placement:
    """Piles on disjoint subpaths plus large tasks around them."""
    return _solve(instance, beta, epsilon, seed, delta, instance.m, max_piles, max_states)


__all__ = [
    "PileSpec", "anti_gravity_heights", "check_pile", "enumerate_piles", "fill_pile",
    "solve_pile", "solve_single_pile", "split_pile_tasks",
]
