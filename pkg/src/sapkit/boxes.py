"""Boxes: rectangular containers for tasks, and the solvers built on them.

A box spans the edges ``[s, t)`` and has size ``d``; when placed it sits at
height ``h``.  A set of tasks *fits* a box when every path lies inside the
box, the tasks can be stacked inside ``[0, d)``, and either there is a single
task or every task is small compared with ``d``.

The module provides

* :func:`shelf_pack` / :func:`fits_into_box` for the geometry inside one box,
* :func:`assign_tasks_to_boxes`, an LP relaxation with dependent rounding and
  an alteration pass, and the single-box wrapper :func:`fill_single_box`,
* :func:`decompose_box_levels`, the level sweep with offset removal,
* :func:`solve_constant_boxable`, a level-by-level search over box families.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import lp
from ._rng import stream
from ._sweep import SweepModel, run_sweep
from .classify import check_epsilon
from .core import InputError, Placement, RefusalError, SapInstance, Task, bottleneck, profit


class PackingError(RuntimeError):
    """shelf_pack could not place a task; the box preconditions were not met."""

    def __init__(self, message: str, task_id: str | None = None) -> None:
        super().__init__(message)
        self.task_id = task_id


@dataclass(frozen=True, order=True)
class Box:
    s: int
    t: int
    d: int
    h: int | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.s < self.t:
            raise InputError(f"box needs 0 <= s < t, got {self.s}, {self.t}")
        if self.d < 1:
            raise InputError("box size must be positive")
        if self.h is not None and self.h < 0:
            raise InputError("box height must be nonnegative")

    @property
    def edges(self) -> range:
        return range(self.s, self.t)

    def contains(self, task: Task) -> bool:
        return self.s <= task.s and task.t <= self.t

    def at(self, h: int) -> "Box":
        return Box(self.s, self.t, self.d, h)

    def overlaps(self, other: "Box") -> bool:
        if not (self.s < other.t and other.s < self.t):
            return False
        return self.h < other.h + other.d and other.h < self.h + self.d


def _eps(epsilon) -> Fraction:
    return check_epsilon(epsilon)


def default_smallness(epsilon) -> Fraction:
    return _eps(epsilon) ** 8


# ---------------------------------------------------------------- inside one box


def _shelf_place(box: Box, tasks: Sequence[Task], epsilon, drop: bool):
    eps = _eps(epsilon)
    heights: dict[str, int] = {}
    failed: list[str] = []
    if not tasks:
        return heights, failed
    shelf = max(int(eps ** 4 * box.d), max(t.d for t in tasks))
    shelves = [(lo, min(lo + shelf, box.d)) for lo in range(0, box.d, shelf)]
    placed: list[list[tuple[Task, int]]] = [[] for _ in shelves]
    order = sorted(tasks, key=lambda t: (t.s, -t.t, -t.d, t.id))
    for task in order:
        done = False
        for k, (lo, hi) in enumerate(shelves):
            # every earlier task meeting P(task) covers edge task.s (sorted by start)
            busy = sorted((h, h + o.d) for o, h in placed[k] if o.t > task.s)
            y = lo
            for a, b in busy:
                if y + task.d <= a:
                    break
                y = max(y, b)
            if y + task.d <= hi:
                placed[k].append((task, y))
                heights[task.id] = y
                done = True
                break
        if not done:
            if not drop:
                raise PackingError(f"task {task.id} does not fit any shelf", task.id)
            failed.append(task.id)
    return heights, failed


def shelf_pack(box: Box, tasks: Iterable[Task], epsilon) -> dict[str, int]:
    """Box-relative heights for ``tasks`` using horizontal shelves.

    Shelves have height ``max(floor(eps^4 d_B), max d_i)``.  Tasks are taken by
    start vertex and each goes to the lowest free slot at its start edge in
    the first shelf with room.  Because every earlier task that meets the new
    task's path also covers its start edge, that one edge decides feasibility.
    Raises :class:`PackingError` when a task finds no slot.
    """
    tasks = list(tasks)
    for task in tasks:
        if not box.contains(task):
            raise InputError(f"task {task.id} leaves the box")
    return _shelf_place(box, tasks, epsilon, drop=False)[0]


def fits_into_box(box: Box, tasks: Iterable[Task], epsilon,
                  smallness=None) -> dict[str, int] | None:
    tasks = list(tasks)
    if not all(box.contains(t) for t in tasks):
        return None
    if len(tasks) == 1:
        return {tasks[0].id: 0} if tasks[0].d <= box.d else None
    small = default_smallness(epsilon) if smallness is None else Fraction(smallness)
    if any(t.d > small * box.d for t in tasks):
        return None
    try:
        return shelf_pack(box, tasks, epsilon)
    except PackingError:
        return None


# ---------------------------------------------------------------- LP assignment


@dataclass
class BoxAssignment:
    boxes: tuple[Box, ...]
    contents: dict[int, dict[str, int]] = field(default_factory=dict)
    lp_value: float = 0.0
    sampled: dict[int, list[str]] = field(default_factory=dict)
    altered: dict[int, list[str]] = field(default_factory=dict)

    def task_ids(self) -> set[str]:
        return {tid for c in self.contents.values() for tid in c}

    def profit(self, instance: SapInstance) -> int:
        return sum(instance.task(t).w for t in self.task_ids())

    def placement(self) -> Placement:
        out = {}
        for k, content in self.contents.items():
            base = self.boxes[k].h or 0
            for tid, rel in content.items():
                out[tid] = base + rel
        return Placement(out)


def box_lp(boxes: Sequence[Box], candidates: Sequence[Task], smallness) -> tuple[lp.LpModel, dict]:
    """The fractional assignment LP; returns the model and its variable map."""
    model = lp.LpModel("max", exact=False, name="box-lp")
    var = {}
    for task in candidates:
        for k, box in enumerate(boxes):
            if box.contains(task) and task.d <= smallness * box.d:
                name = f"x[{task.id},{k}]"
                model.add_variable(name, task.w)
                var[(task.id, k)] = name
    for task in candidates:
        row = {var[(task.id, k)]: 1 for k in range(len(boxes)) if (task.id, k) in var}
        if row:
            model.add_constraint(f"once[{task.id}]", row, "<=", 1)
    for k, box in enumerate(boxes):
        for e in box.edges:
            row = {var[(t.id, k)]: t.d for t in candidates
                   if (t.id, k) in var and t.uses(e)}
            if row and sum(row.values()) > box.d:
                model.add_constraint(f"cap[{k},{e}]", row, "<=", box.d)
    return model, var


def dependent_round(marginals: Mapping[str, Sequence[tuple[object, float]]],
                    rng: np.random.Generator) -> dict[str, object]:
    """Pick at most one option per key with the given marginals.

    One uniform draw per key is compared with the cumulative marginals, so
    option ``j`` is chosen with probability exactly its marginal and two
    options of the same key are never chosen together.
    """
    chosen = {}
    for key in sorted(marginals):
        p = rng.random()
        acc = 0.0
        for option, x in marginals[key]:
            if acc <= p < acc + x:
                chosen[key] = option
                break
            acc += x
    return chosen


def _alter(box: Box, tasks: Sequence[Task], epsilon) -> list[Task]:
    limit = (1 - _eps(epsilon)) * box.d
    load = [0] * (box.t - box.s)
    kept = []
    for task in sorted(tasks, key=lambda t: (t.s, t.t, t.id)):
        rng_e = range(task.s - box.s, task.t - box.s)
        if all(load[e] + task.d <= limit for e in rng_e):
            for e in rng_e:
                load[e] += task.d
            kept.append(task)
    return kept


def assign_tasks_to_boxes(boxes: Sequence[Box], candidates: Iterable[Task], epsilon,
                          seed: int = 0, smallness=None, augment: bool = False,
                          lp_solution: tuple | None = None) -> BoxAssignment:
    """Randomised assignment of small tasks into fixed boxes.

    Solve the LP, scale it by ``1 - 2 eps``, round each task into at most one
    box, drop tasks in start order whenever the box's load on some edge would
    pass ``(1 - eps) d_B``, then shelf-pack each box.  With ``augment`` a
    greedy pass afterwards adds leftover tasks while the load rule allows.
    """
    eps = _eps(epsilon)
    boxes = tuple(boxes)
    candidates = sorted(candidates, key=lambda t: t.id)
    small = default_smallness(eps) if smallness is None else Fraction(smallness)
    out = BoxAssignment(boxes)
    if not boxes or not candidates:
        return out
    if lp_solution is None:
        model, var = box_lp(boxes, candidates, small)
        sol = lp.solve(model)
        lp_solution = (sol, var)
    sol, var = lp_solution
    out.lp_value = float(sol.objective or 0.0)
    scale = float(1 - 2 * eps)
    marginals: dict[str, list[tuple[int, float]]] = {}
    for (tid, k), name in var.items():
        x = sol.primal.get(name, 0.0) * scale
        if x > 1e-12:
            marginals.setdefault(tid, []).append((k, x))
    rng = stream(seed, "assign", boxes)
    picks = dependent_round(marginals, rng)
    by_id = {t.id: t for t in candidates}
    per_box: dict[int, list[Task]] = {}
    for tid, k in picks.items():
        per_box.setdefault(k, []).append(by_id[tid])
    used: set[str] = set()
    kept_per_box: dict[int, list[Task]] = {}
    for k in range(len(boxes)):
        sampled = per_box.get(k, [])
        kept = _alter(boxes[k], sampled, eps)
        out.sampled[k] = sorted(t.id for t in sampled)
        out.altered[k] = sorted(t.id for t in kept)
        kept_per_box[k] = kept
        used.update(t.id for t in kept)
    if augment:
        for task in sorted(candidates, key=lambda t: (-t.w, t.d, t.id)):
            if task.id in used:
                continue
            for k, box in enumerate(boxes):
                if not (box.contains(task) and task.d <= small * box.d):
                    continue
                trial = kept_per_box[k] + [task]
                if _alter(box, trial, eps) == sorted(trial, key=lambda t: (t.s, t.t, t.id)):
                    kept_per_box[k] = trial
                    used.add(task.id)
                    break
    for k, box in enumerate(boxes):
        heights, failed = _shelf_place(box, kept_per_box[k], eps, drop=True)
        if heights:
            out.contents[k] = heights
    return out


def fill_single_box(box: Box, candidates: Iterable[Task], epsilon, smallness=None,
                    seeds: int = 32, base_seed: int = 0) -> dict[str, int]:
    """Profitable subset of ``candidates`` that fits ``box``, with box-relative heights.

    Tries, in order: everything at once; the best of ``seeds`` randomised
    LP roundings followed by greedy augmentation; the single best task.
    The most profitable of these wins (ties: earlier wins).
    """
    eps = _eps(epsilon)
    small = default_smallness(eps) if smallness is None else Fraction(smallness)
    cands = sorted((t for t in candidates if box.contains(t) and t.d <= box.d),
                   key=lambda t: t.id)
    if not cands:
        return {}
    best: dict[str, int] = {}
    best_w = -1
    multi = [t for t in cands if t.d <= small * box.d]

    def consider(heights: dict[str, int]) -> None:
        nonlocal best, best_w
        w = sum(by_id[t].w for t in heights)
        if w > best_w:
            best, best_w = heights, w

    by_id = {t.id: t for t in cands}
    if multi:
        whole = fits_into_box(box, multi, eps, small)
        if whole is not None:
            consider(whole)
        if len(multi) > 1 and (whole is None or len(multi) < len(cands)):
            model, var = box_lp([box.at(0)], multi, small)
            sol = lp.solve(model)
            for k in range(seeds):
                res = assign_tasks_to_boxes([box.at(0)], multi, eps, seed=base_seed + k,
                                            smallness=small, augment=True,
                                            lp_solution=(sol, var))
                chosen = dict(res.contents.get(0, {}))
                chosen = _greedy_extend(box, multi, chosen, eps)
                consider(chosen)
    single = max(cands, key=lambda t: (t.w, t.id))
    consider({single.id: 0})
    return dict(best)


def _greedy_extend(box: Box, pool: Sequence[Task], chosen: dict[str, int], eps) -> dict[str, int]:
    by_id = {t.id: t for t in pool}
    current = [by_id[t] for t in chosen]
    for task in sorted(pool, key=lambda t: (-Fraction(t.w, t.d), t.id)):
        if task.id in chosen:
            continue
        trial = current + [task]
        heights, failed = _shelf_place(box, trial, eps, drop=True)
        if not failed:
            current, chosen = trial, heights
    return chosen


# ---------------------------------------------------------------- level decomposition


@dataclass
class HierarchicalDecomposition:
    levels: dict[int, int]                       # box index -> level (1-based)
    sequence: dict[int, list[int]]               # level -> box indices in sweep order
    partitions: dict[int, list[tuple[int, int]]]  # level -> maximal covered runs [a, b)
    removed: set[int]
    gamma: int
    removed_weight: float


def _level_sweep(boxes: Sequence[Box]) -> dict[int, list[int]]:
    remaining = set(range(len(boxes)))
    levels: dict[int, list[int]] = {}
    level = 0
    while remaining:
        level += 1
        seq: list[int] = []
        first = min(remaining, key=lambda k: (boxes[k].s, -boxes[k].t, boxes[k], k))
        seq.append(first)
        remaining.discard(first)
        while True:
            right = boxes[seq[-1]].t
            users = [k for k in remaining if boxes[k].t > right]
            if not users:
                break
            e = min(max(boxes[k].s, right) for k in users)
            hitting = [k for k in users if boxes[k].s <= e < boxes[k].t]
            nxt = max(hitting, key=lambda k: (boxes[k].t, -boxes[k].s, [-x for x in
                                                 (boxes[k].d, boxes[k].h or 0)], -k))
            seq.append(nxt)
            remaining.discard(nxt)
        levels[level] = seq
    return levels


def _runs(edges: set[int]) -> list[tuple[int, int]]:
    out = []
    for e in sorted(edges):
        if out and out[-1][1] == e:
            out[-1] = (out[-1][0], e + 1)
        else:
            out.append((e, e + 1))
    return out


def decompose_box_levels(boxes: Sequence[Box], epsilon, beta: int,
                         weights: Sequence[float] | None = None) -> HierarchicalDecomposition:
    """Assign levels by repeated left-to-right sweeps and thin each level by an offset.

    For an offset ``gamma`` every ``(beta/eps)``-th box of a level (starting
    at ``gamma``) marks the edge just right of its end; boxes of that level or
    deeper crossing a marked edge are removed.  The offset with the least
    removed weight (ties: smallest) is kept.
    """
    eps = _eps(epsilon)
    boxes = list(boxes)
    weights = [1.0] * len(boxes) if weights is None else list(weights)
    seqs = _level_sweep(boxes)
    levels = {k: lvl for lvl, seq in seqs.items() for k in seq}
    period = int(beta / eps)
    best = None
    for gamma in range(1, period + 1):
        removed: set[int] = set()
        for j, seq in seqs.items():
            marks = {boxes[seq[q - 1]].t for q in range(gamma, len(seq) + 1, period)}
            for k, lvl in levels.items():
                if lvl >= j and any(boxes[k].s <= e < boxes[k].t for e in marks):
                    removed.add(k)
        w = sum(weights[k] for k in removed)
        if best is None or w < best[0]:
            best = (w, gamma, removed)
    if best is None:
        best = (0.0, 1, set())
    w, gamma, removed = best
    partitions = {}
    for lvl, seq in seqs.items():
        covered = {e for k in seq if k not in removed for e in boxes[k].edges}
        partitions[lvl] = _runs(covered)
    return HierarchicalDecomposition(levels, seqs, partitions, set(removed), gamma, w)


def longest_chain(boxes: Sequence[Box]) -> int:
    """Longest sequence of placed boxes each sitting exactly on top of an overlapping predecessor."""
    placed = sorted((b for b in boxes if b.h is not None), key=lambda b: (b.h, b.s, b.t, b.d))
    best = {}
    for b in placed:
        cand = 1
        for a in placed:
            if a is b:
                continue
            if a.h + a.d == b.h and a.s < b.t and b.s < a.t and a in best:
                cand = max(cand, best[a] + 1)
        best[b] = cand
    return max(best.values(), default=0)


# ---------------------------------------------------------------- constant-beta solver


@dataclass(frozen=True, order=True)
class PoolBox:
    """A candidate box at a fixed height; ``task`` set for single-task boxes."""

    box: Box
    task: str = ""


def height_grid(instance: SapInstance, epsilon) -> list[int]:
    """All integers up to the largest capacity when it is small, else a (1+eps) grid."""
    U = instance.max_capacity
    if U <= 64:
        return list(range(U + 1))
    eps = float(_eps(epsilon))
    vals = {0, U}
    x = 1.0
    while x <= U:
        vals.add(int(x))
        vals.add(U - int(x))
        x *= 1 + eps
    return sorted(v for v in vals if 0 <= v <= U)


def default_box_pool(instance: SapInstance, epsilon, smallness, limit: int = 24) -> list[PoolBox]:
    """A small heuristic candidate family when none is supplied.

    Single-task boxes for every task at the bottom and at the top of its
    bottleneck; multi-task boxes spanning the endpoints of small tasks, sized
    to the bottleneck of their span, at height zero.
    """
    pool: set[PoolBox] = set()
    for task in instance.tasks:
        b = bottleneck(instance, task)
        if task.d > b:
            continue
        for h in sorted({0, b - task.d}):
            pool.add(PoolBox(Box(task.s, task.t, task.d, h), task.id))
    smalls = [t for t in instance.tasks]
    ends = sorted({t.s for t in smalls} | {t.t for t in smalls})
    multi = []
    for s, t in itertools.combinations(ends, 2):
        cap = min(instance.capacities[s:t])
        inside = [x for x in smalls if s <= x.s and x.t <= t and x.d <= smallness * cap]
        if len(inside) >= 2:
            multi.append((-sum(x.w for x in inside), s, t, cap))
    for _, s, t, cap in sorted(multi)[:limit]:
        pool.add(PoolBox(Box(s, t, cap, 0)))
    return sorted(pool)


class _BoxableSearch:
    def __init__(self, instance, beta, eps, pool, smallness, cap, max_evals, seeds):
        self.instance = instance
        self.beta = beta
        self.eps = eps
        self.pool = sorted(pool)
        self.small = smallness
        self.cap = cap
        self.max_evals = max_evals
        self.evals = 0
        self.seeds = seeds
        self.memo: dict = {}
        self.fill_memo: dict = {}
        self.best_partial: tuple[int, dict] = (0, {})

    def _tick(self):
        self.evals += 1
        if self.evals > self.max_evals:
            raise RefusalError("boxable search budget exhausted")

    def _fill(self, pb: PoolBox, excluded: frozenset) -> dict[str, int]:
        key = (pb, excluded)
        if key not in self.fill_memo:
            box = pb.box
            cands = [t for t in self.instance.tasks if t.id not in excluded
                     and box.contains(t) and t.d <= self.small * box.d]
            rel = fill_single_box(box, cands, self.eps, self.small, seeds=self.seeds,
                                  base_seed=hash((box.s, box.t, box.d, box.h)) & 0xFFFF)
            self.fill_memo[key] = {tid: box.h + r for tid, r in rel.items()}
        return self.fill_memo[key]

    def _subsets(self, a: int, b: int, context: tuple[PoolBox, ...], used: frozenset):
        inside = [pb for pb in self.pool if a <= pb.box.s and pb.box.t <= b
                  and pb.box.h + pb.box.d <= min(self.instance.capacities[pb.box.s:pb.box.t])
                  and (not pb.task or pb.task not in used)]
        count = [0] * self.instance.m
        for pb in context:
            for e in pb.box.edges:
                count[e] += 1
        chosen: list[PoolBox] = []

        def rec(k: int):
            yield tuple(chosen)
            if len(chosen) >= self.cap:
                return
            for j in range(k, len(inside)):
                pb = inside[j]
                if pb.task and any(c.task == pb.task for c in chosen):
                    continue
                if any(count[e] >= self.beta for e in pb.box.edges):
                    continue
                if any(pb.box.overlaps(o.box) for o in context) or \
                        any(pb.box.overlaps(o.box) for o in chosen):
                    continue
                for e in pb.box.edges:
                    count[e] += 1
                chosen.append(pb)
                yield from rec(j + 1)
                chosen.pop()
                for e in pb.box.edges:
                    count[e] -= 1

        yield from rec(0)

    def cell(self, level: int, a: int, b: int, context: tuple, used: frozenset) -> tuple[int, dict]:
        key = (level, a, b, context, used)
        if key in self.memo:
            return self.memo[key]
        best = (0, {})
        for subset in self._subsets(a, b, context, used):
            self._tick()
            gained: dict[str, int] = {}
            taken = set(used)
            for pb in sorted(subset):
                if pb.task:
                    task = self.instance.task(pb.task)
                    gained[task.id] = pb.box.h
                    taken.add(task.id)
            for pb in sorted(subset):
                if not pb.task:
                    got = self._fill(pb, frozenset(taken))
                    gained.update(got)
                    taken.update(got)
            value = sum(self.instance.task(t).w for t in gained)
            if level < self.beta and subset:
                ctx = tuple(sorted(context + subset))
                child_value, child_heights = self._partition(level + 1, a, b, ctx,
                                                             frozenset(taken))
                value += child_value
                gained = {**gained, **child_heights}
            if value > best[0]:
                best = (value, gained)
                if level == 1 and value > self.best_partial[0]:
                    self.best_partial = best
        self.memo[key] = best
        return best

    def _partition(self, level: int, a: int, b: int, context, used) -> tuple[int, dict]:
        # best split of [a, b) into consecutive child subpaths
        f: dict[int, tuple[int, dict]] = {b: (0, {})}
        for c in range(b - 1, a - 1, -1):
            best = (f[c + 1][0], f[c + 1][1])
            for d in range(c + 1, b + 1):
                v, hs = self.cell(level, c, d, context, used)
                if v and v + f[d][0] > best[0]:
                    best = (v + f[d][0], {**hs, **f[d][1]})
            f[c] = best
        return f[a]


def large_only_sweep(instance: SapInstance, tasks: Iterable[Task],
                     heights: Sequence[int] | None = None, max_states: int = 200_000) -> Placement:
    """Exact best placement of ``tasks`` alone (heights optionally restricted)."""
    allowed = None if heights is None else sorted(set(heights))

    class Plain(SweepModel):
        def options(self, task, edge, extra):
            b = bottleneck(instance, task)
            hs = range(b - task.d + 1) if allowed is None else [h for h in allowed
                                                                if h + task.d <= b]
            return [(h, None) for h in hs]

    return run_sweep(instance, tasks, Plain(), max_states=max_states).placement


def solve_constant_boxable(instance: SapInstance, beta: int, epsilon,
                           heights: Sequence[int] | None = None,
                           pool: Sequence[PoolBox] | None = None,
                           smallness=None, max_boxes: int | None = None,
                           max_evals: int = 20_000, seeds: int = 8,
                           large_floor: Iterable[Task] | None = None) -> Placement:
    """Best boxable placement found by a level-by-level search.

    Cells are (level, subpath, boxes fixed at shallower levels, tasks already
    used).  Each cell guesses up to ``max_boxes`` candidate boxes inside its
    subpath, fills single-task boxes with their task and multi-task boxes in
    the global box order via :func:`fill_single_box`, and splits the subpath
    into children for the next level.  Candidate boxes come from ``pool``;
    single-task pool entries carry their task.  Boxes whose height is not in
    ``heights`` (when given) are skipped.

    The result is never worse than the exact sweep over ``large_floor``
    (default: no floor).  Raises :class:`RefusalError` with the best partial
    result when the evaluation budget runs out.
    """
    eps = _eps(epsilon)
    small = eps if smallness is None else Fraction(smallness)
    cap = max_boxes if max_boxes is not None else max(1, int(beta * beta / eps))
    if pool is None:
        pool = default_box_pool(instance, eps, small)
    if heights is not None:
        hs = set(heights)
        pool = [pb for pb in pool if pb.box.h in hs and (pb.task or pb.box.d in hs)]
    search = _BoxableSearch(instance, beta, eps, pool, small, cap, max_evals, seeds)
    floor = Placement()
    if large_floor is not None:
        floor = large_only_sweep(instance, large_floor)
    try:
        value, found = search._partition(1, 0, instance.m, (), frozenset())
    except RefusalError as exc:
        partial = Placement(search.best_partial[1])
        if profit(instance, floor) > profit(instance, partial):
            partial = floor
        raise RefusalError(str(exc), partial) from None
    result = Placement(found)
    if profit(instance, floor) > value:
        return floor
    return result
