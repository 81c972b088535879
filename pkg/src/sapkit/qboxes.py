"""Boxable solutions via profiles through a middle edge.

Every task handled at a recursion node uses the node's middle edge ``e0``,
so the load that a box receives from those tasks is a unimodal function of
the edge: non-decreasing up to ``e0`` and non-increasing after it.  Such a
:class:`StepProfile` can be simplified (:func:`round_profile`) and filled
exactly (:func:`fill_profiles_dp`); :func:`solve_boxable_recursive` glues the
two together by recursing left and right of ``e0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from ._rng import stream
from .boxes import Box, PoolBox, _shelf_place, default_box_pool, height_grid
from .classify import check_epsilon
from .core import InputError, Placement, RefusalError, SapInstance, Task, bottleneck


@dataclass(frozen=True)
class StepProfile:
    """Values on edges ``start .. start+len(values)-1``; zero elsewhere."""

    start: int
    values: tuple[int, ...]
    e0: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if any(v < 0 for v in self.values):
            raise InputError("profile values must be nonnegative")
        if self.values and not self.start <= self.e0 < self.start + len(self.values):
            raise InputError("profile must cover its centre edge")

    @classmethod
    def of_tasks(cls, tasks: Iterable[Task], e0: int) -> "StepProfile":
        tasks = list(tasks)
        if not tasks:
            return cls(e0, (0,), e0)
        lo = min(t.s for t in tasks)
        hi = max(t.t for t in tasks)
        vals = [0] * (hi - lo)
        for t in tasks:
            for e in t.edges:
                vals[e - lo] += t.d
        return cls(lo, tuple(vals), e0)

    def __call__(self, e: int) -> int:
        k = e - self.start
        return self.values[k] if 0 <= k < len(self.values) else 0

    @property
    def end(self) -> int:
        return self.start + len(self.values)

    def is_unimodal(self) -> bool:
        left = self.values[: self.e0 - self.start + 1]
        right = self.values[self.e0 - self.start:]
        return all(a <= b for a, b in zip(left, left[1:])) and \
            all(a >= b for a, b in zip(right, right[1:]))

    @property
    def steps(self) -> int:
        """Number of maximal constant runs with a positive value."""
        runs = 0
        prev = 0
        for v in self.values:
            if v > 0 and v != prev:
                runs += 1
            prev = v
        return runs

    def binding_edges(self, lo: int, hi: int) -> list[int]:
        """Edges in ``[lo, hi)`` whose load bounds the load on their whole run.

        For each maximal constant run (zero runs included) the edge nearest
        the centre is enough, because loads of tasks through the centre are
        monotone on either side.  The centre edge itself is always included.
        """
        out = {self.e0}
        for e in range(lo, min(self.e0, hi)):
            if e + 1 == self.e0 or self(e + 1) != self(e):
                out.add(e)
        for e in range(max(self.e0 + 1, lo), hi):
            if e - 1 == self.e0 or self(e - 1) != self(e):
                out.add(e)
        return sorted(out)

    def dominated_by(self, other: "StepProfile", lo: int, hi: int) -> bool:
        return all(self(e) <= other(e) for e in range(lo, hi))


def density_class(task: Task) -> int | None:
    """floor(log2(w/d)); ``None`` for zero-profit tasks."""
    if task.w == 0:
        return None
    q = Fraction(task.w, task.d)
    k = q.numerator.bit_length() - q.denominator.bit_length()
    # adjust so that 2^k <= q < 2^(k+1)
    while Fraction(2) ** k > q:
        k -= 1
    while Fraction(2) ** (k + 1) <= q:
        k += 1
    return k


def round_profile(instance: SapInstance, e0: int, tasks: Iterable[Task], step_budget: int,
                  epsilon) -> tuple[StepProfile, list[Task]]:
    """A simpler profile below the load of ``tasks`` and the tasks kept under it.

    Tasks are grouped by density class.  While the union profile has more
    than ``step_budget`` runs, the cheapest group of tasks sharing an
    endpoint inside one class is discarded, provided the class's total loss
    stays within ``epsilon`` of its weight.  The loss bound wins over the
    step budget.  The returned profile is exactly the survivors' load, so it
    never exceeds the input load and the survivors always fit it.
    """
    eps = check_epsilon(epsilon)
    tasks = sorted(tasks, key=lambda t: t.id)
    for t in tasks:
        if not t.uses(e0):
            raise InputError(f"task {t.id} does not use edge {e0}")
    survivors = [t for t in tasks if t.w > 0]
    classes: dict[int, list[Task]] = {}
    for t in survivors:
        classes.setdefault(density_class(t), []).append(t)
    class_weight = {c: sum(t.w for t in ts) for c, ts in classes.items()}
    lost = {c: 0 for c in classes}
    alive = set(t.id for t in survivors)
    while True:
        current = [t for t in survivors if t.id in alive]
        profile = StepProfile.of_tasks(current, e0)
        if profile.steps <= step_budget:
            break
        best = None
        for c, members in sorted(classes.items()):
            groups: dict[tuple, list[Task]] = {}
            for t in members:
                if t.id not in alive:
                    continue
                groups.setdefault(("s", t.s), []).append(t)
                groups.setdefault(("t", t.t), []).append(t)
            for key, group in sorted(groups.items()):
                w = sum(t.w for t in group)
                if lost[c] + w > eps * class_weight[c]:
                    continue
                remaining = [t for t in current if t not in group]
                if StepProfile.of_tasks(remaining, e0).steps >= profile.steps:
                    continue
                cand = (w, c, key, group)
                if best is None or cand[:3] < best[:3]:
                    best = cand
        if best is None:
            break
        w, c, _, group = best
        lost[c] += w
        alive -= {t.id for t in group}
    kept = [t for t in survivors if t.id in alive]
    return StepProfile.of_tasks(kept, e0), kept


def fill_profiles_dp(e0: int, profiles: Sequence[StepProfile], tasks: Iterable[Task],
                     span: tuple[int, int] | None = None,
                     max_states: int = 200_000) -> tuple[int, dict[str, int]]:
    """Most profitable assignment of ``tasks`` into profiles (task -> profile index).

    A task may go to profile ``k`` when adding it keeps the load at or below
    the profile on every edge; it suffices to track the load at each
    profile's binding edges.  Exact; ties go to the first assignment found
    (tasks in id order, options "skip" then profiles in order).
    """
    tasks = sorted(tasks, key=lambda t: t.id)
    for t in tasks:
        if not t.uses(e0):
            raise InputError(f"task {t.id} does not use edge {e0}")
    if not profiles:
        return 0, {}
    lo = min([p.start for p in profiles] + [t.s for t in tasks] + [e0])
    hi = max([p.end for p in profiles] + [t.t for t in tasks] + [e0 + 1])
    if span is not None:
        lo, hi = min(lo, span[0]), max(hi, span[1])
    binding = [p.binding_edges(lo, hi) for p in profiles]
    caps = [tuple(p(e) for e in b) for p, b in zip(profiles, binding)]
    start = tuple(tuple(0 for _ in b) for b in binding)
    layer: dict[tuple, tuple[int, tuple | None]] = {start: (0, None)}
    for task in tasks:
        nxt: dict[tuple, tuple[int, tuple | None]] = {}
        for state, (value, chain) in layer.items():
            _offer(nxt, state, (value, chain))
            for k, b in enumerate(binding):
                used = list(state[k])
                ok = True
                for j, e in enumerate(b):
                    if task.uses(e):
                        used[j] += task.d
                        if used[j] > caps[k][j]:
                            ok = False
                            break
                if not ok:
                    continue
                new_state = state[:k] + (tuple(used),) + state[k + 1:]
                _offer(nxt, new_state, (value + task.w, (chain, task.id, k)))
        layer = nxt
        if len(layer) > max_states:
            raise RefusalError(f"profile filling exceeded {max_states} states")
    value, chain = max(layer.values(), key=lambda vc: vc[0])
    for v, c in layer.values():
        if v == value:
            chain = c
            break
    out = {}
    while chain is not None:
        chain, tid, k = chain
        out[tid] = k
    return value, out


def _offer(table, key, val):
    cur = table.get(key)
    if cur is None or val[0] > cur[0]:
        table[key] = val


# ---------------------------------------------------------------- recursion


def rescale_weights(instance: SapInstance, epsilon) -> dict[str, Fraction]:
    """Scale so the largest profit becomes n/eps; tasks falling below 1 are dropped."""
    eps = check_epsilon(epsilon)
    top = max((t.w for t in instance.tasks), default=0)
    if top == 0:
        return {}
    factor = Fraction(instance.n) / eps / top
    scaled = {t.id: t.w * factor for t in instance.tasks}
    return {tid: w for tid, w in scaled.items() if w >= 1}


class _Recursion:
    def __init__(self, instance, beta, eps, pool, smallness, pool_size, steps, seed, max_evals):
        self.instance = instance
        self.beta = beta
        self.eps = eps
        self.pool = sorted(pool)
        self.small = smallness
        self.pool_size = pool_size
        self.steps = steps
        self.seed = seed
        self.max_evals = max_evals
        self.evals = 0
        self.memo: dict = {}
        self.max_depth = 0
        self.weights = rescale_weights(instance, eps)
        self.tasks = [t for t in instance.tasks if t.id in self.weights]

    def _tick(self):
        self.evals += 1
        if self.evals > self.max_evals:
            raise RefusalError("recursive boxable search budget exhausted")

    def profile_pool(self, box: Box, e0: int, cands: list[Task],
                     residual: Mapping[int, int]) -> list[StepProfile]:
        rng = stream(self.seed, "profiles", box, e0, tuple(t.id for t in cands))
        found: dict[tuple, StepProfile] = {}
        empty = StepProfile(e0, (0,), e0)
        found[(e0, (0,))] = empty
        subsets = [cands]
        for _ in range(self.pool_size * 2):
            if len(found) >= self.pool_size or not cands:
                break
            mask = rng.random(len(cands)) < rng.random()
            subsets.append([t for t, keep in zip(cands, mask) if keep])
        for subset in subsets:
            if len(found) >= self.pool_size:
                break
            if not subset:
                continue
            prof, _ = round_profile(self.instance, e0, subset, self.steps, self.eps)
            if all(prof(e) <= residual.get(e, 0) for e in range(prof.start, prof.end)):
                found.setdefault((prof.start, prof.values), prof)
        return list(found.values())

    def solve(self, a: int, b: int, depth: int, inherited: tuple) -> tuple[Fraction, dict]:
        """Best relaxed value on ``[a, b)``; returns (value, task -> (box, kind))."""
        if a >= b:
            return Fraction(0), {}
        self.max_depth = max(self.max_depth, depth)
        key = (a, b, inherited)
        if key in self.memo:
            return self.memo[key]
        e0 = (a + b) // 2
        here = [t for t in self.tasks if a <= t.s and t.t <= b and t.uses(e0)]
        fixed = [(bx, dict(res)) for bx, res in inherited
                 if res is not None and bx.s <= e0 < bx.t]
        count_e0 = sum(1 for bx, _ in inherited if bx.s <= e0 < bx.t)
        new_options = [pb for pb in self.pool if a <= pb.box.s and pb.box.t <= b
                       and pb.box.s <= e0 < pb.box.t
                       and (not pb.task or any(t.id == pb.task for t in here))]
        best: tuple[Fraction, dict] = (Fraction(-1), {})
        chosen: list[PoolBox] = []

        def boxes_ok(pb: PoolBox) -> bool:
            if pb.box.h + pb.box.d > min(self.instance.capacities[pb.box.s:pb.box.t]):
                return False
            if any(pb.box.overlaps(o) for o, _ in inherited):
                return False
            if any(pb.box.overlaps(o.box) for o in chosen):
                return False
            if pb.task and any(o.task == pb.task for o in chosen):
                return False
            for e in pb.box.edges:
                n_e = sum(1 for o, _ in inherited if o.s <= e < o.t) + \
                    sum(1 for o in chosen if o.box.s <= e < o.box.t)
                if n_e >= self.beta:
                    return False
            return True

        def evaluate():
            nonlocal best
            self._tick()
            singles = {pb.task: pb.box for pb in chosen if pb.task}
            value = sum((self.weights[t] for t in singles), Fraction(0))
            multi = fixed + [(pb.box, {e: pb.box.d for e in pb.box.edges})
                             for pb in chosen if not pb.task]
            free = [t for t in here if t.id not in singles]
            option_lists = []
            for bx, res in multi:
                cands = [t for t in free if bx.contains(t) and t.d <= self.small * bx.d]
                option_lists.append(self.profile_pool(bx, e0, cands, res))
            combos: list[list[StepProfile]] = [[]]
            for opts in option_lists:
                combos = [c + [p] for c in combos for p in opts][:4096]
            # single boxes stay visible to both children, including those over e0
            passed = [(bx, None) for bx, res in inherited if res is None]
            passed += [(bx, res) for bx, res in inherited
                       if res is not None and not (bx.s <= e0 < bx.t)]
            passed += [(pb.box, None) for pb in chosen if pb.task]
            for combo in combos:
                self._tick()
                if multi:
                    gained, assign = _fill_weighted(e0, combo, free, self.weights, (a, b))
                else:
                    gained, assign = Fraction(0), {}
                down = list(passed)
                for (bx, res), prof in zip(multi, combo):
                    down.append((bx, tuple(sorted((e, v - prof(e)) for e, v in res.items()))))
                left = _restrict([x for x in down if x[0].s < e0 and x[0].t > a], a, e0)
                right = _restrict([x for x in down if x[0].t > e0 + 1 and x[0].s < b], e0 + 1, b)
                lv, lmap = self.solve(a, e0, depth + 1, left)
                rv, rmap = self.solve(e0 + 1, b, depth + 1, right)
                total = value + gained + lv + rv
                if total > best[0]:
                    mapping = {t: (bx, "single") for t, bx in singles.items()}
                    for tid, k in assign.items():
                        mapping[tid] = (multi[k][0], "multi")
                    mapping.update(lmap)
                    mapping.update(rmap)
                    best = (total, mapping)

        def rec(k: int):
            evaluate()
            if count_e0 + len(chosen) >= self.beta:
                return
            for j in range(k, len(new_options)):
                pb = new_options[j]
                if boxes_ok(pb):
                    chosen.append(pb)
                    rec(j + 1)
                    chosen.pop()

        rec(0)
        self.memo[key] = best
        return best


def _restrict(entries, lo: int, hi: int) -> tuple:
    out = []
    for bx, res in entries:
        if res is None:
            out.append((bx, None))
        else:
            out.append((bx, tuple((e, v) for e, v in res if lo <= e < hi)))
    return tuple(sorted(out, key=lambda x: (x[0], x[1] is None, x[1] or ())))


def _fill_weighted(e0, profiles, tasks, weights, span):
    # fill_profiles_dp works on integer profits; scale the rescaled weights to integers
    denom = math.lcm(*[weights[t.id].denominator for t in tasks]) if tasks else 1
    proxy = [Task(t.id, t.s, t.t, t.d, int(weights[t.id] * denom)) for t in tasks]
    value, assign = fill_profiles_dp(e0, profiles, proxy, span)
    return Fraction(value, denom), assign


def solve_boxable_recursive(instance: SapInstance, beta: int, epsilon,
                            pool: Sequence[PoolBox] | None = None, smallness=None,
                            pool_size: int = 64, steps: int = 4, seed: int = 0,
                            max_evals: int = 50_000) -> Placement:
    """Best boxable placement found by recursing on middle edges.

    The search keeps a relaxed solution (per-box loads within the box size);
    the final placement shelf-packs each multi-task box and drops whatever
    does not fit, so the output is always feasible.  Boxes come from ``pool``
    (default: :func:`default_box_pool`).
    """
    eps = check_epsilon(epsilon)
    small = eps if smallness is None else Fraction(smallness)
    if pool is None:
        pool = default_box_pool(instance, eps, small)
    rec = _Recursion(instance, beta, eps, pool, small, pool_size, steps, seed, max_evals)
    try:
        _, mapping = rec.solve(0, instance.m, 0, ())
    except RefusalError as exc:
        raise RefusalError(str(exc), None) from None
    return _realise(instance, mapping, eps)


def _realise(instance: SapInstance, mapping: dict, eps) -> Placement:
    heights: dict[str, int] = {}
    per_box: dict[Box, list[Task]] = {}
    for tid, (bx, kind) in mapping.items():
        if kind == "single":
            heights[tid] = bx.h
        else:
            per_box.setdefault(bx, []).append(instance.task(tid))
    for bx in sorted(per_box):
        rel, _ = _shelf_place(bx, sorted(per_box[bx], key=lambda t: t.id), eps, drop=True)
        for tid, r in rel.items():
            heights[tid] = bx.h + r
    return Placement(heights)


def recursion_depth_bound(m: int) -> int:
    return math.ceil(math.log2(max(m, 1))) + 1
