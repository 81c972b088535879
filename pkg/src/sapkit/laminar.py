"""Laminar boxable solutions on uniform-capacity paths.

A laminar family is a tree of boxes: the root (level 0) spans a subpath at
height ``h_root``, every box of level ``l+1`` sits directly on top of a level
``l`` box whose path contains its own, and the box of level ``l`` has size
``sizes[l]``.  Small tasks are packed into the boxes, large tasks go
anywhere outside the family's column.

The solver sweeps the path left to right keeping the chain of open boxes in
the state.  A box is filled when it is opened, excluding the tasks already
given to its ancestors in the same level group; the random bits of a fill
are a function of the box alone.  Copies of a task in boxes of different
groups are removed at the end, keeping the lower group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from ._rng import stream
from ._sweep import SweepModel, run_sweep
from .boxes import Box, _eps, fill_single_box
from .core import InputError, Placement, SapInstance, profit

DEFAULT_DELTA = Fraction(1, 4)
DEFAULT_SMALLNESS = Fraction(1, 2)


def box_sizes(U: int, epsilon) -> list[int]:
    """Distinct values of ``floor((1+eps)^k)`` up to ``U``, in increasing order."""
    eps = _eps(epsilon)
    out: list[int] = []
    p = Fraction(1)
    while p <= U:
        v = math.floor(p)
        if not out or v > out[-1]:
            out.append(v)
        p *= 1 + eps
    return out


@dataclass(frozen=True)
class LevelGroups:
    """Which levels keep their tasks, and the group of each kept level."""

    alpha: int
    period: int
    gap: int

    def kept(self, level: int) -> bool:
        return (level - self.alpha) % self.period >= self.gap

    def group(self, level: int) -> int:
        return (level - self.alpha) // self.period


def _period_gap(epsilon) -> tuple[int, int]:
    eps = _eps(epsilon)
    inv = eps.denominator // eps.numerator
    return inv * inv, inv


def level_offset_filter(weights: Mapping[int, float], epsilon) -> tuple[int, set[int]]:
    """Offset maximising the weight of kept levels, and the kept levels among ``weights``.

    Each level is dropped for ``1/eps`` of the ``1/eps^2`` offsets, so the
    best offset keeps at least ``(1 - eps)`` of the total.
    """
    period, gap = _period_gap(epsilon)
    best_alpha, best_w = 0, None
    for alpha in range(period):
        g = LevelGroups(alpha, period, gap)
        w = sum(v for lvl, v in weights.items() if g.kept(lvl))
        if best_w is None or w > best_w:
            best_alpha, best_w = alpha, w
    g = LevelGroups(best_alpha, period, gap)
    kept = {lvl for lvl in weights if g.kept(lvl)}
    total = sum(weights.values())
    if best_w is not None and best_w < (1 - float(_eps(epsilon))) * total - 1e-9:
        raise AssertionError("offset filter kept less than (1 - eps) of the weight")
    return best_alpha, kept


def _uniform(instance: SapInstance) -> int:
    if not instance.is_uniform:
        raise InputError("laminar solvers need uniform capacities")
    return instance.capacities[0]


def root_heights(U: int, sizes: Iterable[int], delta=DEFAULT_DELTA) -> list[int]:
    """Sums of at most ``floor(1/delta)`` large sizes (large tasks pushed down under the root)."""
    sizes = sorted(set(sizes))
    sums = {0}
    for _ in range(math.floor(1 / Fraction(delta))):
        sums |= {a + d for a in sums for d in sizes if a + d <= U}
    return sorted(sums)


def _prefix(sizes: Sequence[int]) -> list[int]:
    out = [0]
    for d in sizes:
        out.append(out[-1] + d)
    return out


# open box: (start, end, level); the chain lists open boxes from the root up
Chain = tuple[tuple[int, int, int], ...]


class _Filler:
    """Memoised box fills keyed by the chain of open boxes ending in that box."""

    def __init__(self, instance, small, groups, sizes, epsilon, smallness, seed, seeds):
        self.instance = instance
        self.small = sorted(small, key=lambda t: t.id)
        self.groups = groups
        self.sizes = sizes
        self.eps = _eps(epsilon)
        self.smallness = Fraction(smallness)
        self.seed = seed
        self.seeds = seeds
        self.memo: dict[Chain, dict[str, int]] = {}

    def fill(self, chain: Chain) -> dict[str, int]:
        if chain in self.memo:
            return self.memo[chain]
        s, t, level = chain[-1]
        out: dict[str, int] = {}
        if self.groups.kept(level):
            excluded: set[str] = set()
            for k in range(len(chain) - 1):
                lvl = chain[k][2]
                if self.groups.kept(lvl) and self.groups.group(lvl) == self.groups.group(level):
                    excluded.update(self.fill(chain[:k + 1]))
            d = self.sizes[level]
            box = Box(s, t, d)
            cands = [x for x in self.small if x.id not in excluded and box.contains(x)
                     and x.d <= self.smallness * d]
            if cands:
                base = int(stream(self.seed, "laminar-box", s, t, level).integers(2**30))
                out = fill_single_box(box, cands, self.eps, self.smallness,
                                      seeds=self.seeds, base_seed=base)
        self.memo[chain] = out
        return out


class _LaminarSweep(SweepModel):
    """Extra: (root height or -1, open chain, families used)."""

    def __init__(self, U, sizes, starts, ends, roots, filler, cap, heights, useful):
        self.U = U
        self.heights = heights
        self.useful = useful
        self.sizes = sizes
        self.stack = _prefix(sizes)
        self.starts = set(starts)
        self.ends = sorted(ends)
        self.roots = roots
        self.filler = filler
        self.cap = cap
        self.value: dict[Chain, int] = {}

    def _value(self, chain: Chain) -> int:
        if chain not in self.value:
            self.value[chain] = profit(self.filler.instance, self.filler.fill(chain))
        return self.value[chain]

    def initial(self):
        return (-1, (), 0)

    def _grow(self, edge, root, chain):
        """Every way of pushing further boxes starting at ``edge`` on top of ``chain``."""
        yield chain
        if edge not in self.starts:
            return
        level = len(chain)
        if level >= len(self.sizes) or root + self.stack[level + 1] > self.U:
            return
        limit = chain[-1][1] if chain else None
        for end in self.ends:
            if end <= edge or (limit is not None and end > limit):
                continue
            if not self.useful(edge, end):
                continue
            yield from self._grow(edge, root, chain + ((edge, end, level),))

    def before_edge(self, edge, extra, active):
        root, chain, used = extra
        chain = tuple(b for b in chain if b[1] > edge)
        if not chain:
            root = -1
        out = []
        if root >= 0:
            out.extend((root, c, used) for c in self._grow(edge, root, chain))
        else:
            out.append((-1, (), used))
            if used < self.cap:
                for r in self.roots:
                    for c in self._grow(edge, r, ()):
                        if c:
                            out.append((r, c, used + 1 if self.cap == 1 else 0))
        return out

    def options(self, task, edge, extra):
        out = [h for h in self.heights if h + task.d <= self.U]
        out += [self.U - task.d - x for x in self.heights if self.U - task.d - x >= 0]
        return [(h, None) for h in sorted(set(out))]

    def at_edge(self, edge, extra, active):
        root, chain, _ = extra
        bonus = 0
        if chain:
            top = root + self.stack[len(chain)]
            for tid, h, _ in active:
                if h < top and root < h + self.filler.instance.task(tid).d:
                    return ()
            for k, box in enumerate(chain):
                if box[0] == edge:
                    bonus += self._value(chain[:k + 1])
        return ((extra, active, bonus),)


def _assemble(instance, filler: _Filler, sizes, trail) -> dict[str, int]:
    stack = _prefix(sizes)
    boxes: dict[tuple[int, Chain], None] = {}
    for root, chain, _ in trail:
        for k in range(len(chain)):
            boxes[(root, chain[:k + 1])] = None
    order = sorted(boxes, key=lambda rc: (filler.groups.group(rc[1][-1][2]), rc[1][-1][2], rc))
    out: dict[str, int] = {}
    for root, chain in order:
        level = chain[-1][2]
        base = root + stack[level]
        for tid, rel in filler.fill(chain).items():
            if tid not in out:
                out[tid] = base + rel
    return out


@dataclass(frozen=True)
class LaminarBoxSet:
    """One family: ``boxes[k]`` has level ``levels[k]`` and parent index ``parents[k]``."""

    boxes: tuple[Box, ...]
    levels: tuple[int, ...]
    parents: tuple[int | None, ...]
    alpha_level: int = 0

    def __post_init__(self) -> None:
        if not (len(self.boxes) == len(self.levels) == len(self.parents)):
            raise InputError("boxes, levels and parents must have equal length")
        roots = [k for k, p in enumerate(self.parents) if p is None]
        if len(roots) != 1 or self.levels[roots[0]] != 0:
            raise InputError("a laminar family has exactly one root, at level 0")
        for k, p in enumerate(self.parents):
            if p is None:
                continue
            box, up = self.boxes[k], self.boxes[p]
            if self.levels[k] != self.levels[p] + 1:
                raise InputError("child level must be parent level + 1")
            if not (up.s <= box.s and box.t <= up.t):
                raise InputError("child path must lie inside the parent path")
            if box.h != up.h + up.d:
                raise InputError("child must sit directly on its parent")
        for a in range(len(self.boxes)):
            for b in range(a + 1, len(self.boxes)):
                x, y = self.boxes[a], self.boxes[b]
                disjoint = x.t <= y.s or y.t <= x.s
                nested = (x.s <= y.s and y.t <= x.t) or (y.s <= x.s and x.t <= y.t)
                if not (disjoint or nested):
                    raise InputError("box paths are not laminar")

    @property
    def root(self) -> Box:
        return self.boxes[self.parents.index(None)]


def families_from_trail(trail, sizes, alpha_level: int = 0) -> list[LaminarBoxSet]:
    """Laminar families (absolute heights) recorded in a sweep trail."""
    stack = _prefix(sizes)
    per_root: dict[tuple, dict[Chain, None]] = {}
    for root, chain, _ in trail:
        if not chain:
            continue
        fam = per_root.setdefault((root, chain[0]), {})
        for k in range(len(chain)):
            fam[chain[:k + 1]] = None
    out = []
    for (root, _), fam in per_root.items():
        chains = list(fam)
        index = {c: k for k, c in enumerate(chains)}
        boxes = tuple(Box(c[-1][0], c[-1][1], sizes[c[-1][2]], root + stack[c[-1][2]])
                      for c in chains)
        out.append(LaminarBoxSet(boxes, tuple(c[-1][2] for c in chains),
                                 tuple(index[c[:-1]] if len(c) > 1 else None for c in chains),
                                 alpha_level))
    return out


@dataclass
class LaminarResult:
    placement: Placement
    families: list[LaminarBoxSet]
    alpha_level: int


def _solve(instance, epsilon, delta, seed, cap, smallness, seeds, max_states,
           alphas: Sequence[int] | None):
    U = _uniform(instance)
    delta = Fraction(delta)
    large = [t for t in instance.tasks if t.d > delta * U]
    small = [t for t in instance.tasks if t.d <= delta * U]
    sizes = box_sizes(U, epsilon)
    stack_top = 0
    depth = 0
    for d in sizes:
        if stack_top + d > U:
            break
        stack_top += d
        depth += 1
    sizes = sizes[:depth]
    starts = {t.s for t in small}
    ends = {t.t for t in small}
    roots = root_heights(U, [t.d for t in large], delta)
    # large tasks are pushed down onto the floor or up against the ceiling
    limit = Fraction(smallness) * sizes[-1] if sizes else 0

    def useful(a: int, b: int) -> bool:
        return any(a <= t.s and t.t <= b and t.d <= limit for t in small)

    period, gap = _period_gap(epsilon)
    # offsets that differ only on levels beyond the reachable depth behave alike
    signatures = {}
    for alpha in (range(period) if alphas is None else alphas):
        g = LevelGroups(alpha, period, gap)
        sig = tuple((g.kept(l), g.group(l) if g.kept(l) else None) for l in range(depth))
        signatures.setdefault(sig, alpha)
    best, best_value = LaminarResult(Placement(), [], 0), -1
    for alpha in sorted(signatures.values()):
        groups = LevelGroups(alpha, period, gap)
        filler = _Filler(instance, small, groups, sizes, epsilon, smallness, seed, seeds)
        model = _LaminarSweep(U, sizes, starts, ends, roots, filler, cap, roots, useful)
        res = run_sweep(instance, large, model, max_states=max_states)
        heights = dict(res.placement)
        heights.update(_assemble(instance, filler, sizes, res.trail))
        value = profit(instance, heights)
        if value > best_value:
            fams = families_from_trail(res.trail, sizes, alpha)
            best, best_value = LaminarResult(Placement(heights), fams, alpha), value
    return best


def solve_laminar(instance: SapInstance, epsilon, delta=DEFAULT_DELTA, seed: int = 0,
                  smallness=DEFAULT_SMALLNESS, seeds: int = 4, max_states: int = 200_000,
                  alphas: Sequence[int] | None = None) -> Placement:
    """One laminar family plus large tasks outside its column."""
    return _solve(instance, epsilon, delta, seed, 1, smallness, seeds, max_states,
                  alphas).placement


def solve_laminar_general(instance: SapInstance, epsilon, delta=DEFAULT_DELTA, seed: int = 0,
                          smallness=DEFAULT_SMALLNESS, seeds: int = 4,
                          max_states: int = 200_000,
                          alphas: Sequence[int] | None = None) -> Placement:
    """Laminar families on disjoint subpaths plus large tasks."""
    return _solve(instance, epsilon, delta, seed, instance.m, smallness, seeds, max_states,
                  alphas).placement


def solve_laminar_detailed(instance: SapInstance, epsilon, delta=DEFAULT_DELTA, seed: int = 0,
                           smallness=DEFAULT_SMALLNESS, seeds: int = 4,
                           max_states: int = 200_000, general: bool = False) -> LaminarResult:
    """Like the solvers above but also returns the chosen families."""
    cap = instance.m if general else 1
    return _solve(instance, epsilon, delta, seed, cap, smallness, seeds, max_states, None)


__all__ = [
    "LaminarBoxSet", "LaminarResult", "LevelGroups", "box_sizes", "families_from_trail", "level_offset_filter", "root_heights",
    "solve_laminar", "solve_laminar_detailed", "solve_laminar_general",
]
