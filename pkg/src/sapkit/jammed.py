"""Jammed solutions on uniform-capacity paths.

Small tasks sit above a baseline ``B`` and below the large tasks; a small task
is jammed when it is big compared with the free room left there on at least
one of its edges.  All solvers here are exact sweeps over a height set (all
integers by default, or the anchor sets).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from ._sweep import SweepModel, run_sweep
from .core import InputError, Placement, SapInstance, Task


def _frac(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**9)
    return Fraction(x)


def _uniform(instance: SapInstance) -> int:
    if not instance.is_uniform:
        raise InputError("jammed solvers need uniform capacities")
    return instance.capacities[0]


def is_large(task: Task, U: int, delta) -> bool:
    return task.d > _frac(delta) * U


@dataclass(frozen=True)
class PseudoProfile:
    """Free room ``u[e]`` above baseline ``B`` on each edge of ``edges``."""

    B: int
    edges: range
    u: tuple[int, ...]

    def __call__(self, e: int) -> int:
        return self.u[e - self.edges.start]


def pseudo_capacities(instance: SapInstance, large: Mapping[str, int],
                      edges: range | None = None, B: int = 0) -> PseudoProfile:
    """Room between ``B`` and the lowest large task above it, per edge.

    ``large`` maps large task ids to heights.  A large task may not straddle
    the line ``B`` on the subpath.
    """
    U = _uniform(instance)
    edges = range(instance.m) if edges is None else edges
    room = []
    for e in edges:
        best = U - B
        for tid, h in large.items():
            task = instance.task(tid)
            if not task.uses(e):
                continue
            if h < B < h + task.d:
                raise InputError(f"large task {tid} crosses the baseline {B} on edge {e}")
            if h >= B:
                best = min(best, h - B)
        room.append(best)
    return PseudoProfile(B, edges, tuple(room))


def is_jammed(task: Task, profile: PseudoProfile, delta_prime, h: int) -> bool:
    """Whether ``task`` at height ``h`` is jammed for ``profile``."""
    dp = _frac(delta_prime)
    if task.s < profile.edges.start or task.t > profile.edges.stop:
        return False
    if h < profile.B:
        return False
    if any(h + task.d > profile.B + profile(e) for e in task.edges):
        return False
    return any(task.d > dp * profile(e) for e in task.edges)


def b_simple_jammed_predicate(instance: SapInstance, delta, delta_prime, B: int):
    """Admissibility test for the restricted oracle (whole path, one baseline)."""
    U = _uniform(instance)

    def admissible(heights: Mapping[str, int]) -> bool:
        large = {}
        small = []
        for tid, h in heights.items():
            task = instance.task(tid)
            if is_large(task, U, delta):
                if h < B < h + task.d:
                    return False
                large[tid] = h
            else:
                small.append((task, h))
        if not small:
            return True
        profile = pseudo_capacities(instance, large, B=B)
        return all(is_jammed(task, profile, delta_prime, h) for task, h in small)

    return admissible


class _JammedModel(SweepModel):
    """Sweep state: active entries tagged ``("L", None)`` or ``("S", witnessed)``.

    ``extra`` is the baseline of the current segment.  A new segment (with any
    baseline from ``baselines``) may start only where no small task is active.
    """

    def __init__(self, instance, delta, delta_prime, heights, baselines, fixed_b=None):
        self.instance = instance
        self.U = _uniform(instance)
        self.delta = _frac(delta)
        self.dp = _frac(delta_prime)
        self.heights = sorted(set(h for h in heights if 0 <= h <= self.U))
        self.baselines = sorted(set(b for b in baselines if 0 <= b <= self.U))
        self.fixed_b = fixed_b
        self.by_id = {t.id: t for t in instance.tasks}

    def initial(self):
        return self.fixed_b

    def before_edge(self, edge, extra, active):
        if self.fixed_b is not None:
            return (extra,)
        if extra is not None and any(tag[0] == "S" for _, _, tag in active):
            return (extra,)
        return tuple(self.baselines)

    def options(self, task, edge, extra):
        if is_large(task, self.U, self.delta):
            return [(h, ("L", None)) for h in self.heights
                    if h + task.d <= self.U and not (h < extra < h + task.d)]
        return [(h, ("S", False)) for h in self.heights
                if h >= extra and h + task.d <= self.U]

    def at_edge(self, edge, extra, active):
        B = extra
        room = self.U - B
        for tid, h, tag in active:
            if tag[0] == "L":
                d = self.by_id[tid].d
                if h < B < h + d:
                    return ()
                if h >= B:
                    room = min(room, h - B)
        out = []
        for entry in active:
            tid, h, tag = entry
            if tag[0] == "S":
                d = self.by_id[tid].d
                if h + d > B + room:
                    return ()
                if not tag[1] and d > self.dp * room:
                    entry = (tid, h, ("S", True))
            out.append(entry)
        return ((extra, tuple(out), 0),)

    def may_leave(self, entry, extra):
        tag = entry[2]
        return tag[0] == "L" or tag[1]


def solve_b_simple_jammed(instance: SapInstance, delta, delta_prime, B: int,
                          height_set: Iterable[int] | None = None,
                          max_states: int = 200_000) -> Placement:
    """Most profitable placement whose small tasks are all jammed above ``B``.

    Exact over ``height_set`` (default: every height).  The jammed witness is
    carried as a per-task flag, so a small task is only accepted once some
    edge of its path has certified it.
    """
    U = _uniform(instance)
    if not 0 <= B <= U:
        raise InputError(f"baseline {B} outside [0, {U}]")
    heights = range(U + 1) if height_set is None else height_set
    model = _JammedModel(instance, delta, delta_prime, heights, (B,), fixed_b=B)
    return run_sweep(instance, instance.tasks, model, max_states=max_states).placement


@dataclass(frozen=True)
class AnchorSet:
    H: tuple[int, ...]
    levels: tuple[tuple[int, ...], ...]  # H_0, H_1, ...

    @property
    def heights(self) -> tuple[int, ...]:
        return self.levels[-1]


def anchor_heights(instance: SapInstance, delta, delta_prime, epsilon=None,
                   levels: int = 3) -> AnchorSet:
    """Discrete height candidates.

    H holds sums of at most ``floor(1/delta)`` task sizes (sizes may repeat),
    H_0 adds ``floor((1+delta')^k)`` offsets to H, and each further level
    subtracts one task size.  ``epsilon`` is accepted for interface symmetry.
    """
    U = _uniform(instance)
    delta, dp = _frac(delta), _frac(delta_prime)
    if not 0 < delta <= 1 or not 0 < dp <= 1:
        raise InputError("delta and delta_prime must lie in (0, 1]")
    if levels < 0:
        raise InputError("levels must be nonnegative")
    sizes = sorted({t.d for t in instance.tasks if t.d <= U})
    reach = {0}
    for _ in range(math.floor(1 / delta)):
        reach |= {h + d for h in reach for d in sizes if h + d <= U}
    H = tuple(sorted(reach))
    powers = set()
    p = Fraction(1)
    while p <= U:
        powers.add(math.floor(p))
        p *= 1 + dp
    layer = set(H) | {h + q for h in H for q in powers if h + q <= U}
    out = [tuple(sorted(layer))]
    for _ in range(levels):
        layer = layer | {h - d for h in layer for d in sizes if h - d >= 0}
        out.append(tuple(sorted(layer)))
    return AnchorSet(H, tuple(out))


def solve_jammed(instance: SapInstance, delta, delta_prime, epsilon=None,
                 anchors: AnchorSet | None = None, max_states: int = 400_000) -> Placement:
    """Most profitable jammed placement with per-segment baselines.

    The path is cut into consecutive segments, each with its own baseline; a
    cut may only fall where no small task crosses it.  Heights and baselines
    come from ``anchors`` when given, else every integer in [0, U].
    """
    U = _uniform(instance)
    heights = range(U + 1) if anchors is None else anchors.heights
    model = _JammedModel(instance, delta, delta_prime, heights, heights)
    return run_sweep(instance, instance.tasks, model, max_states=max_states).placement


def jammed_above_counts(instance: SapInstance, placement: Mapping[str, int], delta,
                        B: int) -> dict[str, int]:
    """For each small task, how many small tasks lie strictly above it on its tightest edge."""
    U = _uniform(instance)
    large = {}
    small = []
    for tid, h in placement.items():
        task = instance.task(tid)
        if is_large(task, U, delta):
            large[tid] = h
        else:
            small.append((task, h))
    profile = pseudo_capacities(instance, large, B=B)
    out = {}
    for task, h in small:
        tight = min(task.edges, key=lambda e: (profile(e), e))
        out[task.id] = sum(1 for other, h2 in small
                           if other.id != task.id and other.uses(tight) and h2 > h)
    return out


def best_baseline(instance: SapInstance, delta, delta_prime,
                  baselines: Sequence[int] | None = None) -> tuple[int, Placement]:
    """Try every baseline with :func:`solve_b_simple_jammed`; return the best."""
    U = _uniform(instance)
    best = (0, Placement())
    best_value = -1
    for B in (range(U + 1) if baselines is None else baselines):
        found = solve_b_simple_jammed(instance, delta, delta_prime, B)
        value = sum(instance.task(t).w for t in found)
        if value > best_value:
            best, best_value = (B, found), value
    return best


__all__ = [
    "AnchorSet", "PseudoProfile", "anchor_heights", "b_simple_jammed_predicate",
    "best_baseline", "is_jammed", "is_large", "jammed_above_counts",
    "pseudo_capacities", "solve_b_simple_jammed", "solve_jammed",
]
