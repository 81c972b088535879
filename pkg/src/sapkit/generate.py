"""Seeded instance generators, including planted instances with known structure.

A planted instance comes with a feasible placement built to match one of the
solution shapes (boxable, pile, laminar, jammed, stair) and a descriptor of
that structure.  Planted tasks are split into "large" and "small" parts the
way the matching solver's guarantee is stated.  A few decoy tasks that are
not part of the planted placement are mixed in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from ._rng import stream
from .core import InputError, Placement, SapInstance, Task, check_feasible

KINDS = ("uniform-random", "planted-boxable", "planted-pile", "planted-laminar",
         "planted-jammed", "planted-stair")

_DEFAULT_U = {"uniform-random": 10, "planted-boxable": 16, "planted-pile": 16,
              "planted-laminar": 16, "planted-jammed": 10, "planted-stair": 8}


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int = 6
    m: int = 5
    U: int | None = None
    seed: int = 0
    knobs: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InputError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 0:
            raise InputError("n must be nonnegative")
        if self.m < 1:
            raise InputError("m must be at least 1")
        if self.U is not None and self.U < 1:
            raise InputError("U must be positive")

    @property
    def capacity(self) -> int:
        return self.U if self.U is not None else _DEFAULT_U[self.kind]


@dataclass
class Generated:
    instance: SapInstance
    planted: Placement | None = None
    large: frozenset[str] = frozenset()
    small: frozenset[str] = frozenset()
    structure: dict = field(default_factory=dict)

    def planted_profit(self, part: str = "all") -> int:
        if self.planted is None:
            return 0
        ids = {"all": set(self.planted), "large": self.large, "small": self.small}[part]
        return sum(self.instance.task(t).w for t in ids if t in self.planted)


# ---------------------------------------------------------------- helpers


def _interval(rng: np.random.Generator, lo: int, hi: int, max_len: int | None = None):
    s = int(rng.integers(lo, hi))
    top = hi if max_len is None else min(hi, s + max_len)
    return s, int(rng.integers(s + 1, top + 1))


def _stack(rng, count: int, lo: int, hi: int, base: int, room: int, sizes=(1,),
           max_len: int | None = None) -> list[tuple[int, int, int, int]]:
    """Random tasks inside edges [lo, hi) stacked first-fit in heights [base, base+room)."""
    placed: list[tuple[int, int, int, int]] = []
    for _ in range(count):
        s, t = _interval(rng, lo, hi, max_len)
        d = int(rng.choice(sizes))
        for h in range(base, base + room - d + 1):
            if all(t <= s2 or t2 <= s or h + d <= h2 or h2 + d2 <= h
                   for s2, t2, d2, h2 in placed):
                placed.append((s, t, d, h))
                break
    return placed


class _Builder:
    def __init__(self, m: int, caps=None, U: int = 1):
        self.caps = list(caps) if caps is not None else [U] * m
        self.tasks: list[Task] = []
        self.heights: dict[str, int] = {}
        self.large: set[str] = set()
        self.small: set[str] = set()

    def add(self, s, t, d, w, h=None, part=None) -> str:
        tid = f"t{len(self.tasks)}"
        self.tasks.append(Task(tid, int(s), int(t), int(d), int(w)))
        if h is not None:
            self.heights[tid] = int(h)
            (self.large if part == "large" else self.small).add(tid)
        return tid

    def decoys(self, rng, count: int, max_d: int) -> None:
        m = len(self.caps)
        for _ in range(count):
            s, t = _interval(rng, 0, m)
            self.add(s, t, int(rng.integers(1, max_d + 1)), int(rng.integers(1, 4)))

    def build(self, structure: dict) -> Generated:
        inst = SapInstance(tuple(self.caps), tuple(self.tasks))
        planted = Placement(self.heights)
        verdict = check_feasible(inst, planted)
        if not verdict.ok:  # a generator bug, never an input problem
            raise AssertionError(f"planted placement infeasible: {verdict.violation}")
        return Generated(inst, planted, frozenset(self.large), frozenset(self.small), structure)


def _knob(spec: GenSpec, name: str, default):
    return spec.knobs.get(name, default)


# ---------------------------------------------------------------- kinds


def _uniform_random(spec: GenSpec, rng) -> Generated:
    U, m = spec.capacity, spec.m
    if _knob(spec, "capacities", "uniform") == "random":
        caps = [int(rng.integers(max(1, U // 2), U + 1)) for _ in range(m)]
    else:
        caps = [U] * m
    b = _Builder(m, caps)
    for _ in range(spec.n):
        s, t = _interval(rng, 0, m)
        cap = min(caps[s:t])
        b.add(s, t, int(rng.integers(1, cap + 1)), int(rng.integers(1, 11)))
    return Generated(SapInstance(tuple(caps), tuple(b.tasks)))


def _planted_boxable(spec: GenSpec, rng) -> Generated:
    """Small tasks in one full-height box on a prefix, large tasks stacked on the rest."""
    U, m = spec.capacity, max(spec.m, 2)
    eps = Fraction(_knob(spec, "epsilon", Fraction(1, 8)))
    b = _Builder(m, U=U)
    cut = int(rng.integers(1, m))
    small_d = max(1, int(eps * U))
    for s, t, d, h in _stack(rng, max(1, spec.n // 2), 0, cut, 0, U, range(1, small_d + 1)):
        b.add(s, t, d, int(rng.integers(1, 4)), h, "small")
    boxes = [{"s": 0, "t": cut, "d": U, "h": 0}]
    e = cut
    while e < m:
        s, t = e, int(rng.integers(e + 1, m + 1))
        d1 = int(rng.integers(U // 4 + 1, U // 2 + 1))
        d2 = int(rng.integers(U // 4 + 1, U - d1 + 1))
        for d, h in ((d1, 0), (d2, U - d2)):
            tid = b.add(s, t, d, int(rng.integers(3, 10)), h, "large")
            boxes.append({"s": s, "t": t, "d": d, "h": h, "task": tid})
        e = t
    b.decoys(rng, int(_knob(spec, "decoys", 2)), U)
    return b.build({"boxes": boxes, "cut": cut})


def _planted_pile(spec: GenSpec, rng) -> Generated:
    """Nested stack of k <= beta boxes of size U // k with unit tasks; large tasks beside it."""
    U, m = spec.capacity, max(spec.m, 2)
    beta = int(_knob(spec, "beta", 2))
    k = int(rng.integers(1, beta + 1))
    D = U // k
    b = _Builder(m, U=U)
    a0, b0 = _interval(rng, 0, m, max(1, m - 1))
    spans = [(a0, b0)]
    for _ in range(1, k):
        spans.append(_interval(rng, spans[-1][0], spans[-1][1]))
    per_box = max(1, spec.n // (2 * k))
    for j, (lo, hi) in enumerate(spans):
        for s, t, d, h in _stack(rng, per_box, lo, hi, j * D, D):
            b.add(s, t, d, int(rng.integers(1, 4)), h, "small")
    for lo, hi in ((0, a0), (b0, m)):
        if hi > lo:
            d1 = int(rng.integers(U // 4 + 1, U // 2 + 1))
            b.add(lo, hi, d1, int(rng.integers(3, 10)), U - d1, "large")
            d2 = int(rng.integers(U // 4 + 1, U - d1 + 1))
            b.add(lo, hi, d2, int(rng.integers(3, 10)), U - d1 - d2, "large")
    b.decoys(rng, int(_knob(spec, "decoys", 2)), U)
    boxes = [{"s": lo, "t": hi, "d": D, "h": j * D} for j, (lo, hi) in enumerate(spans)]
    return b.build({"pile": boxes, "beta": beta})


def _planted_laminar(spec: GenSpec, rng) -> Generated:
    """Root box (size 1) over a large floor task, two filled levels of sizes 2 and 3."""
    U, m = spec.capacity, max(spec.m, 2)
    b = _Builder(m, U=U)
    lo, hi = 0, m
    d_floor = int(rng.integers(U // 4 + 1, U // 2))
    root = d_floor
    b.add(lo, hi, d_floor, int(rng.integers(3, 10)), 0, "large")
    sizes = [1, 2, 3]
    spans = [(lo, hi)]
    for _ in range(2):
        spans.append(_interval(rng, spans[-1][0], spans[-1][1]))
    boxes, h = [], root
    for level, ((s0, t0), d) in enumerate(zip(spans, sizes)):
        boxes.append({"s": s0, "t": t0, "d": d, "h": h, "level": level})
        if level:
            for s, t, dd, hh in _stack(rng, max(1, spec.n // 4), s0, t0, h, d):
                b.add(s, t, dd, int(rng.integers(1, 4)), hh, "small")
        h += d
    free = U - h
    if free > U // 4:
        d_top = int(rng.integers(U // 4 + 1, free + 1))
        b.add(lo, hi, d_top, int(rng.integers(3, 10)), U - d_top, "large")
    b.decoys(rng, int(_knob(spec, "decoys", 2)), U)
    return b.build({"laminar": boxes, "root_height": root})


def _planted_jammed(spec: GenSpec, rng) -> Generated:
    """Baseline 0; per segment a large task at height r, small tasks of size > r/2 below it."""
    from .jammed import is_jammed, pseudo_capacities

    U, m = spec.capacity, max(spec.m, 1)
    b = _Builder(m, U=U)
    segments = []
    e = 0
    while e < m:
        t = int(rng.integers(e + 1, m + 1))
        r = int(rng.integers(U // 3 + 1, U // 2 + 2))
        b.add(e, t, U - r, int(rng.integers(3, 10)), r, "large")
        segments.append({"s": e, "t": t, "room": r})
        e = t
    inst_tmp = SapInstance(tuple(b.caps), tuple(b.tasks))
    profile = pseudo_capacities(inst_tmp, dict(b.heights), B=0)
    small_max = U // 3
    for s, t, d, h in _stack(rng, max(1, spec.n // 2), 0, m, 0, U, range(2, small_max + 1), 3):
        task = Task("probe", s, t, d, 1)
        if is_jammed(task, profile, Fraction(1, 2), h):
            b.add(s, t, d, int(rng.integers(1, 6)), h, "small")
    b.decoys(rng, int(_knob(spec, "decoys", 2)), U)
    return b.build({"baseline": 0, "segments": segments, "delta": "1/3", "delta_prime": "1/2"})


def _planted_stair(spec: GenSpec, rng) -> Generated:
    """One stair-block SB(0, 1, m-1): large tasks under their own size, small tasks across edge 1."""
    from .stair import StairBlock, block_to_dict, fitting_heights

    U, m = spec.capacity, max(spec.m, 3)
    caps = [int(rng.integers(3, 6)), U] + [int(rng.integers(U - 2, U + 1)) for _ in range(m - 2)]
    sb = StairBlock(0, 1, m - 1, tuple((e, 0) for e in range(2, m)))
    b = _Builder(m, caps)
    tries = max(2, spec.n)
    for _ in range(tries):
        large = bool(rng.integers(0, 2))
        if large:
            s = int(rng.integers(1, m - 1))
            t = int(rng.integers(s + 1, m))
            d, w = int(rng.integers(4, 7)), int(rng.integers(3, 10))
        else:
            s, t = 1, int(rng.integers(2, m + 1))
            d, w = int(rng.integers(1, 3)), int(rng.integers(1, 6))
        tid = b.add(s, t, d, w)
        inst = SapInstance(tuple(caps), tuple(b.tasks))
        task = inst.task(tid)
        for h in fitting_heights(inst, sb, task):
            trial = dict(b.heights)
            trial[tid] = h
            if check_feasible(inst, trial).ok:
                b.heights[tid] = h
                (b.large if large else b.small).add(tid)
                break
    b.decoys(rng, int(_knob(spec, "decoys", 1)), 2)
    return b.build({"block": block_to_dict(sb)})


_MAKERS = {
    "uniform-random": _uniform_random,
    "planted-boxable": _planted_boxable,
    "planted-pile": _planted_pile,
    "planted-laminar": _planted_laminar,
    "planted-jammed": _planted_jammed,
    "planted-stair": _planted_stair,
}


def generate_instance(spec: GenSpec) -> Generated:
    """Deterministic in ``spec``; planted placements are checked feasible."""
    rng = stream(spec.seed, "gen", spec.kind, spec.n, spec.m, spec.capacity)
    if spec.n == 0 and spec.kind == "uniform-random":
        return Generated(SapInstance(tuple([spec.capacity] * spec.m), ()))
    return _MAKERS[spec.kind](spec, rng)


def generated_to_dict(gen: Generated) -> dict:
    from .core import instance_to_dict, placement_to_dict

    out = {"instance": instance_to_dict(gen.instance)}
    if gen.planted is not None:
        out["planted"] = placement_to_dict(gen.planted)["heights"]
        out["large"] = sorted(gen.large)
        out["small"] = sorted(gen.small)
        out["structure"] = gen.structure
    return out


__all__ = ["GenSpec", "Generated", "KINDS", "generate_instance", "generated_to_dict"]
