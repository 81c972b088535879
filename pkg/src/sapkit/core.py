"""Instances, placements and the feasibility rules everything else is checked against.

A path has edges ``0..m-1``; edge ``j`` joins vertices ``j`` and ``j+1``.  A task
with ``s`` and ``t`` occupies the half-open edge range ``[s, t)``.  A placement
gives each selected task an integer height; the task then occupies the
rectangle ``[s, t) x [h, h + d)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping


class InputError(ValueError):
    """Malformed instance, placement, or an id that does not exist."""


class RefusalError(RuntimeError):
    """A solver declined to finish within its limits.

    ``partial`` carries the best placement found before giving up, if any.
    Exact solvers never attach one, so a refusal is never mistaken for an answer.
    """

    def __init__(self, message: str, partial: "Placement | None" = None) -> None:
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True, order=True)
class Task:
    id: str
    s: int
    t: int
    d: int
    w: int

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise InputError(f"task id must be a non-empty string, got {self.id!r}")
        for name in ("s", "t", "d", "w"):
            if not isinstance(getattr(self, name), int) or isinstance(getattr(self, name), bool):
                raise InputError(f"task {self.id}: {name} must be an integer")
        if not 0 <= self.s < self.t:
            raise InputError(f"task {self.id}: need 0 <= s < t, got s={self.s}, t={self.t}")
        if self.d < 1:
            raise InputError(f"task {self.id}: size must be positive")
        if self.w < 0:
            raise InputError(f"task {self.id}: profit must be nonnegative")

    @property
    def edges(self) -> range:
        return range(self.s, self.t)

    def uses(self, edge: int) -> bool:
        return self.s <= edge < self.t

    def shares_edge(self, other: "Task") -> bool:
        return self.s < other.t and other.s < self.t


@dataclass(frozen=True)
class SapInstance:
    capacities: tuple[int, ...]
    tasks: tuple[Task, ...]
    _by_id: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        caps = tuple(self.capacities)
        tasks = tuple(self.tasks)
        object.__setattr__(self, "capacities", caps)
        object.__setattr__(self, "tasks", tasks)
        if not caps:
            raise InputError("an instance needs at least one edge")
        for u in caps:
            if not isinstance(u, int) or isinstance(u, bool) or u < 1:
                raise InputError(f"capacities must be positive integers, got {u!r}")
        by_id: dict[str, Task] = {}
        for task in tasks:
            if task.t > len(caps):
                raise InputError(f"task {task.id} ends at vertex {task.t} beyond the path")
            if task.id in by_id:
                raise InputError(f"duplicate task id {task.id!r}")
            by_id[task.id] = task
        object.__setattr__(self, "_by_id", by_id)

    @property
    def m(self) -> int:
        return len(self.capacities)

    @property
    def n(self) -> int:
        return len(self.tasks)

    @property
    def max_capacity(self) -> int:
        return max(self.capacities)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.capacities)) == 1

    def task(self, task_id: str) -> Task:
        try:
            return self._by_id[task_id]
        except KeyError:
            raise InputError(f"unknown task id {task_id!r}") from None

    def __contains__(self, task_id: object) -> bool:
        return task_id in self._by_id

    def restrict(self, tasks: Iterable[Task]) -> "SapInstance":
        """Same path, a subset of the tasks."""
        return SapInstance(self.capacities, tuple(tasks))


def bottleneck(instance: SapInstance, task: Task) -> int:
    """Smallest capacity on the task's path."""
    return min(instance.capacities[task.s:task.t])


class Placement(Mapping[str, int]):
    """Immutable map from task id to integer height."""

    __slots__ = ("_heights",)

    def __init__(self, heights: Mapping[str, int] | Iterable[tuple[str, int]] = ()) -> None:
        items = dict(heights)
        for tid, h in items.items():
            if not isinstance(h, int) or isinstance(h, bool) or h < 0:
                raise InputError(f"height of {tid!r} must be a nonnegative integer, got {h!r}")
        self._heights = dict(sorted(items.items()))

    def __getitem__(self, key: str) -> int:
        return self._heights[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._heights)

    def __len__(self) -> int:
        return len(self._heights)

    def __repr__(self) -> str:
        return f"Placement({self._heights!r})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Placement):
            return self._heights == other._heights
        if isinstance(other, Mapping):
            return self._heights == dict(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._heights.items()))

    def merged(self, other: Mapping[str, int]) -> "Placement":
        both = dict(self._heights)
        for tid, h in other.items():
            if tid in both and both[tid] != h:
                raise InputError(f"task {tid!r} placed at two heights")
            both[tid] = h
        return Placement(both)

    def without(self, ids: Iterable[str]) -> "Placement":
        drop = set(ids)
        return Placement({k: v for k, v in self._heights.items() if k not in drop})


EMPTY = Placement()


@dataclass(frozen=True)
class Violation:
    """Why a placement is infeasible.

    ``kind`` is ``"capacity"`` (a single task pokes above an edge capacity) or
    ``"overlap"`` (two rectangles intersect).  ``edge`` is the first edge where
    it happens.
    """

    kind: str
    tasks: tuple[str, ...]
    edge: int

    def __str__(self) -> str:
        who = " and ".join(self.tasks)
        return f"{self.kind} violation by {who} on edge {self.edge}"


@dataclass(frozen=True)
class Verdict:
    violation: Violation | None = None

    @property
    def ok(self) -> bool:
        return self.violation is None

    def __bool__(self) -> bool:
        return self.ok


def check_feasible(instance: SapInstance, placement: Mapping[str, int]) -> Verdict:
    """Check capacities and pairwise disjointness.

    Capacity violations are reported before overlaps.  Within a kind the
    offender is the lexicographically smallest id (pair), so the verdict is
    deterministic.
    """
    placed = sorted(((instance.task(tid), h) for tid, h in placement.items()),
                    key=lambda th: th[0].id)
    for task, h in placed:
        for e in task.edges:
            if h + task.d > instance.capacities[e]:
                return Verdict(Violation("capacity", (task.id,), e))
    for a in range(len(placed)):
        ta, ha = placed[a]
        for b in range(a + 1, len(placed)):
            tb, hb = placed[b]
            if ta.shares_edge(tb) and ha < hb + tb.d and hb < ha + ta.d:
                return Verdict(Violation("overlap", (ta.id, tb.id), max(ta.s, tb.s)))
    return Verdict()


def profit(instance: SapInstance, placement: Mapping[str, int]) -> int:
    return sum(instance.task(tid).w for tid in placement)


def edge_loads(instance: SapInstance, task_ids: Iterable[str]) -> list[int]:
    """Total size crossing each edge (the flow relaxation's left-hand side)."""
    load = [0] * instance.m
    for tid in task_ids:
        task = instance.task(tid)
        for e in task.edges:
            load[e] += task.d
    return load


# ---------------------------------------------------------------- file formats


def instance_to_dict(instance: SapInstance) -> dict:
    return {
        "capacities": list(instance.capacities),
        "tasks": [
            {"id": t.id, "s": t.s, "t": t.t, "d": t.d, "w": t.w} for t in instance.tasks
        ],
    }


def instance_from_dict(data: Mapping) -> SapInstance:
    if not isinstance(data, Mapping) or set(data) != {"capacities", "tasks"}:
        raise InputError('instance JSON needs exactly the keys "capacities" and "tasks"')
    tasks = []
    for raw in data["tasks"]:
        if not isinstance(raw, Mapping) or set(raw) != {"id", "s", "t", "d", "w"}:
            raise InputError(f"task entries need keys id, s, t, d, w; got {raw!r}")
        tasks.append(Task(raw["id"], raw["s"], raw["t"], raw["d"], raw["w"]))
    return SapInstance(tuple(data["capacities"]), tuple(tasks))


def placement_to_dict(placement: Mapping[str, int]) -> dict:
    return {"heights": {tid: placement[tid] for tid in sorted(placement)}}


def placement_from_dict(data: Mapping) -> Placement:
    if not isinstance(data, Mapping) or set(data) != {"heights"}:
        raise InputError('placement JSON needs exactly the key "heights"')
    return Placement(data["heights"])


def dumps(obj: dict) -> str:
    """Canonical JSON text: compact separators, stable key order from the dict."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def load_instance(path: str | Path) -> SapInstance:
    return instance_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_instance(instance: SapInstance, path: str | Path) -> None:
    Path(path).write_text(dumps(instance_to_dict(instance)) + "\n", encoding="utf-8")


def load_placement(path: str | Path) -> Placement:
    return placement_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_placement(placement: Mapping[str, int], path: str | Path) -> None:
    Path(path).write_text(dumps(placement_to_dict(placement)) + "\n", encoding="utf-8")
