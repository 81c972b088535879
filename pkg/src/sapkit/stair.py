"""Stair-blocks: a configuration LP, its rounding, and composition of blocks.

A stair-block reserves two regions next to an edge ``e_M``.  Large tasks live
on the edges between ``e_M`` and ``e_R`` (either side of ``e_M``), between a
step function ``f`` and ``u_{e_M}``, each below its own size (``h < d``).
Small tasks cross ``e_M`` and sit at or above ``u_{e_L}``.  Fixed large tasks
(``T'_L``) belong to the block with prescribed heights.

Heights and LP points are integers: a point ``(e, t)`` is the unit cell
``[t, t+1)`` above edge ``e``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import lp
from ._rng import stream
from ._sweep import SweepModel, run_sweep
from .boxes import dependent_round
from .core import (InputError, Placement, SapInstance, Task, bottleneck, check_feasible,
                   profit)

DEFAULT_DELTA = Fraction(3, 8)


def _frac(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**9)
    return Fraction(x)


@dataclass(frozen=True)
class StairBlock:
    """``f`` is stored as ``(edge, value)`` pairs; unlisted edges read ``u_{e_L}``."""

    e_L: int
    e_M: int
    e_R: int
    f: tuple[tuple[int, int], ...] = ()
    fixed: tuple[tuple[str, int], ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        if self.e_L == self.e_M:
            raise InputError("e_L and e_M must differ")
        if (self.e_R - self.e_M) * (self.e_M - self.e_L) < 0:
            raise InputError("e_L and e_R must lie on opposite sides of e_M")
        object.__setattr__(self, "f", tuple(sorted(self.f)))
        object.__setattr__(self, "fixed", tuple(sorted(self.fixed)))

    @property
    def mirrored(self) -> bool:
        return self.e_L > self.e_M

    @property
    def right_path(self) -> range:
        """Edges from ``e_M`` to ``e_R`` inclusive."""
        return range(min(self.e_M, self.e_R), max(self.e_M, self.e_R) + 1)

    @property
    def path(self) -> range:
        """P(SB): from the edge next to ``e_L`` (towards ``e_M``) through ``e_R``."""
        if self.mirrored:
            return range(self.e_R, self.e_L)
        return range(self.e_L + 1, self.e_R + 1)

    @property
    def fixed_ids(self) -> frozenset[str]:
        return frozenset(tid for tid, _ in self.fixed)

    def f_at(self, instance: SapInstance, e: int) -> int:
        for edge, value in self.f:
            if edge == e:
                return value
        return instance.capacities[self.e_L]

    def steps(self, instance: SapInstance) -> int:
        vals = [self.f_at(instance, e) for e in self.path]
        return sum(1 for a, b in zip(vals, vals[1:]) if a != b) + 1 if vals else 0

    def label(self) -> str:
        return self.name or f"SB({self.e_L},{self.e_M},{self.e_R})"


def block_to_dict(sb: StairBlock) -> dict:
    return {"e_L": sb.e_L, "e_M": sb.e_M, "e_R": sb.e_R,
            "f": [[e, v] for e, v in sb.f], "fixed": [[t, h] for t, h in sb.fixed],
            "name": sb.name}


def block_from_dict(data: Mapping) -> StairBlock:
    return StairBlock(int(data["e_L"]), int(data["e_M"]), int(data["e_R"]),
                      tuple((int(e), int(v)) for e, v in data.get("f", ())),
                      tuple((str(t), int(h)) for t, h in data.get("fixed", ())),
                      str(data.get("name", "")))


def is_large(instance: SapInstance, task: Task, delta=DEFAULT_DELTA) -> bool:
    return task.d > _frac(delta) * bottleneck(instance, task)


def _fixed_tasks(instance: SapInstance, sb: StairBlock) -> list[tuple[Task, int]]:
    return [(instance.task(tid), h) for tid, h in sb.fixed]


def _clear_of(task: Task, h: int, placed: Iterable[tuple[Task, int]]) -> bool:
    for other, h2 in placed:
        if other.id != task.id and task.shares_edge(other) and h < h2 + other.d and h2 < h + task.d:
            return False
    return True


def fitting_heights(instance: SapInstance, sb: StairBlock, task: Task,
                    delta=DEFAULT_DELTA) -> list[int]:
    """Heights at which ``task`` alone fits into ``sb`` (next to its fixed tasks)."""
    if task.id in sb.fixed_ids:
        return []
    b = bottleneck(instance, task)
    fixed = _fixed_tasks(instance, sb)
    if is_large(instance, task, delta):
        rp = sb.right_path
        if task.s < rp.start or task.t > rp.stop:
            return []
        lo = max(sb.f_at(instance, e) for e in task.edges)
        hi = min(instance.capacities[sb.e_M] - task.d, task.d - 1, b - task.d)
        heights = range(lo, hi + 1)
    else:
        if not task.uses(sb.e_M):
            return []
        heights = range(instance.capacities[sb.e_L], b - task.d + 1)
    return [h for h in heights if _clear_of(task, h, fixed)]


def fits_into_stair_block(instance: SapInstance, sb: StairBlock,
                          heights: Mapping[str, int], delta=DEFAULT_DELTA) -> bool:
    """Whether the placement ``heights`` fits into ``sb`` together with its fixed tasks."""
    for tid, h in heights.items():
        task = instance.task(tid)
        if h not in fitting_heights(instance, sb, task, delta):
            return False
    union = dict(sb.fixed)
    union.update(heights)
    return check_feasible(instance, union).ok


def _cells(task: Task, h: int, edges: range) -> list[tuple[int, int]]:
    return [(e, t) for e in task.edges if e in edges for t in range(h, h + task.d)]


@dataclass(frozen=True)
class Configuration:
    """Large tasks with heights; ``weight`` is their total profit."""

    items: tuple[tuple[str, int], ...]
    weight: int

    def cells(self, instance: SapInstance, edges: range) -> set[tuple[int, int]]:
        out = set()
        for tid, h in self.items:
            out.update(_cells(instance.task(tid), h, edges))
        return out


@dataclass
class StairLpSolution:
    status: str
    objective: float = 0.0
    y: dict[Configuration, float] = field(default_factory=dict)
    x: dict[tuple[str, int], float] = field(default_factory=dict)
    columns: int = 0
    rounds: int = 0
    history: list[float] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == lp.OPTIMAL


class _BlockData:
    """Candidates of one block split into large / small with their admissible heights."""

    def __init__(self, instance: SapInstance, sb: StairBlock, candidates: Iterable[Task],
                 delta) -> None:
        self.instance = instance
        self.sb = sb
        self.delta = _frac(delta)
        self.edges = sb.right_path
        self.large: dict[str, list[int]] = {}
        self.small: dict[str, list[int]] = {}
        for task in sorted(candidates, key=lambda t: t.id):
            hs = fitting_heights(instance, sb, task, delta)
            if not hs:
                continue
            (self.large if is_large(instance, task, delta) else self.small)[task.id] = hs
        self.large_cells: set[tuple[int, int]] = set()
        for tid, hs in self.large.items():
            for h in hs:
                self.large_cells.update(_cells(instance.task(tid), h, self.edges))

    def task(self, tid: str) -> Task:
        return self.instance.task(tid)


def _point(e, t):
    return f"pt[{e},{t}]"


def _pos(e, t, j):
    return f"pos[{e},{t},{j}]"


def _xvar(j, t):
    return f"x[{j},{t}]"


def _base_model(data: _BlockData, with_configurations: bool) -> lp.LpModel:
    model = lp.LpModel("max", exact=False, name="stair-lp")
    point_rows: dict[tuple[int, int], dict[str, float]] = {}
    small_rows: dict[str, dict[str, float]] = {}
    for j, hs in data.small.items():
        task = data.task(j)
        for t in hs:
            v = model.add_variable(_xvar(j, t), task.w)
            small_rows.setdefault(j, {})[v] = 1
            for cell in _cells(task, t, data.edges):
                point_rows.setdefault(cell, {})[v] = 1
    if with_configurations:
        model.add_variable("y[artificial]", -(1 + sum(data.task(t).w for t in data.large)
                                              + sum(data.task(t).w for t in data.small)))
        for cell in data.large_cells:
            point_rows.setdefault(cell, {})
    for (e, t), row in sorted(point_rows.items()):
        model.add_constraint(_point(e, t), row, "<=", 1)
    if with_configurations:
        for (e, t) in sorted(data.large_cells):
            for j, hs in data.small.items():
                if not data.task(j).uses(e):
                    continue
                row = {_xvar(j, t2): 1 for t2 in hs if t2 <= t}
                model.add_constraint(_pos(e, t, j), row, "<=", 1)
        model.add_constraint("conf", {"y[artificial]": 1}, "=", 1)
    for j, row in sorted(small_rows.items()):
        model.add_constraint(f"small[{j}]", row, "<=", 1)
    return model


def _column(data: _BlockData, config: Configuration) -> dict[str, float]:
    coeffs: dict[str, float] = {"conf": 1}
    for (e, t) in config.cells(data.instance, data.edges):
        coeffs[_point(e, t)] = 1
        for j in data.small:
            if data.task(j).uses(e):
                coeffs[_pos(e, t, j)] = 1
    return coeffs


def _cell_costs(data: _BlockData, dual: Mapping[str, float]) -> dict[tuple[int, int], float]:
    costs = {}
    for (e, t) in data.large_cells:
        c = dual.get(_point(e, t), 0.0)
        for j in data.small:
            if data.task(j).uses(e):
                c += dual.get(_pos(e, t, j), 0.0)
        costs[(e, t)] = c
    return costs


class _PricingModel(SweepModel):
    """Large tasks only; ``extra`` is the running configuration weight."""

    def __init__(self, data: _BlockData, costs, W: Fraction, epsilon: Fraction) -> None:
        self.data = data
        self.costs = costs
        self.lo = W
        self.hi = (1 + epsilon) * W

    def initial(self):
        return 0

    def options(self, task, edge, extra):
        return [(h, None) for h in self.data.large.get(task.id, ())]

    def at_edge(self, edge, extra, active):
        weight = extra
        bonus = 0.0
        for tid, h, _ in active:
            task = self.data.task(tid)
            if task.s == edge:
                weight += task.w
            if edge in self.data.edges:
                bonus -= sum(self.costs.get((edge, t), 0.0) for t in range(h, h + task.d))
        if weight >= self.hi:
            return ()
        return ((weight, active, bonus),)

    def accept(self, extra):
        return extra >= self.lo


def separate_dual(instance: SapInstance, sb: StairBlock, candidates: Iterable[Task],
                  dual: Mapping[str, float], W, epsilon, delta=DEFAULT_DELTA,
                  tol: float = 1e-9, data: _BlockData | None = None) -> Configuration | None:
    """A configuration whose dual constraint is violated, or ``None`` if all hold.

    ``dual`` maps row names of the configuration LP (``pt[e,t]``,
    ``pos[e,t,j]``, ``conf``) to values.  Maximises weight minus the dual
    cost of the covered cells over configurations with weight in
    ``[W, (1+epsilon)W)`` by an exact edge sweep.
    """
    data = data or _BlockData(instance, sb, candidates, delta)
    W, eps = _frac(W), _frac(epsilon)
    costs = _cell_costs(data, dual)
    large_tasks = [data.task(t) for t in data.large]
    res = run_sweep(instance, large_tasks, _PricingModel(data, costs, W, eps))
    if not res.placement and not res.extra:
        return None
    config = Configuration(tuple(sorted(res.placement.items())),
                           sum(data.task(t).w for t in res.placement))
    if not W <= config.weight < (1 + eps) * W:
        return None
    reduced = res.profit - dual.get("conf", 0.0)
    return config if reduced > tol else None


def reduced_cost(instance: SapInstance, data: _BlockData, config: Configuration,
                 dual: Mapping[str, float]) -> float:
    coeffs = _column(data, config)
    return config.weight - sum(dual.get(r, 0.0) * c for r, c in coeffs.items())


def _extract(model: lp.LpModel, sol: lp.LpSolution, data: _BlockData,
             configs: dict[str, Configuration]) -> StairLpSolution:
    y = {cfg: sol.primal.get(name, 0.0) for name, cfg in configs.items()
         if sol.primal.get(name, 0.0) > 1e-12}
    x = {}
    for j, hs in data.small.items():
        for t in hs:
            v = sol.primal.get(_xvar(j, t), 0.0)
            if v > 1e-12:
                x[(j, t)] = v
    return StairLpSolution(lp.OPTIMAL, float(sol.objective), y, x)


def solve_lp_sb(instance: SapInstance, sb: StairBlock, candidates: Iterable[Task], W,
                epsilon, delta=DEFAULT_DELTA, max_rounds: int = 500) -> StairLpSolution:
    """Configuration LP by column generation.

    The master starts with an artificial configuration that covers nothing
    and carries a prohibitive cost; it leaves the basis once real
    configurations are priced in.  Status is ``infeasible`` when no
    configuration has weight in the window.
    """
    data = _BlockData(instance, sb, candidates, delta)
    model = _base_model(data, with_configurations=True)
    configs: dict[str, Configuration] = {}
    history = []
    rounds = 0
    while True:
        sol = lp.solve(model)
        if not sol.optimal:
            return StairLpSolution(sol.status)
        history.append(float(sol.objective))
        found = separate_dual(instance, sb, (), sol.dual, W, epsilon, delta, data=data)
        if found is None or rounds >= max_rounds:
            break
        name = f"y[{len(configs)}]"
        if any(c == found for c in configs.values()):
            break
        configs[name] = found
        model.add_column(name, found.weight, _column(data, found))
        rounds += 1
    if sol.primal.get("y[artificial]", 0.0) > 1e-7:
        return StairLpSolution(lp.INFEASIBLE, history=history, rounds=rounds)
    out = _extract(model, sol, data, configs)
    out.columns, out.rounds, out.history = len(configs), rounds, history
    return out


def enumerate_configurations(instance: SapInstance, sb: StairBlock, candidates: Iterable[Task],
                             W, epsilon, delta=DEFAULT_DELTA) -> list[Configuration]:
    """Every configuration with weight in the window (tiny candidate sets only)."""
    data = _BlockData(instance, sb, candidates, delta)
    W, eps = _frac(W), _frac(epsilon)
    out = []
    ids = sorted(data.large)
    for r in range(1, len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            weight = sum(data.task(t).w for t in combo)
            if not W <= weight < (1 + eps) * W:
                continue
            for hs in itertools.product(*(data.large[t] for t in combo)):
                placed = [(data.task(t), h) for t, h in zip(combo, hs)]
                if all(_clear_of(a, ha, placed) for a, ha in placed):
                    out.append(Configuration(tuple(zip(combo, hs)), weight))
    return out


def solve_lp_sb_explicit(instance: SapInstance, sb: StairBlock, candidates: Iterable[Task], W,
                         epsilon, delta=DEFAULT_DELTA) -> StairLpSolution:
    """The configuration LP with every configuration written out."""
    candidates = list(candidates)
    data = _BlockData(instance, sb, candidates, delta)
    model = _base_model(data, with_configurations=True)
    configs = {}
    for k, cfg in enumerate(enumerate_configurations(instance, sb, candidates, W, epsilon, delta)):
        configs[f"y[{k}]"] = cfg
        model.add_column(f"y[{k}]", cfg.weight, _column(data, cfg))
    sol = lp.solve(model)
    if not sol.optimal or sol.primal.get("y[artificial]", 0.0) > 1e-7:
        return StairLpSolution(lp.INFEASIBLE)
    out = _extract(model, sol, data, configs)
    out.columns = len(configs)
    return out


def solve_lp_prime(instance: SapInstance, sb: StairBlock, candidates: Iterable[Task],
                   delta=DEFAULT_DELTA) -> StairLpSolution:
    """The small-task part of the LP alone (no configurations)."""
    data = _BlockData(instance, sb, candidates, delta)
    model = _base_model(data, with_configurations=False)
    sol = lp.solve(model)
    return _extract(model, sol, data, {})


def lp_residuals(instance: SapInstance, sb: StairBlock, sol: StairLpSolution) -> float:
    """Largest violation of the point, position, configuration and small rows."""
    edges = sb.right_path
    cover: dict[tuple[int, int], float] = {}
    ycover: dict[tuple[int, int], float] = {}
    for cfg, v in sol.y.items():
        for cell in cfg.cells(instance, edges):
            ycover[cell] = ycover.get(cell, 0.0) + v
    for (j, t), v in sol.x.items():
        for cell in _cells(instance.task(j), t, edges):
            cover[cell] = cover.get(cell, 0.0) + v
    worst = 0.0
    for cell in set(cover) | set(ycover):
        worst = max(worst, cover.get(cell, 0.0) + ycover.get(cell, 0.0) - 1)
    per_task: dict[str, list[tuple[int, float]]] = {}
    for (j, t), v in sol.x.items():
        per_task.setdefault(j, []).append((t, v))
    for j, items in per_task.items():
        worst = max(worst, sum(v for _, v in items) - 1)
        task = instance.task(j)
        for (e, t), yv in ycover.items():
            if task.uses(e):
                worst = max(worst, yv + sum(v for t2, v in items if t2 <= t) - 1)
    if sol.y:
        worst = max(worst, abs(sum(sol.y.values()) - 1))
    return worst


def problematic_pairs(instance: SapInstance, sb: StairBlock, sol: StairLpSolution,
                      eta) -> set[tuple[str, int]]:
    """Pairs (j, t) overlapped by configurations of total mass above ``1 - eta``."""
    edges = sb.right_path
    eta = float(eta)
    cells = {cfg: cfg.cells(instance, edges) for cfg in sol.y}
    out = set()
    for (j, t) in sol.x:
        mine = set(_cells(instance.task(j), t, edges))
        mass = sum(v for cfg, v in sol.y.items() if cells[cfg] & mine)
        if mass > 1 - eta:
            out.add((j, t))
    return out


def round_small_pairs(instance: SapInstance, x: Mapping[tuple[str, int], float],
                      rng) -> dict[str, int]:
    """Halved dependent rounding, then alteration by increasing height (ties by id)."""
    marginals: dict[str, list[tuple[int, float]]] = {}
    for (j, t), v in sorted(x.items()):
        marginals.setdefault(j, []).append((t, v / 2))
    picked = dependent_round(marginals, rng)
    kept: list[tuple[Task, int]] = []
    for j, t in sorted(picked.items(), key=lambda kv: (kv[1], kv[0])):
        task = instance.task(j)
        if _clear_of(task, t, kept):
            kept.append((task, t))
    return {task.id: t for task, t in kept}


def _sample_configuration(y: Mapping[Configuration, float], rng) -> Configuration | None:
    if not y:
        return None
    p = rng.random() * sum(y.values())
    acc = 0.0
    last = None
    for cfg in sorted(y, key=lambda c: c.items):
        acc += y[cfg]
        last = cfg
        if p < acc:
            return cfg
    return last


def round_stair_lp(instance: SapInstance, sb: StairBlock, sol: StairLpSolution, eta=None,
                   seed: int = 0, prime: StairLpSolution | None = None,
                   candidates: Iterable[Task] | None = None, delta=DEFAULT_DELTA) -> Placement:
    """Best of sampling a configuration plus rounded small pairs, and rounding the small-only LP.

    ``eta`` is only used by callers that inspect :func:`problematic_pairs`;
    the rounding itself does not need it.  The result includes the block's
    fixed tasks.
    """
    rng = stream(seed, "stair-round", sb.label())
    options = []
    if sol.optimal and sol.y:
        chosen = _sample_configuration(sol.y, rng)
        picked = dict(chosen.items) if chosen else {}
        blocked = chosen.cells(instance, sb.right_path) if chosen else set()
        x = {(j, t): v for (j, t), v in sol.x.items()
             if not blocked & set(_cells(instance.task(j), t, sb.right_path))}
        picked.update(round_small_pairs(instance, x, rng))
        options.append(picked)
    if prime is None and candidates is not None:
        prime = solve_lp_prime(instance, sb, candidates, delta)
    if prime is not None and prime.optimal:
        options.append(round_small_pairs(instance, prime.x, rng))
    best: dict[str, int] = {}
    for opt in options:
        if profit(instance, opt) > profit(instance, best):
            best = opt
    return Placement(dict(sb.fixed)).merged(best)


def default_eta(alpha, epsilon) -> Fraction:
    return (1 - _frac(epsilon)) / (8 * (_frac(alpha) + 1))


def weight_grid(weights: Sequence[int], epsilon) -> list[Fraction]:
    """Powers of (1+eps) times the smallest positive weight, up to the total."""
    pos = [w for w in weights if w > 0]
    if not pos:
        return []
    eps = _frac(epsilon)
    W = Fraction(min(pos))
    out = []
    while W <= sum(pos):
        out.append(W)
        W *= 1 + eps
    return out


def solve_stair_block(instance: SapInstance, sb: StairBlock, candidates: Iterable[Task] | None = None,
                      alpha=Fraction(833, 100), epsilon=Fraction(1, 8), seed: int = 0,
                      delta=DEFAULT_DELTA, trials: int = 4) -> Placement:
    """Best rounded solution over the weight grid (``trials`` roundings per LP)."""
    pool = list(instance.tasks if candidates is None else candidates)
    data = _BlockData(instance, sb, pool, delta)
    eta = default_eta(alpha, epsilon)
    prime = solve_lp_prime(instance, sb, pool, delta)
    best = Placement(dict(sb.fixed))
    best_value = profit(instance, best)

    def consider(p: Placement) -> None:
        nonlocal best, best_value
        v = profit(instance, p)
        if v > best_value and check_feasible(instance, p).ok:
            best, best_value = p, v

    empty = StairLpSolution(lp.INFEASIBLE)
    for k in range(trials):
        consider(round_stair_lp(instance, sb, empty, eta, seed=_sub(seed, "prime", k), prime=prime))
    for idx, W in enumerate(weight_grid([data.task(t).w for t in data.large], epsilon)):
        sol = solve_lp_sb(instance, sb, pool, W, epsilon, delta)
        if not sol.optimal:
            continue
        for k in range(trials):
            consider(round_stair_lp(instance, sb, sol, eta, seed=_sub(seed, idx, k), prime=prime))
    return best


def _sub(seed: int, *key) -> int:
    return int(stream(seed, *key).integers(0, 2**31 - 1))


def large_compatible(instance: SapInstance, sb: StairBlock, task: Task, h: int) -> bool:
    """Large task at ``h`` stays out of the block's area (and is not one of its fixed tasks)."""
    if task.id in sb.fixed_ids:
        return False
    u_m = instance.capacities[sb.e_M]
    for e in task.edges:
        if e in sb.path and not (h >= u_m or h + task.d <= sb.f_at(instance, e)):
            return False
    return True


def blocks_compatible(instance: SapInstance, a: StairBlock, b: StairBlock,
                      tasks: Iterable[Task] | None = None, delta=DEFAULT_DELTA) -> bool:
    """Pairwise compatibility, with the shared-fit test run over ``tasks`` only."""
    fa, fb = dict(a.fixed), dict(b.fixed)
    for tid in fa.keys() & fb.keys():
        if fa[tid] != fb[tid]:
            return False
    for tid, h in fb.items():
        if tid not in fa and not large_compatible(instance, a, instance.task(tid), h):
            return False
    for tid, h in fa.items():
        if tid not in fb and not large_compatible(instance, b, instance.task(tid), h):
            return False
    for task in (instance.tasks if tasks is None else tasks):
        if fitting_heights(instance, a, task, delta) and fitting_heights(instance, b, task, delta):
            return False
    return True


def _partition(instance: SapInstance, blocks: Sequence[StairBlock], tasks: Iterable[Task],
               delta) -> list[list[Task]]:
    fixed = set().union(*(sb.fixed_ids for sb in blocks)) if blocks else set()
    parts: list[list[Task]] = [[] for _ in blocks]
    for task in tasks:
        if task.id in fixed:
            continue
        for k, sb in enumerate(blocks):
            if fitting_heights(instance, sb, task, delta):
                parts[k].append(task)
                break
    return parts


def _repair(instance: SapInstance, heights: dict[str, int]) -> Placement:
    """Drop cheapest offenders until the placement is feasible."""
    current = dict(heights)
    while True:
        verdict = check_feasible(instance, current)
        if verdict.ok:
            return Placement(current)
        culprits = set(verdict.violation.tasks) or set(current)
        drop = min(culprits, key=lambda t: (instance.task(t).w, t))
        del current[drop]


def compose_stair_blocks(instance: SapInstance, blocks: Sequence[StairBlock],
                         tasks: Iterable[Task] | None = None, alpha=Fraction(833, 100),
                         epsilon=Fraction(1, 8), seed: int = 0,
                         delta=DEFAULT_DELTA) -> Placement:
    """Solve each block on the tasks that fit only it and take the union."""
    pool = list(instance.tasks if tasks is None else tasks)
    for a, b in itertools.combinations(blocks, 2):
        if not blocks_compatible(instance, a, b, pool, delta):
            raise InputError(f"stair-blocks {a.label()} and {b.label()} are not compatible")
    union: dict[str, int] = {}
    for k, (sb, part) in enumerate(zip(blocks, _partition(instance, blocks, pool, delta))):
        union.update(solve_stair_block(instance, sb, part, alpha, epsilon,
                                       seed=_sub(seed, "block", k), delta=delta))
    return _repair(instance, union)


class _StairSweep(SweepModel):
    """Extra: frozenset of chosen block indices.  Active entries are free large tasks."""

    def __init__(self, instance, blocks, solutions, compat, gamma, delta):
        self.instance = instance
        self.blocks = blocks
        self.solutions = solutions
        self.compat = compat
        self.gamma = gamma
        self.delta = delta
        self.starts: dict[int, list[int]] = {}
        for k, sb in enumerate(blocks):
            if len(sb.path):
                self.starts.setdefault(sb.path.start, []).append(k)
        self.placed = [[(instance.task(t), h) for t, h in sol.items()] for sol in solutions]
        self.taken = [set(sol) for sol in solutions]

    def initial(self):
        return frozenset()

    def before_edge(self, edge, extra, active):
        new = self.starts.get(edge, [])
        out = []
        for r in range(len(new) + 1):
            for combo in itertools.combinations(new, r):
                chosen = set(extra)
                ok = True
                for k in combo:
                    if any(not self.compat[k][j] for j in chosen):
                        ok = False
                        break
                    chosen.add(k)
                if ok:
                    out.append(frozenset(chosen))
        return out

    def options(self, task, edge, extra):
        if not is_large(self.instance, task, self.delta):
            return ()
        b = bottleneck(self.instance, task)
        return [(h, None) for h in range(b - task.d + 1)]

    def at_edge(self, edge, extra, active):
        if len(active) > self.gamma:
            return ()
        live = [k for k in extra if edge in self.blocks[k].path]
        if len(live) > self.gamma:
            return ()
        bonus = 0
        for tid, h, _ in active:
            task = self.instance.task(tid)
            for k in extra:
                if tid in self.taken[k]:
                    return ()
                if edge in self.blocks[k].path and not large_compatible(
                        self.instance, self.blocks[k], task, h):
                    return ()
                if not _clear_of(task, h, [(t, h2) for t, h2 in self.placed[k] if t.uses(edge)]):
                    return ()
        for k in extra:
            start = self.blocks[k].path.start
            if start != edge:
                continue
            earlier = [j for j in extra if j != k and (self.blocks[j].path.start, j) < (start, k)]
            for t, _ in self.placed[k]:
                if not any(t.id in self.taken[j] for j in earlier):
                    bonus += t.w
        return ((extra, active, bonus),)


def default_candidate_blocks(instance: SapInstance, limit: int = 8) -> list[StairBlock]:
    """Blocks next to every capacity rise, widest first; ``f`` is zero beyond ``e_M``.

    For each edge ``e_M`` whose neighbour ``e_L`` has smaller capacity, one
    block per far end ``e_R`` on the other side.
    """
    caps = instance.capacities
    out: list[StairBlock] = []
    for e_M in range(instance.m):
        for e_L, step in ((e_M - 1, 1), (e_M + 1, -1)):
            if not 0 <= e_L < instance.m or caps[e_L] >= caps[e_M]:
                continue
            e_R = e_M + step
            while 0 <= e_R < instance.m:
                lo, hi = sorted((e_M, e_R))
                f = tuple((e, 0) for e in range(lo, hi + 1) if e != e_M)
                out.append(StairBlock(e_L, e_M, e_R, f))
                e_R += step
    out.sort(key=lambda sb: (-len(sb.path), sb.e_M, sb.e_L, sb.e_R))
    return out[:limit]


def solve_stair_solution(instance: SapInstance, candidate_blocks: Sequence[StairBlock],
                         gamma: int = 4, alpha=Fraction(833, 100), epsilon=Fraction(1, 8),
                         seed: int = 0, delta=DEFAULT_DELTA, max_states: int = 200_000) -> Placement:
    """Best combination of candidate blocks and free large tasks, swept left to right.

    Each block is solved once on the tasks that fit it (fixed tasks of other
    candidates excluded).  Two blocks may be chosen together only if they are
    compatible and their solutions do not overlap.
    """
    blocks = list(candidate_blocks)
    fixed_all = set().union(*(sb.fixed_ids for sb in blocks)) if blocks else set()
    solutions = []
    for k, sb in enumerate(blocks):
        pool = [t for t in instance.tasks if t.id not in fixed_all
                and fitting_heights(instance, sb, t, delta)]
        solutions.append(dict(solve_stair_block(instance, sb, pool, alpha, epsilon,
                                                seed=_sub(seed, "block", k), delta=delta)))
    compat = [[True] * len(blocks) for _ in blocks]
    for a, b in itertools.combinations(range(len(blocks)), 2):
        ok = blocks_compatible(instance, blocks[a], blocks[b], None, delta)
        if ok:
            merged = {**solutions[a], **solutions[b]}
            shared = solutions[a].keys() & solutions[b].keys()
            ok = all(solutions[a][t] == solutions[b][t] for t in shared) and \
                check_feasible(instance, merged).ok
        compat[a][b] = compat[b][a] = ok
    model = _StairSweep(instance, blocks, solutions, compat, gamma, delta)
    large = [t for t in instance.tasks if is_large(instance, t, delta)]
    res = run_sweep(instance, large, model, max_states=max_states)
    heights = dict(res.placement)
    for k in sorted(res.extra):
        heights.update(solutions[k])
    return _repair(instance, heights)


__all__ = [
    "Configuration", "DEFAULT_DELTA", "StairBlock", "StairLpSolution", "block_from_dict",
    "block_to_dict", "blocks_compatible", "compose_stair_blocks", "default_candidate_blocks",
    "default_eta",
    "enumerate_configurations", "fits_into_stair_block", "fitting_heights", "is_large",
    "large_compatible", "lp_residuals", "problematic_pairs", "reduced_cost",
    "round_small_pairs", "round_stair_lp", "separate_dual", "solve_lp_prime", "solve_lp_sb",
    "solve_lp_sb_explicit", "solve_stair_block", "solve_stair_solution", "weight_grid",
]

