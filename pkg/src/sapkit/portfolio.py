"""Run several solvers on an instance, keep the best, compare with the oracle.

Report rows have the fixed columns ``instance_id, algo, profit, opt, ratio,
ms, seed``.  ``ratio`` is ``opt / profit``.  Wall time is only filled in when
timing is switched on, so that reports are byte-identical across reruns by
default.  A solver that refuses contributes its best partial placement when
it has one; the CSV shows ``refused`` (no placement) or ``n/a`` (solver does
not apply, e.g. non-uniform capacities) in the profit column.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

from .core import (InputError, Placement, RefusalError, SapInstance, check_feasible, profit)
from .oracle import DEFAULT_LIMITS, OracleLimits, exact_opt

ALGOS = ("boxable", "qboxable", "stair", "jammed", "pile", "laminar")
COLUMNS = ("instance_id", "algo", "profit", "opt", "ratio", "ms", "seed")


@dataclass(frozen=True)
class PortfolioConfig:
    algos: tuple[str, ...] = ALGOS
    epsilon: Fraction = Fraction(1, 8)
    beta: int = 2
    seed: int = 0
    jammed_delta: Fraction = Fraction(1, 3)
    jammed_delta_prime: Fraction = Fraction(1, 2)
    oracle: bool = True
    limits: OracleLimits = DEFAULT_LIMITS
    timing: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        unknown = [a for a in self.algos if a not in ALGOS]
        if unknown:
            raise InputError(f"unknown algorithms {unknown}; choose from {ALGOS}")
        if self.beta < 1:
            raise InputError("beta must be at least 1")
        if self.workers < 1:
            raise InputError("workers must be at least 1")


@dataclass
class RatioRow:
    instance_id: str
    algo: str
    profit: int | None
    opt: int | None
    ms: float | None
    seed: int
    note: str = ""
    placement: Placement = field(default_factory=Placement, repr=False)

    @property
    def ratio(self) -> Fraction | None:
        if self.opt is None or self.profit is None:
            return None
        if self.profit == 0:
            return Fraction(1) if self.opt == 0 else None
        return Fraction(self.opt, self.profit)

    def cells(self) -> list[str]:
        if self.profit is None:
            prof = "n/a" if self.note.startswith("n/a") else "refused"
        else:
            prof = str(self.profit)
        ratio = self.ratio
        if ratio is None:
            r = "inf" if self.opt and self.profit == 0 else ""
        else:
            r = f"{float(ratio):.6f}"
        return [self.instance_id, self.algo, prof, "" if self.opt is None else str(self.opt), r,
                "" if self.ms is None else f"{self.ms:.1f}", str(self.seed)]

    def to_dict(self) -> dict:
        out = dict(zip(COLUMNS, self.cells()))
        out["note"] = self.note
        out["placement"] = {t: self.placement[t] for t in sorted(self.placement)}
        return out


def _solver(algo: str, config: PortfolioConfig) -> Callable[[SapInstance], Placement]:
    eps, beta, seed = config.epsilon, config.beta, config.seed
    if algo == "boxable":
        from .boxes import solve_constant_boxable
        return lambda inst: solve_constant_boxable(inst, beta, eps)
    if algo == "qboxable":
        from .qboxes import solve_boxable_recursive
        return lambda inst: solve_boxable_recursive(inst, beta, eps, seed=seed)
    if algo == "stair":
        from .stair import default_candidate_blocks, solve_stair_solution
        return lambda inst: solve_stair_solution(inst, default_candidate_blocks(inst),
                                                 epsilon=eps, seed=seed)
    if algo == "jammed":
        from .jammed import solve_jammed
        return lambda inst: solve_jammed(inst, config.jammed_delta, config.jammed_delta_prime)
    if algo == "pile":
        from .pile import solve_pile
        return lambda inst: solve_pile(inst, beta, eps, seed=seed)
    from .laminar import solve_laminar_general
    return lambda inst: solve_laminar_general(inst, eps, seed=seed)


def run_algorithm(instance: SapInstance, algo: str,
                  config: PortfolioConfig) -> tuple[Placement | None, str]:
    """One solver: its placement (or None) and a note on refusals."""
    try:
        found = _solver(algo, config)(instance)
        note = ""
    except InputError as exc:
        return None, f"n/a: {exc}"
    except RefusalError as exc:
        found, note = exc.partial, f"refused: {exc}"
    if found is None:
        return None, note
    verdict = check_feasible(instance, found)
    if not verdict.ok:  # solver bug; never report an infeasible placement
        return None, f"infeasible: {verdict.violation}"
    return Placement(found), note


def _clock(config: PortfolioConfig):
    if not config.timing:
        return lambda: None
    start = time.perf_counter()
    return lambda: (time.perf_counter() - start) * 1000.0


def run_portfolio(instance: SapInstance, config: PortfolioConfig = PortfolioConfig(),
                  instance_id: str = "0", opt: int | None = None
                  ) -> tuple[Placement, list[RatioRow]]:
    """Best feasible placement over ``config.algos``; one row per solver plus ``portfolio``."""
    rows: list[RatioRow] = []
    best, best_value = Placement(), -1
    notes = []
    total = _clock(config)
    for algo in config.algos:
        lap = _clock(config)
        found, note = run_algorithm(instance, algo, config)
        value = None if found is None else profit(instance, found)
        rows.append(RatioRow(instance_id, algo, value, opt, lap(), config.seed, note,
                             found if found is not None else Placement()))
        if note:
            notes.append(f"{algo}: {note}")
        if found is not None and value > best_value:
            best, best_value = found, value
    if best_value < 0:
        rows.append(RatioRow(instance_id, "portfolio", None, opt, total(), config.seed,
                             "refused: every solver refused; " + "; ".join(notes)))
        return Placement(), rows
    rows.append(RatioRow(instance_id, "portfolio", best_value, opt, total(), config.seed,
                         "; ".join(notes), best))
    return best, rows


def _oracle_value(instance: SapInstance, config: PortfolioConfig) -> tuple[int | None, str]:
    if not config.oracle:
        return None, ""
    try:
        return profit(instance, exact_opt(instance, config.limits)), ""
    except RefusalError as exc:
        return None, f"oracle refused: {exc}"


def _one(args) -> list[RatioRow]:
    instance_id, instance, config = args
    opt, note = _oracle_value(instance, config)
    _, rows = run_portfolio(instance, config, instance_id, opt)
    if note:
        for row in rows:
            row.note = "; ".join(x for x in (row.note, note) if x)
    return rows


def compare_with_oracle(instances: Sequence[tuple[str, SapInstance]],
                        config: PortfolioConfig = PortfolioConfig()) -> list[RatioRow]:
    """Portfolio rows for every instance, in input order."""
    jobs = [(iid, inst, config) for iid, inst in instances]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_one, jobs))
    else:
        parts = [_one(job) for job in jobs]
    return [row for part in parts for row in part]


def rows_to_csv(rows: Sequence[RatioRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


def rows_to_json(rows: Sequence[RatioRow]) -> str:
    return json.dumps({"columns": list(COLUMNS), "rows": [r.to_dict() for r in rows]},
                      indent=1, sort_keys=False) + "\n"


def with_algos(config: PortfolioConfig, algos: Sequence[str]) -> PortfolioConfig:
    return replace(config, algos=tuple(algos))


__all__ = [
    "ALGOS", "COLUMNS", "PortfolioConfig", "RatioRow", "compare_with_oracle", "rows_to_csv",
    "rows_to_json", "run_algorithm", "run_portfolio", "with_algos",
]
