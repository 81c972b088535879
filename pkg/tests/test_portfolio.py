import csv
import io
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import instances
from sapkit.core import InputError, RefusalError, SapInstance, Task, check_feasible, profit
from sapkit.generate import GenSpec, generate_instance
from sapkit.portfolio import (ALGOS, COLUMNS, PortfolioConfig, RatioRow, _solver,
                              compare_with_oracle, rows_to_csv, rows_to_json, run_portfolio,
                              with_algos)


def _suite(count=8):
    return [(f"u{s}", generate_instance(GenSpec("uniform-random", n=7, seed=s)).instance)
            for s in range(count)]


def test_portfolio_is_best_single():
    inst = generate_instance(GenSpec("planted-pile", seed=2)).instance
    best, rows = run_portfolio(inst)
    assert check_feasible(inst, best).ok
    singles = [r.profit for r in rows if r.algo != "portfolio" and r.profit is not None]
    assert rows[-1].algo == "portfolio" and rows[-1].profit == max(singles) == profit(inst, best)


def test_ratio_on_uniform_suite():
    rows = compare_with_oracle(_suite())
    portfolio = [r for r in rows if r.algo == "portfolio"]
    assert len(portfolio) == 8
    assert all(r.ratio is not None and 1 <= r.ratio <= 2 for r in portfolio)


def test_csv_and_json_reports():
    rows = compare_with_oracle(_suite(2), PortfolioConfig(algos=("jammed", "pile")))
    text = rows_to_csv(rows)
    parsed = list(csv.reader(io.StringIO(text)))
    assert tuple(parsed[0]) == COLUMNS and len(parsed) == 1 + 2 * 3
    assert all(r[5] == "" for r in parsed[1:])  # no timing by default
    assert rows_to_csv(compare_with_oracle(_suite(2), PortfolioConfig(algos=("jammed", "pile")))) == text
    data = json.loads(rows_to_json(rows))
    assert data["columns"] == list(COLUMNS) and data["rows"][0]["algo"] == "jammed"


def test_row_cells():
    assert RatioRow("i", "a", 0, 0, None, 1).cells()[4] == "1.000000"
    assert RatioRow("i", "a", 0, 3, None, 1).cells()[4] == "inf"
    assert RatioRow("i", "a", None, 3, None, 1, "n/a: x").cells()[2] == "n/a"
    assert RatioRow("i", "a", None, 3, None, 1, "refused: x").cells()[2] == "refused"
    assert RatioRow("i", "a", 4, 6, 2.25, 1).cells()[4:6] == ["1.500000", "2.2"]


def test_non_uniform_marks_na():
    inst = SapInstance((3, 5), (Task("a", 0, 2, 2, 1),))
    _, rows = run_portfolio(inst, with_algos(PortfolioConfig(), ["jammed", "stair"]))
    by = {r.algo: r for r in rows}
    assert by["jammed"].cells()[2] == "n/a" and by["portfolio"].profit == 1


def test_timing_fills_ms():
    _, rows = run_portfolio(SapInstance((4,), ()), PortfolioConfig(algos=("pile",), timing=True))
    assert all(r.ms is not None for r in rows)


def test_config_validation():
    with pytest.raises(InputError):
        PortfolioConfig(algos=("magic",))
    with pytest.raises(InputError):
        PortfolioConfig(beta=0)


@settings(max_examples=20)
@given(instances(max_n=5, max_m=4, max_u=8))
def test_solvers_never_crash(inst):
    # call each solver directly so that bugs are not hidden as "n/a"
    config = PortfolioConfig()
    for algo in ALGOS:
        if not inst.is_uniform and algo in ("jammed", "pile", "laminar"):
            continue
        try:
            found = _solver(algo, config)(inst)
        except RefusalError as exc:
            found = exc.partial or {}
        assert check_feasible(inst, found).ok
