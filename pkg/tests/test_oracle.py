import json
from pathlib import Path

import pytest
from hypothesis import given, settings

from conftest import instances
from sapkit.core import RefusalError, SapInstance, Task, check_feasible, instance_from_dict, profit
from sapkit.generate import GenSpec, generate_instance
from sapkit.oracle import (OracleLimits, can_pack, enumerate_placements, exact_opt,
                           exact_opt_restricted)

GOLDEN = Path(__file__).parent / "golden" / "oracle_seed42.json"


def test_can_pack_three_tasks():
    inst = SapInstance((4, 4), (Task("A", 0, 2, 2, 1), Task("B", 0, 1, 2, 1), Task("C", 1, 2, 2, 1)))
    got = can_pack(inst, ["A", "B", "C"])
    assert got is not None and check_feasible(inst, got).ok
    assert can_pack(inst, []) == {}


def test_can_pack_rejects_load_feasible_set():
    # loads fit every edge, yet b and c fill edge 2 completely and a must sit below 2
    inst = SapInstance((2, 4, 3), (Task("a", 0, 2, 1, 1), Task("b", 1, 3, 1, 1),
                                   Task("c", 1, 3, 2, 1)))
    assert can_pack(inst, ["a", "b", "c"]) is None
    assert can_pack(inst, ["b", "c"]) is not None


def test_golden_seed42():
    data = json.loads(GOLDEN.read_text())
    inst = generate_instance(GenSpec(**data["spec"])).instance
    assert inst == instance_from_dict(data["instance"])
    assert profit(inst, exact_opt(inst)) == data["opt_profit"] == 29


def test_limits_refuse():
    inst = SapInstance((4,), tuple(Task(f"t{k}", 0, 1, 1, 1) for k in range(5)))
    with pytest.raises(RefusalError):
        exact_opt(inst, OracleLimits(max_tasks=4))
    with pytest.raises(RefusalError):
        exact_opt(SapInstance((40,), ()), OracleLimits(max_capacity=16))


def test_restricted_all_at_zero():
    inst = SapInstance((5, 5, 5), (Task("a", 0, 2, 3, 4), Task("b", 1, 3, 3, 5),
                                   Task("c", 2, 3, 2, 2), Task("d", 0, 1, 5, 1)))
    got = exact_opt_restricted(inst, OracleLimits(), lambda hs: all(h == 0 for h in hs.values()))
    # disjoint paths only: {a, c} (6) or {b, d} (6) or {d, c}...; best is 6
    assert profit(inst, got) == 6 and all(h == 0 for h in got.values())


def test_restricted_single_box_is_knapsack():
    inst = SapInstance((9,), (Task("a", 0, 1, 2, 3), Task("b", 0, 1, 3, 4), Task("c", 0, 1, 4, 6)))
    inside = lambda hs: all(h + inst.task(t).d <= 4 for t, h in hs.items())
    got = exact_opt_restricted(inst, OracleLimits(), inside)
    assert profit(inst, got) == 6


def test_enumerate_placements_counts():
    inst = SapInstance((3,), (Task("a", 0, 1, 1, 1), Task("b", 0, 1, 1, 1)))
    placements = list(enumerate_placements(inst, list(inst.tasks)))
    assert len(placements) == 6  # ordered pairs of distinct heights in {0,1,2}


@settings(max_examples=40)
@given(instances(max_n=5, max_m=3, max_u=6))
def test_exact_opt_dominates_restricted(inst):
    best = exact_opt(inst)
    assert check_feasible(inst, best).ok
    low = exact_opt_restricted(inst, OracleLimits(), lambda hs: True)
    assert profit(inst, low) == profit(inst, best)
