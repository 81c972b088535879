from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import instances
from sapkit.core import InputError, SapInstance, Task, check_feasible, profit
from sapkit.generate import GenSpec, generate_instance
from sapkit.jammed import (anchor_heights, best_baseline, is_jammed, is_large,
                           jammed_above_counts, pseudo_capacities, solve_b_simple_jammed,
                           solve_jammed)
from sapkit.oracle import OracleLimits, exact_opt_restricted
from test_acceptance import _jammed_instance

DELTA, DP = Fraction(1, 3), Fraction(1, 2)


def test_pseudo_capacities_simple():
    inst = SapInstance((8, 8, 8), (Task("L", 1, 3, 3, 5),))
    assert pseudo_capacities(inst, {}).u == (8, 8, 8)
    prof = pseudo_capacities(inst, {"L": 5}, B=2)
    assert prof.u == (6, 3, 3) and prof(1) == 3
    with pytest.raises(InputError):
        pseudo_capacities(inst, {"L": 1}, B=2)
    with pytest.raises(InputError):
        pseudo_capacities(SapInstance((4, 5), ()), {})


def test_pseudo_capacities_seed21_matches_scan():
    inst, B = _jammed_instance(21)
    U = inst.capacities[0]
    large = {}
    for t in inst.tasks:
        if is_large(t, U, DELTA) and not large:
            large[t.id] = U - t.d
    prof = pseudo_capacities(inst, large, B=min(B, min(large.values(), default=0)))
    for e in range(inst.m):
        tops = [h - prof.B for tid, h in large.items() if inst.task(tid).uses(e)]
        assert prof(e) == min(tops + [U - prof.B])


def test_jammed_needs_room_and_size():
    prof = pseudo_capacities(SapInstance((10, 10), ()), {}, B=0)
    assert is_jammed(Task("a", 0, 2, 6, 1), prof, DP, 0)
    assert not is_jammed(Task("a", 0, 2, 4, 1), prof, DP, 0)  # 4 <= 10/2
    assert not is_jammed(Task("a", 0, 2, 6, 1), prof, DP, 5)  # pokes out of the room


def test_large_only_is_unrestricted():
    inst = SapInstance((6, 6), (Task("a", 0, 2, 3, 4), Task("b", 0, 1, 3, 2), Task("c", 1, 2, 4, 3)))
    got = solve_b_simple_jammed(inst, DELTA, DP, 0)
    large_only = lambda hs: all(is_large(inst.task(t), 6, DELTA) for t in hs)
    want = exact_opt_restricted(inst, OracleLimits(), large_only)
    assert profit(inst, got) == profit(inst, want) == 6


def test_baseline_range_checked():
    with pytest.raises(InputError):
        solve_b_simple_jammed(SapInstance((4,), ()), DELTA, DP, 5)


def test_anchor_sets():
    inst = SapInstance((6, 6), (Task("a", 0, 1, 2, 1), Task("b", 0, 2, 3, 1)))
    anchors = anchor_heights(inst, Fraction(1, 2), Fraction(1, 2))
    assert anchors.H == (0, 2, 3, 4, 5, 6)
    assert anchor_heights(inst, Fraction(1, 2), DP, levels=0).levels == (anchors.levels[0],)
    n = len(inst.tasks)
    for ell, layer in enumerate(anchors.levels):
        assert set(anchors.H) <= set(layer)
        assert len(layer) <= len(anchors.levels[0]) * n ** ell
    with pytest.raises(InputError):
        anchor_heights(inst, 0, DP)


def test_above_counts():
    inst = SapInstance((10,), (Task("a", 0, 1, 2, 1), Task("b", 0, 1, 2, 1), Task("c", 0, 1, 2, 1)))
    counts = jammed_above_counts(inst, {"a": 0, "b": 2, "c": 4}, Fraction(1, 2), 0)
    assert counts == {"a": 2, "b": 1, "c": 0}


@pytest.mark.parametrize("seed", [3, 8])
def test_single_edge_segments_agree(seed):
    inst, _ = _jammed_instance(seed)
    one = SapInstance(inst.capacities[:1], tuple(Task(t.id, 0, 1, t.d, t.w) for t in inst.tasks))
    _, placement = best_baseline(one, DELTA, DP)
    assert profit(one, solve_jammed(one, DELTA, DP)) == profit(one, placement)


def test_segments_dominate_one_baseline():
    inst, _ = _jammed_instance(4)
    _, placement = best_baseline(inst, DELTA, DP)
    assert profit(inst, solve_jammed(inst, DELTA, DP)) >= profit(inst, placement)


def test_planted_seed17():
    gen = generate_instance(GenSpec("planted-jammed", seed=17))
    got = solve_jammed(gen.instance, DELTA, DP)
    assert check_feasible(gen.instance, got).ok
    assert profit(gen.instance, got) >= (1 - Fraction(1, 8)) * gen.planted_profit()


def test_anchored_solution_feasible():
    gen = generate_instance(GenSpec("planted-jammed", seed=17))
    anchors = anchor_heights(gen.instance, DELTA, DP, levels=1)
    assert check_feasible(gen.instance, solve_jammed(gen.instance, DELTA, DP, anchors=anchors)).ok


@settings(max_examples=25)
@given(instances(max_n=5, max_m=4, max_u=8, uniform=True))
def test_output_always_feasible(inst):
    assert check_feasible(inst, solve_jammed(inst, DELTA, DP)).ok
