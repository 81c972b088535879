from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import instances
from sapkit._rng import stream
from sapkit.boxes import Box
from sapkit.core import InputError, SapInstance, Task, check_feasible, profit
from sapkit.generate import GenSpec, generate_instance
from sapkit.laminar import (LaminarBoxSet, LevelGroups, box_sizes, families_from_trail,
                            level_offset_filter, root_heights, solve_laminar,
                            solve_laminar_detailed, solve_laminar_general)

EPS = Fraction(1, 8)


def test_box_sizes_frozen():
    assert box_sizes(16, Fraction(1, 2)) == [1, 2, 3, 5, 7, 11]
    assert box_sizes(16, EPS) == [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 15]
    assert box_sizes(100, Fraction(1, 4))[-3:] == [55, 69, 86]


def test_level_groups():
    g = LevelGroups(alpha=1, period=4, gap=2)
    assert [g.kept(l) for l in range(6)] == [True, False, False, True, True, False]
    assert g.group(4) == 0 and g.group(5) == 1


def test_offset_filter_seed29_matches_scan():
    rng = stream(29, "test-offset")
    weights = {l: float(rng.integers(0, 20)) for l in range(12)}
    alpha, kept = level_offset_filter(weights, Fraction(1, 2))
    best = max(sum(w for l, w in weights.items() if LevelGroups(a, 4, 2).kept(l))
               for a in range(4))
    assert sum(weights[l] for l in kept) == best
    assert kept == {l for l in weights if LevelGroups(alpha, 4, 2).kept(l)}
    assert best >= 0.5 * sum(weights.values())


def test_root_heights():
    assert root_heights(10, [3, 4]) == [0, 3, 4, 6, 7, 8, 9, 10]
    assert root_heights(10, []) == [0]


def test_box_set_validation():
    root, child = Box(0, 4, 1, 2), Box(1, 3, 2, 3)
    fam = LaminarBoxSet((root, child), (0, 1), (None, 0))
    assert fam.root == root
    bad = [
        ((root, child), (0, 1), (None, None)),           # two roots
        ((root, Box(1, 3, 2, 4)), (0, 1), (None, 0)),    # floating child
        ((root, Box(1, 5, 2, 3)), (0, 1), (None, 0)),    # child sticks out
        ((root, child), (0, 2), (None, 0)),              # level skip
        ((root,), (0, 1), (None,)),                      # length mismatch
        ((root, Box(1, 3, 2, 3), Box(2, 4, 2, 3)), (0, 1, 1), (None, 0, 0)),  # crossing
    ]
    for boxes, levels, parents in bad:
        with pytest.raises(InputError):
            LaminarBoxSet(boxes, levels, parents)


def test_families_from_trail():
    sizes = [1, 2]
    trail = [(5, ((0, 4, 0),), None), (5, ((0, 4, 0), (1, 3, 1)), None), (5, (), None)]
    (fam,) = families_from_trail(trail, sizes)
    assert fam.boxes == (Box(0, 4, 1, 5), Box(1, 3, 2, 6)) and fam.parents == (None, 0)


def test_unit_tasks_single_edge():
    inst = SapInstance((4,), tuple(Task(f"u{k}", 0, 1, 1, 1) for k in range(6)))
    got = solve_laminar(inst, Fraction(1, 2))
    assert check_feasible(inst, got).ok and profit(inst, got) >= 2


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_planted_bound(seed):
    gen = generate_instance(GenSpec("planted-laminar", seed=seed))
    res = solve_laminar_detailed(gen.instance, EPS, seed=seed)
    assert check_feasible(gen.instance, res.placement).ok
    bound = (1 - 2 * EPS) * gen.planted_profit("large") + (Fraction(1, 2) - 2 * EPS) * gen.planted_profit("small")
    assert profit(gen.instance, res.placement) >= bound
    assert len(res.families) <= 1


def test_general_equals_single_on_one_edge():
    tasks = tuple(Task(f"t{k}", 0, 1, d, w) for k, (d, w) in enumerate([(1, 2), (2, 3), (5, 4), (1, 1)]))
    inst = SapInstance((8,), tasks)
    a = solve_laminar(inst, Fraction(1, 4))
    b = solve_laminar_general(inst, Fraction(1, 4))
    assert profit(inst, a) == profit(inst, b)


def test_general_dominates_single():
    gen = generate_instance(GenSpec("planted-laminar", seed=5))
    one = solve_laminar(gen.instance, EPS)
    many = solve_laminar_general(gen.instance, EPS)
    assert profit(gen.instance, many) >= profit(gen.instance, one)


@settings(max_examples=25)
@given(instances(max_n=5, max_m=4, max_u=8, uniform=True),
       st.sampled_from([Fraction(1, 2), Fraction(1, 4)]))
def test_output_always_feasible(inst, eps):
    assert check_feasible(inst, solve_laminar_general(inst, eps)).ok
