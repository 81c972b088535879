from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import instances
from sapkit.boxes import Box
from sapkit.core import InputError, RefusalError, SapInstance, Task, check_feasible, profit
from sapkit.generate import GenSpec, generate_instance
from sapkit.oracle import exact_opt
from sapkit.pile import (PileSpec, anti_gravity_heights, check_pile, enumerate_piles, fill_pile,
                         solve_pile, solve_single_pile, split_pile_tasks)

EPS = Fraction(1, 8)


def test_pile_spec_validation():
    spec = PileSpec.stack([(0, 4), (1, 3)], 8)
    assert [b.h for b in spec.boxes] == [0, 4] and spec.floor_at(2) == 8 and spec.floor_at(0) == 4
    assert check_pile(spec, 8, 2) and not check_pile(spec, 8, 1)
    with pytest.raises(InputError):
        PileSpec(())
    with pytest.raises(InputError):
        PileSpec((Box(0, 4, 4, 0), Box(0, 5, 4, 4)))  # not nested
    with pytest.raises(InputError):
        PileSpec((Box(0, 4, 4, 0), Box(1, 3, 3, 4)))  # unequal sizes


def test_beta_one_gives_single_boxes():
    inst = SapInstance((8,) * 3, (Task("a", 0, 2, 1, 1), Task("b", 1, 3, 1, 1)))
    small, _ = split_pile_tasks(inst)
    piles = enumerate_piles(inst, 1, small)
    assert piles and all(len(p.boxes) == 1 and p.boxes[0].d == 8 for p in piles)
    assert len(enumerate_piles(inst, 2, small)) > len(piles)
    with pytest.raises(InputError):
        enumerate_piles(inst, 0, small)
    with pytest.raises(RefusalError):
        enumerate_piles(inst, 3, small, limit=3)


def test_anti_gravity_heights():
    assert anti_gravity_heights(10, [3, 4], Fraction(1, 2)) == [2, 3, 4, 6, 7]
    assert anti_gravity_heights(10, []) == []


def test_fill_pile_respects_boxes():
    inst = SapInstance((8,) * 3, tuple(Task(f"u{k}", k % 2, k % 2 + 2, 1, 1) for k in range(10)))
    spec = PileSpec.stack([(0, 3), (1, 3)], 8)
    got = fill_pile(inst, spec, inst.tasks, EPS)
    assert check_feasible(inst, got).ok
    for tid, h in got.items():
        task = inst.task(tid)
        assert any(b.contains(task) and b.h <= h and h + task.d <= b.h + b.d for b in spec.boxes)


@settings(max_examples=30)
@given(st.data())
def test_large_only_is_exact(data):
    U = data.draw(st.integers(4, 8))
    m = data.draw(st.integers(1, 3))
    tasks = []
    for k in range(data.draw(st.integers(0, 4))):
        s = data.draw(st.integers(0, m - 1))
        t = data.draw(st.integers(s + 1, m))
        tasks.append(Task(f"t{k}", s, t, data.draw(st.integers(U // 4 + 1, U)),
                          data.draw(st.integers(1, 9))))
    inst = SapInstance((U,) * m, tuple(tasks))
    got = solve_pile(inst, 2, EPS)
    assert check_feasible(inst, got).ok
    assert profit(inst, got) == profit(inst, exact_opt(inst))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_planted_recovery(seed):
    gen = generate_instance(GenSpec("planted-pile", seed=seed))
    got = solve_pile(gen.instance, 2, EPS, seed=seed)
    assert check_feasible(gen.instance, got).ok
    assert profit(gen.instance, got) >= (1 - 2 * EPS) * gen.planted_profit()


def test_single_pile_never_beats_many():
    gen = generate_instance(GenSpec("planted-pile", seed=4))
    one = solve_single_pile(gen.instance, 2, EPS)
    assert profit(gen.instance, solve_pile(gen.instance, 2, EPS)) >= profit(gen.instance, one)


def test_refuses_long_paths():
    with pytest.raises(RefusalError):
        solve_pile(SapInstance((4,) * 25, ()), 2, EPS)


@settings(max_examples=25)
@given(instances(max_n=5, max_m=4, max_u=8, uniform=True))
def test_output_always_feasible(inst):
    assert check_feasible(inst, solve_pile(inst, 2, EPS)).ok
