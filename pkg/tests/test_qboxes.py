from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import instances
from sapkit._rng import stream
from sapkit.core import InputError, SapInstance, Task, check_feasible, profit
from sapkit.generate import GenSpec, generate_instance
from sapkit.oracle import exact_opt
from sapkit.qboxes import (StepProfile, density_class, fill_profiles_dp, recursion_depth_bound,
                           rescale_weights, round_profile, solve_boxable_recursive)
from test_acceptance import brute_force_fill

EPS = Fraction(1, 8)


def crossing_tasks(seed: int, count: int, m: int, e0: int, key: str):
    rng = stream(seed, key)
    return [Task(f"t{k}", int(rng.integers(0, e0 + 1)), int(rng.integers(e0 + 1, m + 1)),
                 int(rng.integers(1, 4)), int(rng.integers(1, 20))) for k in range(count)]


def test_profile_basics():
    p = StepProfile.of_tasks([Task("a", 0, 3, 2, 1), Task("b", 1, 2, 1, 1)], 1)
    assert p.values == (2, 3, 2) and p.steps == 3 and p.is_unimodal()
    assert p(5) == 0 and p.end == 3
    assert p.binding_edges(0, 3) == [0, 1, 2]
    with pytest.raises(InputError):
        StepProfile(2, (1, 1), 0)
    with pytest.raises(InputError):
        StepProfile(0, (-1,), 0)


def test_density_class():
    assert density_class(Task("a", 0, 1, 4, 8)) == 1
    assert density_class(Task("a", 0, 1, 3, 1)) == -2
    assert density_class(Task("a", 0, 1, 2, 0)) is None


def test_round_profile_seed11():
    tasks = crossing_tasks(11, 12, 8, 3, "test-round-profile")
    total = sum(t.w for t in tasks)
    prof, kept = round_profile(SapInstance((20,) * 8, tuple(tasks)), 3, tasks, 4, EPS)
    assert sum(t.w for t in kept) >= (1 - EPS) * total
    load = StepProfile.of_tasks(tasks, 3)
    assert prof.dominated_by(load, 0, 8)
    assert prof == StepProfile.of_tasks(kept, 3)


def test_fill_profiles_seed3():
    tasks = crossing_tasks(3, 6, 6, 2, "test-fill")
    profiles = [StepProfile(0, (3, 4, 4, 2), 2), StepProfile(1, (2, 5, 3, 3, 1), 2)]
    value, assignment = fill_profiles_dp(2, profiles, tasks)
    assert value == brute_force_fill(profiles, tasks)
    assert value == sum(t.w for t in tasks if t.id in assignment)


def test_fill_profiles_needs_centre_edge():
    with pytest.raises(InputError):
        fill_profiles_dp(2, [StepProfile(0, (3, 3, 3), 2)], [Task("a", 0, 1, 1, 1)])
    assert fill_profiles_dp(0, [], [Task("a", 0, 1, 1, 1)]) == (0, {})


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_fill_profiles_matches_brute_force(seed):
    tasks = crossing_tasks(seed, 5, 5, 2, "test-fill-h")
    rng = stream(seed, "test-fill-profiles")
    profiles = [StepProfile(0, tuple(int(v) for v in rng.integers(0, 6, 5)), 2) for _ in range(2)]
    value, _ = fill_profiles_dp(2, profiles, tasks)
    assert value == brute_force_fill(profiles, tasks)


def test_rescale_weights():
    inst = SapInstance((4,), (Task("a", 0, 1, 1, 100), Task("b", 0, 1, 1, 1)))
    w = rescale_weights(inst, Fraction(1, 2))
    assert w["a"] == 4 and "b" not in w  # 1 * 4/100 < 1
    assert recursion_depth_bound(8) == 4 and recursion_depth_bound(1) == 1


def test_single_edge_is_knapsack():
    inst = SapInstance((10,), (Task("a", 0, 1, 6, 7), Task("b", 0, 1, 5, 5),
                               Task("c", 0, 1, 4, 4), Task("d", 0, 1, 1, 1)))
    got = solve_boxable_recursive(inst, 2, Fraction(1, 2))
    assert check_feasible(inst, got).ok
    assert profit(inst, got) == profit(inst, exact_opt(inst)) == 11


def test_planted_single_box_pile():
    # one full-height box plus two stacked large tasks elsewhere: 2-boxable
    for seed in range(3):
        gen = generate_instance(GenSpec("planted-pile", seed=seed, knobs={"beta": 1}))
        got = solve_boxable_recursive(gen.instance, 2, EPS, seed=seed)
        assert check_feasible(gen.instance, got).ok
        assert profit(gen.instance, got) >= (1 - 2 * EPS) * gen.planted_profit()


@settings(max_examples=25)
@given(instances(max_n=6, max_m=4, max_u=8))
def test_output_always_feasible(inst):
    assert check_feasible(inst, solve_boxable_recursive(inst, 2, EPS)).ok
