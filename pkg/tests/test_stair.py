from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import instances
from sapkit._rng import stream
from sapkit.core import InputError, SapInstance, Task, check_feasible, profit
from sapkit.generate import GenSpec, generate_instance
from sapkit.oracle import OracleLimits, exact_opt_restricted
from sapkit.stair import (StairBlock, _BlockData, block_from_dict, block_to_dict,
                          blocks_compatible, compose_stair_blocks, default_candidate_blocks,
                          enumerate_configurations, fits_into_stair_block, fitting_heights,
                          is_large, lp_residuals, problematic_pairs, reduced_cost,
                          separate_dual, solve_lp_prime, solve_lp_sb, solve_lp_sb_explicit,
                          solve_stair_block, solve_stair_solution, weight_grid)
from test_acceptance import _block_instance, small_only_stair

EPS = Fraction(1, 8)


def test_block_geometry_and_round_trip():
    sb = StairBlock(0, 1, 3, ((2, 0),), name="x")
    assert list(sb.path) == [1, 2, 3] and list(sb.right_path) == [1, 2, 3]
    assert block_from_dict(block_to_dict(sb)) == sb
    mirrored = StairBlock(4, 3, 1)
    assert mirrored.mirrored and list(mirrored.path) == [1, 2, 3]
    with pytest.raises(InputError):
        StairBlock(2, 1, 3)
    with pytest.raises(InputError):
        StairBlock(1, 1, 3)


def test_fitting_heights_small_above_left_capacity():
    inst, sb = small_only_stair()
    hs = fitting_heights(inst, sb, inst.task("a"))
    assert hs and min(hs) >= inst.capacities[0]
    assert fits_into_stair_block(inst, sb, {"a": hs[0]})


def test_weight_grid():
    assert weight_grid([], EPS) == []
    grid = weight_grid([2, 3], Fraction(1, 2))
    assert grid == [2, 3, Fraction(9, 2)]


def test_pricing_matches_enumeration_seed5():
    inst, sb = _block_instance(5)
    data = _BlockData(inst, sb, inst.tasks, Fraction(3, 8))
    rng = stream(5, "test-pricing")
    rows = [f"pt[{e},{t}]" for e, t in data.large_cells]
    rows += [f"pos[{e},{t},{j}]" for e, t in data.large_cells for j in data.small]
    checked = 0
    for trial in range(6):
        dual = {r: float(rng.random()) * 0.3 for r in rows}
        dual["conf"] = float(rng.random()) * 2
        for W in weight_grid([inst.task(t).w for t in data.large], EPS):
            configs = enumerate_configurations(inst, sb, inst.tasks, W, EPS)
            best = max((reduced_cost(inst, data, c, dual) for c in configs), default=None)
            found = separate_dual(inst, sb, inst.tasks, dual, W, EPS)
            if best is None or best <= 1e-9:
                assert found is None
            else:
                assert found is not None
                assert reduced_cost(inst, data, found, dual) == pytest.approx(best)
                checked += 1
    assert checked > 0


def test_colgen_equals_explicit_seed9():
    inst, sb = _block_instance(9)
    large = [t.w for t in inst.tasks if is_large(inst, t)]
    for W in weight_grid(large, EPS):
        a = solve_lp_sb(inst, sb, inst.tasks, W, EPS)
        b = solve_lp_sb_explicit(inst, sb, inst.tasks, W, EPS)
        assert a.status == b.status
        if b.optimal:
            assert abs(a.objective - b.objective) <= 1e-6
            assert lp_residuals(inst, sb, a) <= 1e-7
            # every integral configuration in the window is LP-feasible on its own
            for cfg in enumerate_configurations(inst, sb, inst.tasks, W, EPS):
                assert a.objective >= cfg.weight - 1e-9


def test_lp_prime_bounds_small_only_optimum():
    inst, sb = small_only_stair()
    sol = solve_lp_prime(inst, sb, inst.tasks)
    inside = lambda hs: fits_into_stair_block(inst, sb, hs)
    filt = lambda task, h: h in fitting_heights(inst, sb, task)
    best = exact_opt_restricted(inst, OracleLimits(max_tasks=8), inside, filt)
    assert sol.objective >= profit(inst, best) - 1e-9
    assert problematic_pairs(inst, sb, sol, Fraction(1, 10)) == set()


def test_block_with_no_candidates_and_single_large():
    inst = SapInstance((2, 8, 8), (Task("big", 1, 3, 6, 5),))
    sb = StairBlock(0, 1, 2)
    assert solve_stair_block(inst, sb, []) == {}
    got = solve_stair_block(inst, sb)
    assert set(got) == {"big"} and check_feasible(inst, got).ok


def test_compose_one_block_is_solve_block():
    inst, sb = small_only_stair()
    assert compose_stair_blocks(inst, [sb]) == solve_stair_block(
        inst, sb, seed=int(stream(0, "block", 0).integers(0, 2**31 - 1)))


def test_disjoint_blocks_compose_to_union():
    tasks = (Task("a", 1, 2, 1, 3), Task("b", 1, 2, 2, 2), Task("c", 4, 5, 1, 4))
    inst = SapInstance((2, 6, 6, 2, 6, 6), tasks)
    left, right = StairBlock(0, 1, 2), StairBlock(3, 4, 5)
    assert blocks_compatible(inst, left, right)
    got = compose_stair_blocks(inst, [left, right])
    assert check_feasible(inst, got).ok and set(got) == {"a", "b", "c"}


def test_default_candidates_sit_on_rises():
    inst = SapInstance((2, 8, 8, 3), ())
    blocks = default_candidate_blocks(inst)
    assert blocks and all(inst.capacities[b.e_L] < inst.capacities[b.e_M] for b in blocks)
    assert default_candidate_blocks(SapInstance((5, 5), ())) == []


def test_no_blocks_is_large_only():
    inst = SapInstance((6, 6), (Task("a", 0, 2, 4, 5), Task("b", 0, 1, 2, 1), Task("c", 1, 2, 3, 2)))
    got = solve_stair_solution(inst, [])
    assert set(got) <= {t.id for t in inst.tasks if is_large(inst, t)}
    assert profit(inst, got) == 5


def test_planted_stair_seed13():
    gen = generate_instance(GenSpec("planted-stair", seed=13))
    sb = block_from_dict(gen.structure["block"])
    got = solve_stair_solution(gen.instance, [sb], seed=0)
    assert check_feasible(gen.instance, got).ok
    assert profit(gen.instance, got) >= (1 - 2 * EPS) * gen.planted_profit("large")


@settings(max_examples=25)
@given(instances(max_n=5, max_m=4, max_u=8, uniform=False))
def test_solution_always_feasible(inst):
    got = solve_stair_solution(inst, default_candidate_blocks(inst, limit=3))
    assert check_feasible(inst, got).ok
