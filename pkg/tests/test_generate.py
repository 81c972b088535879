from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sapkit.core import InputError, check_feasible
from sapkit.generate import KINDS, GenSpec, generate_instance, generated_to_dict
from sapkit.laminar import LaminarBoxSet
from sapkit.boxes import Box
from sapkit.pile import PileSpec, check_pile
from sapkit.stair import block_from_dict


@pytest.mark.parametrize("kind", KINDS)
def test_deterministic(kind):
    a = generate_instance(GenSpec(kind, seed=11))
    b = generate_instance(GenSpec(kind, seed=11))
    assert generated_to_dict(a) == generated_to_dict(b)
    assert generate_instance(GenSpec(kind, seed=12)).instance != a.instance


def test_empty_uniform():
    gen = generate_instance(GenSpec("uniform-random", n=0, m=3, U=5))
    assert gen.instance.tasks == () and gen.instance.capacities == (5, 5, 5)


def test_spec_validation():
    for bad in (dict(kind="nope"), dict(kind="planted-pile", n=-1),
                dict(kind="planted-pile", m=0), dict(kind="planted-pile", U=0)):
        with pytest.raises(InputError):
            GenSpec(**bad)


@settings(max_examples=30)
@given(st.sampled_from(KINDS[1:]), st.integers(0, 10_000), st.integers(2, 10), st.integers(2, 7))
def test_planted_placements_feasible(kind, seed, n, m):
    gen = generate_instance(GenSpec(kind, n=n, m=m, seed=seed))
    assert gen.planted is not None and check_feasible(gen.instance, gen.planted).ok
    assert gen.large.isdisjoint(gen.small)
    assert (gen.large | gen.small) <= set(gen.planted)


@settings(max_examples=30)
@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3]))
def test_planted_pile_structure(seed, beta):
    gen = generate_instance(GenSpec("planted-pile", seed=seed, knobs={"beta": beta}))
    U = gen.instance.capacities[0]
    spec = PileSpec(tuple(Box(b["s"], b["t"], b["d"], b["h"]) for b in gen.structure["pile"]))
    assert check_pile(spec, U, beta)
    for tid in gen.small:
        task, h = gen.instance.task(tid), gen.planted[tid]
        assert any(b.contains(task) and b.h <= h and h + task.d <= b.h + b.d for b in spec.boxes)


def test_planted_laminar_structure():
    gen = generate_instance(GenSpec("planted-laminar", seed=3))
    raw = gen.structure["laminar"]
    fam = LaminarBoxSet(tuple(Box(b["s"], b["t"], b["d"], b["h"]) for b in raw),
                        tuple(b["level"] for b in raw),
                        tuple(None if k == 0 else k - 1 for k in range(len(raw))))
    assert fam.root.h == gen.structure["root_height"]


def test_planted_stair_block_round_trips():
    gen = generate_instance(GenSpec("planted-stair", seed=2))
    sb = block_from_dict(gen.structure["block"])
    assert sb.e_L == 0 and gen.instance.capacities[0] < gen.instance.capacities[1]


def test_planted_jammed_descriptor():
    gen = generate_instance(GenSpec("planted-jammed", seed=6))
    assert Fraction(gen.structure["delta"]) == Fraction(1, 3)
    segs = gen.structure["segments"]
    assert segs[0]["s"] == 0 and segs[-1]["t"] == gen.instance.m
    assert all(a["t"] == b["s"] for a, b in zip(segs, segs[1:]))
