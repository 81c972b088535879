from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import instances
from sapkit.classify import (audit_large_per_edge, check_epsilon, large_per_edge_bound,
                             split_tasks, threshold_tuples)
from sapkit.core import InputError, SapInstance, Task
from sapkit.oracle import exact_opt


def test_threshold_values_half():
    t1, t2 = threshold_tuples(Fraction(1, 2))
    assert t1.delta == Fraction(1, 2) ** 20
    assert t1.mu == Fraction(1, 2) ** 80 == t2.delta
    assert t2.mu == Fraction(1, 2) ** 240


def test_thresholds_shrink():
    tuples = threshold_tuples(Fraction(1, 3))
    assert len(tuples) == 3
    assert all(a.mu <= a.delta and a.mu == b.delta for a, b in zip(tuples, tuples[1:]))


def test_epsilon_checked():
    assert check_epsilon(0.25) == Fraction(1, 4)
    for bad in (Fraction(2, 5), 1, 0, Fraction(3, 4)):
        with pytest.raises(InputError):
            check_epsilon(bad)


def test_split_by_bottleneck():
    inst = SapInstance((10, 4, 10), (Task("big", 0, 3, 3, 1), Task("mid", 0, 1, 3, 1),
                                     Task("tiny", 2, 3, 1, 1)))
    small, middle, large = split_tasks(inst, Fraction(1, 8), Fraction(1, 2))
    assert [t.id for t in large] == ["big"]
    assert [t.id for t in middle] == ["mid"]
    assert [t.id for t in small] == ["tiny"]
    with pytest.raises(InputError):
        split_tasks(inst, Fraction(1, 2), Fraction(1, 4))


def test_bound_values():
    assert large_per_edge_bound(8, Fraction(1, 2)) == 12
    assert large_per_edge_bound(2, 1) == 1
    assert large_per_edge_bound(10, Fraction(1, 2)) == 14
    with pytest.raises(InputError):
        large_per_edge_bound(1, Fraction(1, 2))


def test_audit_flags_crowded_edge():
    # the audit only counts large tasks per edge; it does not check overlaps
    inst = SapInstance((2,), tuple(Task(f"t{k}", 0, 1, 2, 1) for k in range(5)))
    half = Fraction(1, 2)  # bound 4 on an edge of capacity 2
    assert audit_large_per_edge(inst, {f"t{k}": 0 for k in range(5)}, half) == [0]
    assert audit_large_per_edge(inst, {f"t{k}": 0 for k in range(4)}, half) == []


@settings(max_examples=30)
@given(instances(max_n=5, max_m=3, max_u=8), st.sampled_from([Fraction(1, 2), Fraction(1, 4)]))
def test_audit_clean_on_oracle_solutions(inst, delta):
    assert audit_large_per_edge(inst, exact_opt(inst), delta) == []
