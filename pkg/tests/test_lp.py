from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sapkit import lp


def small_model(exact=True):
    # max 3x + 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x <= 3
    m = lp.LpModel("max", exact=exact)
    m.add_variable("x", 3)
    m.add_variable("y", 2)
    m.add_constraint("a", {"x": 1, "y": 1}, "<=", 4)
    m.add_constraint("b", {"x": 1, "y": 3}, "<=", 6)
    m.add_constraint("c", {"x": 1}, "<=", 3)
    return m


def test_textbook_optimum_exact():
    sol = lp.solve(small_model())
    assert sol.optimal
    assert sol.objective == 11 and sol.primal == {"x": 3, "y": 1}
    assert all(isinstance(v, Fraction) for v in sol.primal.values())
    assert lp.dual_objective(small_model(), sol.dual) == 11
    assert all(v <= 0 for v in lp.dual_residuals(small_model(), sol.dual).values())


def test_float_mode_matches():
    sol = lp.solve(small_model(exact=False))
    assert sol.objective == pytest.approx(11)


def test_infeasible_and_unbounded():
    m = lp.LpModel("min", exact=True)
    m.add_variable("x", 1)
    m.add_constraint("lo", {"x": 1}, ">=", 2)
    m.add_constraint("hi", {"x": 1}, "<=", 1)
    assert lp.solve(m).status == lp.INFEASIBLE
    m = lp.LpModel("max", exact=True)
    m.add_variable("x", 1)
    m.add_constraint("lo", {"x": 1}, ">=", 2)
    assert lp.solve(m).status == lp.UNBOUNDED


def test_equality_and_ge_rows_min():
    m = lp.LpModel("min", exact=True)
    for v, c in (("x", 2), ("y", 3)):
        m.add_variable(v, c)
    m.add_constraint("sum", {"x": 1, "y": 1}, "=", 1)
    m.add_constraint("y", {"y": 1}, ">=", Fraction(1, 3))
    sol = lp.solve(m)
    assert sol.objective == Fraction(7, 3)
    assert sol.dual["y"] >= 0
    assert lp.dual_objective(m, sol.dual) == sol.objective


def test_model_errors():
    m = lp.LpModel(exact=True)
    m.add_variable("x")
    with pytest.raises(lp.LpError):
        m.add_variable("x")
    with pytest.raises(lp.LpError):
        m.add_constraint("r", {"z": 1}, "<=", 1)
    with pytest.raises(lp.LpError):
        m.add_constraint("r", {"x": 1}, "<", 1)
    with pytest.raises(lp.LpError):
        m.add_constraint("r", {"x": 0.5}, "<=", 1)
    with pytest.raises(lp.LpError):
        lp.LpModel("sideways")


def test_column_additions():
    m = small_model()
    base = lp.solve(m).objective
    m.add_column("zero", 0, {})
    assert lp.solve(m).objective == base
    m.add_column("x2", 3, {"a": 1, "b": 1, "c": 1})
    assert lp.solve(m).objective == base
    m.add_column("better", 5, {"a": 1})
    after = lp.solve(m)
    assert after.objective >= base and after.warm_started


def test_to_text_lists_everything():
    text = small_model().to_text()
    assert text.count("\nvar ") == 2 and text.count("\ncon ") == 3


@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_strong_duality_on_packing_lps(nv, nc, data):
    coef = st.integers(0, 5)
    m = lp.LpModel("max", exact=True)
    for j in range(nv):
        m.add_variable(f"x{j}", data.draw(st.integers(-2, 6)))
    for i in range(nc):
        m.add_constraint(f"r{i}", {f"x{j}": data.draw(coef) for j in range(nv)}, "<=",
                         data.draw(st.integers(0, 9)))
    m.add_constraint("box", {f"x{j}": 1 for j in range(nv)}, "<=", 10)
    sol = lp.solve(m)
    assert sol.optimal
    assert all(v <= 0 for v in m.residuals(sol.primal).values())
    assert m.evaluate(sol.primal) == sol.objective
    assert lp.dual_objective(m, sol.dual) == sol.objective
    assert all(v <= 0 for v in lp.dual_residuals(m, sol.dual).values())
