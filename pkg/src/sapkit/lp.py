"""A small dense primal simplex with Bland's rule.

Two number modes share one implementation:

* exact mode stores the tableau as a numpy object array of ``Fraction`` and
  compares against zero exactly;
* float mode uses ``float64`` and a tolerance of ``1e-9``.

Variables are nonnegative.  Constraints are ``<=``, ``>=`` or ``=`` rows with
sparse coefficients.  Dual values are reported as shadow prices: ``dual[row]``
is the rate at which the optimum changes with the row's right-hand side, so at
an optimum ``objective == sum(dual[row] * rhs[row])``.

Column generation is supported through :meth:`LpModel.add_column`; the last
optimal basis is remembered and reused as a warm start when the model is
solved again.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Mapping

import numpy as np

FLOAT_TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LpError(ValueError):
    pass


@dataclass
class Constraint:
    name: str
    coeffs: dict[str, object]
    sense: str
    rhs: object


@dataclass
class LpSolution:
    status: str
    objective: object = None
    primal: dict[str, object] = field(default_factory=dict)
    dual: dict[str, object] = field(default_factory=dict)
    iterations: int = 0
    warm_started: bool = False

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class LpModel:
    """Variables, constraints and an objective direction."""

    def __init__(self, direction: str = "min", exact: bool = False, name: str = "lp") -> None:
        if direction not in ("min", "max"):
            raise LpError("direction must be 'min' or 'max'")
        self.direction = direction
        self.exact = exact
        self.name = name
        self.objective: dict[str, object] = {}
        self.variables: list[str] = []
        self.constraints: list[Constraint] = []
        self._row_index: dict[str, int] = {}
        self._warm_basis: list[str] | None = None

    # -- building -----------------------------------------------------------

    def _num(self, value):
        if self.exact:
            if isinstance(value, float):
                raise LpError("exact models take integers or Fractions, not floats")
            return Fraction(value)
        return float(value)

    def add_variable(self, name: str, obj=0) -> str:
        if name in self.objective:
            raise LpError(f"duplicate variable {name!r}")
        self.variables.append(name)
        self.objective[name] = self._num(obj)
        return name

    def add_constraint(self, name: str, coeffs: Mapping[str, object], sense: str, rhs) -> str:
        if sense not in ("<=", ">=", "="):
            raise LpError(f"unknown sense {sense!r}")
        if name in self._row_index:
            raise LpError(f"duplicate constraint {name!r}")
        for var in coeffs:
            if var not in self.objective:
                raise LpError(f"constraint {name!r} references unknown variable {var!r}")
        self._row_index[name] = len(self.constraints)
        self.constraints.append(
            Constraint(name, {v: self._num(c) for v, c in coeffs.items() if c != 0},
                       sense, self._num(rhs))
        )
        self._warm_basis = None
        return name

    def add_column(self, name: str, obj, coeffs: Mapping[str, object]) -> "LpModel":
        """Append a variable with its coefficients given per constraint name.

        The previous optimal basis stays valid (the new variable starts at
        zero), so the next :func:`solve` starts from it.
        """
        if name in self.objective:
            raise LpError(f"duplicate variable {name!r}")
        for row in coeffs:
            if row not in self._row_index:
                raise LpError(f"unknown constraint {row!r}")
        self.variables.append(name)
        self.objective[name] = self._num(obj)
        for row, c in coeffs.items():
            if c != 0:
                self.constraints[self._row_index[row]].coeffs[name] = self._num(c)
        return self

    def copy(self) -> "LpModel":
        return copy.deepcopy(self)

    def constraint(self, name: str) -> Constraint:
        return self.constraints[self._row_index[name]]

    def evaluate(self, values: Mapping[str, object]) -> object:
        zero = Fraction(0) if self.exact else 0.0
        return sum((self.objective[v] * values.get(v, 0) for v in self.variables), zero)

    def residuals(self, values: Mapping[str, object]) -> dict[str, object]:
        """Signed violation per row (positive means violated) plus negativity."""
        out = {}
        for con in self.constraints:
            lhs = sum((c * values.get(v, 0) for v, c in con.coeffs.items()),
                      Fraction(0) if self.exact else 0.0)
            if con.sense == "<=":
                out[con.name] = lhs - con.rhs
            elif con.sense == ">=":
                out[con.name] = con.rhs - lhs
            else:
                out[con.name] = abs(lhs - con.rhs)
        for v in self.variables:
            if values.get(v, 0) < 0:
                out[f"nonneg:{v}"] = -values[v]
        return out

    def to_text(self) -> str:
        """Plain listing: one line per variable, then one per constraint."""
        lines = [f"lp {self.name}", f"direction {self.direction}",
                 f"mode {'exact' if self.exact else 'float'}"]
        for v in self.variables:
            lines.append(f"var {v} obj {self.objective[v]}")
        for con in self.constraints:
            terms = " ".join(f"{c:+} {v}" if not self.exact else f"{_fmt(c)} {v}"
                             for v, c in con.coeffs.items())
            lines.append(f"con {con.name} : {terms} {con.sense} {_fmt(con.rhs)}")
        return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    return repr(x)


# ---------------------------------------------------------------- the solver


class _Tableau:
    """Dense tableau ``[A | b]`` with an objective row kept separately."""

    def __init__(self, rows, exact: bool) -> None:
        self.exact = exact
        self.tol = 0 if exact else FLOAT_TOL
        dtype = object if exact else float
        self.T = np.array(rows, dtype=dtype)
        if self.T.ndim != 2:
            self.T = self.T.reshape(len(rows), -1)

    def pivot(self, r: int, c: int) -> None:
        T = self.T
        T[r] = T[r] / T[r, c]
        col = T[:, c].copy()
        col[r] = 0
        nz = np.nonzero(col != 0)[0] if self.exact else np.nonzero(np.abs(col) > 0)[0]
        if len(nz):
            T[nz] -= np.outer(col[nz], T[r])
        if not self.exact:
            T[r, c] = 1.0
            T[nz, c] = 0.0


def _standard_form(model: LpModel):
    """Return columns, A rows, b, per-row flip sign and per-row natural basic column."""
    zero = Fraction(0) if model.exact else 0.0
    one = Fraction(1) if model.exact else 1.0
    cols = [f"v:{v}" for v in model.variables]
    slack_of: dict[int, int] = {}
    for i, con in enumerate(model.constraints):
        if con.sense != "=":
            slack_of[i] = len(cols)
            cols.append(f"s:{con.name}")
    var_pos = {v: k for k, v in enumerate(model.variables)}
    rows, rhs, flips, natural = [], [], [], []
    for i, con in enumerate(model.constraints):
        row = [zero] * len(cols)
        for v, c in con.coeffs.items():
            row[var_pos[v]] = c
        if con.sense == "<=":
            row[slack_of[i]] = one
        elif con.sense == ">=":
            row[slack_of[i]] = -one
        b = con.rhs
        flip = 1
        if b < 0:
            row = [-x for x in row]
            b = -b
            flip = -1
        nat = slack_of.get(i)
        if nat is not None and row[nat] != one:
            nat = None
        rows.append(row)
        rhs.append(b)
        flips.append(flip)
        natural.append(nat)
    return cols, rows, rhs, flips, natural


def _costs(model: LpModel, cols: list[str]):
    zero = Fraction(0) if model.exact else 0.0
    sign = 1 if model.direction == "min" else -1
    out = []
    for key in cols:
        if key.startswith("v:"):
            out.append(sign * model.objective[key[2:]])
        else:
            out.append(zero)
    return out


def _run_simplex(tab: _Tableau, basis: list[int], cost, ncols: int, max_iter: int):
    """Minimise ``cost`` over the tableau rows; only columns ``< ncols`` may enter."""
    T, tol = tab.T, tab.tol
    iters = 0
    while True:
        cb = np.array([cost[j] for j in basis], dtype=T.dtype)
        if len(basis):
            red = np.array(cost[:ncols], dtype=T.dtype) - cb @ T[:, :ncols]
        else:
            red = np.array(cost[:ncols], dtype=T.dtype)
        entering = -1
        for j in range(ncols):
            if red[j] < -tol and j not in basis:
                entering = j
                break
        if entering < 0:
            return OPTIMAL, iters
        col = T[:, entering]
        best_row, best_ratio = -1, None
        for r in range(T.shape[0]):
            a = col[r]
            if a > tol:
                ratio = T[r, -1] / a
                if (best_ratio is None or ratio < best_ratio - tol
                        or (abs(ratio - best_ratio) <= tol and basis[r] < basis[best_row])):
                    best_row, best_ratio = r, ratio
        if best_row < 0:
            return UNBOUNDED, iters
        tab.pivot(best_row, entering)
        basis[best_row] = entering
        iters += 1
        if iters > max_iter:
            raise LpError("simplex iteration limit reached")


def _solve_linear(M, rhs, exact: bool):
    """Solve ``M y = rhs`` (square, nonsingular)."""
    if not exact:
        return list(np.linalg.solve(np.array(M, dtype=float), np.array(rhs, dtype=float)))
    n = len(M)
    A = [list(M[i]) + [rhs[i]] for i in range(n)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [A[i][n] for i in range(n)]


def solve(model: LpModel, max_iter: int = 100_000) -> LpSolution:
    """Optimise ``model``; deterministic thanks to Bland's rule."""
    cols, rows, rhs, flips, natural = _standard_form(model)
    exact = model.exact
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    nrows, ncols = len(rows), len(cols)
    cost = _costs(model, cols)
    iterations = 0

    if nrows == 0:
        for j, c in enumerate(cost):
            if c < 0:
                return LpSolution(UNBOUNDED)
        primal = {v: zero for v in model.variables}
        return LpSolution(OPTIMAL, zero, primal, {}, 0)

    warm = False
    tab = None
    basis: list[int] = []
    live_rows = list(range(nrows))
    if model._warm_basis is not None and len(model._warm_basis) == nrows:
        index = {k: j for j, k in enumerate(cols)}
        if all(k in index for k in model._warm_basis):
            tab = _Tableau([r + [b] for r, b in zip(rows, rhs)], exact)
            basis = [index[k] for k in model._warm_basis]
            ok = True
            for r, j in enumerate(basis):
                if (tab.T[r, j] == 0) if exact else abs(tab.T[r, j]) < 1e-12:
                    cand = [rr for rr in range(r + 1, nrows)
                            if ((tab.T[rr, j] != 0) if exact else abs(tab.T[rr, j]) > 1e-12)]
                    if not cand:
                        ok = False
                        break
                    rr = cand[0]
                    tab.T[[r, rr]] = tab.T[[rr, r]]
                    rows[r], rows[rr] = rows[rr], rows[r]
                    rhs[r], rhs[rr] = rhs[rr], rhs[r]
                    flips[r], flips[rr] = flips[rr], flips[r]
                    live_rows[r], live_rows[rr] = live_rows[rr], live_rows[r]
                tab.pivot(r, j)
            if ok and all(tab.T[r, -1] >= -tab.tol for r in range(nrows)):
                warm = True
                if not exact:
                    tab.T[:, -1] = np.maximum(tab.T[:, -1], 0.0)
            else:
                cols, rows, rhs, flips, natural = _standard_form(model)
                live_rows = list(range(nrows))
                tab = None

    if not warm:
        art_rows = [i for i in range(nrows) if natural[i] is None]
        art_cols = {i: ncols + k for k, i in enumerate(art_rows)}
        width = ncols + len(art_rows)
        full = []
        for i in range(nrows):
            extra = [zero] * len(art_rows)
            if i in art_cols:
                extra[art_cols[i] - ncols] = one
            full.append(rows[i] + extra + [rhs[i]])
        tab = _Tableau(full, exact)
        basis = [natural[i] if natural[i] is not None else art_cols[i] for i in range(nrows)]
        if art_rows:
            phase1 = [zero] * ncols + [one] * len(art_rows)
            _, it = _run_simplex(tab, basis, phase1, width, max_iter)
            iterations += it
            infeas = sum((tab.T[r, -1] for r in range(nrows) if basis[r] >= ncols), zero)
            if infeas > (0 if exact else 1e-7):
                return LpSolution(INFEASIBLE, iterations=iterations)
            # drive remaining artificials out of the basis, dropping redundant rows
            keep = []
            for r in range(nrows):
                if basis[r] >= ncols:
                    pivot_col = None
                    for j in range(ncols):
                        a = tab.T[r, j]
                        if (a != 0) if exact else abs(a) > 1e-9:
                            if j not in basis:
                                pivot_col = j
                                break
                    if pivot_col is None:
                        continue
                    tab.pivot(r, pivot_col)
                    basis[r] = pivot_col
                keep.append(r)
            tab.T = np.concatenate([tab.T[keep][:, :ncols], tab.T[keep][:, -1:]], axis=1)
            basis = [basis[r] for r in keep]
            live_rows = [live_rows[r] for r in keep]
        else:
            tab.T = np.concatenate([tab.T[:, :ncols], tab.T[:, -1:]], axis=1)

    status, it = _run_simplex(tab, basis, cost, ncols, max_iter)
    iterations += it
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=iterations, warm_started=warm)

    values = [zero] * ncols
    for r, j in enumerate(basis):
        values[j] = tab.T[r, -1]
    primal = {v: values[k] for k, v in enumerate(model.variables)}
    if not exact:
        primal = {v: (0.0 if abs(x) < 1e-12 else float(x)) for v, x in primal.items()}
    objective = model.evaluate(primal)

    # shadow prices: y B = c_B on the surviving rows, in internal (min) form
    cols_std, rows_std, _, flips_std, _ = _standard_form(model)
    B = [[rows_std[i][j] for i in live_rows] for j in basis]  # B transposed
    cb = [cost[j] for j in basis]
    y_live = _solve_linear(B, cb, exact) if basis else []
    sign = 1 if model.direction == "min" else -1
    dual = {con.name: zero for con in model.constraints}
    for y, i in zip(y_live, live_rows):
        val = sign * flips_std[i] * y
        dual[model.constraints[i].name] = val if exact else float(val)

    model._warm_basis = [cols[j] for j in basis] if len(basis) == nrows else None
    return LpSolution(OPTIMAL, objective, primal, dual, iterations, warm)


def dual_objective(model: LpModel, dual: Mapping[str, object]):
    zero = Fraction(0) if model.exact else 0.0
    return sum((dual.get(c.name, 0) * c.rhs for c in model.constraints), zero)


def dual_residuals(model: LpModel, dual: Mapping[str, object]) -> dict[str, object]:
    """Violations of the dual feasibility conditions for shadow prices.

    Sign rules (``min``): ``>=`` rows need ``y >= 0``, ``<=`` rows ``y <= 0``;
    each column needs ``c_j - sum_i y_i a_ij >= 0``.  ``max`` flips all of them.
    Positive entries are violations.
    """
    zero = Fraction(0) if model.exact else 0.0
    s = 1 if model.direction == "min" else -1
    out: dict[str, object] = {}
    for con in model.constraints:
        y = dual.get(con.name, zero)
        if con.sense == ">=":
            out[f"sign:{con.name}"] = -s * y
        elif con.sense == "<=":
            out[f"sign:{con.name}"] = s * y
    for v in model.variables:
        col = sum((dual.get(con.name, zero) * con.coeffs.get(v, 0) for con in model.constraints),
                  zero)
        out[f"col:{v}"] = -s * (model.objective[v] - col)
    return out


def is_rational(x) -> bool:
    return isinstance(x, Rational)
