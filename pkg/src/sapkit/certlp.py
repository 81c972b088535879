"""Structural certificate LPs and their published primal and dual points.

Three small LPs bound how much of an optimum the algorithm portfolio must
keep.  Each is ``min z`` over nonnegative shares ``x_*`` that sum to one,
where every "candidate solution" row says its share is at most ``z``.

For each variant this module builds the LP (row-wise transcription), checks
it against an independently keyed column-wise transcription, plugs in the
published primal point and dual point in exact arithmetic, and solves the LP
itself to obtain the true optimum and a verified dual.

Dual points are checked twice: against the dual as printed (verbatim rows,
including duplicates) and against the dual derived mechanically from the
primal, after mapping each ``gamma_k`` to a shadow price.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import lp
from ._cert_columns import COLUMNS
from .core import InputError

DEFAULT_ALPHA = Fraction(833, 100)
VARIANTS = ("stair_high", "stair_low", "uniform")

STAIR_VARS = ("SSWL", "SNCS", "SNCL", "SZ", "SCr", "SBS", "SBL", "STS", "STL", "SSWS", "LU", "LD")
UNIFORM_VARS = ("LT", "LB", "LM", "SBS", "SBL", "STS", "STL", "SMTS", "SMTL", "SMBS", "SMBL",
                "SMSW", "SMCr")

# Row-wise transcription.  ``<= z`` rows list their left-hand side.
_STAIR_ROWS = {
    "r1": "LU + LD",
    "r2": "SCr + SBS + SBL + STS + STL + SSWS + SSWL + SNCS + SNCL + SZ + LU",
    "r3": "LD + SCr + STL + SBL + SSWL + SNCL",
    "r4": "LD + STS + SBS + SNCS",
    "r5": "1/4 LD + SSWS",
}
_STAIR_HIGH_EXTRA = {"r6": "LD + {k} SZ"}  # k = 1/(8(alpha+1))

_UNIFORM_ROWS = {
    "r1": "SBS + SBL + STS + STL + SMTS + SMTL + SMBS + SMBL + SMSW + SMCr",
    "r2": "LT + LB + LM + 1/2 SBS",
    "r3": "LT + LB + LM + SBL",
    "r4": "LT + LB + LM + 1/2 STS",
    "r5": "LT + LB + LM + STL",
    "r6": "LT + LM + 1/2 STS + 1/2 STL + 1/2 SMTS + 1/2 SMTL + 1/2 SMBS + 1/2 SMBL + 1/2 SMSW",
    "r7": "LT + LM + 1/2 SBS + 1/2 SBL + 1/2 SMTS + 1/2 SMTL + 1/2 SMBS + 1/2 SMBL + 1/2 SMSW",
    "r8": "LT + LB + LM + SMCr",
    "r9": "LT + LB + LM + SMTL",
    "r10": "LT + LB + LM + 1/2 SMTS",
    "r11": "LT + LB + LM + SMBL",
    "r12": "LT + LB + LM + 1/2 SMBS",
    "r13": "LT + SMSW",
    "r14": "LB + SMSW",
}

_TERM = re.compile(r"^(?:(\S+)\s+)?([A-Za-z]+)$")


def _parse(expr: str) -> dict[str, Fraction]:
    out: dict[str, Fraction] = {}
    for term in expr.split("+"):
        m = _TERM.match(term.strip())
        if not m:
            raise ValueError(f"bad term {term!r}")
        coef = Fraction(m.group(1)) if m.group(1) else Fraction(1)
        out[m.group(2)] = out.get(m.group(2), Fraction(0)) + coef
    return out


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise InputError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def zero_rows(variant: str, alpha=DEFAULT_ALPHA) -> dict[str, dict[str, Fraction]]:
    """Left-hand sides of the ``<= z`` rows, as coefficient maps."""
    _check_variant(variant)
    alpha = Fraction(alpha)
    if variant == "uniform":
        return {k: _parse(v) for k, v in _UNIFORM_ROWS.items()}
    rows = {k: _parse(v) for k, v in _STAIR_ROWS.items()}
    if variant == "stair_high":
        k = Fraction(1) / (8 * (alpha + 1))
        rows["r6"] = _parse(_STAIR_HIGH_EXTRA["r6"].format(k=k))
    return rows


def variables(variant: str) -> tuple[str, ...]:
    _check_variant(variant)
    return UNIFORM_VARS if variant == "uniform" else STAIR_VARS


def build_structural_lp(variant: str, alpha=DEFAULT_ALPHA) -> lp.LpModel:
    """``min z`` with the share normalisation, the ``<= z`` rows and the alpha row."""
    alpha = Fraction(alpha)
    names = variables(variant)
    model = lp.LpModel("min", exact=True, name=f"structural-{variant}")
    for v in names:
        model.add_variable(f"x_{v}")
    model.add_variable("z", 1)
    model.add_constraint("sum", {f"x_{v}": 1 for v in names}, "=", 1)
    for row, coeffs in zero_rows(variant, alpha).items():
        c = {f"x_{v}": a for v, a in coeffs.items()}
        c["z"] = -1
        model.add_constraint(row, c, "<=", 0)
    if variant == "stair_high":
        model.add_constraint("sz", {"x_SZ": 1}, ">=", 1 / alpha)
    elif variant == "stair_low":
        model.add_constraint("sz", {"x_SZ": 1}, "<=", 1 / alpha)
    return model


def transcriptions_agree(variant: str, alpha=DEFAULT_ALPHA) -> list[str]:
    """Differences between the row-wise and the column-wise transcription (empty if equal)."""
    rows = zero_rows(variant, alpha)
    alpha = Fraction(alpha)
    cols = COLUMNS[variant]
    diffs = []
    if set(cols) != set(variables(variant)):
        diffs.append(f"variable sets differ: {sorted(set(cols) ^ set(variables(variant)))}")
    for v, entries in cols.items():
        for row, coef in entries.items():
            value = coef(alpha) if callable(coef) else Fraction(coef)
            if rows.get(row, {}).get(v, Fraction(0)) != value:
                diffs.append(f"{variant}: {v} in {row}: columns say {value}, rows say "
                             f"{rows.get(row, {}).get(v, 0)}")
    for row, coeffs in rows.items():
        for v in coeffs:
            if row not in cols.get(v, {}):
                diffs.append(f"{variant}: {v} in {row} missing from the column transcription")
    return diffs


# ---------------------------------------------------------------- published points

def published_primal(variant: str) -> dict[str, Fraction]:
    """The primal points as printed (zeros omitted)."""
    _check_variant(variant)
    F = Fraction
    if variant == "stair_high":
        return {"SCr": F(1, 625), "SBS": F(1, 625), "SSWS": F(193, 500),
                "SZ": F(7503, 62500), "LU": F(389, 250000), "LD": F(124799, 250000)}
    if variant == "stair_low":
        return {"SBS": F(1, 625), "SBL": F(1, 625), "LU": F(1, 625), "SSWS": F(193, 500),
                "SZ": F(2, 25), "LD": F(312, 625)}
    return {"SBS": F(2, 63), "STS": F(2, 63), "SMTS": F(2, 63), "SMBS": F(2, 63),
            "SBL": F(1, 63), "STL": F(1, 63), "SMTL": F(1, 63), "SMBL": F(1, 63),
            "SMCr": F(1, 63), "LB": F(13, 63), "LM": F(18, 63), "LT": F(0), "SMSW": F(19, 63)}


def published_dual(variant: str) -> dict[str, Fraction]:
    """Dual points as printed; keys ``g0``, ``g1``, ...; missing keys are zero."""
    _check_variant(variant)
    F = Fraction
    if variant == "stair_high":
        return {"g0": F(-1, 2), "g2": F(1, 2), "g6": F(1, 2), "g7": F(1, 2)}
    if variant == "stair_low":
        return {"g0": F(-13, 25), "g1": F(4, 25), "g3": F(4, 25), "g4": F(4, 25),
                "g5": F(4, 25), "g2": F(9, 25), "g6": F(100)}
    return {"g0": F(-32, 63), "g1": F(29, 63), "g2": F(2, 21), "g3": F(1, 21), "g8": F(1, 21),
            "g4": F(4, 63), "g10": F(4, 63), "g12": F(4, 63), "g5": F(2, 63), "g6": F(2, 63),
            "g9": F(2, 63), "g11": F(2, 63), "g14": F(2, 63), "g7": F(0), "g13": F(0)}


def _printed_dual_rows(variant: str, alpha) -> tuple[dict[str, Fraction], list, list[str]]:
    """The dual as printed: objective, rows ``(name, coeffs, sense, rhs)``, sign-constrained gammas."""
    alpha = Fraction(alpha)
    F = Fraction
    rows: list[tuple[str, dict[str, Fraction], str, Fraction]] = []

    def row(name, text, sense, rhs):
        coeffs = {}
        for term in text.split("+"):
            term = term.strip()
            sign = 1
            if term.startswith("-"):
                sign, term = -1, term[1:].strip()
            if " " in term:
                c, g = term.split()
                coef = F(c)
            else:
                coef, g = F(1), term
            coeffs[g] = coeffs.get(g, F(0)) + sign * coef
        rows.append((name, coeffs, sense, F(rhs)))

    if variant in ("stair_high", "stair_low"):
        high = variant == "stair_high"
        objective = {"g0": F(-1), "g6": (1 if high else -1) / alpha}
        row("z", "g1 + g2 + g3 + g4 + g5" + (" + g7" if high else ""), "<=", 1)
        row("c1", "g0 + g1 + g3 + g4 + 1/4 g5" + (" + g6" if high else ""), ">=", 0)
        for k, text in enumerate(["g0 + g1 + g2", "g0 + g2 + g3", "g0 + g2 + g5", "g0 + g2 + g4",
                                  "g0 + g2 + g3", "g0 + g2 + g4", "g0 + g2 + g3", "g0 + g2",
                                  "g0 + g2 + g3"], start=2):
            row(f"c{k}", text, ">=", 0)
        if high:
            row("c11", f"g0 + g2 + {F(1) / (8 * (alpha + 1))} g7 + -g6", ">=", 0)
        else:
            row("c11", "g0 + g2 + g6", ">=", 0)
        row("c12", "g0 + g2 + g3", ">=", 0)
        signed = [f"g{k}" for k in range(1, 8 if high else 7)]
        return objective, rows, signed
    objective = {"g0": F(-1)}
    row("z", "g1 + g2 + " + " + ".join(f"g{k}" for k in range(1, 15)), ">=", 1)
    for k, text in enumerate([
        "g0 + g1 + 1/2 g2 + 1/2 g7",
        "g0 + g1 + g3 + 1/2 g7",
        "g0 + g1 + 1/2 g4 + 1/2 g6",
        "g0 + g1 + g5 + 1/2 g6",
        "g0 + g2 + g3 + g4 + g5 + g6 + g7 + g8 + g9 + g10 + g11 + g12 + g13",
        "g0 + g2 + g3 + g4 + g5 + g8 + g9 + g10 + g11 + g12 + g14",
        "g0 + g2 + g3 + g4 + g5 + g6 + g7 + g8 + g9 + g10 + g11 + g12",
        "g0 + g1 + 1/2 g6 + 1/2 g7 + 1/2 g10",
        "g0 + g1 + 1/2 g6 + 1/2 g7 + g9",
        "g0 + g1 + 1/2 g6 + 1/2 g7 + 1/2 g12",
        "g0 + g1 + 1/2 g6 + 1/2 g7 + g11",
        "g0 + g1 + 1/2 g6 + 1/2 g7 + g13 + g14",
        "g0 + g1 + g8",
    ], start=1):
        row(f"c{k}", text, ">=", 0)
    return objective, rows, [f"g{k}" for k in range(1, 15)]


def printed_dual_check(variant: str, point: Mapping[str, Fraction],
                       alpha=DEFAULT_ALPHA) -> tuple[Fraction, dict[str, Fraction]]:
    """Objective of ``point`` in the printed dual, and its positive violations by row."""
    _check_variant(variant)
    objective, rows, signed = _printed_dual_rows(variant, alpha)
    g = lambda k: Fraction(point.get(k, 0))
    value = sum((c * g(k) for k, c in objective.items()), Fraction(0))
    bad: dict[str, Fraction] = {}
    for name, coeffs, sense, rhs in rows:
        lhs = sum((c * g(k) for k, c in coeffs.items()), Fraction(0))
        gap = rhs - lhs if sense == ">=" else lhs - rhs
        if gap > 0:
            bad[name] = gap
    for k in signed:
        if g(k) < 0:
            bad[f"sign:{k}"] = -g(k)
    return value, bad


def gamma_to_shadow(variant: str, point: Mapping[str, Fraction]) -> dict[str, Fraction]:
    """Shadow prices of :func:`build_structural_lp` rows corresponding to printed gammas.

    ``g0`` belongs to the normalisation row, ``g1``.. to the ``<= z`` rows in
    order; for the stair variants ``g6`` belongs to the alpha row and (high
    case) ``g7`` to the extra ``<= z`` row.
    """
    g = lambda k: Fraction(point.get(k, 0))
    out = {"sum": -g("g0")}
    if variant == "uniform":
        for k in range(1, 15):
            out[f"r{k}"] = -g(f"g{k}")
        return out
    for k in range(1, 6):
        out[f"r{k}"] = -g(f"g{k}")
    if variant == "stair_high":
        out["r6"] = -g("g7")
        out["sz"] = g("g6")
    else:
        out["sz"] = -g("g6")
    return out


# ---------------------------------------------------------------- report


@dataclass
class CertificateReport:
    variant: str
    alpha: Fraction
    transcription_diffs: list[str]
    primal_point: dict[str, Fraction]
    primal_residuals: dict[str, Fraction]   # positive = violated, z = max row value
    primal_objective: Fraction
    printed_dual_objective: Fraction
    printed_dual_violations: dict[str, Fraction]
    derived_dual_objective: Fraction
    derived_dual_violations: dict[str, Fraction]
    optimum: Fraction
    optimal_point: dict[str, Fraction]
    solver_dual: dict[str, Fraction]
    solver_dual_objective: Fraction
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def primal_feasible(self) -> bool:
        return not self.primal_residuals

    @property
    def dual_feasible(self) -> bool:
        return not self.printed_dual_violations and not self.derived_dual_violations

    @property
    def sandwich(self) -> bool:
        """Weak duality holds around the solver optimum for the solver's own certificate."""
        if self.solver_dual_objective > self.optimum:
            return False
        return not self.primal_feasible or self.optimum <= self.primal_objective

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        s = lambda x: str(x)
        return {
            "variant": self.variant,
            "alpha": s(self.alpha),
            "transcription_diffs": self.transcription_diffs,
            "primal_point": {k: s(v) for k, v in sorted(self.primal_point.items())},
            "primal_residuals": {k: s(v) for k, v in sorted(self.primal_residuals.items())},
            "primal_objective": s(self.primal_objective),
            "primal_objective_float": float(self.primal_objective),
            "printed_dual_objective": s(self.printed_dual_objective),
            "printed_dual_violations": {k: s(v) for k, v in
                                        sorted(self.printed_dual_violations.items())},
            "derived_dual_objective": s(self.derived_dual_objective),
            "derived_dual_violations": {k: s(v) for k, v in
                                        sorted(self.derived_dual_violations.items())},
            "optimum": s(self.optimum),
            "optimum_float": float(self.optimum),
            "optimal_point": {k: s(v) for k, v in sorted(self.optimal_point.items()) if v},
            "solver_dual": {k: s(v) for k, v in sorted(self.solver_dual.items()) if v},
            "solver_dual_objective": s(self.solver_dual_objective),
            "checks": dict(self.checks),
            "ok": self.ok,
        }


def primal_point_residuals(variant: str, point: Mapping[str, Fraction],
                           alpha=DEFAULT_ALPHA) -> tuple[Fraction, dict[str, Fraction]]:
    """Smallest ``z`` the point allows, and positive violations of the other rows."""
    alpha = Fraction(alpha)
    x = lambda v: Fraction(point.get(v, 0))
    z = max(sum((a * x(v) for v, a in row.items()), Fraction(0))
            for row in zero_rows(variant, alpha).values())
    bad: dict[str, Fraction] = {}
    total = sum((x(v) for v in variables(variant)), Fraction(0))
    if total != 1:
        bad["sum"] = abs(total - 1)
    if variant == "stair_high" and x("SZ") < 1 / alpha:
        bad["sz"] = 1 / alpha - x("SZ")
    if variant == "stair_low" and x("SZ") > 1 / alpha:
        bad["sz"] = x("SZ") - 1 / alpha
    for v in variables(variant):
        if x(v) < 0:
            bad[f"sign:{v}"] = -x(v)
    unknown = set(point) - set(variables(variant))
    if unknown:
        raise InputError(f"unknown variables {sorted(unknown)}")
    return z, bad


def _claims(variant: str, report: CertificateReport) -> dict[str, bool]:
    """Each published claim, checked on the published point and on the solved LP."""
    F = Fraction
    checks = {"transcriptions agree": not report.transcription_diffs,
              "published primal feasible": report.primal_feasible,
              "published dual feasible": report.dual_feasible,
              "solver sandwich": report.solver_dual_objective == report.optimum}
    if variant == "uniform":
        target = F(32, 63)
        checks["published primal value = 32/63"] = report.primal_objective == target
        checks["published dual value = 32/63"] = report.derived_dual_objective == target
        checks["LP optimum = 32/63"] = report.optimum == target
    elif variant == "stair_high":
        lo, hi = F(500804, 10**6), F(500805, 10**6)
        checks["published primal value in (0.500804, 0.500805)"] = (
            lo < report.primal_objective < hi)
        checks["published dual value > 0.5008"] = report.derived_dual_objective > F(5008, 10**4)
        checks["LP optimum in (0.500804, 0.500805)"] = lo < report.optimum < hi
        checks["LP optimum > 0.5008"] = report.optimum > F(5008, 10**4)
    else:
        bound = 1 / F(1997, 1000)
        checks["published primal value = 313/625"] = report.primal_objective == F(313, 625)
        checks["published dual value > 1/1.997"] = report.derived_dual_objective > bound
        checks["LP optimum = 313/625"] = report.optimum == F(313, 625)
        checks["LP optimum > 1/1.997"] = report.optimum > bound
    return checks


def verify_certificates(variant: str, alpha=DEFAULT_ALPHA) -> CertificateReport:
    """Check the published points exactly and solve the LP independently."""
    _check_variant(variant)
    alpha = Fraction(alpha)
    model = build_structural_lp(variant, alpha)
    diffs = transcriptions_agree(variant, alpha)
    point = published_primal(variant)
    z, bad = primal_point_residuals(variant, point, alpha)
    gamma = published_dual(variant)
    pd_value, pd_bad = printed_dual_check(variant, gamma, alpha)
    shadow = gamma_to_shadow(variant, gamma)
    dd_value = lp.dual_objective(model, shadow)
    dd_bad = {k: v for k, v in lp.dual_residuals(model, shadow).items() if v > 0}
    sol = lp.solve(model)
    if not sol.optimal:
        raise RuntimeError(f"structural LP {variant} is {sol.status}")
    report = CertificateReport(
        variant=variant, alpha=alpha, transcription_diffs=diffs,
        primal_point=dict(point), primal_residuals=bad, primal_objective=z,
        printed_dual_objective=pd_value, printed_dual_violations=pd_bad,
        derived_dual_objective=dd_value, derived_dual_violations=dd_bad,
        optimum=sol.objective, optimal_point=dict(sol.primal), solver_dual=dict(sol.dual),
        solver_dual_objective=lp.dual_objective(model, sol.dual))
    report.checks = _claims(variant, report)
    return report


__all__ = [
    "CertificateReport", "DEFAULT_ALPHA", "VARIANTS", "build_structural_lp", "gamma_to_shadow",
    "primal_point_residuals", "printed_dual_check", "published_dual", "published_primal",
    "transcriptions_agree", "variables", "verify_certificates", "zero_rows",
]
