"""Certificate LPs: the numbers below are what exact arithmetic gives, not what was printed."""

from fractions import Fraction as F

import pytest

from sapkit import lp
from sapkit.certlp import (VARIANTS, build_structural_lp, gamma_to_shadow, primal_point_residuals,
                           published_dual, published_primal, transcriptions_agree,
                           verify_certificates)
from sapkit.core import InputError


def test_model_shapes():
    rows = {v: [(c.name, c.sense) for c in build_structural_lp(v).constraints] for v in VARIANTS}
    assert len(rows["uniform"]) == 15 and ("sz", ">=") in rows["stair_high"]
    assert ("sz", "<=") in rows["stair_low"] and "r6" not in dict(rows["stair_low"])


@pytest.mark.parametrize("variant", VARIANTS)
def test_transcriptions_agree(variant):
    assert transcriptions_agree(variant) == []


def test_unknown_variant():
    with pytest.raises(InputError):
        build_structural_lp("stairs")
    with pytest.raises(InputError):
        primal_point_residuals("uniform", {"nope": F(1)})


@pytest.mark.parametrize("variant,optimum", [
    ("uniform", F(32, 63)),
    ("stair_high", F(778439, 1554378)),
    ("stair_low", F(10429, 20825)),
])
def test_frozen_optima(variant, optimum):
    sol = lp.solve(build_structural_lp(variant))
    assert sol.optimal and sol.objective == optimum
    model = build_structural_lp(variant)
    assert lp.dual_objective(model, sol.dual) == optimum
    assert all(v <= 0 for v in lp.dual_residuals(model, sol.dual).values())


def test_uniform_certificate_holds():
    report = verify_certificates("uniform")
    assert report.ok and report.primal_objective == F(32, 63)
    assert report.to_dict()["ok"] is True


def test_stair_high_findings():
    report = verify_certificates("stair_high")
    assert report.primal_residuals == {"sum": F(1, 100), "sz": F(1, 52062500)}
    assert report.primal_objective == F(127701, 250000)
    assert set(report.derived_dual_violations) == {"col:x_SZ"}
    assert report.checks["LP optimum in (0.500804, 0.500805)"]
    assert not report.ok


def test_stair_low_findings():
    report = verify_certificates("stair_low")
    assert report.primal_residuals == {"sum": F(3, 100)}
    assert report.printed_dual_violations == {"c9": F(4, 25)}
    assert report.optimum != F(313, 625) and report.optimum > 1 / F(1997, 1000)
    assert not report.checks["published dual value > 1/1.997"]


@pytest.mark.parametrize("variant", VARIANTS)
def test_published_points_have_known_variables(variant):
    primal_point_residuals(variant, published_primal(variant))
    assert gamma_to_shadow(variant, published_dual(variant))
