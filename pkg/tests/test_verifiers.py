import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonloc_mt import Ball, Interval, Linear, LogLog, SamplerConfig
from nonloc_mt.errors import BudgetViolated
from nonloc_mt.verifiers import (FAILS, HOLDS, INCONCLUSIVE, REGISTRY, ExpIntegrabilityParams,
                                 VerificationReport, cascade_implication, compare,
                                 counterexample_loglog, counterexample_moser, dumps, m0_sweep,
                                 moser_terms, run, truncated_exp_integral, verify_bbm_limit,
                                 verify_exp_integrability)
from nonloc_mt.verifiers.expint import bmo_estimate, budget, exp_mean, jn_exponent
from nonloc_mt.verifiers.report import combine

MC = SamplerConfig(seed=4, batch_size=1 << 14, max_batches=16)


def test_registry_ids():
    assert sorted(REGISTRY) == ["bbm", "cascade", "doubling", "expint", "loglog", "moser",
                                "poincare", "setlemma", "sobolev"]
    with pytest.raises(ValueError):
        run("nope")


def test_compare_and_combine():
    assert compare(1.0, 2.0) == HOLDS
    assert compare(2.0, 1.0) == FAILS
    assert compare(1.05, 1.0, sigma=0.1) == HOLDS  # quadrature error absorbs the excess
    assert compare(1.05, 1.0, sigma=0.1, stochastic=True) == INCONCLUSIVE
    assert compare(0.5, 1.0, sigma=0.1, stochastic=True) == HOLDS
    assert compare(1.5, 1.0, sigma=0.1, stochastic=True) == FAILS
    assert combine([HOLDS, INCONCLUSIVE]) == INCONCLUSIVE
    assert combine([HOLDS, FAILS, INCONCLUSIVE]) == FAILS


def test_report_json_17_digits():
    rep = VerificationReport("x")
    rep.add("a", 0.1, 1 / 3, HOLDS)
    data = json.loads(rep.to_json())
    assert data["evidence"][0]["rhs"] == 1 / 3
    assert "0.33333333333333331" in rep.to_json()
    assert "0.333333" in rep.to_text()
    assert dumps({"v": math.inf}).strip().endswith("}")


def test_bbm_linear_1d_limit():
    rep = verify_bbm_limit(Linear((1.0,)), Interval(0, 1), 2.0, tol=1e-3, sampler=MC)
    assert rep.ok
    assert rep.measured_constants["limit"] == pytest.approx(1.0, abs=1e-6)


def test_doubling_small():
    rep = run("doubling", trials=8, seed=7)
    assert rep.ok and rep.measured_constants["max_normalized_ratio"] <= 1.0


def test_setlemma():
    assert run("setlemma", trials=6).ok


def test_sobolev_reports_constants():
    rep = run("sobolev")
    assert rep.ok
    assert 0 < rep.measured_constants["C(lambda=0)"] < math.inf


def test_poincare_small_family():
    rep = run("poincare", trials=12, samples=1 << 16)
    assert rep.ok
    assert rep.measured_constants["C_dp_max_ratio"] > 0


def test_loglog_counterexample_holds():
    rep = counterexample_loglog()
    assert rep.ok
    assert rep.measured_constants["I(u, B_1/e)"] == pytest.approx(2.9649313940528375, rel=1e-6)


def test_truncated_exp_integral_grows():
    vals = [truncated_exp_integral(2.0 ** -k, 1.0, 1, 1.0, math.exp(-1.0)) for k in (10, 20, 30)]
    assert vals[0] < vals[1] < vals[2]


def test_moser_terms_closed_forms_against_mpmath():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    n, q = mp.mpf(10) ** 4, mp.mpf(1.5)
    qc = q / (q - 1)
    a = mp.e ** (mp.log(n) ** (1 / qc)) / n
    E = mp.e ** -1
    i1 = mp.log(a / (a - 1 / n)) - mp.log(E / (E - 1 / n))
    terms = moser_terms(1e4, 1.5)
    assert terms["I1"] == pytest.approx(float(i1), rel=1e-10)


def test_moser_counterexample_rows():
    rep = counterexample_moser()
    held = {r["param"]: r["status"] for r in rep.evidence}
    # closed-form split, bounds, mean and plateau growth all hold on this grid
    assert all(s == HOLDS for p, s in held.items() if "I decreasing" not in p and "final" not in p)


@given(st.integers(2, 8), st.integers(1, 8), st.integers(0, 6),
       st.lists(st.integers(0, 5), min_size=1, max_size=6))
def test_cascade_implication_exact(b2, a4, a1, slack):
    b, alpha = Fraction(b2, 2), Fraction(a4, 4)
    seq = [Fraction(a1)]
    for s in slack:
        seq.append(b * seq[-1] + alpha * b ** 3 + s)
    premise, conclusion = cascade_implication([-float(x) for x in seq], float(b), float(alpha))
    if b >= 1:
        assert premise and conclusion


def test_cascade_implication_premise_can_fail():
    premise, _ = cascade_implication([0.0, -0.1, -0.2], 2.0, 1.0)
    assert not premise


def test_m0_sweep():
    M0, admitted = m0_sweep([0.5, 2.0, 5.0], [True, False, True], (10, 3, 1, 0.3))
    assert (M0, admitted) == (1, 1)
    M0, admitted = m0_sweep([5.0], [False], (3, 1))
    assert admitted == 0


def test_budget_scale_invariant():
    u = LogLog(3.0)
    b1 = budget(u, Ball.centered(1, math.exp(-1.0)), 1.0, 1.0)
    assert b1 > 0


def test_exp_mean_constant_shift():
    # F(0) + int F' m / |B|: zero field gives exactly F(0) = exp(alpha)
    from nonloc_mt import Constant
    val, _ = exp_mean(Constant(0.0), Ball.centered(1, 1.0), 1.0, 1.0, 2.0)
    assert val == pytest.approx(math.exp(1.0))


def test_bmo_and_jn():
    bmo = bmo_estimate(LogLog(3.0), Ball.centered(1, math.exp(-1.0)))
    assert 0 < bmo < 1
    assert jn_exponent(bmo, 1) == pytest.approx(1 / (2 * math.e) / bmo)


def test_expint_budget_violation():
    with pytest.raises(BudgetViolated):
        verify_exp_integrability([("big", LogLog(3.0), Ball.centered(1, math.exp(-1.0)))], 1, 2.0, 1.0,
                                 ExpIntegrabilityParams(M0=1e-6))


def test_cascade_and_expint_registry_runs():
    assert run("cascade").ok
    rep = run("expint", beta=[0.5, 1.0])
    assert rep.ok and math.isfinite(rep.measured_constants["sup(beta=1)"])
