"""Verifiers: one per quantitative statement, each returning a VerificationReport.

``REGISTRY`` maps the CLI ids to runners taking keyword options with
sensible defaults; unknown options are ignored by the runner.
"""
from __future__ import annotations

from ..fields import Linear
from ..geometry import Ball, Interval, SamplerConfig
from .bbm import BBM_ID, gradient_energy, verify_bbm_limit
from .counterexamples import (LOGLOG_ID, MOSER_ID, counterexample_loglog, counterexample_moser,
                              moser_terms, truncated_exp_integral)
from .expint import (CASCADE_ID, EXPINT_ID, ExpIntegrabilityParams, bmo_estimate,
                     cascade_implication, level_set_cascade, loglog_cascade_family, m0_sweep,
                     moser_family, indicator_family, verify_cascade, verify_exp_integrability)
from .families import poincare_family, sobolev_family
from .inequalities import POINCARE_ID, SOBOLEV_ID, verify_poincare, verify_sobolev
from .lemmas import (DOUBLING_ID, SETLEMMA_ID, doubling_cases, random_set_configs,
                     verify_doubling, verify_set_lemma)
from .report import FAILS, HOLDS, INCONCLUSIVE, VerificationReport, compare, dumps


def _sampler(o):
    samples = int(o.get("samples") or (1 << 20))
    batch = 1 << 14
    return SamplerConfig(seed=int(o.get("seed", 20240607)), batch_size=batch,
                         max_batches=max(2, samples // batch))


def _run_bbm(o):
    field = o.get("field_obj")
    d = int(o.get("d") or 1)
    domain = o.get("domain_obj")
    if field is None:
        field = Linear((1.0,) + (0.0,) * (d - 1))
    if domain is None:
        domain = Interval(0.0, 1.0) if d == 1 else Ball.centered(d, 1.0)
    grid = o.get("delta_grid") or (0.4, 0.2, 0.1, 0.05)
    return verify_bbm_limit(field, domain, float(o.get("p") or 2.0), grid,
                            tol=float(o.get("tol") or 1e-3), sampler=_sampler(o))


def _run_doubling(o):
    trials = int(o.get("trials") or 200)
    cases = doubling_cases(trials_1d=trials, trials_radial=max(1, trials // 4),
                           seed=int(o.get("seed", 7)))
    p = o.get("p")
    ps = (float(p),) if p else (1.5, 2.0, 3.0)
    return verify_doubling(cases, p_values=ps, tol=float(o.get("tol") or 1e-5))


def _run_setlemma(o):
    d = int(o.get("d") or 2)
    lam = float(o.get("lam") or (d - 0.5))
    configs = random_set_configs(d, int(o.get("trials") or 12), seed=int(o.get("seed", 11)))
    p = o.get("p")
    return verify_set_lemma(configs, lam, float(p) if p else None, seed=int(o.get("seed", 3)))


def _run_poincare(o):
    seed = int(o.get("seed", 20240607))
    delta = float(o.get("delta") or 0.25)
    fam = poincare_family(seed, int(o.get("trials") or 100), delta)
    return verify_poincare(fam, float(o.get("p") or 2.0), delta, seed,
                           int(o.get("samples") or (1 << 18)))


def _run_sobolev(o):
    d = int(o.get("d") or 2)
    p = float(o.get("p") or (1.5 if d == 2 else 2.0))
    return verify_sobolev(d, p, float(o.get("delta") or 0.1))


def _exp_params(o):
    return ExpIntegrabilityParams(alpha=float(o.get("alpha") or 1.0),
                                  M0=float(o.get("M0") or 1.0),
                                  ell0=float(o.get("ell0") or 1.0))


def _run_cascade(o):
    d = int(o.get("d") or 1)
    p = float(o.get("p") or 2.0 * d)
    family = moser_family() if p == d else loglog_cascade_family(float(o.get("lam") or 3.0))
    return verify_cascade(family, d, p, float(o.get("delta") or 1.0), _exp_params(o),
                          depth=int(o.get("depth") or 6))


def _run_expint(o):
    d = int(o.get("d") or 1)
    p = float(o.get("p") or 2.0 * d)
    ep = ExpIntegrabilityParams(alpha=float(o.get("alpha") or 1.0),
                                M0=float(o.get("M0") or (10.0 if p == d else 1.0)))
    betas = o.get("beta") or (0.25, 0.5, 1.0, 1.5, 2.0)
    return verify_exp_integrability(None, d, p, float(o.get("delta") or 1.0), ep, betas)


def _run_loglog(o):
    taus = o.get("tau") or (0.5, 0.25, 0.125)
    return counterexample_loglog(float(o.get("p") or 2.0), int(o.get("d") or 1),
                                 float(o.get("lam") or 3.0), float(o.get("gamma") or 4.0),
                                 float(o.get("alpha") or 1.0), taus)


def _run_moser(o):
    ns = o.get("n") or (1e3, 1e4, 1e5)
    return counterexample_moser(int(o.get("d") or 1), float(o.get("q") or 1.5),
                                float(o.get("gamma") or 2.0), float(o.get("alpha") or 1.0), ns)


REGISTRY = {
    "bbm": _run_bbm,
    "doubling": _run_doubling,
    "setlemma": _run_setlemma,
    "poincare": _run_poincare,
    "sobolev": _run_sobolev,
    "cascade": _run_cascade,
    "expint": _run_expint,
    "loglog": _run_loglog,
    "moser": _run_moser,
}


def run(verifier_id: str, **options) -> VerificationReport:
    try:
        runner = REGISTRY[verifier_id]
    except KeyError:
        raise ValueError(f"unknown verifier {verifier_id!r}; choose from {sorted(REGISTRY)}") from None
    return runner(options)


__all__ = [
    "REGISTRY", "run", "VerificationReport", "HOLDS", "FAILS", "INCONCLUSIVE", "compare", "dumps",
    "verify_bbm_limit", "gradient_energy", "verify_doubling", "doubling_cases", "verify_set_lemma",
    "random_set_configs", "verify_poincare", "verify_sobolev", "level_set_cascade",
    "verify_cascade", "verify_exp_integrability", "ExpIntegrabilityParams", "cascade_implication",
    "m0_sweep", "bmo_estimate", "counterexample_loglog", "counterexample_moser", "moser_terms",
    "truncated_exp_integral", "poincare_family", "sobolev_family", "loglog_cascade_family",
    "moser_family", "indicator_family",
    "BBM_ID", "DOUBLING_ID", "SETLEMMA_ID", "POINCARE_ID", "SOBOLEV_ID", "CASCADE_ID", "EXPINT_ID",
    "LOGLOG_ID", "MOSER_ID",
]
