"""Poincare- and Sobolev-type probes driven by I_{delta,p}."""
from __future__ import annotations

import math

import numpy as np

from ..errors import HighVariance
from ..fields import Estimate, Indicator, LogLog, Truncated, _radial_superlevel_radii
from ..functional import NonlocalParams, _mc_batches, _mc_summary, i_delta, i_delta_radial
from ..geometry import Ball, SamplerConfig, pair_batch, unit_ball_volume
from ..quadrature import adaptive_gk
from .families import poincare_family, sobolev_family
from .report import FAILS, HOLDS, VerificationReport

POINCARE_ID = "poincare: int_B int_B |u(x)-u(y)|^p <= C (|B|^{(d+p)/d} I + delta^p |B|^2)"
SOBOLEV_ID = "sobolev: (int_{|u|>lambda delta} |u|^q)^{1/q} <= C I_{delta,p}(u, R^d)^{1/p}"
RATIO_CEILING = 1e6


def pair_moment(field, domain, p: float, sampler: SamplerConfig) -> Estimate:
    """Monte Carlo estimate of int_O int_O |u(x) - u(y)|^p dx dy."""
    def one(i):
        x, y = pair_batch(domain, sampler, i)
        return float(np.mean(np.abs(field.values(x) - field.values(y)) ** p))

    return _mc_summary(_mc_batches(one, sampler.max_batches), domain.measure ** 2,
                       sampler.batch_size)


def _safe_i_delta(field, ball, params, sampler, notes, name):
    try:
        return i_delta(field, ball, params, sampler=sampler, tol=1e-7)
    except HighVariance as exc:
        notes.append(f"{name}: {exc}; using the Monte Carlo value")
        return exc.estimate


def poincare_ratio(field, ball, p, delta, sampler, notes=None, name="field"):
    notes = [] if notes is None else notes
    d = ball.dim
    lhs = pair_moment(field, ball, p, sampler)
    I = _safe_i_delta(field, ball, NonlocalParams(d, p, delta), sampler, notes, name)
    B = ball.measure
    rhs = B ** ((d + p) / d) * I.value + delta ** p * B ** 2
    return lhs.value / rhs, lhs, I, rhs


def verify_poincare(family=None, p: float = 2.0, delta: float = 0.25, seed: int = 20240607,
                    samples: int = 1 << 18, truncation_ks=(1.0, 2.0, 4.0, 8.0),
                    truncation_delta: float = 1.0, stability: bool = True) -> VerificationReport:
    """Ratio lhs / rhs over a mixed family; holds when a finite uniform bound is observed.

    Also records the truncation limit: ratios for min(k, max(u, -k)) approach
    the untruncated ratio as k grows. LogLog(lam) has finite I only when
    p lam^{-delta} < d, hence the separate ``truncation_delta``.
    """
    family = poincare_family(seed) if family is None else family
    batch = 1 << 14
    sampler = SamplerConfig(seed=seed, batch_size=batch, max_batches=max(2, samples // batch))
    rep = VerificationReport(POINCARE_ID, config={
        "p": p, "delta": delta, "seed": seed, "samples": sampler.batch_size * sampler.max_batches,
        "family_size": len(family)})
    ratios = []
    for name, field, ball in family:
        r, lhs, I, rhs = poincare_ratio(field, ball, p, delta, sampler, rep.notes, name)
        ratios.append(r)
        rep.add(name, r, RATIO_CEILING, HOLDS if math.isfinite(r) and r <= RATIO_CEILING else FAILS,
                lhs_stderr=lhs.stderr, I=I.value, I_method=I.method)
    if stability and ratios:
        big = SamplerConfig(seed=seed, batch_size=batch, max_batches=2 * sampler.max_batches)
        again = [poincare_ratio(f, b, p, delta, big, [], n)[0] for n, f, b in family]
        drift = abs(max(again) - max(ratios)) / max(ratios)
        rep.measured_constants["C_dp_doubled_samples"] = max(again)
        rep.add("doubled samples drift", drift, 0.1, HOLDS if drift < 0.1 else FAILS)
    # truncation limit on an unbounded field
    ball = Ball.centered(1, math.exp(-1))
    base = LogLog(3.0)
    td = truncation_delta
    full, *_ = poincare_ratio(base, ball, p, td, sampler, rep.notes, "loglog")
    trunc = [poincare_ratio(Truncated(base, k), ball, p, td, sampler, rep.notes, f"k={k}")[0]
             for k in truncation_ks]
    gaps = [abs(t - full) / full for t in trunc]
    rep.measured_constants["C_dp_max_ratio"] = max(ratios) if ratios else math.nan
    rep.measured_constants["truncation_gap_last"] = gaps[-1]
    trunc_status = HOLDS if gaps[-1] <= 0.05 and gaps[-1] <= gaps[0] + 1e-12 else FAILS
    rep.add("truncation k->inf", gaps[-1], 0.05, trunc_status,
            ratios=trunc, untruncated=full)
    return rep.finalize()


# ---------------------------------------------------------------------------
# Sobolev
# ---------------------------------------------------------------------------

def superlevel_lq(field, d: int, q: float, level: float) -> float:
    """(int_{R^d, |u| > level} |u|^q)^{1/q} for a compactly supported radial field."""
    R = field.support if field.support is not None else field.extent
    lo, hi = _radial_superlevel_radii(field, R, [level])
    lo, hi = lo[0], hi[0]
    area = d * unit_ball_volume(d)
    total = 0.0
    for a, b in zip(lo, hi):
        if b <= a:
            continue
        bps = np.unique(np.concatenate([[a, b], field.radial_breaks()]))
        bps = bps[(bps >= a) & (bps <= b)]
        f = lambda r: area * r ** (d - 1) * np.abs(field.profile(r)) ** q
        total += adaptive_gk(f, bps, abs_tol=1e-300, rel_tol=1e-10).value
    return total ** (1.0 / q)


def verify_sobolev(d: int = 2, p: float = 1.5, delta: float = 0.1, family=None,
                   lambdas=(0.0, 0.5, 1.0, 2.0, 4.0), include_indicator: bool = True) -> VerificationReport:
    """Sweep lambda; report the uniform constant C(lambda) and the smallest admissible lambda."""
    if not 1 < p < d:
        raise ValueError("Sobolev probe needs 1 < p < d")
    q = d * p / (d - p)
    family = sobolev_family(delta) if family is None else list(family)
    rep = VerificationReport(SOBOLEV_ID, config={"d": d, "p": p, "q": q, "delta": delta,
                                                 "lambdas": list(lambdas)})
    rhs_vals = []
    for f in family:
        est = i_delta_radial(f, Ball.centered(d, f.extent), NonlocalParams(d, p, delta),
                             tol=1e-6, whole_space=True)
        rhs_vals.append(est.value ** (1.0 / p))
    C = {}
    for lam in lambdas:
        worst = 0.0
        for f, rhs in zip(family, rhs_vals):
            lhs = superlevel_lq(f, d, q, lam * delta)
            r = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
            worst = max(worst, r)
            rep.add(f"{f.name} lambda={lam:g}", r, RATIO_CEILING,
                    HOLDS if r <= RATIO_CEILING else FAILS, lq_norm=lhs, I_pow=rhs)
        C[lam] = worst
    if include_indicator:
        ind = Indicator(Ball.centered(d, 1.0), 10 * delta)
        I = i_delta_radial(ind, Ball.centered(d, 2.0), NonlocalParams(d, p, delta))
        lhs = (unit_ball_volume(d) * (10 * delta) ** q) ** (1.0 / q)
        r = lhs / I.value ** (1.0 / p) if math.isfinite(I.value) else 0.0
        rep.add("indicator(B_1, 10 delta)", r, RATIO_CEILING, HOLDS, lq_norm=lhs, I=I.value)
        rep.notes.append("a jump larger than delta makes I infinite for p >= 1, so the ratio is 0")
    admissible = [lam for lam in lambdas if C[lam] <= RATIO_CEILING]
    rep.measured_constants.update({f"C(lambda={lam:g})": C[lam] for lam in lambdas})
    rep.measured_constants["lambda_min"] = min(admissible) if admissible else math.nan
    return rep.finalize([] if admissible else [FAILS])
