"""Sharpness examples: a LogLog field with tiny budget but divergent exponential
integral (p > d), and the Moser sequence with vanishing I but growing
exponential integrals (p = d)."""
from __future__ import annotations

import math

import numpy as np

from ..fields import LogLog, Moser, Scaled
from ..functional import NonlocalParams, i_delta, i_delta_exact_1d
from ..geometry import Ball, Interval
from ..quadrature import adaptive_gk
from .report import FAILS, HOLDS, INCONCLUSIVE, VerificationReport

LOGLOG_ID = "loglog: I_{1,p}(u_tau) -> 0 while int_{B_tau} exp(alpha gamma^u) diverges"
MOSER_ID = "moser: I_{1,d}(g_n) -> 0, mean -> 0, exp integral with gamma > q diverges"
CEILING = 1e6
GROWTH = 1.1
GROWTH_WINDOW = 5


# ---------------------------------------------------------------------------
# LogLog
# ---------------------------------------------------------------------------

def truncated_exp_integral(eps: float, tau: float, d: int, alpha: float, rho: float) -> float:
    """T(eps) = int_eps^tau exp(alpha (ln 1/r)^{1+rho}) r^{d-1} dr, integrated in v = ln(1/r)."""
    if eps >= tau:
        return 0.0
    a, b = math.log(1.0 / tau), math.log(1.0 / eps)
    f = lambda v: np.exp(alpha * v ** (1.0 + rho) - d * v)
    return adaptive_gk(f, np.linspace(a, b, 9), abs_tol=1e-300, rel_tol=1e-12).value


def divergence_diagnostic(values, ceiling=CEILING, growth=GROWTH, window=GROWTH_WINDOW):
    """(crossed, min ratio over the last ``window`` steps) for an increasing sequence."""
    v = np.asarray(values, dtype=np.float64)
    tail = v[-(window + 1):]
    ratios = tail[1:] / np.where(tail[:-1] > 0, tail[:-1], np.nan)
    return bool(v.max() > ceiling), float(np.nanmin(ratios)) if ratios.size else math.nan


def counterexample_loglog(p: float = 2.0, d: int = 1, lam: float = 3.0, gamma: float = 4.0,
                          alpha: float = 1.0, tau_grid=(0.5, 0.25, 0.125),
                          eps_grid=None, tol_ladder=(1e-3, 1e-4, 1e-5, 1e-6, 1e-7),
                          ceiling: float = CEILING, growth: float = GROWTH,
                          stability: float = 0.01, scaling_tol: float = 0.05) -> VerificationReport:
    """Finite budget, vanishing under scaling, and a divergent exponential integral."""
    if not p > d >= 1:
        raise ValueError("needs p > d >= 1")
    if not gamma > lam > p / d:
        raise ValueError("needs gamma > lam > p/d")
    eps_grid = [2.0 ** -k for k in range(1, 41)] if eps_grid is None else list(eps_grid)
    rho = math.log(gamma) / math.log(lam) - 1.0
    u = LogLog(lam)
    R = math.exp(-1.0)
    ball = Ball.centered(d, R)
    params = NonlocalParams(d, p, 1.0)
    rep = VerificationReport(LOGLOG_ID, config={
        "p": p, "d": d, "lambda": lam, "gamma": gamma, "alpha": alpha, "rho": rho,
        "tau_grid": list(tau_grid), "eps_count": len(eps_grid), "ceiling": ceiling,
        "growth": growth, "tol_ladder": list(tol_ladder)})
    # (a) refinement stability
    ladder = [i_delta(u, ball, params, tol=t).value for t in tol_ladder]
    diffs = [abs(b - a) / abs(b) for a, b in zip(ladder, ladder[1:])]
    rep.add("I refinement change", diffs[-1], stability,
            HOLDS if math.isfinite(ladder[-1]) and diffs[-1] < stability else INCONCLUSIVE,
            ladder=ladder)
    I0 = ladder[-1]
    rep.measured_constants["I(u, B_1/e)"] = I0
    # (b) scaling law
    prev = I0
    for tau in tau_grid:
        lhs = i_delta(Scaled(u, tau), ball, params, tol=1e-8).value
        rhs = tau ** (p - d) * i_delta(u, Ball.centered(d, tau * R), params, tol=1e-8).value
        ratio = lhs / rhs
        rep.add(f"scaling ratio tau={tau:g}", abs(ratio - 1.0), scaling_tol,
                HOLDS if abs(ratio - 1.0) <= scaling_tol else FAILS, ratio=ratio, I_tau=lhs)
        rep.add(f"I(u_tau) decreasing tau={tau:g}", lhs, prev, HOLDS if lhs < prev else FAILS)
        rep.measured_constants[f"I(u_tau={tau:g})"] = lhs
        prev = lhs
    # (c) divergence of the truncated exponential integral
    tau_T = R
    Ts = [truncated_exp_integral(e, tau_T, d, alpha, rho) for e in eps_grid]
    crossed, min_ratio = divergence_diagnostic(Ts, ceiling, growth)
    rep.add("T(eps) crosses ceiling", ceiling, max(Ts), HOLDS if crossed else FAILS)
    rep.add("T(eps/2)/T(eps) on last steps", growth, min_ratio,
            HOLDS if min_ratio > growth else FAILS)
    rep.measured_constants.update({"rho": rho, "T_last": Ts[-1], "T_growth_min": min_ratio})
    rep.config["T_values"] = Ts
    return rep.finalize()


# ---------------------------------------------------------------------------
# Moser
# ---------------------------------------------------------------------------

def moser_terms(n: float, q: float) -> dict:
    """Closed forms for the cross term I1 and far term I2 (delta = 1, on (0, 1/e)).

    ``I1 = int_0^{1/n} int_{a_n}^{1/e} (r2 - r1)^{-2}`` and
    ``I2 = 2 int_{1/n}^{1/(e b_n)} int_{r b_n}^{1/e} (r2 - r1)^{-2}``,
    together with the upper bounds ln(a_n / (a_n - 1/n)) and
    2 ln(n / (e b_n)) / (b_n - 1).
    """
    qc = q / (q - 1.0)
    L = math.log(n) ** (1.0 / qc)
    a = math.exp(L) / n
    b = math.exp(L)
    E = math.exp(-1.0)
    I1 = math.log(a / (a - 1.0 / n)) - math.log(E / (E - 1.0 / n))
    top = E / b
    if top > 1.0 / n:
        I2 = 2.0 * (math.log(top * n) / (b - 1.0) - math.log((E - 1.0 / n) / (E - top)))
        I2_bound = 2.0 * math.log(n / (math.e * b)) / (b - 1.0)
    else:
        I2, I2_bound = 0.0, 0.0
    return {"a_n": a, "b_n": b, "I1": I1, "I1_bound": math.log(a / (a - 1.0 / n)),
            "I2": I2, "I2_bound": I2_bound}


def moser_integral(n: float, q: float) -> float:
    """int_0^{1/e} g_n(r) dr in closed form."""
    qc = q / (q - 1.0)
    E = math.exp(-1.0)
    plateau = math.log(n) ** (1.0 / q)
    # int ln(1/r) dr = r (1 + ln(1/r))
    tail = (E * 2.0 - (1.0 / n) * (1.0 + math.log(n))) / math.log(n) ** (1.0 / qc)
    return plateau / n + tail


def moser_exp_integral(n: float, q: float, gamma: float, alpha: float, d: int = 1,
                       shift: float = 0.0) -> float:
    """int_0^{1/e} r^{d-1} exp(alpha |g_n(r) - shift|^gamma) dr (plateau part exact)."""
    f = Moser(n, q)
    E = math.exp(-1.0)
    plateau = (1.0 / n) ** d / d * math.exp(alpha * abs(f.plateau - shift) ** gamma)
    # v = ln(1/r) on [1, ln n]
    g = lambda v: np.exp(alpha * np.abs(v / math.log(n) ** (1.0 / f.q_conj) - shift) ** gamma
                         - d * v)
    tail = adaptive_gk(g, np.linspace(1.0, math.log(n), 17), abs_tol=1e-300, rel_tol=1e-12).value
    return plateau + tail


def plateau_bound(n: float, q: float, gamma: float, alpha: float, d: int = 1) -> float:
    """(1 / (d n^d)) exp(alpha (ln n)^{gamma/q})."""
    return math.exp(alpha * math.log(n) ** (gamma / q)) / (d * n ** d)


def counterexample_moser(d: int = 1, q: float = 1.5, gamma: float = 2.0, alpha: float = 1.0,
                         n_grid=(1e3, 1e4, 1e5), tol: float = 1e-9,
                         decade_factor: float = 10.0) -> VerificationReport:
    """I_{1,1}(g_n, (0, 1/e)) along ``n_grid`` with its two-term decomposition and growth checks.

    I is asserted to decrease with the last value below half the first, as
    the limit statement suggests at the tested scale.
    """
    if d != 1:
        raise ValueError("the decomposition is one-dimensional (d = 1)")
    if not 1 < q < gamma:
        raise ValueError("needs 1 < q < gamma")
    if min(n_grid) < 3:
        raise ValueError("n must be at least 3")
    grid = sorted(n_grid)
    E = math.exp(-1.0)
    iv = Interval(0.0, E)
    params = NonlocalParams(1, 1.0, 1.0)
    rep = VerificationReport(MOSER_ID, config={"d": d, "q": q, "gamma": gamma, "alpha": alpha,
                                               "n_grid": list(grid), "tol": tol})
    Is, means, exps, bounds = [], [], [], []
    for n in grid:
        f = Moser(n, q)
        est = i_delta_exact_1d(f, iv, params, tol=tol)
        Is.append(est.value)
        t = moser_terms(n, q)
        split = 2.0 * t["I1"] + t["I2"]
        rep.add(f"n={n:g}: 2 I1 + I2 vs exact1d", abs(split - est.value),
                1e-6 * max(1.0, est.value),
                HOLDS if abs(split - est.value) <= 1e-6 * max(1.0, est.value) else FAILS,
                I=est.value, split=split)
        rep.add(f"n={n:g}: I1 <= ln(a/(a-1/n))", t["I1"], t["I1_bound"],
                HOLDS if t["I1"] <= t["I1_bound"] else FAILS)
        rep.add(f"n={n:g}: I2 <= b-bound", t["I2"], t["I2_bound"],
                HOLDS if t["I2"] <= t["I2_bound"] else FAILS)
        total = moser_integral(n, q)
        means.append(total)
        shift = total / E
        bound = plateau_bound(n, q, gamma, alpha, d)
        shifted = (1.0 / n) ** d / d * math.exp(alpha * abs(f.plateau - shift) ** gamma)
        ex = moser_exp_integral(n, q, gamma, alpha, d, shift)
        exps.append(ex)
        bounds.append(bound)
        rep.add(f"n={n:g}: exp integral >= shifted plateau bound", shifted, ex,
                HOLDS if ex >= shifted else FAILS, plateau_bound=bound)
        rep.measured_constants[f"I(n={n:g})"] = est.value
        rep.measured_constants[f"I1(n={n:g})"] = t["I1"]
        rep.measured_constants[f"I2(n={n:g})"] = t["I2"]
    # (a) decrease of I along the grid
    for i in range(1, len(grid)):
        rep.add(f"I decreasing n={grid[i]:g}", Is[i], Is[i - 1], HOLDS if Is[i] < Is[i - 1] else FAILS)
    rep.add("I final < I initial / 2", Is[-1], 0.5 * Is[0], HOLDS if Is[-1] < 0.5 * Is[0] else FAILS)
    # (c) means decrease
    for i in range(1, len(grid)):
        rep.add(f"int g_n decreasing n={grid[i]:g}", means[i], means[i - 1],
                HOLDS if means[i] < means[i - 1] else FAILS)
    # (d) plateau bound grows by a decade factor per decade of n
    for i in range(1, len(grid)):
        decades = math.log10(grid[i] / grid[i - 1])
        need = decade_factor ** decades
        rep.add(f"plateau bound growth n={grid[i]:g}", need, bounds[i] / bounds[i - 1],
                HOLDS if bounds[i] / bounds[i - 1] >= need else FAILS)
        rep.add(f"exp integral increasing n={grid[i]:g}", exps[i - 1], exps[i],
                HOLDS if exps[i] > exps[i - 1] else FAILS)
    rep.measured_constants["I_ratio_last_first"] = Is[-1] / Is[0]
    return rep.finalize()
