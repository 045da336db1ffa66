"""Deterministic quadrature helpers.

The adaptive driver evaluates the integrand on whole batches of
Gauss-Kronrod nodes at once, so integrands are expected to be vectorized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import NoConvergence

# Kronrod 15-point nodes on [0, 1] (mirrored), and the embedded 7-point Gauss rule
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss weights aligned with KRONROD_NODES (zero on Kronrod-only nodes)
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass
class QuadResult:
    value: float
    abserr: float
    n_intervals: int
    trace: list = field(default_factory=list)


def _gk_panels(f, a, b):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * KRONROD_NODES[None, :]
    vals = np.asarray(f(nodes.ravel()), dtype=np.float64).reshape(nodes.shape)
    with np.errstate(invalid="ignore", over="ignore"):
        # inf * 0 at Kronrod-only nodes; the Kronrod sum still reports inf
        k = half * (vals @ KRONROD_WEIGHTS)
        g = half * (vals @ GAUSS_WEIGHTS)
    return k, np.abs(k - g)


def adaptive_gk(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints,
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-10,
    max_intervals: int = 20000,
) -> QuadResult:
    """Globally adaptive Gauss-Kronrod (G7/K15) integration.

    ``breakpoints`` is a sorted sequence of at least two points; the
    integrand may have kinks there. Intervals whose error exceeds their
    share of the tolerance are bisected, all in one vectorized call per
    round. Returns ``inf`` if the integrand produced an infinite value.
    """
    bp = np.unique(np.asarray(breakpoints, dtype=np.float64))
    if bp.size < 2:
        return QuadResult(0.0, 0.0, 0, [(0, 0.0)])
    a, b = bp[:-1].copy(), bp[1:].copy()
    k, err = _gk_panels(f, a, b)
    trace = []
    while True:
        total = float(np.sum(k))
        if not np.isfinite(total):
            trace.append((a.size, total))
            return QuadResult(total, np.inf, a.size, trace)
        total_err = float(np.sum(err))
        trace.append((a.size, total))
        tol = max(abs_tol, rel_tol * abs(total))
        if total_err <= tol:
            return QuadResult(total, total_err, a.size, trace)
        splittable = (b - a) > 1e-14 * np.maximum(np.abs(a), np.abs(b)) + 1e-300
        pick = (err > tol / a.size) & splittable
        if not pick.any():
            worst = np.argmax(np.where(splittable, err, -1.0))
            if not splittable[worst]:
                raise NoConvergence(
                    f"adaptive quadrature stalled at error {total_err:.3e} > {tol:.3e}")
            pick[worst] = True
        if a.size + pick.sum() > max_intervals:
            raise NoConvergence(
                f"adaptive quadrature exceeded {max_intervals} intervals "
                f"(error {total_err:.3e} > tolerance {tol:.3e})")
        am, bm = a[pick], b[pick]
        mid = 0.5 * (am + bm)
        na = np.concatenate([am, mid])
        nb = np.concatenate([mid, bm])
        nk, nerr = _gk_panels(f, na, nb)
        keep = ~pick
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        k = np.concatenate([k[keep], nk])
        err = np.concatenate([err[keep], nerr])
        order = np.argsort(a, kind="stable")
        a, b, k, err = a[order], b[order], k[order], err[order]


def integrate_half_line(f, start: float, **kw) -> QuadResult:
    """Integrate ``f`` over ``[start, inf)`` via ``x = start + v / (1 - v)``."""
    def g(v):
        one_minus = 1.0 - v
        x = start + v / one_minus
        return f(x) / one_minus ** 2
    return adaptive_gk(g, [0.0, 0.5, 0.9, 0.99, 1.0], **kw)


def lagrange_weights_at_zero(h) -> np.ndarray:
    """Weights ``w`` with ``P(0) = sum(w * values)`` for the interpolating polynomial."""
    h = np.asarray(h, dtype=np.float64)
    w = np.ones_like(h)
    for i in range(h.size):
        for j in range(h.size):
            if i != j:
                w[i] *= (0.0 - h[j]) / (h[i] - h[j])
    return w


def extrapolate_to_zero(h, values, sigmas=None) -> tuple[float, float]:
    """Richardson (polynomial) extrapolation of ``values(h)`` to ``h = 0``.

    Returns the extrapolated value and its propagated standard error.
    """
    w = lagrange_weights_at_zero(h)
    vals = np.asarray(values, dtype=np.float64)
    limit = float(w @ vals)
    if sigmas is None:
        return limit, 0.0
    s = np.asarray(sigmas, dtype=np.float64)
    return limit, float(np.sqrt(np.sum((w * s) ** 2)))


def fit_to_zero(h, values, sigmas=None, degree: int = 1) -> tuple[float, float]:
    """Weighted least-squares polynomial fit in ``h``; returns the intercept and its stderr.

    Preferred over interpolation when the values carry Monte Carlo noise.
    """
    h = np.asarray(h, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    if sigmas is not None and not np.any(np.asarray(sigmas) > 0):
        sigmas = None
    s = np.ones_like(y) if sigmas is None else np.asarray(sigmas, dtype=np.float64)
    if np.any(s <= 0):
        s = np.where(s > 0, s, s[s > 0].min())
    V = np.vander(h, degree + 1, increasing=True) / s[:, None]
    coef, *_ = np.linalg.lstsq(V, y / s, rcond=None)
    cov = np.linalg.pinv(V.T @ V)
    sigma = math.sqrt(max(cov[0, 0], 0.0)) if sigmas is not None else 0.0
    return float(coef[0]), sigma
