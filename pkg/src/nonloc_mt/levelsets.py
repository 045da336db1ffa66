"""Vectorized level-set location on piecewise-monotone 1-D functions.

A piece is an interval on which the function is monotone (plateaus allowed).
On such a piece the sets ``{g > H}`` and ``{g < L}`` are intervals touching
one end of the piece, so each is fixed by a single boundary point found by
bisection.
"""
from __future__ import annotations

import numpy as np

from .errors import LevelSetResolutionFailure

BISECT_RTOL = 1e-15
BISECT_ATOL = 1e-300
MAX_BISECT = 400


def _endpoint_eval(g, lo, hi):
    eta = 1e-13 * (hi - lo)
    return g(lo + eta), g(hi - eta)


def bisect_boundary(g, lo, hi, pred, true_at_hi):
    """Locate the switch point of a monotone predicate on each row's ``[lo, hi]``.

    ``pred(values, rows)`` returns the predicate for the given row subset.
    Assumes it is False at one end and True at the other (``true_at_hi``
    tells which). Returns boundary points with relative precision ~1e-15.
    """
    lo = np.array(lo, dtype=np.float64, copy=True)
    hi = np.array(hi, dtype=np.float64, copy=True)
    true_at_hi = np.asarray(true_at_hi, dtype=bool)
    rows = np.arange(lo.size)
    for _ in range(MAX_BISECT):
        width = hi[rows] - lo[rows]
        scale = np.maximum(np.abs(lo[rows]), np.abs(hi[rows]))
        active = width > BISECT_RTOL * scale + BISECT_ATOL
        rows = rows[active]
        if rows.size == 0:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo[rows] + hi[rows])
        ok = pred(g(mid), rows)
        move_hi = ok == true_at_hi[rows]
        hi[rows[move_hi]] = mid[move_hi]
        lo[rows[~move_hi]] = mid[~move_hi]
    raise LevelSetResolutionFailure(
        f"bisection did not bracket {rows.size} level-set boundaries to tolerance")


def piece_sets(g, lo, hi, upper, lower, strict=True):
    """Sets ``{t in (lo, hi): g(t) > upper}`` and ``{t: g(t) < lower}`` per row.

    ``lo, hi, upper, lower`` are arrays over rows; ``g`` must be monotone on
    every row's interval. With ``strict=False`` the comparisons are ``>=`` and
    ``<=``. Returns ``(alo, ahi, blo, bhi)``; empty sets have ``lo == hi``.
    All rows and both thresholds share one vectorized bisection.
    """
    def test(x):
        return x > 0 if strict else x >= 0

    lo = np.asarray(lo, dtype=np.float64).ravel()
    hi = np.asarray(hi, dtype=np.float64).ravel()
    n = lo.size
    upper = np.broadcast_to(np.asarray(upper, dtype=np.float64).ravel(), (n,))
    lower = np.broadcast_to(np.asarray(lower, dtype=np.float64).ravel(), (n,))
    nonempty = hi > lo
    g_lo = np.full(n, np.nan)
    g_hi = np.full(n, np.nan)
    if nonempty.any():
        g_lo[nonempty], g_hi[nonempty] = _endpoint_eval(g, lo[nonempty], hi[nonempty])
    thresh = np.concatenate([upper, lower])
    sign = np.concatenate([np.ones(n), -np.ones(n)])
    lo2, hi2 = np.concatenate([lo, lo]), np.concatenate([hi, hi])
    ne2 = np.concatenate([nonempty, nonempty])
    p_lo = test(sign * (np.concatenate([g_lo, g_lo]) - thresh))
    p_hi = test(sign * (np.concatenate([g_hi, g_hi]) - thresh))
    slo = lo2.copy()
    shi = np.where(ne2 & p_lo & p_hi, hi2, lo2)
    cross = ne2 & (p_lo != p_hi)
    if cross.any():
        idx = np.nonzero(cross)[0]
        th, sg = thresh[idx], sign[idx]

        def pred(vals, rows):
            return test(sg[rows] * (vals - th[rows]))

        x = bisect_boundary(g, lo2[idx], hi2[idx], pred, p_hi[idx])
        up = p_hi[idx]
        slo[idx] = np.where(up, x, lo2[idx])
        shi[idx] = np.where(up, hi2[idx], x)
    return slo[:n], shi[:n], slo[n:], shi[n:]


def level_intervals(g, cuts, lower_bound, values, delta, upper_bound=None):
    """Inner sets ``{t : |g(t) - v_i| > delta}`` restricted to ``t >= lower_bound_i``.

    ``cuts`` are the monotone-piece boundaries (sorted, first and last are
    the range ends). Returns ``(lo, hi)`` arrays of shape ``(n, 2 * pieces)``.
    """
    cuts = np.asarray(cuts, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64).ravel()
    n = values.size
    k = cuts.size - 1
    lb = np.broadcast_to(np.asarray(lower_bound, dtype=np.float64).ravel(), (n,))
    a = np.maximum(cuts[None, :-1], lb[:, None])
    b = np.broadcast_to(cuts[None, 1:], (n, k))
    if upper_bound is not None:
        b = np.minimum(b, upper_bound)
    b = np.maximum(a, b)
    v = np.repeat(values, k)
    alo, ahi, blo, bhi = piece_sets(g, a.ravel(), b.ravel(), v + delta, v - delta)
    lo_all = np.empty((n, 2 * k))
    hi_all = np.empty((n, 2 * k))
    lo_all[:, 0::2], hi_all[:, 0::2] = alo.reshape(n, k), ahi.reshape(n, k)
    lo_all[:, 1::2], hi_all[:, 1::2] = blo.reshape(n, k), bhi.reshape(n, k)
    return lo_all, hi_all


def superlevel_intervals(g, cuts, t, strict=True):
    """Intervals of ``{x : |g(x)| > t}`` on the pieces, for each threshold in ``t``.

    Returns ``(lo, hi)`` of shape ``(len(t), 2 * pieces)``.
    """
    cuts = np.asarray(cuts, dtype=np.float64)
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    k = cuts.size - 1
    lo = np.repeat(cuts[:-1][None, :], t.size, axis=0).ravel()
    hi = np.repeat(cuts[1:][None, :], t.size, axis=0).ravel()
    th = np.repeat(t, k)
    alo, ahi, blo, bhi = piece_sets(g, lo, hi, th, -th, strict)
    shape = (t.size, k)
    return (np.concatenate([alo.reshape(shape), blo.reshape(shape)], axis=1),
            np.concatenate([ahi.reshape(shape), bhi.reshape(shape)], axis=1))


def preimages(g, cuts, targets):
    """All points ``x`` in the pieces where monotone ``g`` crosses one of ``targets``."""
    cuts = np.asarray(cuts, dtype=np.float64)
    targets = np.unique(np.asarray(targets, dtype=np.float64).ravel())
    k = cuts.size - 1
    if k < 1 or targets.size == 0:
        return np.empty(0)
    lo = np.repeat(cuts[:-1], targets.size)
    hi = np.repeat(cuts[1:], targets.size)
    th = np.tile(targets, k)
    # {g > th} has an interior boundary exactly when g crosses th inside the piece
    alo, ahi, _, _ = piece_sets(g, lo, hi, th, th)
    inner = (ahi > alo) & (((alo > lo) & (alo < hi)) | ((ahi > lo) & (ahi < hi)))
    pts = np.where(alo > lo, alo, ahi)
    return np.unique(pts[inner])
