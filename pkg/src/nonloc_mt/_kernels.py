"""Hot inner loops: Monte Carlo pair sums, the angular kernel, radial inner integrals.

Every kernel has a numba implementation and a pure-numpy implementation of
the same algorithm; ``_backend.USE_NUMBA`` picks one at import time. Both are
importable directly (``*_nb`` / ``*_np``) for parity tests and benchmarks.

Angular kernel
    A(s, t) = int_{S^{d-1}} int_{S^{d-1}} |s a - t b|^{-(d+p)} da db
            = |S^{d-1}| |S^{d-2}| int_0^pi q(theta)^{-(d+p)/2} sin^{d-2}(theta) dtheta,
    q = (s - t)^2 + 4 s t sin^2(theta / 2). Panels in theta are geometric
    from the near-diagonal scale eps = |s - t| / sqrt(s t), each carrying a
    fixed Gauss-Legendre rule.

Radial inner integral
    sum over intervals [t0, t1] of int t^{d-1} A(s, t) dt, with panels
    geometric in the distance |t - s| away from the end nearest to s.
"""
from __future__ import annotations

import math

import numpy as np

from . import _backend
from .geometry import sphere_area
from .quadrature import gauss_legendre

N_ANGLE = 10
N_RADIAL = 10
MAX_PANELS = 96  # 2**96 spans any ratio of radii representable here

_XA, _WA = (np.ascontiguousarray(v) for v in gauss_legendre(N_ANGLE))
_XR, _WR = (np.ascontiguousarray(v) for v in gauss_legendre(N_RADIAL))


def angular_prefactor(d: int) -> float:
    return sphere_area(d) * sphere_area(d - 1) if d >= 2 else 1.0


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def pair_kernel_sum_np(x, y, ux, uy, delta, expo):
    mask = np.abs(ux - uy) > delta
    if not mask.any():
        return 0.0
    diff = x[mask] - y[mask]
    r2 = np.einsum("ij,ij->i", diff, diff)
    return float(np.sum(r2 ** (-0.5 * expo)))


def _angle_panels(eps):
    """Panel edges (n, MAX_PANELS + 1): 0, eps, 2 eps, 4 eps, ... clipped at pi."""
    j = np.arange(MAX_PANELS, dtype=np.float64)
    edges = np.minimum(eps[:, None] * 2.0 ** j[None, :], math.pi)
    return np.concatenate([np.zeros((eps.size, 1)), edges], axis=1)


def angular_kernel_np(d, p, r1, r2):
    r1 = np.asarray(r1, dtype=np.float64).ravel()
    r2 = np.asarray(r2, dtype=np.float64).ravel()
    if d == 1:
        e = -(1.0 + p)
        with np.errstate(divide="ignore"):
            return 2.0 * (np.abs(r1 - r2) ** e + (r1 + r2) ** e)
    m = 0.5 * (d + p)
    out = np.empty(r1.size)
    chunk = 4096
    for start in range(0, r1.size, chunk):
        s = r1[start:start + chunk]
        t = r2[start:start + chunk]
        diff2 = (s - t) ** 2
        st4 = 4.0 * s * t
        with np.errstate(divide="ignore", invalid="ignore"):
            eps = np.sqrt(diff2) / np.sqrt(s * t)
        eps = np.where(np.isfinite(eps), eps, math.pi)
        edges = _angle_panels(eps)
        lo, hi = edges[:, :-1], edges[:, 1:]
        live = hi > lo
        row = np.broadcast_to(np.arange(s.size)[:, None], live.shape)[live]
        mid = 0.5 * (lo + hi)[live]
        half = 0.5 * (hi - lo)[live]
        th = mid[:, None] + half[:, None] * _XA[None, :]
        sh = np.sin(0.5 * th)
        q = diff2[row][:, None] + st4[row][:, None] * sh * sh
        with np.errstate(divide="ignore"):
            v = q ** (-m)
        if d == 3:
            v = v * np.sin(th)
        panel = half * (v @ _WA)
        out[start:start + chunk] = np.bincount(row, weights=panel, minlength=s.size)
    return angular_prefactor(d) * out


def _radial_panel_nodes(s, t0, t1):
    """Geometric panels in w = |t - s| away from the end of [t0, t1] nearest to s."""
    above = t0 >= s
    near = np.where(above, t0, t1)
    far = np.where(above, t1, t0)
    sgn = np.where(above, 1.0, -1.0)
    w0 = np.abs(near - s)
    w1 = np.minimum(np.abs(far - s), w0 * 2.0 ** (MAX_PANELS - 1))
    j = np.arange(MAX_PANELS, dtype=np.float64)
    edges = np.minimum(w0[:, None] * 2.0 ** j[None, :], w1[:, None])
    return edges[:, :-1], edges[:, 1:], sgn


def radial_inner_np(d, p, s, lo, hi):
    s = np.asarray(s, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64).reshape(s.size, -1)
    hi = np.asarray(hi, dtype=np.float64).reshape(s.size, -1)
    out = np.zeros(s.size)
    valid = hi > lo
    if not valid.any():
        return out
    idx, col = np.nonzero(valid)
    sv = s[idx]
    t0 = lo[idx, col]
    t1 = hi[idx, col]
    straddle = (t0 < sv) & (t1 > sv)
    touching = (t0 == sv) | (t1 == sv)
    bad = straddle | touching
    if d == 1:
        e = -p
        above = t0 >= sv
        with np.errstate(divide="ignore", invalid="ignore"):
            near = np.where(above, t0 - sv, sv - t1)
            far = np.where(above, t1 - sv, sv - t0)
            val = 2.0 * (near ** e - far ** e) / p
            val = val + 2.0 * ((sv + t0) ** e - (sv + t1) ** e) / p
        val = np.where(bad, np.inf, val)
        np.add.at(out, idx, val)
        return out
    good = ~bad
    np.add.at(out, idx[bad], np.inf)
    if not good.any():
        return out
    idx, sv, t0, t1 = idx[good], sv[good], t0[good], t1[good]
    plo, phi, sgn = _radial_panel_nodes(sv, t0, t1)
    live = phi > plo
    row = np.broadcast_to(np.arange(sv.size)[:, None], live.shape)[live]
    mid = 0.5 * (plo + phi)[live]
    half = 0.5 * (phi - plo)[live]
    w = mid[:, None] + half[:, None] * _XR[None, :]
    t = sv[row][:, None] + sgn[row][:, None] * w
    ss = np.broadcast_to(sv[row][:, None], t.shape)
    a = angular_kernel_np(d, p, ss.ravel(), t.ravel()).reshape(t.shape)
    f = t ** (d - 1) * a
    panel = half * (f @ _WR)
    per_interval = np.bincount(row, weights=panel, minlength=sv.size)
    np.add.at(out, idx, per_interval)
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if _backend.HAVE_NUMBA:
    from numba import njit

    @njit(nogil=True, cache=True)
    def pair_kernel_sum_nb(x, y, ux, uy, delta, expo):
        n, d = x.shape
        half_expo = -0.5 * expo
        acc = 0.0
        for i in range(n):
            if abs(ux[i] - uy[i]) > delta:
                r2 = 0.0
                for j in range(d):
                    diff = x[i, j] - y[i, j]
                    r2 += diff * diff
                acc += r2 ** half_expo
        return acc

    @njit(nogil=True, cache=True)
    def _angular_one(d, p, s, t, xa, wa, pref):
        if d == 1:
            e = -(1.0 + p)
            return 2.0 * (abs(s - t) ** e + (s + t) ** e)
        m = -0.5 * (d + p)
        diff2 = (s - t) * (s - t)
        st4 = 4.0 * s * t
        if st4 > 0.0:
            eps = math.sqrt(diff2) / math.sqrt(s * t)
        else:
            eps = math.pi
        total = 0.0
        lo = 0.0
        hi = min(eps, math.pi)
        for _ in range(MAX_PANELS + 1):
            mid = 0.5 * (lo + hi)
            half = 0.5 * (hi - lo)
            acc = 0.0
            for k in range(xa.size):
                th = mid + half * xa[k]
                sh = math.sin(0.5 * th)
                v = (diff2 + st4 * sh * sh) ** m
                if d == 3:
                    v *= math.sin(th)
                acc += wa[k] * v
            total += half * acc
            if hi >= math.pi:
                break
            lo = hi
            hi = min(2.0 * hi, math.pi)
        return pref * total

    @njit(nogil=True, cache=True)
    def _angular_many(d, p, r1, r2, xa, wa, pref):
        out = np.empty(r1.size)
        for i in range(r1.size):
            out[i] = _angular_one(d, p, r1[i], r2[i], xa, wa, pref)
        return out

    @njit(nogil=True, cache=True)
    def _radial_inner_impl(d, p, s, lo, hi, xa, wa, xr, wr, pref):
        n, K = lo.shape
        out = np.zeros(n)
        for i in range(n):
            si = s[i]
            acc = 0.0
            for k in range(K):
                t0 = lo[i, k]
                t1 = hi[i, k]
                if not t1 > t0:
                    continue
                if t0 >= si:
                    near = t0
                    far = t1
                    sgn = 1.0
                elif t1 <= si:
                    near = t1
                    far = t0
                    sgn = -1.0
                else:
                    acc = np.inf
                    continue
                w0 = abs(near - si)
                if w0 <= 0.0:
                    acc = np.inf
                    continue
                w1 = abs(far - si)
                if d == 1:
                    e = -p
                    acc += 2.0 * (w0 ** e - w1 ** e) / p
                    acc += 2.0 * ((si + min(t0, t1)) ** e - (si + max(t0, t1)) ** e) / p
                    continue
                w1 = min(w1, w0 * 2.0 ** (MAX_PANELS - 1))
                wlo = w0
                whi = min(2.0 * w0, w1)
                for _ in range(MAX_PANELS):
                    mid = 0.5 * (wlo + whi)
                    half = 0.5 * (whi - wlo)
                    pacc = 0.0
                    for j in range(xr.size):
                        t = si + sgn * (mid + half * xr[j])
                        pacc += wr[j] * t ** (d - 1) * _angular_one(d, p, si, t, xa, wa, pref)
                    acc += half * pacc
                    if whi >= w1:
                        break
                    wlo = whi
                    whi = min(2.0 * whi, w1)
            out[i] = acc
        return out

    def angular_kernel_nb(d, p, r1, r2):
        r1 = np.ascontiguousarray(r1, dtype=np.float64).ravel()
        r2 = np.ascontiguousarray(r2, dtype=np.float64).ravel()
        return _angular_many(int(d), float(p), r1, r2, _XA, _WA, angular_prefactor(d))

    def radial_inner_nb(d, p, s, lo, hi):
        s = np.ascontiguousarray(s, dtype=np.float64).ravel()
        lo = np.ascontiguousarray(lo, dtype=np.float64).reshape(s.size, -1)
        hi = np.ascontiguousarray(hi, dtype=np.float64).reshape(s.size, -1)
        return _radial_inner_impl(int(d), float(p), s, lo, hi, _XA, _WA, _XR, _WR,
                                  angular_prefactor(d))


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if _backend.USE_NUMBA:
    def pair_kernel_sum(x, y, ux, uy, delta, expo):
        return float(pair_kernel_sum_nb(np.ascontiguousarray(x), np.ascontiguousarray(y),
                                        np.ascontiguousarray(ux, dtype=np.float64),
                                        np.ascontiguousarray(uy, dtype=np.float64),
                                        float(delta), float(expo)))

    angular_kernel = angular_kernel_nb
    radial_inner = radial_inner_nb
else:
    pair_kernel_sum = pair_kernel_sum_np
    angular_kernel = angular_kernel_np
    radial_inner = radial_inner_np


def flat_inner(p, s, lo, hi):
    """Sum over intervals of int |t - s|^{-1-p} dt (closed form; inf if an interval touches s)."""
    s = np.asarray(s, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64).reshape(s.size, -1)
    hi = np.asarray(hi, dtype=np.float64).reshape(s.size, -1)
    sc = s[:, None]
    valid = hi > lo
    above = lo >= sc
    below = hi <= sc
    with np.errstate(divide="ignore", invalid="ignore"):
        near = np.where(above, lo - sc, sc - hi)
        far = np.where(above, hi - sc, sc - lo)
        val = (near ** (-p) - far ** (-p)) / p
    val = np.where(valid & ~(above | below), np.inf, val)
    val = np.where(valid & (near <= 0.0), np.inf, val)
    val = np.where(valid, val, 0.0)
    return val.sum(axis=1)
