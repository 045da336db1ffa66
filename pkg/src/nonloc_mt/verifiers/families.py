"""Seeded generators of test fields used by the property-style verifiers."""
from __future__ import annotations

import math

import numpy as np

from ..fields import (Affine, Constant, GridSample, Indicator, Linear, LogLog, Moser,
                      RadialProfile, Scaled, Truncated)
from ..geometry import Ball, Interval


def random_piecewise_linear_1d(rng: np.random.Generator, lo=0.0, hi=1.0, knots=(4, 10)):
    """Continuous piecewise-linear field on ``[lo, hi]`` with uniformly spaced knots."""
    k = int(rng.integers(knots[0], knots[1] + 1))
    vals = rng.uniform(-1.0, 1.0, size=k)
    return GridSample(vals, (lo,), (hi,), mode="linear")


def random_radial_profile(rng: np.random.Generator, radius=1.0, knots=(2, 6)):
    """Continuous piecewise-linear radial profile on ``[0, radius]`` with random knots."""
    k = int(rng.integers(knots[0], knots[1] + 1))
    inner = np.sort(rng.uniform(0.05, 0.95, size=k)) * radius
    r = np.concatenate([[0.0], inner, [radius]])
    vals = rng.uniform(-1.0, 1.0, size=r.size)
    return RadialProfile.piecewise_linear(r, vals)


def field_range(field, domain, n=4097) -> float:
    """Oscillation of the field over a fine grid of the domain (radius for radial fields)."""
    if field.radial and isinstance(domain, Ball) and domain.is_centered:
        v = field.profile(np.linspace(0.0, domain.radius, n))
    elif domain.dim == 1:
        lo, hi = domain.bounds
        v = field.values(np.linspace(lo[0], hi[0], n).reshape(-1, 1))
    else:
        v = field.values(domain.sample(np.random.default_rng(0), n))
    v = v[np.isfinite(v)]
    return float(v.max() - v.min()) if v.size else 0.0


def random_subball(rng: np.random.Generator, outer: Ball, min_frac=0.05, max_frac=0.6) -> Ball:
    """A ball strictly inside ``outer``."""
    d = outer.dim
    r = outer.radius * rng.uniform(min_frac, max_frac)
    room = outer.radius - r
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    offset = direction * room * rng.uniform(0.0, 0.95) ** (1.0 / d)
    return Ball(tuple(np.array(outer.center) + offset), r)


def poincare_family(seed: int, count: int = 100, delta: float = 0.25):
    """Mixed family (linear, indicator, Moser, truncated LogLog) on balls in d = 1, 2.

    Returns ``(name, field, ball)`` triples in a deterministic order.
    """
    rng = np.random.default_rng(seed)
    out = []
    kinds = ["linear", "indicator", "moser", "loglog"]
    for i in range(count):
        kind = kinds[i % 4]
        d = 1 + (i // 4) % 2
        if kind == "linear":
            ball = Ball.centered(d, float(rng.uniform(0.5, 2.0)))
            g = rng.standard_normal(d) * rng.uniform(0.2, 3.0)
            out.append((f"linear#{i}", Linear(tuple(g)), ball))
        elif kind == "indicator":
            ball = Ball.centered(d, float(rng.uniform(0.5, 2.0)))
            sub = random_subball(rng, ball)
            h = delta * float(rng.choice([0.5, 1.0, 1.0, 2.0]))
            out.append((f"indicator#{i}", Indicator(sub, h), ball))
        elif kind == "moser":
            n = float(rng.choice([10.0, 100.0, 1000.0]))
            out.append((f"moser#{i}", Moser(n, float(rng.uniform(1.2, 3.0))),
                        Ball.centered(d, math.exp(-1))))
        else:
            lam = float(rng.uniform(1.5, 4.0))
            k = float(rng.uniform(1.0, 4.0))
            out.append((f"loglog-trunc#{i}", Truncated(LogLog(lam), k),
                        Ball.centered(d, math.exp(-1))))
    return out


def tent(height: float, radius: float) -> RadialProfile:
    """Compactly supported cone ``height * (1 - r / radius)_+``, zero outside."""
    return RadialProfile.piecewise_linear([0.0, radius], [height, 0.0], fill=0.0,
                                          name=f"tent(h={height:g},R={radius:g})")


def plateau_tent(height: float, r0: float, radius: float) -> RadialProfile:
    return RadialProfile.piecewise_linear([0.0, r0, radius], [height, height, 0.0], fill=0.0,
                                          name=f"plateau(h={height:g},r0={r0:g},R={radius:g})")


def sobolev_family(delta: float):
    """Compactly supported radial fields with varied heights and scales."""
    fam = []
    for h in (2.0, 5.0, 10.0):
        for R in (0.5, 1.0, 2.0):
            fam.append(tent(h * delta, R))
        fam.append(plateau_tent(h * delta, 0.5, 1.0))
    return fam


def loglog_scaled_family(lam: float, taus):
    """LogLog fields rescaled by ``tau``; the nonlocal budget decays with ``tau`` when p > d."""
    return [(f"loglog(lam={lam:g},tau={t:g})", Scaled(LogLog(lam), t)) for t in taus]


def centered(field, mean_value: float):
    return Affine(field, 1.0, -mean_value)


__all__ = [
    "random_piecewise_linear_1d", "random_radial_profile", "field_range", "random_subball",
    "poincare_family", "tent", "plateau_tent", "sobolev_family", "loglog_scaled_family",
    "centered", "Constant", "Interval",
]
