"""Evaluators for the sphere constant, I_{delta,p}, the raw level integral J_delta
and the mollified BBM energy.

Deterministic evaluation reduces the double integral to an outer integral over
one variable ``s`` and, for each ``s``, an inner integral over the set
``{t > s : |g(t) - g(s)| > delta}``. That set is a union of intervals located
by bisection on the monotone pieces of ``g``; the inner integral is closed
form on the line and uses the angular kernel for radial fields. By symmetry
only ``t > s`` is integrated and the result doubled.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._backend import worker_count
from .errors import DiagonalSingularity, HighVariance, QuadratureMismatch
from .fields import (Estimate, ScalarField, cuts_1d, field_1d, jump_size, radial_cuts,
                     uses_radial_path)
from .geometry import Ball, Domain, SamplerConfig, as_interval, pair_batch, sphere_area
from .levelsets import level_intervals, preimages
from .quadrature import adaptive_gk, gauss_legendre

__all__ = [
    "NonlocalParams", "Estimate", "RescaledIndicator", "PowerTail", "sphere_constant",
    "angular_kernel", "i_delta_mc", "i_delta_exact_1d", "i_delta_radial", "i_delta",
    "raw_level_integral", "bbm_functional",
]

HIGH_VARIANCE_RATIO = 0.1
DIAGONAL_RTOL = 1e-12
SPHERE_RTOL = 1e-8
QUOTIENT_FLOOR = 1e-6


@dataclass(frozen=True)
class NonlocalParams:
    d: int
    p: float
    delta: float

    def __post_init__(self):
        if not 1 <= self.d <= 3:
            raise ValueError(f"d must be 1, 2 or 3, got {self.d}")
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    @property
    def kernel_exponent(self) -> float:
        return self.d + self.p

    def with_delta(self, delta: float) -> "NonlocalParams":
        return NonlocalParams(self.d, self.p, delta)


# ---------------------------------------------------------------------------
# mollifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RescaledIndicator:
    """rho_n(r) = d n^d on r < 1/n (unit radial mass)."""

    n: float

    def density(self, d, r):
        r = np.asarray(r, dtype=np.float64)
        return np.where(r < 1.0 / self.n, self.normalization(d), 0.0)

    def normalization(self, d):
        return d * self.n ** d

    def sample_radius(self, d, rng, size):
        # radial law proportional to rho(r) r^{d-1}
        return rng.uniform(size=size) ** (1.0 / d) / self.n


@dataclass(frozen=True)
class PowerTail:
    """rho_s(r) = (1 - s) r^{(1 - s) - d} on 0 < r < 1; concentrates at 0 as s -> 1."""

    s: float

    def __post_init__(self):
        if not 0 <= self.s < 1:
            raise ValueError("PowerTail requires 0 <= s < 1")

    def density(self, d, r):
        r = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return np.where(r < 1.0, self.normalization(d) * r ** ((1 - self.s) - d), 0.0)

    def normalization(self, d):
        return 1.0 - self.s

    def sample_radius(self, d, rng, size):
        return rng.uniform(size=size) ** (1.0 / (1.0 - self.s))


MollifierSpec = RescaledIndicator | PowerTail


def radial_mass(mollifier, d, lo=0.0, hi=math.inf) -> float:
    """int_lo^hi rho(r) r^{d-1} dr, by quadrature of the catalog density."""
    top = 1.0 / mollifier.n if isinstance(mollifier, RescaledIndicator) else 1.0
    hi = min(hi, top)
    if hi <= lo:
        return 0.0
    if isinstance(mollifier, PowerTail):
        # substitute r = v^{1/(1-s)} so the integrand is smooth
        k = 1.0 / (1.0 - mollifier.s)
        f = lambda v: mollifier.density(d, v ** k) * (v ** k) ** (d - 1) * k * v ** (k - 1)
        res = adaptive_gk(f, [lo ** (1 / k), hi ** (1 / k)], abs_tol=1e-13, rel_tol=1e-12)
        return res.value
    f = lambda r: mollifier.density(d, r) * r ** (d - 1)
    return adaptive_gk(f, [lo, hi], abs_tol=1e-13, rel_tol=1e-12).value


# ---------------------------------------------------------------------------
# sphere constant and angular kernel
# ---------------------------------------------------------------------------

def sphere_constant_closed(d: int, p: float) -> float:
    return 2.0 * math.pi ** ((d - 1) / 2) * math.gamma((p + 1) / 2) / math.gamma((d + p) / 2)


def sphere_constant_quadrature(d: int, p: float) -> float:
    """int over S^{d-1} of |sigma . e|^p via the polar angle to e."""
    if d == 1:
        return 2.0
    # |cos|^p sin^{d-2}: symmetric about pi/2, integrate [0, pi/2] and double
    x, w = gauss_legendre(60)
    edges = np.linspace(0.0, 0.5 * math.pi, 9)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        th = 0.5 * (a + b) + 0.5 * (b - a) * x
        total += 0.5 * (b - a) * float(np.sum(w * np.abs(np.cos(th)) ** p * np.sin(th) ** (d - 2)))
    return 2.0 * sphere_area(d - 1) * total


def sphere_constant(d: int, p: float) -> float:
    """K_{d,p}; the closed form is cross-checked by polar quadrature."""
    if d not in (1, 2, 3):
        raise ValueError(f"d must be 1, 2 or 3, got {d}")
    closed = sphere_constant_closed(d, p)
    quad = sphere_constant_quadrature(d, p)
    if abs(quad - closed) > SPHERE_RTOL * abs(closed):
        raise QuadratureMismatch(f"K_{{{d},{p}}}: closed form {closed!r} vs quadrature {quad!r}")
    return closed


def angular_kernel(d: int, p: float, r1: float, r2: float) -> float:
    """Double sphere integral of |r1 a - r2 b|^{-(d+p)} over unit vectors a, b."""
    if not (r1 > 0 and r2 > 0):
        raise ValueError("radii must be positive")
    if abs(r1 - r2) < DIAGONAL_RTOL * max(r1, r2):
        raise DiagonalSingularity(f"radii {r1!r} and {r2!r} coincide to 1e-12")
    return float(_kernels.angular_kernel(d, p, np.array([r1]), np.array([r2]))[0])


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def _mc_batches(fn, n_batches):
    workers = min(worker_count(), n_batches)
    if workers <= 1:
        return [fn(i) for i in range(n_batches)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_batches)))


def _mc_summary(batch_means, scale, n_per_batch, method="montecarlo"):
    m = np.asarray(batch_means, dtype=np.float64) * scale
    value = float(m.mean())
    stderr = float(m.std(ddof=1) / math.sqrt(m.size)) if m.size > 1 else math.inf
    trace = []
    k = 1
    while k <= m.size:
        trace.append((k * n_per_batch, float(m[:k].mean())))
        k *= 2
    if trace[-1][0] != m.size * n_per_batch:
        trace.append((m.size * n_per_batch, value))
    return Estimate(value, stderr, method, trace)


def _check_variance(est: Estimate) -> Estimate:
    if est.value != 0 and est.stderr > HIGH_VARIANCE_RATIO * abs(est.value):
        raise HighVariance(
            f"relative standard error {est.stderr / abs(est.value):.3f} exceeds "
            f"{HIGH_VARIANCE_RATIO}", estimate=est)
    return est


def i_delta_mc(field: ScalarField, domain: Domain, params: NonlocalParams,
               sampler: SamplerConfig | None = None, prefactor: bool = True) -> Estimate:
    """Monte Carlo estimate of I_{delta,p} (or J_delta with ``prefactor=False``).

    Independent uniform pairs; per-batch child seeds make the result
    independent of thread scheduling. Raises ``HighVariance`` when the
    relative standard error exceeds 0.1.
    """
    sampler = sampler or SamplerConfig()
    expo = params.d + params.p
    if jump_size(field, domain) > params.delta:
        # pairs straddling the jump give a non-integrable |x - y|^{-(d+p)} singularity
        return Estimate(math.inf, 0.0, "montecarlo", [(0, math.inf)])

    def one(i):
        x, y = pair_batch(domain, sampler, i)
        ux = np.asarray(field.values(x), dtype=np.float64)
        uy = np.asarray(field.values(y), dtype=np.float64)
        return _kernels.pair_kernel_sum(x, y, ux, uy, params.delta, expo) / sampler.batch_size

    means = _mc_batches(one, sampler.max_batches)
    scale = domain.measure ** 2 * (params.delta ** params.p if prefactor else 1.0)
    return _check_variance(_mc_summary(means, scale, sampler.batch_size))


# ---------------------------------------------------------------------------
# deterministic level-set integration
# ---------------------------------------------------------------------------

def _jump_blocks(jumps, lo, hi, delta) -> bool:
    """A jump larger than delta inside the domain makes the integral diverge (p >= 1)."""
    return any(lo < x < hi and h > delta for x, h in jumps)


def _kink_points(g, cuts, delta, extra_levels=()):
    eta = 1e-13 * (cuts[-1] - cuts[0])
    probe = np.concatenate([cuts[:-1] + eta, cuts[1:] - eta])
    levels = np.concatenate([g(probe), np.asarray(extra_levels, dtype=np.float64)])
    levels = levels[np.isfinite(levels)]
    targets = np.unique(np.concatenate([levels + delta, levels - delta]))
    return np.unique(np.concatenate([cuts, preimages(g, cuts, targets)]))


def _level_integral(g, cuts, delta, inner, weight, tol, tail=None):
    """2 * int ds weight(s) * inner(s, {t > s : |g(t) - g(s)| > delta}).

    ``tail = (start, value)`` appends the region ``t > start`` where ``g``
    equals the constant ``value`` (whole-space evaluation).
    """
    extra = () if tail is None else (tail[1],)
    bps = _kink_points(g, cuts, delta, extra)

    def integrand(s):
        vals = g(s)
        lo, hi = level_intervals(g, cuts, s, vals, delta)
        if tail is not None:
            on = np.abs(tail[1] - vals) > delta
            lo = np.column_stack([lo, np.full(s.size, tail[0])])
            hi = np.column_stack([hi, np.where(on, math.inf, tail[0])])
        return weight(s) * inner(s, lo, hi)

    res = adaptive_gk(integrand, bps, abs_tol=1e-300, rel_tol=tol)
    return 2.0 * res.value, 2.0 * res.abserr, [(n, 2.0 * v) for n, v in res.trace]


def _finalize(value, abserr, trace, method, scale):
    return Estimate(value * scale, 0.0, method, [(n, v * scale) for n, v in trace], abserr * scale)


def i_delta_exact_1d(field: ScalarField, domain: Domain, params: NonlocalParams,
                     tol: float = 1e-9, prefactor: bool = True) -> Estimate:
    """Deterministic I_{delta,p} on an interval (``prefactor=False`` gives J_delta)."""
    iv = as_interval(domain)
    p, delta = params.p, params.delta
    scale = delta ** p if prefactor else 1.0
    if _jump_blocks(field.jumps_1d(iv.a, iv.b), iv.a, iv.b, delta):
        return Estimate(math.inf, 0.0, "exact1d", [(0, math.inf)], math.inf)
    g = field_1d(field)
    cuts = cuts_1d(field, iv.a, iv.b)
    value, err, trace = _level_integral(
        g, cuts, delta, lambda s, lo, hi: _kernels.flat_inner(p, s, lo, hi),
        lambda s: 1.0, tol)
    return _finalize(value, err, trace, "exact1d", scale)


def i_delta_radial(field: ScalarField, ball: Ball, params: NonlocalParams,
                   tol: float = 1e-8, prefactor: bool = True,
                   whole_space: bool = False) -> Estimate:
    """Deterministic I_{delta,p} for a radial field on a centered ball.

    ``whole_space=True`` integrates over all of R^d; the field must then be
    constant outside its support radius (``RadialProfile`` with ``fill``).
    """
    if not (field.radial and isinstance(ball, Ball) and ball.is_centered):
        raise ValueError("radial evaluation needs a radial field on a centered ball")
    d, p, delta = ball.dim, params.p, params.delta
    if d != params.d:
        raise ValueError("ball dimension and params.d disagree")
    scale = delta ** p if prefactor else 1.0
    R = ball.radius
    tail = None
    if whole_space:
        R = getattr(field, "support", None) or R
        fill = getattr(field, "fill", None)
        if fill is None:
            raise ValueError("whole-space evaluation needs a profile with a constant fill")
        tail = (R, float(fill))
    jumps = field.radial_jumps()
    if whole_space:
        jumps = [(r, h) for r, h in jumps if r <= R]
        if _jump_blocks(jumps, 0.0, math.inf, delta):
            return Estimate(math.inf, 0.0, "radial", [(0, math.inf)], math.inf)
    elif _jump_blocks(jumps, 0.0, R, delta):
        return Estimate(math.inf, 0.0, "radial", [(0, math.inf)], math.inf)
    cuts = radial_cuts(field, R)
    value, err, trace = _level_integral(
        field.profile, cuts, delta,
        lambda s, lo, hi: _kernels.radial_inner(d, p, s, lo, hi),
        lambda s: s ** (d - 1), tol, tail)
    return _finalize(value, err, trace, "radial", scale)


def deterministic_method(field: ScalarField, domain: Domain) -> str | None:
    """Which deterministic evaluator applies, if any."""
    if uses_radial_path(field, domain):
        return "radial"
    if domain.dim == 1:
        if hasattr(field, "dim") and field.dim != 1:
            return None
        return "exact1d"
    return None


def i_delta(field: ScalarField, domain: Domain, params: NonlocalParams,
            method: str = "auto", sampler: SamplerConfig | None = None,
            tol: float = 1e-8, prefactor: bool = True) -> Estimate:
    """I_{delta,p}(u, O) with the best available method (or the one requested)."""
    if domain.dim != params.d:
        raise ValueError(f"domain dimension {domain.dim} != d = {params.d}")
    if method == "auto":
        method = deterministic_method(field, domain) or "montecarlo"
    if method == "radial":
        return i_delta_radial(field, domain, params, tol=tol, prefactor=prefactor)
    if method == "exact1d":
        return i_delta_exact_1d(field, domain, params, tol=tol, prefactor=prefactor)
    if method == "montecarlo":
        return i_delta_mc(field, domain, params, sampler, prefactor=prefactor)
    raise ValueError(f"unknown method {method!r}")


def raw_level_integral(field: ScalarField, domain: Domain, params: NonlocalParams,
                       method: str = "auto", sampler: SamplerConfig | None = None,
                       tol: float = 1e-8) -> Estimate:
    """J_delta: the level-set double integral without the delta^p prefactor."""
    return i_delta(field, domain, params, method, sampler, tol, prefactor=False)


# ---------------------------------------------------------------------------
# BBM energy
# ---------------------------------------------------------------------------

def _sphere_directions(rng, n, d):
    if d == 1:
        return np.where(rng.uniform(size=(n, 1)) < 0.5, -1.0, 1.0)
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def bbm_functional(field: ScalarField, domain: Domain, p: float, mollifier,
                   sampler: SamplerConfig | None = None) -> Estimate:
    """Mollified energy  int int |u(x) - u(y)|^p |x - y|^{-p} rho(|x - y|) dx dy.

    ``x`` is uniform on the domain and ``y = x + r sigma`` with ``r`` drawn
    from ``rho(r) r^{d-1}`` and ``sigma`` uniform on the sphere, so the
    estimator weight is ``|O| |S^{d-1}|`` times the in-domain indicator.
    Radii below ``QUOTIENT_FLOOR`` times the domain scale are raised to it:
    otherwise ``x + r sigma`` rounds to ``x`` and the quotient is lost.
    """
    sampler = sampler or SamplerConfig()
    d = domain.dim
    weight = domain.measure * sphere_area(d)
    floor = QUOTIENT_FLOOR * domain.measure ** (1.0 / d)

    def one(i):
        rng = sampler.batch_rng(i)
        x = domain.sample(rng, sampler.batch_size)
        r = np.maximum(mollifier.sample_radius(d, rng, sampler.batch_size), floor)
        y = x + r[:, None] * _sphere_directions(rng, sampler.batch_size, d)
        inside = domain.contains(y)
        if not inside.any():
            return 0.0
        xi, yi, ri = x[inside], y[inside], r[inside]
        diff = np.abs(field.values(xi) - field.values(yi))
        return float(np.sum((diff / ri) ** p)) / sampler.batch_size

    means = _mc_batches(one, sampler.max_batches)
    return _check_variance(_mc_summary(means, weight, sampler.batch_size))
