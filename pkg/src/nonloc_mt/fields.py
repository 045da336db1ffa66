"""Catalog of scalar fields and the queries built on them.

A field is evaluated on arrays of points of shape ``(n, d)``. Radial fields
additionally expose a 1-D ``profile(r)`` together with the radii where the
profile may change monotonicity or jump; the deterministic evaluators rely
on that piecewise-monotone structure to locate level sets by bisection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .errors import NoConvergence, OutsideDomain, SingularPoint
from .geometry import Ball, Box, Domain, Interval, SamplerConfig, as_interval, unit_ball_volume
from .levelsets import piece_sets, superlevel_intervals
from .quadrature import adaptive_gk

LOGLOG_R_MIN = 1e-300
_SUPPORT_SLACK = 1e-12


def _points(x, dim=None) -> np.ndarray:
    pts = np.asarray(x, dtype=np.float64)
    if pts.ndim == 0:
        return pts.reshape(1, 1)
    if pts.ndim == 1:
        return pts.reshape(1, -1) if (dim is not None and dim > 1 and pts.size == dim) else pts.reshape(-1, 1)
    return pts


class ScalarField:
    """Base class. Subclasses implement ``values`` (and ``profile`` if radial)."""

    radial = False
    support: float | None = None  # radius of the domain of definition, radial fields only

    def values(self, points) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, points) -> np.ndarray:
        return self.values(points)

    def eval(self, x) -> float:
        """Pointwise value at a single point."""
        pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if pts.shape[0] != 1:
            pts = pts.reshape(1, -1)
        return float(self.values(pts)[0])

    # -- radial structure -------------------------------------------------
    def profile(self, r) -> np.ndarray:
        raise TypeError(f"{type(self).__name__} is not radial")

    def profile_log(self, w) -> np.ndarray:
        """Profile at radius ``exp(-w)``; overridden where tiny radii matter."""
        with np.errstate(over="ignore"):
            return self.profile(np.exp(-np.asarray(w, dtype=np.float64)))

    def radial_breaks(self) -> np.ndarray:
        return np.empty(0)

    def radial_jumps(self) -> list[tuple[float, float]]:
        return []

    # -- one-dimensional structure ----------------------------------------
    def breaks_1d(self, a: float, b: float) -> np.ndarray:
        if self.radial:
            rb = self.radial_breaks()
            pts = np.concatenate([[0.0], rb, -rb])
            return np.sort(pts[(pts > a) & (pts < b)])
        return np.empty(0)

    def jumps_1d(self, a: float, b: float) -> list[tuple[float, float]]:
        if self.radial:
            out = []
            for r, h in self.radial_jumps():
                out += [(x, h) for x in (r, -r) if a < x < b]
            return out
        return []

    def _radial_values(self, points) -> np.ndarray:
        pts = _points(points)
        r = np.sqrt(np.sum(pts * pts, axis=1))
        if self.support is not None and np.any(r > self.support * (1 + _SUPPORT_SLACK)):
            raise OutsideDomain(f"{type(self).__name__} is defined for |x| <= {self.support}")
        return self.profile(r)


@dataclass(frozen=True)
class Constant(ScalarField):
    c: float = 0.0
    radial = True

    def values(self, points):
        return np.full(_points(points).shape[0], float(self.c))

    def profile(self, r):
        return np.full(np.shape(r), float(self.c))


@dataclass(frozen=True)
class Linear(ScalarField):
    gradient: tuple = (1.0,)
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "gradient", tuple(float(g) for g in np.atleast_1d(self.gradient)))

    @property
    def dim(self) -> int:
        return len(self.gradient)

    def values(self, points):
        pts = _points(points, self.dim)
        return pts @ np.array(self.gradient) + self.offset

    @property
    def gradient_norm(self) -> float:
        return float(np.linalg.norm(self.gradient))


@dataclass(frozen=True)
class Indicator(ScalarField):
    """``height * 1_region``; radial when the region is a ball centered at the origin."""

    region: Domain
    height: float = 1.0

    @property
    def radial(self):
        return isinstance(self.region, Ball) and self.region.is_centered

    def values(self, points):
        pts = _points(points, self.region.dim)
        return np.where(self.region.contains(pts), float(self.height), 0.0)

    def profile(self, r):
        return np.where(np.asarray(r) < self.region.radius, float(self.height), 0.0)

    def radial_breaks(self):
        return np.array([self.region.radius])

    def radial_jumps(self):
        return [(self.region.radius, abs(self.height))]

    def breaks_1d(self, a, b):
        if self.region.dim != 1:
            raise ValueError("region is not one-dimensional")
        lo, hi = self.region.bounds
        pts = np.array([lo[0], hi[0]])
        return pts[(pts > a) & (pts < b)]

    def jumps_1d(self, a, b):
        return [(x, abs(self.height)) for x in self.breaks_1d(a, b)]


@dataclass(frozen=True)
class LogLog(ScalarField):
    """``(ln lam)^{-1} ln ln(1/|x|)`` on the ball of radius 1/e; unbounded at 0."""

    lam: float = 3.0
    radial = True
    support = math.exp(-1.0)

    def __post_init__(self):
        if not self.lam > 1:
            raise ValueError("LogLog requires lam > 1")

    def profile(self, r):
        r = np.maximum(np.asarray(r, dtype=np.float64), LOGLOG_R_MIN)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.log(np.log(1.0 / r)) / math.log(self.lam)

    def profile_log(self, w):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.log(np.asarray(w, dtype=np.float64)) / math.log(self.lam)

    def values(self, points):
        return self._radial_values(points)

    def eval(self, x):
        if np.all(np.asarray(x, dtype=np.float64) == 0.0):
            raise SingularPoint("LogLog is unbounded at the origin")
        return super().eval(x)

    def superlevel_radius(self, t: float) -> float:
        """Radius ``rho`` with ``{u > t} = B_rho`` for ``t >= 0``."""
        return math.exp(-self.lam ** t)


@dataclass(frozen=True)
class Moser(ScalarField):
    """Log-plateau profile: ``(ln n)^{1/q}`` for r <= 1/n, ``ln(1/r) / (ln n)^{1/q'}`` up to 1/e."""

    n: float = 100
    q: float = 1.5
    radial = True
    support = math.exp(-1.0)

    def __post_init__(self):
        if not self.n >= 3:
            raise ValueError("Moser requires n >= 3")
        if not self.q > 1:
            raise ValueError("Moser requires q > 1")

    @property
    def q_conj(self) -> float:
        return self.q / (self.q - 1.0)

    @property
    def plateau(self) -> float:
        return math.log(self.n) ** (1.0 / self.q)

    def profile(self, r):
        r = np.asarray(r, dtype=np.float64)
        ln_n = math.log(self.n)
        with np.errstate(divide="ignore"):
            tail = np.log(1.0 / np.maximum(r, 1e-300)) / ln_n ** (1.0 / self.q_conj)
        return np.where(r <= 1.0 / self.n, self.plateau, tail)

    def profile_log(self, w):
        w = np.asarray(w, dtype=np.float64)
        ln_n = math.log(self.n)
        return np.where(w >= ln_n, self.plateau, w / ln_n ** (1.0 / self.q_conj))

    def values(self, points):
        return self._radial_values(points)

    def radial_breaks(self):
        return np.array([1.0 / self.n])

    def branch_gap(self) -> float:
        """Difference of the two branch formulas at r = 1/n."""
        ln_n = math.log(self.n)
        return abs(ln_n / ln_n ** (1.0 / self.q_conj) - self.plateau)


@dataclass(frozen=True)
class RadialProfile(ScalarField):
    """Radial field ``g(|x|)`` from a vectorized profile on ``[0, support]``.

    ``breaks`` lists radii where ``g`` may change monotonicity; ``jumps`` lists
    ``(radius, size)`` discontinuities. Outside the support the field equals
    ``fill`` if given, otherwise evaluation raises ``OutsideDomain``.
    """

    func: Callable = dc_field(compare=False)
    support: float = 1.0
    breaks: tuple = ()
    jumps: tuple = ()
    fill: float | None = None
    name: str = "profile"
    extent: float | None = dc_field(default=None, compare=False)
    radial = True

    @classmethod
    def piecewise_linear(cls, knots, values, fill=None, name="piecewise-linear"):
        knots = np.asarray(knots, dtype=np.float64)
        vals = np.asarray(values, dtype=np.float64)
        if knots[0] != 0.0 or np.any(np.diff(knots) <= 0):
            raise ValueError("knots must start at 0 and increase")
        return cls(lambda r: np.interp(r, knots, vals), float(knots[-1]),
                   tuple(knots[1:-1]), (), fill, name)

    def profile(self, r):
        r = np.asarray(r, dtype=np.float64)
        inside = np.asarray(self.func(np.minimum(r, self.extent)), dtype=np.float64)
        if self.fill is None:
            return inside
        return np.where(r <= self.extent, inside, self.fill)

    def values(self, points):
        if self.fill is not None:
            pts = _points(points)
            return self.profile(np.sqrt(np.sum(pts * pts, axis=1)))
        return self._radial_values(points)

    def radial_breaks(self):
        b = list(self.breaks)
        if self.fill is not None:
            b.append(self.extent)
        return np.array(sorted(b), dtype=np.float64)

    def radial_jumps(self):
        out = list(self.jumps)
        if self.fill is not None:
            edge = float(self.func(np.array([self.extent]))[0])
            if edge != self.fill:
                out.append((self.extent, abs(edge - self.fill)))
        return out

    def __post_init__(self):
        if self.extent is None:
            object.__setattr__(self, "extent", self.support)
        if self.fill is not None:
            # defined on all of R^d
            object.__setattr__(self, "support", None)


@dataclass(frozen=True)
class GridSample(ScalarField):
    """Values on a regular vertex grid over ``[lo, hi]``; nearest or multilinear lookup."""

    grid: np.ndarray = dc_field(compare=False)
    lo: tuple = (0.0,)
    hi: tuple = (1.0,)
    mode: str = "nearest"

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=np.float64)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "lo", tuple(float(v) for v in np.atleast_1d(self.lo)))
        object.__setattr__(self, "hi", tuple(float(v) for v in np.atleast_1d(self.hi)))
        if g.ndim != len(self.lo) or len(self.lo) != len(self.hi):
            raise ValueError("grid dimension does not match lo/hi")
        if any(n < 2 for n in g.shape):
            raise ValueError("each grid axis needs at least two nodes")
        if self.mode not in ("nearest", "linear"):
            raise ValueError("mode must be 'nearest' or 'linear'")

    @property
    def dim(self):
        return self.grid.ndim

    def axes(self):
        return [np.linspace(l, h, n) for l, h, n in zip(self.lo, self.hi, self.grid.shape)]

    def _axis0(self):
        ax = self.__dict__.get("_ax0")
        if ax is None:
            ax = self.axes()[0]
            object.__setattr__(self, "_ax0", ax)
        return ax

    def values(self, points):
        pts = _points(points, self.dim)
        lo, hi = np.array(self.lo), np.array(self.hi)
        tol = _SUPPORT_SLACK * (hi - lo)
        if np.any(pts < lo - tol) or np.any(pts > hi + tol):
            raise OutsideDomain("point outside the sampled grid")
        pts = np.clip(pts, lo, hi)
        if self.dim == 1:
            x = self._axis0()
            if self.mode == "linear":
                return np.interp(pts[:, 0], x, self.grid)
            h = (hi[0] - lo[0]) / (self.grid.size - 1)
            idx = np.clip(np.floor((pts[:, 0] - lo[0]) / h + 0.5).astype(int), 0, self.grid.size - 1)
            return self.grid[idx]
        from scipy.interpolate import RegularGridInterpolator
        interp = RegularGridInterpolator(self.axes(), self.grid, method=self.mode)
        return interp(pts)

    def breaks_1d(self, a, b):
        x = self.axes()[0]
        pts = x[1:-1] if self.mode == "linear" else 0.5 * (x[1:] + x[:-1])
        return pts[(pts > a) & (pts < b)]

    def jumps_1d(self, a, b):
        if self.mode == "linear":
            return []
        x = self.axes()[0]
        mids = 0.5 * (x[1:] + x[:-1])
        size = np.abs(np.diff(self.grid))
        return [(m, s) for m, s in zip(mids, size) if a < m < b and s > 0]

    @classmethod
    def from_csv(cls, path, mode="nearest") -> "GridSample":
        """Read the ``d,nx[,ny[,nz]],lo...,hi...`` header followed by row-major values."""
        with open(path, encoding="utf-8") as fh:
            header = fh.readline()
            body = fh.read()
        head = [float(v) for v in header.replace(" ", "").strip().split(",") if v]
        d = int(head[0])
        shape = tuple(int(v) for v in head[1:1 + d])
        lo = tuple(head[1 + d:1 + 2 * d])
        hi = tuple(head[1 + 2 * d:1 + 3 * d])
        if len(head) != 1 + 3 * d:
            raise ValueError(f"malformed grid header: {header.strip()!r}")
        vals = np.array([float(v) for v in body.replace(",", " ").split()], dtype=np.float64)
        if vals.size != int(np.prod(shape)):
            raise ValueError(f"expected {int(np.prod(shape))} values, found {vals.size}")
        return cls(vals.reshape(shape), lo, hi, mode)

    def to_csv(self, path) -> None:
        d = self.dim
        head = [str(d)] + [str(n) for n in self.grid.shape] + [repr(v) for v in self.lo + self.hi]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(head) + "\n")
            rows = self.grid.reshape(-1, self.grid.shape[-1]) if d > 1 else self.grid.reshape(-1, 1)
            for row in rows:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


@dataclass(frozen=True)
class Scaled(ScalarField):
    """``u_tau(x) = u(tau x)``."""

    inner: ScalarField
    tau: float

    def __post_init__(self):
        if not 0 < self.tau <= 1:
            raise ValueError("Scaled requires tau in (0, 1]")

    @property
    def radial(self):
        return self.inner.radial

    @property
    def support(self):
        s = self.inner.support
        return None if s is None else s / self.tau

    def values(self, points):
        return self.inner.values(_points(points) * self.tau)

    def profile(self, r):
        return self.inner.profile(np.asarray(r, dtype=np.float64) * self.tau)

    def profile_log(self, w):
        return self.inner.profile_log(np.asarray(w, dtype=np.float64) - math.log(self.tau))

    def radial_breaks(self):
        return self.inner.radial_breaks() / self.tau

    def radial_jumps(self):
        return [(r / self.tau, h) for r, h in self.inner.radial_jumps()]

    def breaks_1d(self, a, b):
        if self.radial:
            return super().breaks_1d(a, b)
        return self.inner.breaks_1d(a * self.tau, b * self.tau) / self.tau

    def jumps_1d(self, a, b):
        if self.radial:
            return super().jumps_1d(a, b)
        return [(x / self.tau, h) for x, h in self.inner.jumps_1d(a * self.tau, b * self.tau)]


@dataclass(frozen=True)
class Truncated(ScalarField):
    """``u_k = min(k, max(u, -k))``."""

    inner: ScalarField
    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("Truncated requires k > 0")

    @property
    def radial(self):
        return self.inner.radial

    @property
    def support(self):
        return self.inner.support

    def values(self, points):
        return np.clip(self.inner.values(points), -self.k, self.k)

    def profile(self, r):
        return np.clip(self.inner.profile(r), -self.k, self.k)

    def profile_log(self, w):
        return np.clip(self.inner.profile_log(w), -self.k, self.k)

    def radial_breaks(self):
        return self.inner.radial_breaks()

    def radial_jumps(self):
        return [(r, min(h, 2 * self.k)) for r, h in self.inner.radial_jumps()]

    def breaks_1d(self, a, b):
        return self.inner.breaks_1d(a, b)

    def jumps_1d(self, a, b):
        return [(x, min(h, 2 * self.k)) for x, h in self.inner.jumps_1d(a, b)]


@dataclass(frozen=True)
class Affine(ScalarField):
    """``scale * u + offset``; used to normalize means and amplitudes."""

    inner: ScalarField
    scale: float = 1.0
    offset: float = 0.0

    @property
    def radial(self):
        return self.inner.radial

    @property
    def support(self):
        return self.inner.support

    def values(self, points):
        return self.scale * self.inner.values(points) + self.offset

    def profile(self, r):
        return self.scale * self.inner.profile(r) + self.offset

    def profile_log(self, w):
        return self.scale * self.inner.profile_log(w) + self.offset

    def radial_breaks(self):
        return self.inner.radial_breaks()

    def radial_jumps(self):
        return [(r, abs(self.scale) * h) for r, h in self.inner.radial_jumps()]

    def breaks_1d(self, a, b):
        return self.inner.breaks_1d(a, b)

    def jumps_1d(self, a, b):
        return [(x, abs(self.scale) * h) for x, h in self.inner.jumps_1d(a, b)]


@dataclass(frozen=True)
class Reflected(ScalarField):
    """Extension of a field on B_1 to B_{3/2}: ``u((2 - |x|) x / |x|)`` for 1 < |x| < 3/2."""

    inner: ScalarField
    support = 1.5

    @property
    def radial(self):
        return self.inner.radial

    def values(self, points):
        pts = _points(points)
        r = np.sqrt(np.sum(pts * pts, axis=1))
        if np.any(r > 1.5 * (1 + _SUPPORT_SLACK)):
            raise OutsideDomain("reflection extension is defined on B_{3/2}")
        factor = np.where(r > 1.0, (2.0 - r) / np.where(r > 0, r, 1.0), 1.0)
        return self.inner.values(pts * factor[:, None])

    def profile(self, r):
        r = np.asarray(r, dtype=np.float64)
        return self.inner.profile(np.where(r > 1.0, 2.0 - r, r))

    def profile_log(self, w):
        w = np.asarray(w, dtype=np.float64)
        # radii below 1 are not reflected
        return np.where(w > 0, self.inner.profile_log(np.maximum(w, 0.0)), self.profile(np.exp(-w)))

    def radial_breaks(self):
        b = self.inner.radial_breaks()
        mirrored = 2.0 - b[b > 0.5]
        return np.unique(np.concatenate([b[b < 1.0], [1.0], mirrored]))

    def radial_jumps(self):
        out = []
        for r, h in self.inner.radial_jumps():
            if r < 1.0:
                out.append((r, h))
            if 0.5 < r < 1.0:
                out.append((2.0 - r, h))
        return out


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------

def eval_field(field: ScalarField, x) -> float:
    """Pointwise value; raises ``OutsideDomain`` / ``SingularPoint`` as appropriate."""
    return field.eval(x)


def reflect_extend(field: ScalarField) -> ScalarField:
    """Radial reflection extension from B_1 to B_{3/2}; constants stay constant."""
    if isinstance(field, Constant):
        return field
    return Reflected(field)


def radial_cuts(field: ScalarField, radius: float) -> np.ndarray:
    """Monotone-piece boundaries of a radial profile on ``[0, radius]``."""
    b = field.radial_breaks()
    b = b[(b > 0) & (b < radius)]
    return np.unique(np.concatenate([[0.0], b, [radius]]))


def cuts_1d(field: ScalarField, a: float, b: float) -> np.ndarray:
    br = np.asarray(field.breaks_1d(a, b), dtype=np.float64)
    return np.unique(np.concatenate([[a], br[(br > a) & (br < b)], [b]]))


def uses_radial_path(field: ScalarField, domain: Domain) -> bool:
    return field.radial and isinstance(domain, Ball) and domain.is_centered


def _scale_domain(domain: Domain, tau: float) -> Domain:
    if isinstance(domain, Ball):
        return Ball(tuple(c * tau for c in domain.center), domain.radius * tau)
    if isinstance(domain, Box):
        return Box(tuple(v * tau for v in domain.lo), tuple(v * tau for v in domain.hi))
    return Interval(domain.a * tau, domain.b * tau)


def jump_size(field: ScalarField, domain: Domain) -> float:
    """Largest jump of ``field`` across a discontinuity inside ``domain`` (0 if continuous).

    Uses the declared jump structure; an indicator of a general region is
    tested by checking whether its boundary cuts the domain.
    """
    if isinstance(field, Indicator) and not (field.radial and uses_radial_path(field, domain)) \
            and domain.dim > 1:
        pts = domain.sample(np.random.default_rng(0), 4096)
        inside = field.region.contains(pts)
        return abs(field.height) if inside.any() and not inside.all() else 0.0
    if isinstance(field, Affine):
        return abs(field.scale) * jump_size(field.inner, domain)
    if isinstance(field, Truncated):
        return min(jump_size(field.inner, domain), 2 * field.k)
    if isinstance(field, Scaled) and not field.radial:
        return jump_size(field.inner, _scale_domain(domain, field.tau))
    if uses_radial_path(field, domain):
        R = domain.radius
        return max([h for r, h in field.radial_jumps() if 0 < r < R], default=0.0)
    if domain.dim == 1:
        iv = as_interval(domain)
        return max([h for _, h in field.jumps_1d(iv.a, iv.b)], default=0.0)
    return 0.0


def field_1d(field: ScalarField):
    """Vectorized 1-D view ``x -> u(x)``."""
    return lambda x: field.values(np.asarray(x, dtype=np.float64).reshape(-1, 1))


@dataclass
class Estimate:
    """A numeric value with provenance.

    ``stderr`` is the Monte Carlo standard error (0 for deterministic
    methods); ``abserr`` is the deterministic quadrature error estimate.
    """

    value: float
    stderr: float = 0.0
    method: str = "closed_form"
    refinement_trace: list = dc_field(default_factory=list)
    abserr: float = 0.0

    @property
    def uncertainty(self) -> float:
        return max(self.stderr, self.abserr)

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "method": self.method,
                "abserr": self.abserr,
                "trace": [[float(r), float(v)] for r, v in self.refinement_trace]}


def _mc_mean(fn, domain, tol, config):
    """Batch-means Monte Carlo estimate of the average of ``fn`` over ``domain``."""
    means = []
    trace = []
    n_batches = min(16, config.max_batches)
    i = 0
    while True:
        while i < n_batches:
            pts = domain.sample(config.batch_rng(i), config.batch_size)
            means.append(float(np.mean(fn(pts))))
            i += 1
        m = np.array(means)
        value = float(m.mean())
        err = float(m.std(ddof=1) / math.sqrt(m.size))
        trace.append((m.size * config.batch_size, value))
        if err <= tol:
            return Estimate(value, err, "montecarlo", trace)
        if n_batches >= config.max_batches:
            raise NoConvergence(f"Monte Carlo stderr {err:.3e} above tolerance {tol:.3e}")
        n_batches = min(2 * n_batches, config.max_batches)


def mean(field: ScalarField, domain: Domain, tol: float = 1e-8,
         config: SamplerConfig | None = None) -> Estimate:
    """Average of ``field`` over ``domain``.

    Deterministic adaptive quadrature on intervals and for radial fields on
    centered balls; Monte Carlo with a batch-means standard error otherwise.
    """
    if domain.dim == 1 and not (isinstance(domain, Ball) and field.radial):
        iv = as_interval(domain)
        res = adaptive_gk(field_1d(field), cuts_1d(field, iv.a, iv.b), abs_tol=tol * iv.measure,
                          rel_tol=1e-12)
        return Estimate(res.value / iv.measure, 0.0, "exact1d", res.trace, res.abserr / iv.measure)
    if uses_radial_path(field, domain):
        d, R = domain.dim, domain.radius
        area = d * unit_ball_volume(d)

        def integrand(r):
            return area * r ** (d - 1) * field.profile(r)

        res = adaptive_gk(integrand, radial_cuts(field, R), abs_tol=tol * domain.measure,
                          rel_tol=1e-12)
        return Estimate(res.value / domain.measure, 0.0, "radial", res.trace,
                        res.abserr / domain.measure)
    return _mc_mean(field.values, domain, tol, config or SamplerConfig(max_batches=1024))


LOG_RADIUS_SPAN = 690.0  # first radial piece is searched down to r * e^{-690}


def _radial_superlevel_radii(field, R, ts, strict=True):
    """Radius intervals of ``{|g| > t}`` on ``[0, R]`` for each t, shape ``(len(ts), m)``.

    The piece touching the origin is searched in ``v = ln(c / r)`` so that
    superlevel balls far below double precision of ``c`` are still resolved.
    """
    cuts = radial_cuts(field, R)
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    c1 = cuts[1]

    def h(v):
        return field.profile(c1 * np.exp(-v))

    n = ts.size
    alo, ahi, blo, bhi = piece_sets(h, np.zeros(n), np.full(n, LOG_RADIUS_SPAN), ts, -ts, strict)
    cols_lo, cols_hi = [], []
    for vlo, vhi in ((alo, ahi), (blo, bhi)):
        empty = vhi <= vlo
        rlo = np.where(vhi >= LOG_RADIUS_SPAN, 0.0, c1 * np.exp(-vhi))
        rhi = c1 * np.exp(-vlo)
        cols_lo.append(np.where(empty, 0.0, rlo))
        cols_hi.append(np.where(empty, 0.0, rhi))
    lo = np.column_stack(cols_lo)
    hi = np.column_stack(cols_hi)
    if cuts.size > 2:
        rest_lo, rest_hi = superlevel_intervals(field.profile, cuts[1:], ts, strict)
        lo = np.concatenate([lo, rest_lo], axis=1)
        hi = np.concatenate([hi, rest_hi], axis=1)
    return lo, hi


def superlevel_measures(field: ScalarField, domain: Domain, ts, strict: bool = True) -> np.ndarray:
    """Exact ``|{x in domain : |u(x)| > t}|`` for an array of thresholds.

    Available for radial fields on centered balls and for any field on an
    interval; raises ``ValueError`` otherwise. ``strict=False`` uses ``>=``.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    if uses_radial_path(field, domain):
        d = domain.dim
        lo, hi = _radial_superlevel_radii(field, domain.radius, ts, strict)
        m = unit_ball_volume(d) * np.sum(np.maximum(hi, lo) ** d - lo ** d, axis=1)
    elif domain.dim == 1:
        iv = as_interval(domain)
        lo, hi = superlevel_intervals(field_1d(field), cuts_1d(field, iv.a, iv.b), ts, strict)
        m = np.sum(np.maximum(hi - lo, 0.0), axis=1)
    else:
        raise ValueError("no exact superlevel path for this field and domain")
    return np.where(ts < 0, domain.measure, m)


LOG_W_MAX = 1e15  # innermost balls are resolved down to radius exp(-1e15)
TINY_MEASURE = 1e-280


def log_superlevel_measures(field: ScalarField, ball: Ball, ts, strict: bool = True) -> np.ndarray:
    """``ln |{x in ball : |u(x)| > t}|`` for a radial field, without underflow.

    Where the ordinary measure is below ``TINY_MEASURE`` the superlevel set
    is a ball ``B_rho`` around the origin; ``w = ln(1 / rho)`` is then found
    by bisection on ``ln w`` using the field's ``profile_log``.
    """
    if not uses_radial_path(field, ball):
        raise ValueError("log superlevel measures need a radial field on a centered ball")
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    d = ball.dim
    m = superlevel_measures(field, ball, ts, strict)
    with np.errstate(divide="ignore"):
        out = np.log(m)
    small = (m < TINY_MEASURE) & (ts >= 0)
    if not small.any():
        return out
    cuts = radial_cuts(field, ball.radius)
    w0 = max(-math.log(cuts[1]), 1e-300)
    t = ts[small]

    def above(w):
        v = np.abs(field.profile_log(w))
        return v > t if strict else v >= t

    lo = np.full(t.size, math.log(w0))
    hi = np.full(t.size, math.log(LOG_W_MAX))
    reach = above(np.exp(hi))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        ok = above(np.exp(mid))
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    w = np.exp(hi)
    val = math.log(unit_ball_volume(d)) - d * w
    out[small] = np.where(reach, val, -math.inf)
    return out


def superlevel_measure(field: ScalarField, domain: Domain, t: float,
                       config: SamplerConfig | None = None, tol: float = 1e-3,
                       strict: bool = True) -> Estimate:
    """Measure of ``{x in domain : |u(x)| > t}`` (strict by default).

    Exact up to bisection precision on intervals and for radial fields on
    centered balls; Monte Carlo (absolute stderr ``tol * |domain|``) otherwise.
    """
    if t < 0 or (t == 0 and not strict):
        return Estimate(domain.measure, 0.0, "closed_form")
    if uses_radial_path(field, domain) or domain.dim == 1:
        m = float(superlevel_measures(field, domain, [t], strict)[0])
        return Estimate(m, 0.0, "radial" if uses_radial_path(field, domain) else "exact1d")

    def hit(pts):
        v = np.abs(field.values(pts))
        return (v > t if strict else v >= t).astype(float)

    est = _mc_mean(hit, domain, tol, config or SamplerConfig(max_batches=1024))
    return Estimate(est.value * domain.measure, est.stderr * domain.measure, "montecarlo",
                    [(n, v * domain.measure) for n, v in est.refinement_trace])


def loglog_superlevel_closed_form(field: LogLog, d: int, t: float) -> float:
    """``|{u > t}| = omega_d exp(-d lam^t)`` for ``t >= 0``."""
    return unit_ball_volume(d) * math.exp(-d * field.lam ** t)
