"""Integration domains (intervals, balls, boxes) and seeded samplers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

MAX_DIM = 3


def unit_ball_volume(d: int) -> float:
    """Lebesgue measure of the unit ball in R^d."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def sphere_area(d: int) -> float:
    """Surface measure of S^{d-1}; equals 2 for d = 1 (two points)."""
    return d * unit_ball_volume(d)


def _as_points(x, dim: int) -> np.ndarray:
    pts = np.asarray(x, dtype=np.float64)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(-1, 1) if dim == 1 else pts.reshape(1, -1)
    if pts.shape[-1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {pts.shape}")
    return pts


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.b > self.a:
            raise ValueError(f"Interval requires b > a, got ({self.a}, {self.b})")

    @property
    def dim(self) -> int:
        return 1

    @property
    def measure(self) -> float:
        return float(self.b - self.a)

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([self.a], float), np.array([self.b], float)

    def contains(self, x) -> np.ndarray:
        pts = _as_points(x, 1)
        return (pts[:, 0] > self.a) & (pts[:, 0] < self.b)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.a, self.b, size=(n, 1))


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        object.__setattr__(self, "center", c)
        if not 1 <= len(c) <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {len(c)}")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"Ball requires radius > 0, got {self.radius}")

    @classmethod
    def centered(cls, d: int, radius: float = 1.0) -> "Ball":
        return cls((0.0,) * d, radius)

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def is_centered(self) -> bool:
        return all(c == 0.0 for c in self.center)

    @property
    def measure(self) -> float:
        return unit_ball_volume(self.dim) * self.radius ** self.dim

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def contains(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        return np.sum((pts - np.array(self.center)) ** 2, axis=1) < self.radius ** 2

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # rejection from the bounding box: exactly uniform
        lo, hi = self.bounds
        out = np.empty((n, self.dim))
        filled = 0
        accept = unit_ball_volume(self.dim) / 2.0 ** self.dim
        while filled < n:
            m = int((n - filled) / accept * 1.1) + 16
            cand = rng.uniform(lo, hi, size=(m, self.dim))
            cand = cand[self.contains(cand)]
            take = min(n - filled, len(cand))
            out[filled:filled + take] = cand[:take]
            filled += take
        return out


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi) or not 1 <= len(lo) <= MAX_DIM:
            raise ValueError("Box corners must share a dimension in 1..3")
        if not all(h > l for l, h in zip(lo, hi)):
            raise ValueError(f"Box requires hi > lo componentwise, got {lo}, {hi}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def measure(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.lo), np.array(self.hi)

    def contains(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        return np.all((pts > np.array(self.lo)) & (pts < np.array(self.hi)), axis=1)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def split(self, axis: int, at: float) -> tuple["Box", "Box"]:
        """Cut the box by the hyperplane ``x[axis] = at``."""
        if not self.lo[axis] < at < self.hi[axis]:
            raise ValueError("split point must lie strictly inside the box")
        hi1 = list(self.hi)
        hi1[axis] = at
        lo2 = list(self.lo)
        lo2[axis] = at
        return Box(self.lo, tuple(hi1)), Box(tuple(lo2), self.hi)


Domain = Interval | Ball | Box


def measure(domain: Domain) -> float:
    """Closed-form Lebesgue measure of ``domain``."""
    return domain.measure


def as_interval(domain: Domain) -> Interval:
    """View a one-dimensional domain as an interval."""
    if isinstance(domain, Interval):
        return domain
    if domain.dim != 1:
        raise ValueError("domain is not one-dimensional")
    lo, hi = domain.bounds
    return Interval(float(lo[0]), float(hi[0]))


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 20240607
    batch_size: int = 1 << 14
    max_batches: int = 64

    def __post_init__(self):
        if self.batch_size < 1 or self.max_batches < 1:
            raise ValueError("batch_size and max_batches must be positive")

    def child_seeds(self, n: int) -> list[np.random.SeedSequence]:
        """Per-batch seeds. Child ``i`` does not depend on ``n``."""
        return np.random.SeedSequence(self.seed).spawn(n)

    def batch_rng(self, i: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(i,)))

    def with_batches(self, max_batches: int) -> "SamplerConfig":
        return SamplerConfig(self.seed, self.batch_size, max_batches)


def sample_uniform(domain: Domain, config: SamplerConfig) -> Iterator[np.ndarray]:
    """Yield ``config.max_batches`` batches of i.i.d. uniform points."""
    for i in range(config.max_batches):
        yield domain.sample(config.batch_rng(i), config.batch_size)


def pair_batch(domain: Domain, config: SamplerConfig, i: int) -> tuple[np.ndarray, np.ndarray]:
    rng = config.batch_rng(i)
    return domain.sample(rng, config.batch_size), domain.sample(rng, config.batch_size)


def pair_sample(domain: Domain, config: SamplerConfig) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield batches of independent uniform pairs ``(x, y)``."""
    for i in range(config.max_batches):
        yield pair_batch(domain, config, i)
