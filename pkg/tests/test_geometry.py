import math

import numpy as np
import pytest

from nonloc_mt.geometry import (Ball, Box, Interval, SamplerConfig, as_interval, pair_batch,
                                sample_uniform, sphere_area, unit_ball_volume)


def test_volumes():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_measures():
    assert Interval(0, 2).measure == 2
    assert Ball.centered(2, 2.0).measure == pytest.approx(4 * math.pi)
    assert Box((0, 0, 0), (1, 2, 3)).measure == pytest.approx(6.0)


@pytest.mark.parametrize("dom", [Interval(-1, 2), Ball((0.5, -0.5), 0.3), Box((0, 0, 0), (1, 2, 0.5)),
                                 Ball.centered(3, 1.0)])
def test_samples_inside(dom):
    pts = dom.sample(np.random.default_rng(0), 5000)
    assert pts.shape == (5000, dom.dim)
    assert dom.contains(pts).all()


def test_ball_sampling_uniform_radius():
    # P(|x| < r/2) = 2^{-d} for uniform points in B_r
    pts = Ball.centered(3, 2.0).sample(np.random.default_rng(1), 200_000)
    frac = np.mean(np.linalg.norm(pts, axis=1) < 1.0)
    assert frac == pytest.approx(1 / 8, abs=0.003)


def test_invalid_domains():
    with pytest.raises(ValueError):
        Interval(1, 1)
    with pytest.raises(ValueError):
        Ball((0, 0), -1)
    with pytest.raises(ValueError):
        Ball((0, 0, 0, 0), 1)


def test_reproducible_batches():
    cfg = SamplerConfig(seed=5, batch_size=100, max_batches=3)
    a = list(sample_uniform(Interval(0, 1), cfg))
    b = list(sample_uniform(Interval(0, 1), cfg))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    # batch i does not depend on how many batches were requested
    assert np.array_equal(pair_batch(Interval(0, 1), cfg, 1)[0],
                          pair_batch(Interval(0, 1), cfg.with_batches(10), 1)[0])


def test_as_interval():
    assert as_interval(Ball((0.5,), 0.5)) == Interval(0.0, 1.0)
    with pytest.raises(ValueError):
        as_interval(Ball.centered(2, 1.0))
