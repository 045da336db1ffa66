"""Kernel oracles (closed forms, mpmath reference values) and backend parity."""
import math

import numpy as np
import pytest

from nonloc_mt import _backend, _kernels

from conftest import run_python

# reference values from mpmath.quad at 30 digits of the defining angular
# integral |S^{d-1}| |S^{d-2}| int_0^pi q^{-(d+p)/2} sin^{d-2} dtheta
ANGULAR_REFERENCE = [
    (2, 2.0, 0.3, 0.7, 357.77315953948933699),
    (3, 2.0, 0.3, 0.7, 1832.9265316308813922),
    (2, 1.5, 0.5, 0.55, 37535.801068506489431),
    (3, 1.5, 0.5, 0.55, 205341.65879205053026),
    (2, 3.0, 0.9, 0.2, 90.994692316038719445),
    (3, 3.0, 0.9, 0.2, 381.83501636406146663),
]


@pytest.mark.parametrize("d,p,s,t,ref", ANGULAR_REFERENCE)
def test_angular_kernel_reference(d, p, s, t, ref):
    val = _kernels.angular_kernel(d, p, np.array([s]), np.array([t]))[0]
    assert val == pytest.approx(ref, rel=1e-9)


def test_angular_kernel_mpmath_live():
    mp = pytest.importorskip("mpmath")
    s, t, p = 0.42, 0.61, 2.5
    ref = 2 * mp.pi * mp.quad(lambda th: (s * s + t * t - 2 * s * t * mp.cos(th)) ** (-(2 + p) / 2),
                              [0, mp.pi, 2 * mp.pi])
    assert _kernels.angular_kernel(2, p, np.array([s]), np.array([t]))[0] == pytest.approx(float(ref), rel=1e-9)


def test_angular_kernel_symmetric():
    r1, r2 = np.array([0.2, 0.7]), np.array([0.5, 0.1])
    for d in (2, 3):
        np.testing.assert_allclose(_kernels.angular_kernel(d, 2.0, r1, r2),
                                   _kernels.angular_kernel(d, 2.0, r2, r1), rtol=1e-12)


def test_flat_inner_closed_form():
    # int_{0.5}^{1} (t - 0.2)^{-3} dt for p = 2
    val = _kernels.flat_inner(2.0, np.array([0.2]), np.array([[0.5]]), np.array([[1.0]]))[0]
    assert val == pytest.approx((0.3 ** -2 - 0.8 ** -2) / 2)
    assert math.isinf(_kernels.flat_inner(2.0, np.array([0.6]), np.array([[0.5]]), np.array([[1.0]]))[0])


def test_pair_kernel_sum_brute_force():
    rng = np.random.default_rng(0)
    x, y = rng.random((500, 2)), rng.random((500, 2))
    ux, uy = x[:, 0], y[:, 0]
    expected = sum(np.linalg.norm(a - b) ** -4.0 for a, b, s, t in zip(x, y, ux, uy) if abs(s - t) > 0.2)
    assert _kernels.pair_kernel_sum(x, y, ux, uy, 0.2, 4.0) == pytest.approx(expected, rel=1e-12)


@pytest.mark.skipif(not _backend.HAVE_NUMBA, reason="numba not installed")
def test_numba_numpy_kernels_agree():
    rng = np.random.default_rng(1)
    r1, r2 = rng.uniform(0.05, 1, 200), rng.uniform(0.05, 1, 200)
    for d in (2, 3):
        np.testing.assert_allclose(_kernels.angular_kernel_nb(d, 2.0, r1, r2),
                                   _kernels.angular_kernel_np(d, 2.0, r1, r2), rtol=1e-12)
    s = rng.uniform(0.25, 0.45, 50)
    lo, hi = np.tile([0.0, 0.5], (50, 1)), np.tile([0.2, 1.0], (50, 1))
    np.testing.assert_allclose(_kernels.radial_inner_nb(2, 1.5, s, lo, hi),
                               _kernels.radial_inner_np(2, 1.5, s, lo, hi), rtol=1e-12)


PARITY_SCRIPT = """
from nonloc_mt import _backend, Ball, Interval, Linear, NonlocalParams, SamplerConfig, i_delta
from nonloc_mt.verifiers.families import tent
s = SamplerConfig(seed=3, batch_size=4096, max_batches=4)
vals = [i_delta(tent(1.0, 1.0), Ball.centered(2, 1.0), NonlocalParams(2, 2.0, 0.1)).value,
        i_delta(tent(1.0, 1.0), Ball.centered(3, 1.0), NonlocalParams(3, 1.5, 0.2)).value,
        i_delta(Linear((1.0, 0.5)), Ball.centered(2, 1.0), NonlocalParams(2, 2.0, 0.1), sampler=s).value]
print(_backend.BACKEND, *[repr(v) for v in vals])
"""


@pytest.mark.skipif(not _backend.HAVE_NUMBA, reason="numba not installed")
def test_backend_parity_subprocess():
    nb = run_python(PARITY_SCRIPT, NONLOC_MT_BACKEND="numba").split()
    npy = run_python(PARITY_SCRIPT, NONLOC_MT_BACKEND="numpy").split()
    assert nb[0] == "numba" and npy[0] == "numpy"
    np.testing.assert_allclose([float(v) for v in nb[1:]], [float(v) for v in npy[1:]], rtol=1e-10)


def test_invalid_backend_rejected():
    with pytest.raises(RuntimeError, match="NONLOC_MT_BACKEND"):
        run_python("import nonloc_mt", NONLOC_MT_BACKEND="fortran")


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("NONLOC_MT_THREADS", "3")
    assert _backend.worker_count() == 3
    monkeypatch.delenv("NONLOC_MT_THREADS")
    assert _backend.worker_count() >= 1
