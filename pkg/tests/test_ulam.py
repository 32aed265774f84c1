import numpy as np
import pytest

from snlab.measures import w1_circle, w1_to_dirac
from snlab.orbits import NoiseKernel
from snlab.ulam import (ConvergenceError, TransferMatrix, averaged_ulam, build_ulam,
                        invariant_density)


def test_doubling_structure(doubling):
    n = 64
    P = build_ulam(doubling, 0.0, n).entries
    for i in range(n):
        nz = np.nonzero(P[i])[0]
        assert sorted(nz) == sorted({(2 * i) % n, (2 * i + 1) % n})
        assert np.allclose(P[i, nz], 0.5, atol=1e-14)


def _mc_row(family, t, n, i, m=200_000):
    # oracle: push forward points uniformly spread in bin i
    x = (i + (np.arange(m) + 0.5) / m) / n
    y = family(t, x)
    return np.bincount(np.minimum((y * n).astype(int), n - 1), minlength=n) / m


@pytest.mark.parametrize("i", [0, 17, 300, 511])
def test_rows_against_sampled_pushforward(canonical, i):
    n = 512
    P = build_ulam(canonical, 0.05, n)
    assert np.max(np.abs(P.entries[i] - _mc_row(canonical, 0.05, n, i))) < 2e-4


def test_row_sums(canonical, arnold):
    assert build_ulam(canonical, 0.05, 512).row_sum_error() < 1e-12
    P = build_ulam(arnold, 0.1, 512)
    assert P.row_sum_error() < 1e-12
    # degree one: each row touches one contiguous band
    for row in P.entries[::37]:
        nz = np.nonzero(row)[0]
        gaps = np.diff(nz)
        assert np.sum(gaps > 1) <= 1 and (np.all(gaps == 1) or nz[0] == 0 and nz[-1] == 511)


def test_averaged_limits_and_convexity(canonical):
    n = 256
    tiny = averaged_ulam(canonical, NoiseKernel(1e-9), n).entries
    assert np.max(np.abs(tiny - build_ulam(canonical, 0.0, n).entries)) < 1e-6
    kernel = NoiseKernel(0.05)
    avg = averaged_ulam(canonical, kernel, n, 4).entries
    parts = np.array([build_ulam(canonical, t, n).entries for t in kernel.quadrature(4)[0]])
    assert np.all(avg >= parts.min(axis=0) - 1e-15)
    assert np.all(avg <= parts.max(axis=0) + 1e-15)


def test_quadrature_refinement(canonical):
    k = NoiseKernel(0.05)
    a = invariant_density(averaged_ulam(canonical, k, 1024, 16))
    b = invariant_density(averaged_ulam(canonical, k, 1024, 32))
    assert np.abs(a.weights - b.weights).sum() < 1e-3


def test_doubling_density_uniform(doubling):
    mu, info = invariant_density(build_ulam(doubling, 0.0, 1024), return_info=True)
    assert np.max(np.abs(mu.density - 1.0)) < 1e-10
    assert info["iterations"] >= 1


def test_canonical_t0_concentrates(canonical):
    P = build_ulam(canonical, 0.0, 1024)
    with pytest.raises(ConvergenceError) as err:
        invariant_density(P, max_iter=1000)
    w = err.value.last.weights
    assert w[:2].sum() + w[-2:].sum() > 0.999
    assert err.value.iterations == 1000


def test_mesh_refinement(canonical):
    fine = invariant_density(build_ulam(canonical, 0.05, 1024))
    coarse = invariant_density(build_ulam(canonical, 0.05, 512))
    assert w1_circle(coarse.rebin(1024), fine) < 2 / 512


def test_invariance(canonical):
    P = build_ulam(canonical, 0.05, 512)
    mu = invariant_density(P)
    assert np.max(np.abs(mu.weights @ P.entries - mu.weights)) < 1e-12


def test_validation(canonical):
    with pytest.raises(ValueError):
        build_ulam(canonical, 0.05, 1)
    with pytest.raises(ValueError):
        averaged_ulam(canonical, NoiseKernel(0.05), 64, 1)
