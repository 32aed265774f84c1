import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import wasserstein_distance

from snlab.families import injectivity_radius
from snlab.measures import (EmpiricalMeasure, SymbolicPartition, UndersamplingWarning,
                            block_entropies, generating_partition, histogram_measure,
                            integrate_log_deriv, symbolic_block_entropy, w1_circle, w1_to_dirac)
from snlab.orbits import OrbitRecord, iterate_orbit
from snlab.ulam import build_ulam, invariant_density


def test_histogram_point_mass():
    mu = histogram_measure(np.full(10, 0.5), bins=4)
    assert np.array_equal(mu.weights, [0, 0, 1, 0])


def test_histogram_uniform(rng):
    mu = histogram_measure(rng.random(1_000_000), bins=100)
    assert np.max(np.abs(mu.weights - 0.01)) < 5e-4
    assert mu.weights.sum() == pytest.approx(1.0, abs=1e-14)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=200), st.integers(2, 64))
def test_histogram_normalised(xs, bins):
    assert histogram_measure(xs, bins).weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_measure_validation():
    with pytest.raises(ValueError):
        EmpiricalMeasure(np.array([0.5, -0.1, 0.6]))
    with pytest.raises(ValueError):
        EmpiricalMeasure(np.array([1.0]))
    with pytest.raises(ValueError):
        histogram_measure([])


def test_w1_to_dirac_examples():
    n = 1000
    assert w1_to_dirac(EmpiricalMeasure.uniform(n), 0.0) == pytest.approx(0.25, abs=1e-6)
    assert w1_to_dirac(EmpiricalMeasure.dirac(0.3, n), 0.3) <= 0.5 / n + 1e-15
    w = np.zeros(n)
    w[100] = w[899] = 0.5
    assert w1_to_dirac(EmpiricalMeasure(w), 0.0) == pytest.approx(0.1, abs=1e-3)


def test_w1_circle_examples():
    n = 1000
    a, b = EmpiricalMeasure.dirac(0.2, n), EmpiricalMeasure.dirac(0.5, n)
    assert w1_circle(a, a) == 0.0
    assert w1_circle(a, b) == pytest.approx(0.3, abs=1e-12)
    assert w1_circle(EmpiricalMeasure.dirac(0.1, n), EmpiricalMeasure.dirac(0.9, n)) == pytest.approx(0.2, abs=1e-12)
    with pytest.raises(ValueError):
        w1_circle(a, EmpiricalMeasure.uniform(10))


def _brute_w1(mu, nu):
    # circle W1 as min over cut points of the line W1 of the unrolled measures
    n = mu.bins
    best = np.inf
    for k in range(n):
        roll = lambda w: np.roll(w, -k)
        pos = (np.arange(n) + 0.5) / n
        d = wasserstein_distance(pos, pos, roll(mu.weights), roll(nu.weights))
        best = min(best, d)
    return best


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_w1_circle_against_unrolled_oracle(seed):
    r = np.random.default_rng(seed)
    n = 16
    mu = EmpiricalMeasure(r.random(n) ** 3)
    nu = EmpiricalMeasure(r.random(n) ** 3)
    assert w1_circle(mu, nu) == pytest.approx(_brute_w1(mu, nu), abs=1e-12)
    assert w1_circle(mu, nu) == pytest.approx(w1_circle(nu, mu), abs=1e-15)


def test_rebin_preserves_w1():
    mu = EmpiricalMeasure(np.array([0.1, 0.2, 0.3, 0.4]))
    fine = mu.rebin(16)
    assert fine.weights.sum() == pytest.approx(1.0)
    assert w1_to_dirac(fine, 0.0) == pytest.approx(w1_to_dirac(mu, 0.0), abs=0.25)
    with pytest.raises(ValueError):
        mu.rebin(6)


def test_csv_format():
    text = EmpiricalMeasure(np.array([0.25, 0.75])).to_csv()
    assert text == "bin_center,weight\n0.25,0.25\n0.75,0.75\n"


def test_integrate_log_deriv(doubling, canonical):
    assert integrate_log_deriv(EmpiricalMeasure.uniform(512), doubling, 0.0) == pytest.approx(math.log(2))
    near0 = integrate_log_deriv(EmpiricalMeasure.dirac(0.0, 4096), canonical, 0.0)
    assert abs(near0) < 1e-2


def test_ulam_rhs_matches_lyapunov(canonical):
    mu = invariant_density(build_ulam(canonical, 0.05, 1024))
    rec = iterate_orbit(canonical, 0.05, 0.3, 1_000_000, burn=1000)
    assert integrate_log_deriv(mu, canonical, 0.05) == pytest.approx(np.mean(rec.log_derivs), abs=1e-2)


def test_partition_coding():
    xi = SymbolicPartition.uniform(2)
    assert np.array_equal(xi.code([0.0, 0.25, 0.5, 0.99]), [0, 0, 1, 1])
    assert xi.diameter == 0.5
    wrapped = SymbolicPartition((0.25, 0.75))
    assert np.array_equal(wrapped.code([0.1, 0.3, 0.8]), [1, 0, 1])


def test_block_entropies_iid(rng):
    sym = rng.integers(0, 2, 200_000)
    h = block_entropies(sym, 2, 4)
    assert h == pytest.approx(np.arange(1, 5) * math.log(2), rel=1e-3)


def test_symbolic_entropy_doubling(doubling):
    rec = iterate_orbit(doubling, 0.0, 0.1234567, 2_000_000)
    h = symbolic_block_entropy(rec, SymbolicPartition.uniform(2), 10)
    assert h == pytest.approx(math.log(2), rel=0.02)


def test_symbolic_entropy_constant_orbit():
    rec = OrbitRecord(np.zeros(1000), np.zeros(1000), np.zeros(1000))
    assert symbolic_block_entropy(rec, SymbolicPartition.uniform(2), 5) == pytest.approx(0.0, abs=1e-15)


def test_symbolic_entropy_canonical(canonical):
    t = 0.05
    rec = iterate_orbit(canonical, t, 0.3, 1_000_000, burn=1000)
    xi = generating_partition(canonical, t, 0.99 * injectivity_radius(canonical, t))
    assert xi.diameter < injectivity_radius(canonical, t)
    h = symbolic_block_entropy(rec, xi, 10)
    rhs = integrate_log_deriv(invariant_density(build_ulam(canonical, t, 1024)), canonical, t)
    assert h == pytest.approx(rhs, rel=0.05)


def test_undersampling_warns():
    with pytest.warns(UndersamplingWarning):
        block_entropies(np.random.default_rng(0).integers(0, 4, 500), 4, 6)
