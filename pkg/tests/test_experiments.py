import math

import numpy as np
import pytest

from snlab import experiments as ex
from snlab.experiments import (CertificateFailed, SweepSettings, SWEEP_FIELDS, basin_fraction,
                               birkhoff_mass_near_zero, distortion_audit, expansion_certificate,
                               homeo_sweep, log_derivative_of_iterate, recheck_certificate,
                               statistical_sweep, stochastic_sweep)

SMALL = SweepSettings(bins=256, mc_samples=200_000, burn=500, symbolic_samples=50_000, max_block=6)


def test_basin_small_grids(canonical, arnold, doubling):
    assert basin_fraction(arnold, n_grid=200, n_iter=20_000) == 1.0
    assert basin_fraction(canonical, n_grid=200, n_iter=20_000) >= 0.99
    assert basin_fraction(doubling, n_grid=200, n_iter=20_000) <= 0.01


def test_basin_validation(canonical):
    with pytest.raises(ValueError):
        basin_fraction(canonical, n_grid=0)
    with pytest.raises(ValueError):
        basin_fraction(canonical, delta=0.0)


def test_certificate_doubling(doubling):
    n, e0 = expansion_certificate(doubling, 0.0)
    assert n == 1 and e0 == pytest.approx(math.log(2), abs=1e-14)


def test_certificate_canonical(canonical):
    n1, e1 = expansion_certificate(canonical, 0.05, grid_n=4096)
    n2, e2 = expansion_certificate(canonical, 0.0125, grid_n=4096)
    assert e1 > 0 and e2 > 0 and n2 > n1
    assert recheck_certificate(canonical, 0.05, n1, e1, 4096) >= -1e-9
    with pytest.raises(CertificateFailed):
        expansion_certificate(canonical, 0.0, n_max=50, grid_n=1024)


def test_log_derivative_of_iterate_chain_rule(canonical):
    x, h = 0.37, 1e-7
    fd = 0.0
    y0, y1 = x - h, x + h
    for _ in range(3):
        y0, y1 = canonical.lift(0.05, y0), canonical.lift(0.05, y1)
    fd = math.log((y1 - y0) / (2 * h))
    assert log_derivative_of_iterate(canonical, 0.05, [x], 3)[0] == pytest.approx(fd, abs=1e-6)


def test_distortion_doubling(doubling):
    rep = distortion_audit(doubling, n_intervals=50)
    assert rep.max_observed == 0.0
    assert rep.violations == 0


def test_distortion_canonical_small(canonical):
    rep = distortion_audit(canonical, n_intervals=100, seed=4)
    assert rep.violations == 0
    assert rep.max_observed <= rep.C0_bound
    assert 0 < rep.gamma0_estimate < 1
    assert rep.sigma_used > 1
    assert rep.eta0 == pytest.approx(0.1)


def test_ladder_checks(canonical):
    with pytest.raises(ValueError, match="positive"):
        statistical_sweep(canonical, [0.1, 0.0], SMALL)
    with pytest.raises(ValueError, match="decreasing"):
        statistical_sweep(canonical, [0.05, 0.1], SMALL)
    with pytest.raises(ValueError):
        stochastic_sweep(canonical, [0.5], SMALL)
    with pytest.raises(ValueError):
        homeo_sweep(canonical, [0.1], "deterministic", SMALL)
    with pytest.raises(ValueError):
        homeo_sweep(MapArnold(), [0.1], "sideways", SMALL)


def MapArnold():
    from snlab import MapFamily
    return MapFamily.arnold()


def test_small_statistical_sweep(canonical):
    res = statistical_sweep(canonical, [0.1, 0.05], SMALL)
    assert res.mode == "deterministic" and len(res.rows) == 2
    w = res.column("w1_to_dirac")
    assert w[1] < w[0]
    assert np.all(res.column("mc_vs_ulam_w1") < 5e-3)
    assert np.all(np.abs(res.column("lyapunov") - res.column("entropy_rhs")) < 2e-2)
    header = res.to_csv().splitlines()[0]
    assert header.split(",") == list(SWEEP_FIELDS)


def test_sweep_independent_of_thread_count(canonical, monkeypatch):
    monkeypatch.setenv("SNLAB_THREADS", "1")
    a = stochastic_sweep(canonical, [0.1, 0.05], SMALL).to_csv()
    monkeypatch.setenv("SNLAB_THREADS", "3")
    assert ex.n_threads() == 3
    b = stochastic_sweep(canonical, [0.1, 0.05], SMALL).to_csv()
    assert a == b


def test_birkhoff_mass(arnold):
    assert birkhoff_mass_near_zero(arnold, 0.42, n=20_000, burn=10_000) > 0.999
