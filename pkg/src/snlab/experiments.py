"""Experiment drivers: basin fullness, distortion, expansion certificates and sweeps."""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import _kernels
from .circle import CircleInterval, wrap
from .families import MapFamily, injectivity_radius, verify_hypotheses
from .measures import (EmpiricalMeasure, generating_partition, histogram_measure,
                       integrate_log_deriv, symbolic_block_entropy, w1_circle, w1_to_dirac)
from .orbits import NoiseKernel, iterate_orbit, lyapunov_exponent, random_orbit, stream
from .ulam import ConvergenceError, averaged_ulam, build_ulam, invariant_density

log = logging.getLogger(__name__)

DYADIC_LADDER = tuple(0.1 * 2.0 ** -j for j in range(5))


class CertificateFailed(RuntimeError):
    pass


class IntervalNeverEscapes(RuntimeError):
    pass


def n_threads() -> int:
    env = os.environ.get("SNLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _map_rows(fn, items):
    items = list(items)
    workers = min(n_threads(), len(items)) or 1
    if workers == 1:
        return [fn(i, x) for i, x in enumerate(items)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(len(items)), items))


# ----------------------------------------------------------------------------
# basin of the saddle-node


def basin_fraction(family: MapFamily, n_grid: int = 10_000, n_iter: int = 100_000,
                   delta: float = 1e-3, hold: int = 100) -> float:
    """Fraction of a uniform grid attracted to 0 under ``f_0``.

    A grid point counts when its orbit reaches ``delta``-distance of 0 inside
    the immediate basin within ``n_iter`` iterates and stays in the basin for
    ``hold`` further steps.
    """
    if n_grid < 1 or n_iter < 1 or hold < 0:
        raise ValueError("need n_grid >= 1, n_iter >= 1 and hold >= 0")
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    grid = np.arange(n_grid) / n_grid
    basin = verify_hypotheses(family).immediate_basin
    if family.kind == "doubling":
        q = _kernels.EXACT_MODULUS
        ks = np.rint(grid * q).astype(np.int64) % q
        hits = _kernels.exact_doubling_basin(ks, n_iter, delta, hold, q)
    else:
        hits = _kernels.basin_scan(family.code, family.param, grid, n_iter, delta,
                                   basin.start, basin.length, hold)
    return float(hits.mean())


# ----------------------------------------------------------------------------
# uniform expansion


def _certified_sums(family: MapFamily, t: float, grid_n: int, n_max: int):
    """Lower bounds of ``log (f_t^N)'`` on each grid cell, for N = 1..n_max.

    Each cell is pushed forward exactly as an arc (the lift is increasing);
    on an image arc ``[u, v]`` the bound ``f' >= (f'(u) + f'(v) - L (v - u)) / 2``
    with ``L = sup|f''|`` is used, floored at the global ``inf f'``.
    """
    h = 1.0 / grid_n
    left = np.arange(grid_n) * h
    length = np.full(grid_n, h)
    L = family.sup_abs_d2()
    inf_d1 = family.derivative_range()[0]
    total = np.zeros(grid_n)
    for _ in range(n_max):
        du, dv = family.d1(left), family.d1(left + length)
        lower = np.maximum(0.5 * (du + dv - L * length), inf_d1)
        lower = np.where(length >= 1.0, inf_d1, lower)
        total += np.log(lower)
        yield total
        fu = family.lift(t, left)
        length = np.minimum(family.lift(t, left + length) - fu, 1.0)
        left = wrap(fu)


def expansion_certificate(family: MapFamily, t: float, n_max: int = 200,
                          grid_n: int = 1 << 16):
    """Least ``N <= n_max`` with ``log|(f_t^N)'| > 0`` certified on every grid cell.

    Returns ``(N, e0)`` with ``e0`` the certified minimum divided by N.
    """
    family.check_t(t)
    for n, total in enumerate(_certified_sums(family, t, grid_n, n_max), start=1):
        m = float(total.min())
        if m > 0:
            return n, m / n
    raise CertificateFailed(f"no N <= {n_max} certifies expansion of f_t at t={t}")


def log_derivative_of_iterate(family: MapFamily, t: float, x, n: int) -> np.ndarray:
    """``log (f_t^n)'(x)`` pointwise by the chain rule."""
    x = np.asarray(x, dtype=float).copy()
    total = np.zeros_like(x)
    for _ in range(n):
        total += np.log(family.d1(x))
        x = family(t, x)
    return total


def recheck_certificate(family: MapFamily, t: float, n: int, e0: float, grid_n: int) -> float:
    """Smallest ``(1/N) log (f_t^N)'`` on a grid of step ``1/(2 grid_n)`` minus ``e0``."""
    xs = np.arange(2 * grid_n) / (2 * grid_n)
    return float(log_derivative_of_iterate(family, t, xs, n).min() / n - e0)


# ----------------------------------------------------------------------------
# bounded distortion


@dataclass(frozen=True)
class DistortionReport:
    C0_bound: float
    max_observed: float
    sigma_used: float
    gamma0_estimate: float
    eta0: float
    max_k1: int
    n_intervals: int
    violations: int


def _escape_region(family: MapFamily):
    """``(hi, target)``: the region ``(0, hi)`` and the arc ``W(eta_0) = [hi, 1]``.

    ``W(eta)`` keeps the points of the immediate basin at distance >= eta from
    the source; the saddle-node side of the basin is interior. ``eta_0`` is
    halved from 0.1 until the expansion test passes.
    """
    rep = verify_hypotheses(family)
    if rep.source_s is None:
        return 1.0, None, 0.0
    s = rep.source_s
    eta = 0.1
    while eta > 1e-6:
        xs = np.linspace(s, s + eta, 2001)
        if np.all(family.d1(xs) > 1.0):
            break
        eta /= 2
    hi = s + eta
    return hi, CircleInterval(hi, 1.0 - hi), eta


def _mean_derivative_min(family: MapFamily, hi: float, ell: float) -> float:
    # sigma: least mean of f_0' over windows J in (0, hi) with length >= ell
    best = np.inf
    L = ell
    while L < hi:
        u = np.linspace(0.0, hi - L, 4001)
        means = (family.lift(0.0, u + L) - family.lift(0.0, u)) / L
        best = min(best, float(means.min()))
        L *= 2
    return best


def distortion_audit(family: MapFamily, n_intervals: int = 1000, length: float = 1e-3,
                     n_points: int = 257, seed: int = 0, max_steps: int = 1_000_000) -> DistortionReport:
    """Compare observed derivative distortion along escaping intervals with ``C_0``.

    Intervals of the given length are sampled in ``(0, s + eta_0)`` and iterated
    until their image first meets ``W(eta_0)`` (or, when that set is empty,
    until the image length reaches 1/2).
    """
    hi, target, eta = _escape_region(family)
    rng = stream(seed, 0)
    u = rng.random(n_intervals) * (hi - length)
    offsets = np.linspace(0.0, length, n_points)
    base = u.copy()
    delta = np.tile(offsets, (n_intervals, 1))
    logs = np.zeros((n_intervals, n_points))
    region = np.linspace(0.0, hi, 200001)
    sup_ratio = float(np.max(np.abs(family.d2(region) / family.d1(region))))
    sigma = _mean_derivative_min(family, hi, length)

    active = np.arange(n_intervals)
    k1 = np.zeros(n_intervals, dtype=np.int64)
    final_delta = np.zeros_like(delta)
    final_base = np.zeros(n_intervals)
    steps = 0
    while active.size:
        steps += 1
        if steps > max_steps:
            raise IntervalNeverEscapes(f"{active.size} interval(s) still outside after {max_steps} steps")
        pts = base[active, None] + delta[active]
        logs[active] += np.log(family.d1(pts))
        f_base = family.lift(0.0, base[active])
        delta[active] = family.lift(0.0, pts) - f_base[:, None]
        base[active] = wrap(f_base)
        span = delta[active, -1]
        if target is None:
            done = span >= 0.5
        else:
            img = [CircleInterval(b0, min(sp, 1.0)) for b0, sp in zip(base[active], span)]
            done = np.array([arc.intersects(target) for arc in img])
        idx = active[done]
        k1[idx] = steps
        final_delta[idx] = delta[idx]
        final_base[idx] = base[idx]
        active = active[~done]

    observed = logs.max(axis=1) - logs.min(axis=1)
    C0 = sup_ratio / (1.0 - 1.0 / sigma) if sigma > 1 else math.inf
    if target is None:
        gamma0 = 1.0
        C0 = sup_ratio / (1.0 - 1.0 / sigma) if sup_ratio > 0 else 0.0
    else:
        basin = verify_hypotheses(family).immediate_basin
        images = wrap(final_base[:, None] + final_delta)
        surviving = (~basin.contains(images)).mean(axis=1)
        gamma0 = float(surviving.max())
    return DistortionReport(
        C0_bound=float(C0),
        max_observed=float(observed.max()),
        sigma_used=float(sigma),
        gamma0_estimate=gamma0,
        eta0=float(eta),
        max_k1=int(k1.max()),
        n_intervals=n_intervals,
        violations=int(np.sum(observed > C0)),
    )


# ----------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSettings:
    bins: int = 1024
    mc_samples: int = 10_000_000
    burn: int = 1000
    seed: int = 0
    quad_m: int = 16
    tol: float = 1e-12
    max_iter: int = 100_000
    symbolic_samples: int = 2_000_000
    max_block: int = 10


@dataclass(frozen=True)
class SweepRow:
    parameter: float
    w1_to_dirac: float
    lyapunov: float
    entropy_rhs: float
    entropy_symbolic: float
    mc_vs_ulam_w1: float
    min_density: float
    ulam_converged: bool = True
    ulam_iterations: int = 0
    mc_w1_to_dirac: float = float("nan")


SWEEP_FIELDS = tuple(f.name for f in fields(SweepRow))


@dataclass(frozen=True)
class SweepResult:
    mode: str
    rows: tuple

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self) -> str:
        lines = [",".join(SWEEP_FIELDS)]
        for r in self.rows:
            vals = []
            for name in SWEEP_FIELDS:
                v = getattr(r, name)
                vals.append(str(int(v)) if isinstance(v, (bool, np.bool_, int)) else f"{v:.17g}")
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"


def _start_point(seed, row):
    return float(stream(seed, 10_000 + row).random())


def _row(family, parameter, ulam_matrix, record, settings, t_for_deriv):
    ulam_ok, iters = True, 0
    try:
        mu, info = invariant_density(ulam_matrix, settings.tol, settings.max_iter, return_info=True)
        iters = info["iterations"]
    except ConvergenceError as err:
        log.warning("Ulam power iteration did not converge at %g: %s", parameter, err)
        mu, ulam_ok, iters = None, False, err.iterations
    mc = histogram_measure(record.points, settings.bins)
    primary = mu if ulam_ok else mc
    sub = type(record)(record.points[:settings.symbolic_samples],
                       record.log_derivs[:settings.symbolic_samples],
                       record.params_used[:settings.symbolic_samples], record.seed)
    xi = generating_partition(family, t_for_deriv, 0.99 * injectivity_radius(family, t_for_deriv))
    return SweepRow(
        parameter=float(parameter),
        w1_to_dirac=w1_to_dirac(primary, 0.0),
        lyapunov=lyapunov_exponent(record),
        entropy_rhs=integrate_log_deriv(primary, family, t_for_deriv),
        entropy_symbolic=symbolic_block_entropy(sub, xi, settings.max_block),
        mc_vs_ulam_w1=w1_circle(mu, mc) if ulam_ok else float("nan"),
        min_density=float(primary.density.min()),
        ulam_converged=ulam_ok,
        ulam_iterations=int(iters),
        mc_w1_to_dirac=w1_to_dirac(mc, 0.0),
    )


def _check_ladder(values, upper):
    values = [float(v) for v in values]
    if not values:
        raise ValueError("empty parameter list")
    if any(not (v > 0) for v in values):
        raise ValueError("sweep parameters must be positive")
    if any(b >= a for a, b in zip(values, values[1:])):
        raise ValueError("sweep parameters must be strictly decreasing")
    if max(values) > upper:
        raise ValueError(f"sweep parameter exceeds t0={upper}")
    return values


def statistical_sweep(family: MapFamily, t_values=DYADIC_LADDER,
                      settings: SweepSettings = SweepSettings()) -> SweepResult:
    """Invariant measures ``mu_t`` by Ulam and by Birkhoff orbits along ``t -> 0``."""
    ts = _check_ladder(t_values, family.t0)

    def one(i, t):
        P = build_ulam(family, t, settings.bins)
        rec = iterate_orbit(family, t, _start_point(settings.seed, i), settings.mc_samples, settings.burn)
        return _row(family, t, P, rec, settings, t)

    return SweepResult("deterministic", tuple(_map_rows(one, ts)))


def stochastic_sweep(family: MapFamily, eps_values=DYADIC_LADDER,
                     settings: SweepSettings = SweepSettings()) -> SweepResult:
    """Stationary measures ``mu^eps`` for uniform noise on ``[0, eps]`` along ``eps -> 0``."""
    eps = _check_ladder(eps_values, family.t0)

    def one(i, e):
        kernel = NoiseKernel(e, family.t0)
        P = averaged_ulam(family, kernel, settings.bins, settings.quad_m)
        rec = random_orbit(family, kernel, _start_point(settings.seed, i), settings.mc_samples,
                           settings.seed, burn=settings.burn, orbit_id=i)
        return _row(family, e, P, rec, settings, 0.0)

    return SweepResult("random", tuple(_map_rows(one, eps)))


def homeo_sweep(family: MapFamily, values=DYADIC_LADDER, mode: str = "deterministic",
                settings: SweepSettings = SweepSettings()) -> SweepResult:
    """Both sweeps for the degree-one family; non-mixing rows fall back to Monte Carlo."""
    if family.kind != "arnold":
        raise ValueError("homeo_sweep expects the arnold family")
    if mode == "deterministic":
        res = statistical_sweep(family, values, settings)
    elif mode == "random":
        res = stochastic_sweep(family, values, settings)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return SweepResult(mode, res.rows)


def birkhoff_mass_near_zero(family: MapFamily, x0: float, n: int = 100_000, burn: int = 10_000,
                            radius: float = 1e-3) -> float:
    """Fraction of ``f_0``-orbit points within ``radius`` of 0 after burn-in."""
    rec = iterate_orbit(family, 0.0, x0, n, burn)
    return float(np.mean(np.minimum(rec.points, 1 - rec.points) < radius))
