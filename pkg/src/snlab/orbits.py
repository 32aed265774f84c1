"""Deterministic and random orbits, derivative cocycles and channel passages."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .circle import CircleInterval, wrap
from .families import MapFamily, _invert_lift, verify_hypotheses

DEFAULT_BURN = 1000


class UnfinishedPassageWarning(UserWarning):
    pass


@dataclass(frozen=True)
class NoiseKernel:
    """Uniform parameter noise on ``[low, epsilon]`` inside ``[0, t0_cap]``."""

    epsilon: float
    t0_cap: float = 0.2
    low: float = 0.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.epsilon > self.t0_cap:
            raise ValueError(f"epsilon={self.epsilon} exceeds t0_cap={self.t0_cap}")
        if not 0 <= self.low < self.epsilon:
            raise ValueError("need 0 <= low < epsilon")

    @property
    def support(self):
        return self.low, self.epsilon

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.low + (self.epsilon - self.low) * rng.random(n)

    def quadrature(self, m: int):
        """Midpoint nodes and equal weights over the support."""
        nodes = self.low + (self.epsilon - self.low) * (np.arange(m) + 0.5) / m
        return nodes, np.full(m, 1.0 / m)


def stream(seed: int, orbit_id: int = 0) -> np.random.Generator:
    """Counter-based Philox stream keyed by ``(seed, orbit_id)``."""
    key = np.random.SeedSequence([int(seed), int(orbit_id)]).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True, eq=False)
class OrbitRecord:
    """Orbit segment with ``points[i] = f_{params_used[i]}(points[i-1])``.

    ``log_derivs[i]`` is ``log f'(points[i])``; for the additive families the
    derivative does not depend on the parameter. ``params_used[0]`` is the
    parameter of the step that produced ``points[0]`` (the initial draw when
    no burn-in was run).
    """

    points: np.ndarray
    log_derivs: np.ndarray
    params_used: np.ndarray
    seed: int = 0

    def __post_init__(self):
        if not len(self.points) == len(self.log_derivs) == len(self.params_used):
            raise ValueError("orbit record arrays must have equal length")

    def __len__(self):
        return len(self.points)

    def replay_error(self, family: MapFamily) -> float:
        """Max circle distance between stored and recomputed successors."""
        if len(self) < 2:
            return 0.0
        nxt = family(self.params_used[1:], self.points[:-1])
        d = np.abs(nxt - self.points[1:])
        return float(np.max(np.minimum(d, 1 - d)))


def _run(family, x0, ts, burn, seed):
    xs, lds = _kernels.orbit(family.code, family.param, float(wrap(x0)), ts, burn)
    return OrbitRecord(xs, lds, ts[burn:].copy(), seed)


def iterate_orbit(family: MapFamily, t: float, x0: float, n: int, burn: int = 0) -> OrbitRecord:
    """Orbit of ``f_t`` from ``x0``, discarding ``burn`` iterates.

    At ``t = 0`` the doubling oracle is iterated in exact integer arithmetic
    on ``k / EXACT_MODULUS``; in binary floating point every orbit of
    ``x -> 2x`` collapses onto 0 after about 53 steps.
    """
    if n < 1 or burn < 0:
        raise ValueError("need n >= 1 and burn >= 0")
    family.check_t(t)
    ts = np.full(burn + n, float(t))
    if family.kind == "doubling" and t == 0.0:
        q = _kernels.EXACT_MODULUS
        k0 = int(round(wrap(x0) * q)) % q
        xs = _kernels.exact_doubling(k0, n, burn, q)
        return OrbitRecord(xs, np.full(n, math.log(2.0)), ts[burn:].copy(), 0)
    return _run(family, x0, ts, burn, 0)


def random_orbit(family: MapFamily, kernel: NoiseKernel, x0: float, n: int, seed: int,
                 burn: int = 0, orbit_id: int = 0) -> OrbitRecord:
    """Orbit of ``f_omega^n = f_{t_n} o ... o f_{t_1}`` with i.i.d. draws from ``kernel``."""
    if n < 1 or burn < 0:
        raise ValueError("need n >= 1 and burn >= 0")
    family.check_t(kernel.epsilon)
    ts = kernel.sample(stream(seed, orbit_id), burn + n)
    return _run(family, x0, ts, burn, seed)


def lyapunov_exponent(record: OrbitRecord) -> float:
    """Finite-time Lyapunov estimate ``(1/n) sum log f'(x_i)``."""
    if len(record) == 0:
        raise ValueError("empty orbit record")
    return float(np.mean(record.log_derivs))


def running_lyapunov(record: OrbitRecord) -> np.ndarray:
    """``(1/n) sum_{j<n} log f'(x_j)`` for n = 1..len(record)."""
    return np.cumsum(record.log_derivs) / np.arange(1, len(record) + 1)


@dataclass(frozen=True)
class ChannelGeometry:
    """Entry arc ``[d0, a_pre]`` and exit window ``[f_0^{-1}(b), f_0(b)]``."""

    d0: float
    a_pre: float
    exit_window: CircleInterval

    @property
    def entry(self) -> CircleInterval:
        return CircleInterval.from_endpoints(self.d0, self.a_pre)


def channel_geometry(family: MapFamily, a: float = -0.1, b: float = 0.1,
                     t_max: float = 0.0) -> ChannelGeometry:
    """Default channel: ``d0`` halfway between the source and the contraction arc.

    The exit window ``[f_0^{-1}(b), f_{t_max}(b)]`` is met by every passage whose
    parameters stay in ``[0, t_max]``; with ``t_max = 0`` it is the fundamental
    domain of ``f_0`` and faster orbits may step over it.
    """
    rep = verify_hypotheses(family)
    if rep.source_s is None:
        raise ValueError("channel geometry needs a source bounding the immediate basin")
    s = rep.source_s
    # left end of {f_0' < 1}: first grid point past s where f' drops below 1
    xs = s + np.linspace(0.0, rep.immediate_basin.length, 100001)
    below = np.nonzero(family.d1(xs) < 1.0)[0]
    contraction_left = float(xs[below[0]]) if len(below) else s
    d0 = wrap(0.5 * (s + contraction_left))

    def local_preimage(y):
        # branch of f_0 through the saddle-node: solve F(x) = y + m near y
        cands = np.concatenate(family.preimages(0.0, [wrap(y)]))
        dist = np.minimum(np.abs(cands - wrap(y)), 1 - np.abs(cands - wrap(y)))
        return float(cands[np.argmin(dist)])

    a_pre = local_preimage(a)
    window = CircleInterval.from_endpoints(local_preimage(b), family(t_max, wrap(b)))
    return ChannelGeometry(d0, a_pre, window)


def channel_statistics(family: MapFamily, record: OrbitRecord, d0: float, a_pre: float,
                       exit_window: CircleInterval | None = None):
    """Entries into ``[d0, a_pre]`` and the lag until the exit window is reached.

    Returns ``(entries, exit_lags)`` for passages completed inside the record;
    unfinished passages trigger :class:`UnfinishedPassageWarning`.
    """
    if exit_window is None:
        exit_window = channel_geometry(family).exit_window
    entry = CircleInterval.from_endpoints(d0, a_pre)
    inside = entry.contains(record.points)
    in_exit = np.nonzero(exit_window.contains(record.points))[0]
    starts = np.nonzero(inside & ~np.concatenate([[False], inside[:-1]]))[0]
    entries, lags, unfinished = [], [], []
    for i in starts:
        j = np.searchsorted(in_exit, i + 1)
        if j < len(in_exit):
            entries.append(int(i))
            lags.append(int(in_exit[j] - i))
        else:
            unfinished.append(int(i))
    if unfinished:
        warnings.warn(f"{len(unfinished)} passage(s) unfinished at record end: {unfinished[:5]}",
                      UnfinishedPassageWarning, stacklevel=2)
    return entries, lags
