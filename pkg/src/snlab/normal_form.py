"""Local saddle-node vector field ``X(t, x) = t + alpha x^2 + beta x t + gamma t^2``.

Flows are integrated with fixed-step classical RK4 (step 1e-3, halved until two
successive refinements agree to 1e-10). Times and parameters are found by
bisection. The arc ``f_t`` near the saddle-node is the time-one map
``X_1(t, .)`` of this field; the transition maps below use that arc only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels

CHART = 0.5
H0 = 1e-3
REFINE_TOL = 1e-10
ROOT_TOL = 1e-12
MAX_HALVINGS = 8


class FlowError(RuntimeError):
    """Base class for integration failures."""


class EscapeError(FlowError):
    """The trajectory left the local chart ``[-0.5, 0.5]``."""


class StepFailure(FlowError):
    """Step halving did not meet the refinement tolerance."""


class UnreachableTarget(FlowError):
    """A zero of the field separates the start from the target."""


class NoSolution(ValueError):
    """No parameter in the search range realises the requested crossing time."""


@dataclass(frozen=True)
class NormalFormField:
    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0
    a: float = -0.1
    b: float = 0.1

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.a < 0 < self.b:
            raise ValueError("need a < 0 < b")
        if max(-self.a, self.b) >= CHART:
            raise ValueError("a and b must lie inside the local chart")
        xs = np.linspace(self.a, self.b, 2001)
        xs = xs[xs != 0.0]
        if np.any(self(0.0, xs) <= 0):
            raise ValueError("X(0, .) must be positive on [a, b] away from 0")

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        return t + self.alpha * x * x + self.beta * x * t + self.gamma * t * t

    @property
    def coef(self):
        return self.alpha, self.beta, self.gamma

    def zeros(self, t):
        """Real zeros of ``X(t, .)`` (a quadratic in x)."""
        al, be, ga = self.coef
        disc = (be * t) ** 2 - 4 * al * (t + ga * t * t)
        if disc < 0:
            return ()
        r = math.sqrt(disc)
        return ((-be * t - r) / (2 * al), (-be * t + r) / (2 * al))


def _refined(run, what):
    prev = run(H0)
    h = H0
    for _ in range(MAX_HALVINGS):
        h /= 2
        cur = run(h)
        if abs(cur - prev) < REFINE_TOL:
            return cur
        prev = cur
    raise StepFailure(f"{what}: refinement did not reach {REFINE_TOL}")


def flow(field: NormalFormField, t: float, x: float, s: float) -> float:
    """Time-``s`` map ``X_s(t, x)``; ``s`` may be negative."""
    if s == 0:
        return float(x)
    al, be, ga = field.coef

    def run(h):
        y, status = _kernels.rk4_flow(al, be, ga, float(t), float(x), float(s), h, CHART)
        if status:
            raise EscapeError(f"orbit of x={x} left the chart within time {s}")
        return y

    return _refined(run, "flow")


def hitting_time(field: NormalFormField, t: float, x: float, target: float,
                 smax: float = 1e6) -> float:
    """Signed time ``s`` with ``X_s(t, x) = target``."""
    lo, hi = sorted((x, target))
    for z in field.zeros(t):
        if lo <= z <= hi:
            raise UnreachableTarget(f"zero of X({t}, .) at {z} lies between {x} and {target}")
    if x == target:
        return 0.0
    al, be, ga = field.coef

    def run(h):
        s, status = _kernels.rk4_hit(al, be, ga, float(t), float(x), float(target), h, CHART, smax)
        if status == 1:
            raise EscapeError("trajectory left the chart before reaching the target")
        if status == 2:
            raise UnreachableTarget(f"target not reached within time {smax}")
        return s

    return _refined(run, "hitting_time")


def crossing_time(field: NormalFormField, t: float) -> float:
    """Time spent by the orbit of ``a`` to reach ``b``."""
    return hitting_time(field, t, field.a, field.b)


@lru_cache(maxsize=4096)
def _solve_t(field, target, t_max, t_min):
    if crossing_time(field, t_max) > target:
        raise NoSolution(f"crossing time at t={t_max} already exceeds {target}")
    hi = t_max
    lo = t_max / 4
    while crossing_time(field, lo) < target:
        hi = lo
        lo /= 4
        if lo < t_min:
            raise NoSolution(f"crossing time below {target} down to t={t_min}")
    # crossing time decreases in t: target lies in [ct(hi), ct(lo)]
    while hi - lo > ROOT_TOL:
        mid = 0.5 * (lo + hi)
        if crossing_time(field, mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_t_for_sigma(field: NormalFormField, k: int, sigma: float,
                      t_max: float = 0.2, t_min: float = 1e-10) -> float:
    """The parameter ``t_k(sigma)``: crossing time from a to b equals ``k + sigma``."""
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must lie in [0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    return _solve_t(field, float(k) + float(sigma), float(t_max), float(t_min))


@dataclass(frozen=True)
class CrossingSolution:
    """Tabulated ``sigma_k`` on ``[t_{k+1}^*, t_k^*]``."""

    k: int
    t_k_star: float
    t_next_star: float
    t: np.ndarray
    sigma: np.ndarray

    def __call__(self, t):
        # sigma decreasing in t: interpolate on the reversed table
        return np.interp(t, self.t[::-1], self.sigma[::-1])


def crossing_solution(field: NormalFormField, k: int, n_table: int = 17) -> CrossingSolution:
    t_star = solve_t_for_sigma(field, k, 0.0)
    t_next = solve_t_for_sigma(field, k, 1.0)
    ts = np.linspace(t_star, t_next, n_table)
    sig = np.array([crossing_time(field, t) - k for t in ts])
    sig[0], sig[-1] = 0.0, 1.0
    return CrossingSolution(k, t_star, t_next, ts, sig)


def transition_domain(field: NormalFormField):
    """``[X_{-1}(0, a), X_1(0, a)]``: one fundamental domain of the saddle-node arc."""
    return flow(field, 0.0, field.a, -1.0), flow(field, 0.0, field.a, 1.0)


def transition_map(field: NormalFormField, k, sigma: float, x: float) -> float:
    """``T_k(sigma, x) = f^k_{t_k(sigma)}(x)``; ``k = math.inf`` gives the limit map.

    The limit is ``X_{-t_a(0,x) - sigma}(0, b)`` where ``X_{t_a(0,x)}(0, x) = a``.
    """
    if k == math.inf:
        ta = hitting_time(field, 0.0, x, field.a)
        return flow(field, 0.0, field.b, -ta - sigma)
    t = solve_t_for_sigma(field, int(k), sigma)
    return flow(field, t, x, float(k))


def transition_deriv_lower_bound(field: NormalFormField, grid_n: int, dx: float = 1e-6) -> float:
    """Minimum of ``|d/dx T_inf(sigma, x)|`` over a ``grid_n x grid_n`` grid."""
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    lo, hi = transition_domain(field)
    best = np.inf
    for sigma in np.linspace(0.0, 1.0, grid_n):
        for x in np.linspace(lo + dx, hi - dx, grid_n):
            d = (transition_map(field, math.inf, sigma, x + dx)
                 - transition_map(field, math.inf, sigma, x - dx)) / (2 * dx)
            best = min(best, abs(d))
    return float(best)
