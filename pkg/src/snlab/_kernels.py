"""Compiled inner loops (orbits, fixed-step RK4 for the saddle-node field)."""
import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

CANONICAL, ARNOLD, DOUBLING = 0, 1, 2

# period of 2 modulo this odd integer exceeds 1e13
EXACT_MODULUS = 7 * 70368744177803


@njit(cache=True, nogil=True)
def lift_jet(kind, p, t, x):
    if kind == CANONICAL:
        th = TWO_PI * x
        s, c = math.sin(th), math.cos(th)
        f = 2.0 * x - s / TWO_PI + p * (1.0 - c) + t
        d1 = 2.0 - c + TWO_PI * p * s
        d2 = TWO_PI * s + TWO_PI * TWO_PI * p * c
        return f, d1, d2
    elif kind == ARNOLD:
        th = TWO_PI * x
        s, c = math.sin(th), math.cos(th)
        return x + p / TWO_PI * (1.0 - c) + t, 1.0 + p * s, TWO_PI * p * c
    return 2.0 * x + t, 2.0, 0.0


@njit(cache=True, nogil=True)
def _wrap(x):
    r = x - math.floor(x)
    if r >= 1.0:
        r = 0.0
    return r


@njit(cache=True, nogil=True)
def orbit(kind, p, x0, ts, burn):
    """Iterate x_j = f_{ts[j]}(x_{j-1}); keep points j >= burn."""
    m = ts.shape[0]
    n = m - burn
    xs = np.empty(n)
    lds = np.empty(n)
    x = x0
    for j in range(m):
        if j > 0:
            f, d1, d2 = lift_jet(kind, p, ts[j], x)
            x = _wrap(f)
        if j >= burn:
            f, d1, d2 = lift_jet(kind, p, ts[j], x)
            xs[j - burn] = x
            lds[j - burn] = math.log(d1)
    return xs, lds


@njit(cache=True, nogil=True)
def exact_doubling(k0, n, burn, modulus):
    """Orbit of k0/modulus under x -> 2x mod 1 in integer arithmetic."""
    xs = np.empty(n)
    k = k0
    for j in range(burn + n):
        if j >= burn:
            xs[j - burn] = k / modulus
        k = (2 * k) % modulus
    return xs


@njit(cache=True, nogil=True)
def basin_scan(kind, p, x0s, n_iter, delta, w_start, w_len, hold):
    """1 where the orbit gets delta-close to 0 inside the arc W and stays in W."""
    out = np.zeros(x0s.shape[0], dtype=np.int8)
    for i in range(x0s.shape[0]):
        x = x0s[i]
        for j in range(n_iter + 1):
            d = min(x, 1.0 - x)
            off = _wrap(x - w_start)
            inw = off <= w_len + 1e-12 or off >= 1.0 - 1e-12 or w_len >= 1.0
            if d < delta and inw:
                ok = True
                y = x
                for _ in range(hold):
                    f, d1, d2 = lift_jet(kind, p, 0.0, y)
                    y = _wrap(f)
                    off = _wrap(y - w_start)
                    if not (off <= w_len + 1e-12 or off >= 1.0 - 1e-12 or w_len >= 1.0):
                        ok = False
                        break
                if ok:
                    out[i] = 1
                break
            f, d1, d2 = lift_jet(kind, p, 0.0, x)
            x = _wrap(f)
    return out


@njit(cache=True, nogil=True)
def exact_doubling_basin(ks, n_iter, delta, hold, modulus):
    out = np.zeros(ks.shape[0], dtype=np.int8)
    for i in range(ks.shape[0]):
        k = ks[i]
        for j in range(n_iter + 1):
            x = k / modulus
            if min(x, 1.0 - x) < delta:
                ok = True
                kk = k
                for _ in range(hold + 1):
                    if kk != 0:
                        ok = False
                        break
                    kk = (2 * kk) % modulus
                if ok:
                    out[i] = 1
                    break
            k = (2 * k) % modulus
    return out


# --- saddle-node field X(t, x) = t + alpha x^2 + beta x t + gamma t^2 ---

@njit(cache=True, nogil=True)
def field(al, be, ga, t, x):
    return t + al * x * x + be * x * t + ga * t * t


@njit(cache=True, nogil=True)
def rk4_incr(al, be, ga, t, x, dt):
    k1 = field(al, be, ga, t, x)
    k2 = field(al, be, ga, t, x + 0.5 * dt * k1)
    k3 = field(al, be, ga, t, x + 0.5 * dt * k2)
    k4 = field(al, be, ga, t, x + dt * k3)
    return dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True, nogil=True)
def rk4_flow(al, be, ga, t, x, s, h, bound):
    """Time-s map with n = ceil(|s|/h) equal steps. Status 1 on escape.

    The state is accumulated with Kahan compensation; over 1e5 steps plain
    summation loses about 1e-10 in crossing times.
    """
    if s == 0.0:
        return x, 0
    n = int(math.ceil(abs(s) / h))
    dt = s / n
    comp = 0.0
    for _ in range(n):
        y = rk4_incr(al, be, ga, t, x, dt) - comp
        xn = x + y
        comp = (xn - x) - y
        x = xn
        if not (abs(x) <= bound):
            return x, 1
    return x, 0


@njit(cache=True, nogil=True)
def rk4_hit(al, be, ga, t, x, target, h, bound, smax):
    """Signed time to reach target. Status 1 escape, 2 exceeded smax."""
    if x == target:
        return 0.0, 0
    v = field(al, be, ga, t, x)
    direction = 1.0 if (target > x) == (v > 0.0) else -1.0
    above = target > x
    dt = direction * h
    comp = 0.0
    j = 0
    while True:
        y = rk4_incr(al, be, ga, t, x, dt) - comp
        xn = x + y
        if not (abs(xn) <= bound):
            return j * dt, 1
        if (xn >= target) == above:
            lo, hi = 0.0, h
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                z = x + (rk4_incr(al, be, ga, t, x, direction * mid) - comp)
                if (z >= target) == above:
                    hi = mid
                else:
                    lo = mid
                if hi - lo <= 1e-15:
                    break
            return j * dt + direction * 0.5 * (lo + hi), 0
        comp = (xn - x) - y
        x = xn
        j += 1
        if abs(j * dt) > smax:
            return j * dt, 2
