"""Circle-map families ``f_t = f_0 + t`` unfolding a saddle-node at 0.

Three kinds are available:

``canonical``
    ``f_t(x) = 2x - sin(2 pi x)/(2 pi) + c (1 - cos(2 pi x)) + t``, a degree-2
    local diffeomorphism with a saddle-node at 0 (``f_0''(0) = 4 pi^2 c``).
``arnold``
    ``f_t(x) = x + a/(2 pi) (1 - cos(2 pi x)) + t``, a saddle-node circle
    homeomorphism for ``0 < a < 1``.
``doubling``
    ``f_t(x) = 2x + t``, an oracle family with constant derivative.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .circle import CircleInterval, circle_dist, wrap

KINDS = {"canonical": _kernels.CANONICAL, "arnold": _kernels.ARNOLD,
         "doubling": _kernels.DOUBLING}
DEFAULT_PARAM = {"canonical": 0.2, "arnold": 0.5, "doubling": 0.0}
TWO_PI = 2.0 * np.pi


class ParameterRangeError(ValueError):
    """Raised when a parameter t lies outside ``[0, t0]``."""


@dataclass(frozen=True)
class MapFamily:
    """Immutable additive unfolding ``f_t(x) = f_0(x) + t`` for ``t`` in ``[0, t0]``.

    Parameters
    ----------
    kind : {"canonical", "arnold", "doubling"}
    param : float, optional
        ``c`` for the canonical family, ``a`` for the Arnold-type family;
        ignored for the doubling oracle.
    t0 : float
        Upper end of the parameter range.
    """

    kind: str
    param: Optional[float] = None
    t0: float = 0.2
    _code: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.param is None:
            object.__setattr__(self, "param", DEFAULT_PARAM[self.kind])
        object.__setattr__(self, "param", float(self.param))
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if self.kind == "canonical":
            # f' = 2 - cos + 2 pi c sin stays positive iff 1 + (2 pi c)^2 < 4
            if not 0 < self.param < np.sqrt(3.0) / TWO_PI:
                raise ValueError("canonical family needs 0 < c < sqrt(3)/(2 pi)")
        if self.kind == "arnold" and not 0 < self.param < 1:
            raise ValueError("arnold family needs 0 < a < 1")
        object.__setattr__(self, "_code", KINDS[self.kind])

    @classmethod
    def canonical(cls, c=0.2, t0=0.2):
        return cls("canonical", c, t0)

    @classmethod
    def arnold(cls, a=0.5, t0=0.2):
        return cls("arnold", a, t0)

    @classmethod
    def doubling(cls, t0=0.2):
        return cls("doubling", 0.0, t0)

    @property
    def code(self) -> int:
        return self._code

    @property
    def degree(self) -> int:
        return 1 if self.kind == "arnold" else 2

    def check_t(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(~np.isfinite(t_arr)) or np.any(t_arr < 0) or np.any(t_arr > self.t0 + 1e-15):
            raise ParameterRangeError(f"t={t} outside [0, {self.t0}]")

    # closed-form lift and derivatives, vectorised
    def lift(self, t, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "canonical":
            th = TWO_PI * x
            return 2 * x - np.sin(th) / TWO_PI + self.param * (1 - np.cos(th)) + t
        if self.kind == "arnold":
            return x + self.param / TWO_PI * (1 - np.cos(TWO_PI * x)) + t
        return 2 * x + t

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        th = TWO_PI * x
        if self.kind == "canonical":
            return 2 - np.cos(th) + TWO_PI * self.param * np.sin(th)
        if self.kind == "arnold":
            return 1 + self.param * np.sin(th)
        return np.full_like(x, 2.0)

    def d2(self, x):
        x = np.asarray(x, dtype=float)
        th = TWO_PI * x
        if self.kind == "canonical":
            return TWO_PI * np.sin(th) + TWO_PI ** 2 * self.param * np.cos(th)
        if self.kind == "arnold":
            return TWO_PI * self.param * np.cos(th)
        return np.zeros_like(x)

    def __call__(self, t, x):
        return wrap(self.lift(t, x))

    def sup_abs_d2(self) -> float:
        """Exact ``sup |f''|`` (the derivative is independent of t)."""
        if self.kind == "canonical":
            return TWO_PI * np.hypot(1.0, TWO_PI * self.param)
        if self.kind == "arnold":
            return TWO_PI * self.param
        return 0.0

    def derivative_range(self) -> tuple[float, float]:
        """Exact ``(inf f', sup f')`` over the circle."""
        if self.kind == "canonical":
            r = np.hypot(1.0, TWO_PI * self.param)
            return 2.0 - r, 2.0 + r
        if self.kind == "arnold":
            return 1.0 - self.param, 1.0 + self.param
        return 2.0, 2.0

    def sup_log_distortion(self) -> float:
        """``sup |f''/f'|`` estimated on a fine grid."""
        x = np.linspace(0.0, 1.0, 200001)
        return float(np.max(np.abs(self.d2(x) / self.d1(x))))

    def preimages(self, t, y, tol=1e-14):
        """All preimages of ``y`` under ``f_t``, one per monotone branch."""
        self.check_t(t)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        lo_val = float(self.lift(t, 0.0))
        # lifted targets in [F(0), F(0) + degree): one per branch
        base = lo_val + wrap(y - lo_val)
        pts = np.array([_invert_lift(self, t, base + j) for j in range(self.degree)])
        return [np.sort(wrap(col)) for col in pts.T]


def _invert_lift(family, t, target, tol=1e-15):
    """Solve ``F_t(x) = target`` for x in [0, 1) by vectorised bisection."""
    target = np.asarray(target, dtype=float)
    lo = np.zeros_like(target)
    hi = np.ones_like(target)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = family.lift(t, mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo) < tol:
            break
    return 0.5 * (lo + hi)


def eval_jet(family: MapFamily, t: float, x: float):
    """Return ``(f_t(x) mod 1, f_t'(x), f_t''(x))`` in closed form."""
    family.check_t(t)
    f, d1, d2 = _kernels.lift_jet(family.code, family.param, float(t), float(x))
    return wrap(f), d1, d2


@dataclass(frozen=True)
class HypothesisReport:
    saddle_node_ok: bool
    h1_ok: bool
    h1_applicable: bool
    source_s: Optional[float]
    immediate_basin: CircleInterval
    min_deriv_outside: float
    injectivity_radius: float
    fixed_points: tuple = ()
    notes: tuple = ()


def _bisect(g, lo, hi, tol=1e-12):
    glo = g(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fixed_points(family: MapFamily, n_scan=100000):
    """Fixed points of ``f_0`` in [0, 1): a tangency check at 0 plus sign changes."""
    pts = []
    if abs(family.lift(0.0, 0.0)) < 1e-12:
        pts.append(0.0)
    x = (np.arange(n_scan) + 0.5) / n_scan
    g = family.lift(0.0, x) - x
    for k in range(int(np.floor(g.min())), int(np.ceil(g.max())) + 1):
        h = g - k
        idx = np.nonzero(np.sign(h[:-1]) * np.sign(h[1:]) < 0)[0]
        for i in idx:
            root = _bisect(lambda z: family.lift(0.0, z) - z - k, x[i], x[i + 1])
            if circle_dist(root, 0.0) > 1e-9:
                pts.append(float(root))
    return sorted(pts)


def injectivity_radius(family: MapFamily, t=0.0, grid_step=1e-3):
    if family.degree == 1:
        return 0.5
    ys = np.arange(0.0, 1.0, grid_step)
    best = np.inf
    for pre in family.preimages(t, ys):
        d = min(circle_dist(pre[i], pre[(i + 1) % len(pre)]) for i in range(len(pre)))
        best = min(best, d)
    return 0.5 * best


def verify_hypotheses(family: MapFamily, grid_step=1e-4) -> HypothesisReport:
    """Numerically check the saddle-node, (H1) and source conditions for ``f_0``.

    The immediate basin is the arc ``(s, 0]`` between the nearest fixed point
    ``s`` to the left of 0 and 0 itself (orbits left of 0 are attracted when
    ``f_0''(0) > 0``). (H1) is accepted when the grid minimum of ``f_0'`` on
    the complement exceeds ``1 + sup|f''| * h / 2``.
    """
    notes = []
    _, d1_0, d2_0 = eval_jet(family, 0.0, 0.0)
    f00 = family.lift(0.0, 0.0)
    saddle_node_ok = abs(float(f00)) < 1e-12 and abs(d1_0 - 1.0) <= 1e-9 and d2_0 > 0
    if not saddle_node_ok:
        notes.append(f"f_0'(0)={d1_0:.6g}, f_0''(0)={d2_0:.6g}: not a saddle-node")

    fps = fixed_points(family)
    others = [p for p in fps if circle_dist(p, 0.0) > 1e-9]
    source = None
    if saddle_node_ok and others:
        source = float(max(others))
        basin = CircleInterval.from_endpoints(source, 0.0)
    elif saddle_node_ok:
        basin = CircleInterval(0.0, 1.0)
        notes.append("no other fixed point: basin is the whole circle, H1 not applicable")
    else:
        basin = CircleInterval(0.0, 0.0)

    h1_applicable = basin.length < 1.0
    if h1_applicable:
        # grid points j*h on the complement arc, starting just past the basin end
        span = 1.0 - basin.length
        n = max(int(np.floor(span / grid_step)), 1)
        offsets = grid_step * np.arange(0 if basin.length == 0.0 else 1, n + 1)
        grid = wrap(basin.end + offsets[offsets <= span])
        d1 = family.d1(grid)
        min_deriv = float(d1.min())
        margin = family.sup_abs_d2() * grid_step / 2
        h1_ok = bool(min_deriv > 1.0 + margin)
    else:
        min_deriv = float("nan")
        h1_ok = True
    if source is not None:
        _, ds, _ = eval_jet(family, 0.0, source)
        if not ds > 1:
            notes.append("fixed point bounding the basin is not a source")
    return HypothesisReport(
        saddle_node_ok=bool(saddle_node_ok),
        h1_ok=h1_ok,
        h1_applicable=h1_applicable,
        source_s=source,
        immediate_basin=basin,
        min_deriv_outside=min_deriv,
        injectivity_radius=injectivity_radius(family),
        fixed_points=tuple(fps),
        notes=tuple(notes),
    )
