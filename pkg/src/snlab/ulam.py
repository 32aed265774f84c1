"""Ulam discretisation of the transfer operator and its noise average."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .families import MapFamily, _invert_lift
from .measures import EmpiricalMeasure
from .orbits import NoiseKernel

DEFAULT_TOL = 1e-12
MAX_ITER = 100_000


class BranchCountError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    """Power iteration stalled; ``last`` holds the final iterate."""

    def __init__(self, msg, last: EmpiricalMeasure, iterations: int, residual: float):
        super().__init__(msg)
        self.last = last
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Row-stochastic ``P[i, j] = m(bin_i ∩ f^{-1} bin_j) / m(bin_i)``."""

    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def row_sum_error(self) -> float:
        return float(np.max(np.abs(self.entries.sum(axis=1) - 1.0)))


def build_ulam(family: MapFamily, t: float, n: int) -> TransferMatrix:
    """Exact Ulam matrix of ``f_t`` on ``n`` bins via preimages of the bin edges."""
    family.check_t(t)
    if n < 2:
        raise ValueError("need n >= 2")
    if family.derivative_range()[0] <= 0:
        raise BranchCountError("f' changes sign: branches are not monotone")
    f_lo = float(family.lift(t, 0.0))
    f_hi = f_lo + family.degree
    j0 = int(np.floor(f_lo * n)) + 1
    j1 = int(np.ceil(f_hi * n)) - 1
    targets = np.arange(j0, j1 + 1) / n
    pre = _invert_lift(family, t, targets)
    cuts = np.unique(np.concatenate([np.arange(n + 1) / n, pre]))
    left, right = cuts[:-1], cuts[1:]
    keep = right > left
    left, right = left[keep], right[keep]
    mid = 0.5 * (left + right)
    src = np.minimum((mid * n).astype(np.int64), n - 1)
    img = family.lift(t, mid)
    dst = np.minimum(((img - np.floor(img)) * n).astype(np.int64), n - 1)
    P = np.zeros((n, n))
    np.add.at(P, (src, dst), (right - left) * n)
    return TransferMatrix(P)


def averaged_ulam(family: MapFamily, kernel: NoiseKernel, n: int, quad_m: int = 16) -> TransferMatrix:
    """Midpoint-rule average of ``build_ulam`` over the kernel's support."""
    if quad_m < 2:
        raise ValueError("need quad_m >= 2")
    nodes, weights = kernel.quadrature(quad_m)
    P = np.zeros((n, n))
    for t, w in zip(nodes, weights):
        P += w * build_ulam(family, t, n).entries
    return TransferMatrix(P)


def invariant_density(P: TransferMatrix, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER,
                      return_info: bool = False):
    """Left fixed vector of ``P`` by power iteration from the uniform vector.

    Stops once successive iterates differ by less than ``tol`` in L1. Raises
    :class:`ConvergenceError` after ``max_iter`` iterations.
    """
    n = P.n
    PT = sparse.csr_matrix(P.entries.T)
    v = np.full(n, 1.0 / n)
    residual = np.inf
    for it in range(1, max_iter + 1):
        w = PT @ v
        w /= w.sum()
        residual = float(np.abs(w - v).sum())
        v = w
        if residual < tol:
            mu = EmpiricalMeasure(v)
            return (mu, {"iterations": it, "residual": residual}) if return_info else mu
    raise ConvergenceError(f"no convergence after {max_iter} iterations (residual {residual:.3g})",
                           EmpiricalMeasure(v), max_iter, residual)
