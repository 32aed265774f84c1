"""Histogram probability measures on a uniform circle partition."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .circle import circle_dist, wrap

DEFAULT_BINS = 1024


class UndersamplingWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Probability weights on the bins ``[i/n, (i+1)/n)``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) < 2:
            raise ValueError("need at least two bins")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        total = w.sum()
        if abs(total - 1.0) > 1e-12:
            w = w / total
        object.__setattr__(self, "weights", w)

    @property
    def bins(self) -> int:
        return len(self.weights)

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.bins) + 0.5) / self.bins

    @property
    def density(self) -> np.ndarray:
        return self.weights * self.bins

    @classmethod
    def uniform(cls, bins: int) -> "EmpiricalMeasure":
        return cls(np.full(bins, 1.0 / bins))

    @classmethod
    def dirac(cls, p: float, bins: int) -> "EmpiricalMeasure":
        w = np.zeros(bins)
        w[min(int(wrap(p) * bins), bins - 1)] = 1.0
        return cls(w)

    def rebin(self, bins: int) -> "EmpiricalMeasure":
        """Split each bin evenly into ``bins / self.bins`` sub-bins."""
        if bins % self.bins:
            raise ValueError("target bin count must be a multiple of the current one")
        r = bins // self.bins
        return EmpiricalMeasure(np.repeat(self.weights / r, r))

    def to_csv(self) -> str:
        rows = ["bin_center,weight"]
        rows += [f"{c:.17g},{w:.17g}" for c, w in zip(self.centers, self.weights)]
        return "\n".join(rows) + "\n"


def histogram_measure(samples, bins: int = DEFAULT_BINS) -> EmpiricalMeasure:
    """Normalised bin counts of circle points."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    idx = np.minimum((wrap(x) * bins).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins).astype(float)
    return EmpiricalMeasure(counts / counts.sum())


def w1_to_dirac(mu: EmpiricalMeasure, p: float) -> float:
    """Wasserstein-1 distance from ``mu`` (bins at their centres) to ``delta_p``."""
    return float(np.dot(mu.weights, circle_dist(mu.centers, p)))


def w1_circle(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    """Wasserstein-1 distance on the circle between two histograms.

    Uses ``min_c sum |F_mu - F_nu - c| / n``, minimised at the median of the
    CDF difference.
    """
    if mu.bins != nu.bins:
        raise ValueError(f"bin counts differ: {mu.bins} vs {nu.bins}")
    diff = np.cumsum(mu.weights) - np.cumsum(nu.weights)
    c = np.median(diff)
    return float(np.sum(np.abs(diff - c)) / mu.bins)


def integrate_log_deriv(mu: EmpiricalMeasure, family, t: float) -> float:
    """Midpoint rule for ``int log|f_t'| d mu``."""
    family.check_t(t)
    return float(np.dot(mu.weights, np.log(np.abs(family.d1(mu.centers)))))


@dataclass(frozen=True)
class SymbolicPartition:
    """Partition of the circle into the arcs between consecutive cut points."""

    cuts: tuple

    def __post_init__(self):
        cuts = tuple(sorted(float(wrap(c)) for c in self.cuts))
        if not cuts:
            raise ValueError("need at least one cut point")
        object.__setattr__(self, "cuts", cuts)

    @classmethod
    def uniform(cls, k: int) -> "SymbolicPartition":
        return cls(tuple(np.arange(k) / k))

    def __len__(self):
        return len(self.cuts)

    @property
    def diameter(self) -> float:
        c = np.asarray(self.cuts)
        gaps = np.diff(np.concatenate([c, [c[0] + 1.0]]))
        return float(gaps.max())

    def code(self, x) -> np.ndarray:
        # arc [cuts[i], cuts[i+1]) gets symbol i; the arc through 0 gets the last symbol
        idx = np.searchsorted(np.asarray(self.cuts), wrap(x), side="right") - 1
        return np.where(idx < 0, len(self.cuts) - 1, idx)


def generating_partition(family, t: float, max_diameter: float) -> SymbolicPartition:
    """Preimages of 0 under ``f_t`` refined by equal splits below ``max_diameter``."""
    base = sorted(family.preimages(t, [0.0])[0])
    cuts = []
    for i, left in enumerate(base):
        right = base[(i + 1) % len(base)] + (1.0 if i + 1 == len(base) else 0.0)
        k = int(math.floor((right - left) / max_diameter)) + 1
        cuts.extend(left + (right - left) * np.arange(k) / k)
    return SymbolicPartition(tuple(cuts))


def block_entropies(symbols: np.ndarray, n_symbols: int, max_block: int) -> np.ndarray:
    """Shannon entropies ``H_1..H_max_block`` (nats) of overlapping blocks."""
    symbols = np.asarray(symbols, dtype=np.int64)
    out = np.empty(max_block)
    codes = np.zeros(len(symbols) - max_block + 1, dtype=np.int64)
    m = len(codes)
    for n in range(1, max_block + 1):
        codes = codes * n_symbols + symbols[n - 1:n - 1 + m]
        _, counts = np.unique(codes, return_counts=True)
        p = counts / m
        out[n - 1] = -np.sum(p * np.log(p))
        if len(counts) > 0.2 * m:
            warnings.warn(f"{len(counts)} distinct blocks of length {n} from {m} samples",
                          UndersamplingWarning, stacklevel=3)
    return out


def symbolic_block_entropy(record, xi: SymbolicPartition, max_block: int) -> float:
    """Difference estimator ``H_max_block - H_{max_block-1}`` of the coded orbit."""
    if max_block < 1:
        raise ValueError("max_block must be >= 1")
    h = block_entropies(xi.code(record.points), len(xi), max_block)
    if max_block == 1:
        return float(h[0])
    return float(h[-1] - h[-2])
