"""Independent reference computations used by the acceptance checks.

Each oracle re-derives a quantity by a different route than the library
code it checks: adaptive quadrature instead of exact level sums, a direct
reading of the separation definition instead of label scans, and closed
forms for power-law annulus moments.
"""

from __future__ import annotations

import itertools
import math
import warnings
from fractions import Fraction

import numpy as np
from scipy import integrate

from .partitions import PartitionSeries


def covering_number(series: PartitionSeries, eps: float) -> int:
    """N(eps) by scanning the breakpoints in floating point."""
    bps = [float(b) for b in series.breakpoints]
    if not 0 < eps <= bps[0]:
        raise ValueError(f"eps={eps} outside (0, {bps[0]}]")
    j = max(i for i, b in enumerate(bps) if b >= eps)
    return len(series.levels[j])


def entropy_integral_quadrature(series: PartitionSeries, delta) -> float:
    """``int_0^delta sqrt(log(1 + N(eps))) d eps`` by adaptive Gauss-Kronrod quadrature."""
    delta = float(delta)
    pts = sorted(float(b) for b in series.breakpoints if 0 < float(b) < delta)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        value, _ = integrate.quad(lambda e: math.sqrt(math.log1p(covering_number(series, e))),
                                  0.0, delta, points=pts or None, epsabs=1e-14, epsrel=1e-12,
                                  limit=500)
    return value


def separation_table(series: PartitionSeries, max_f: int = 3):
    """Direct check of eventual separation.

    For each F, walks the breakpoints from the finest upward and records the
    largest breakpoint at and below which every partition puts the points
    of F in distinct cells.  Returns ``(separates, table, witness)``.
    """
    n = series.size
    cells_by_level = [[set(c) for c in lvl] for lvl in series.levels]

    def splits(level, f):
        return all(len(set(f) & cell) <= 1 for cell in cells_by_level[level])

    table = {}
    for r in range(1, min(max_f, n) + 1):
        for f in itertools.combinations(range(n), r):
            if not splits(len(series.levels) - 1, f):
                return False, table, f
            best = None
            for j in range(len(series.levels) - 1, -1, -1):
                if all(splits(i, f) for i in range(j, len(series.levels))):
                    best = series.breakpoints[j]
                else:
                    break
            table[f] = best
    return True, table, None


def random_series(rng: np.random.Generator, size: int, n_levels: int) -> PartitionSeries:
    """Random decreasing series on ``size`` points; the finest level need not be singletons."""
    raw = sorted({int(v) for v in rng.integers(1, 64, size=n_levels)}, reverse=True)
    bps = [Fraction(v, 64) for v in raw]
    levels = [(tuple(range(size)),)]
    for _ in bps[1:]:
        new = []
        for cell in levels[-1]:
            if len(cell) > 1 and rng.random() < 0.6:
                cut = int(rng.integers(1, len(cell)))
                perm = list(rng.permutation(cell))
                new.append(tuple(sorted(int(i) for i in perm[:cut])))
                new.append(tuple(sorted(int(i) for i in perm[cut:])))
            else:
                new.append(cell)
        levels.append(tuple(new))
    return PartitionSeries(tuple(bps), tuple(levels), size, nested=True)


def power_annulus_second_moment(alpha: float, lo: float, hi: float, c: float = 1.0) -> float:
    """``int_{lo < |x| <= hi} x^2 c |x|^(-1-alpha) dx`` over both sides."""
    return 2.0 * c * (hi ** (2 - alpha) - lo ** (2 - alpha)) / (2 - alpha)


__all__ = ["covering_number", "entropy_integral_quadrature", "power_annulus_second_moment",
           "random_series", "separation_table"]
