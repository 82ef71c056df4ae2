"""Right-hand sides of the maximal inequalities and the truncation level a(delta, K).

The universal constant hidden in the inequalities is not known, so every
evaluator returns the bound without it; experiments report LHS/RHS ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .partitions import PartitionSeries, as_fraction, entropy_integral, n_pi


@dataclass(frozen=True)
class BoundInputs:
    series: PartitionSeries
    delta: Fraction
    K: float
    L: float | None = None

    def __post_init__(self):
        d = as_fraction(self.delta)
        object.__setattr__(self, "delta", d)
        if not 0 < d <= self.series.delta:
            raise ValueError(f"delta={d} outside (0, {self.series.delta}]")
        if not self.K > 0:
            raise ValueError(f"K must be positive, got {self.K}")
        if self.L is not None and not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")


def truncation_level_a(delta, K: float, series: PartitionSeries) -> float:
    """``delta * K / sqrt(log(1 + N(delta/2)))``."""
    delta = as_fraction(delta)
    if not 0 < delta / 2 <= series.delta:
        raise ValueError(f"delta/2={delta / 2} outside the series range (0, {series.delta}]")
    return float(delta) * K / math.sqrt(math.log1p(n_pi(series, delta / 2)))


def rhs_bound_i(series: PartitionSeries, delta, K: float) -> float:
    """``K * int_0^delta sqrt(log(1 + N(eps))) d eps``."""
    if K < 0:
        raise ValueError(f"K must be nonnegative, got {K}")
    return K * entropy_integral(series, delta)


def rhs_bound_ii(series: PartitionSeries, K: float, L: float) -> float:
    """``K * H(Delta) + L / (Delta * K)`` with H the entropy integral."""
    if not K > 0:
        raise ValueError(f"K must be positive, got {K}")
    if L < 0:
        raise ValueError(f"L must be nonnegative, got {L}")
    delta = series.delta
    return K * entropy_integral(series, delta) + L / (float(delta) * K)


def optimal_K(series: PartitionSeries, L: float) -> float:
    """Minimiser of :func:`rhs_bound_ii` over K."""
    h = entropy_integral(series, series.delta)
    return math.sqrt(L / (float(series.delta) * h))


__all__ = ["BoundInputs", "optimal_K", "rhs_bound_i", "rhs_bound_ii", "truncation_level_a"]
