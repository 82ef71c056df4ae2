"""Series of finite partitions of an index set, covering numbers and entropy."""

from __future__ import annotations

import enum
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .measure_sim import QuadratureError, quad


def as_fraction(value) -> Fraction:
    """Exact rational from int, float, Fraction or a string like ``"1/2"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    return Fraction(float(value))


# ---------------------------------------------------------------------------
# index sets

@dataclass(frozen=True, eq=False)
class IndexSet:
    """Finite prefix Psi^m of a (possibly countable) index set.

    ``distances`` is the optional pairwise metric on the elements.
    """

    elements: tuple
    distances: np.ndarray | None = None
    exhaustion_level: int | None = None

    def __post_init__(self):
        if len(set(self.elements)) != len(self.elements):
            raise ValueError("index set elements must be distinct")
        if self.distances is not None:
            d = np.asarray(self.distances, dtype=float)
            n = len(self.elements)
            if d.shape != (n, n):
                raise ValueError(f"distance matrix must be {n}x{n}, got {d.shape}")
            if np.any(np.diag(d) != 0) or not np.array_equal(d, d.T) or np.any(d < 0):
                raise ValueError("distance matrix must be symmetric, nonnegative, zero on the diagonal")
            object.__setattr__(self, "distances", d)

    @classmethod
    def from_coordinates(cls, coords: Sequence[float], metric: str | Callable = "abs",
                         exhaustion_level: int | None = None) -> "IndexSet":
        coords = [float(c) for c in coords]
        if metric == "abs":
            arr = np.asarray(coords)
            d = np.abs(arr[:, None] - arr[None, :])
        elif callable(metric):
            d = np.array([[metric(a, b) for b in coords] for a in coords], dtype=float)
        else:
            raise ValueError(f"unknown metric {metric!r}")
        return cls(tuple(coords), d, exhaustion_level)

    def __len__(self):
        return len(self.elements)

    def prefix(self, m: int) -> "IndexSet":
        if not 1 <= m <= len(self):
            raise ValueError(f"prefix size {m} outside 1..{len(self)}")
        d = None if self.distances is None else self.distances[:m, :m]
        return IndexSet(self.elements[:m], d, m)

    def with_distances(self, distances: np.ndarray) -> "IndexSet":
        return IndexSet(self.elements, distances, self.exhaustion_level)

    def distance(self, i: int, j: int) -> float:
        if self.distances is None:
            raise ValueError("index set carries no metric")
        return float(self.distances[i, j])


# ---------------------------------------------------------------------------
# partition series

Cell = tuple[int, ...]
Level = tuple[Cell, ...]


@dataclass(frozen=True, eq=False)
class PartitionSeries:
    """Piecewise-constant series Pi(eps) of partitions of ``{0, ..., size-1}``.

    Level ``j`` is the partition for ``eps`` in ``(breakpoints[j+1], breakpoints[j]]``;
    the last level holds on ``(0, breakpoints[-1]]``.  Cells list element
    positions in the underlying :class:`IndexSet`.
    """

    breakpoints: tuple[Fraction, ...]
    levels: tuple[Level, ...]
    size: int
    nested: bool = False
    labels: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        bps = tuple(as_fraction(b) for b in self.breakpoints)
        if not bps:
            raise ValueError("a partition series needs at least one breakpoint")
        if any(b <= 0 for b in bps) or any(x <= y for x, y in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be positive and strictly decreasing")
        if len(self.levels) != len(bps):
            raise ValueError("one level per breakpoint required")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "levels", tuple(tuple(tuple(int(i) for i in c) for c in lvl)
                                                 for lvl in self.levels))

    @property
    def delta(self) -> Fraction:
        return self.breakpoints[0]

    @property
    def counts(self) -> list[int]:
        return [len(lvl) for lvl in self.levels]

    def level_index(self, eps) -> int:
        """Index of the level whose constancy interval contains ``eps``."""
        eps = as_fraction(eps)
        if not 0 < eps <= self.delta:
            raise ValueError(f"eps={eps} outside (0, {self.delta}]")
        j = 0
        while j + 1 < len(self.breakpoints) and eps <= self.breakpoints[j + 1]:
            j += 1
        return j

    def level_at(self, eps) -> Level:
        return self.levels[self.level_index(eps)]

    def cell_labels(self, j: int) -> np.ndarray:
        """``labels[i]`` is the cell number of element ``i`` at level ``j``."""
        if j not in self.labels:
            lab = np.full(self.size, -1, dtype=np.int64)
            for k, cell in enumerate(self.levels[j]):
                lab[list(cell)] = k
            self.labels[j] = lab
        return self.labels[j]

    def is_singleton_final(self) -> bool:
        return all(len(c) == 1 for c in self.levels[-1])

    def restrict(self, m: int) -> "PartitionSeries":
        """Series induced on the first ``m`` elements."""
        if not 1 <= m <= self.size:
            raise ValueError(f"prefix size {m} outside 1..{self.size}")
        levels = []
        for lvl in self.levels:
            cells = tuple(tuple(i for i in c if i < m) for c in lvl)
            levels.append(tuple(c for c in cells if c))
        return PartitionSeries(self.breakpoints, tuple(levels), m, self.nested)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "size": self.size,
            "nested": self.nested,
            "breakpoints": [str(b) for b in self.breakpoints],
            "levels": [[list(c) for c in lvl] for lvl in self.levels],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PartitionSeries":
        return cls(tuple(as_fraction(b) for b in d["breakpoints"]),
                   tuple(tuple(tuple(c) for c in lvl) for lvl in d["levels"]),
                   int(d["size"]), bool(d.get("nested", False)))


def _greedy_cover(members: Sequence[int], dist: np.ndarray, eps: float) -> list[Cell]:
    uncovered = list(members)
    cells = []
    while uncovered:
        center = uncovered[0]
        cell = tuple(i for i in uncovered if dist[center, i] <= eps)
        cells.append(cell)
        taken = set(cell)
        uncovered = [i for i in uncovered if i not in taken]
    return cells


def _common_refinement(a: Level, b: Level) -> Level:
    out = []
    for ca in a:
        sa = set(ca)
        for cb in b:
            cell = tuple(i for i in cb if i in sa)
            if cell:
                out.append(cell)
    return tuple(out)


def build_ball_partition_series(points: IndexSet, breakpoints: Sequence, hierarchical: bool = False,
                                force_singletons: bool = True) -> PartitionSeries:
    """Partitions generated by greedy covers with closed eps-balls.

    The first uncovered point becomes the next centre, and its ball minus
    earlier cells becomes a cell.  ``hierarchical`` covers each parent cell
    separately, which yields a nested series.  The level at ``Delta`` is always
    the whole set.  If the last level is not all singletons and
    ``force_singletons`` is set, a singleton level is appended at half the
    last breakpoint.
    """
    n = len(points)
    if n == 0:
        raise ValueError("cannot partition an empty index set")
    if points.distances is None:
        raise ValueError("ball partitions need a metric on the index set")
    bps = [as_fraction(b) for b in breakpoints]
    if not bps or any(b <= 0 for b in bps) or any(x <= y for x, y in zip(bps, bps[1:])):
        raise ValueError("breakpoints must be positive and strictly decreasing")
    dist = points.distances
    levels: list[Level] = [(tuple(range(n)),)]
    for eps in bps[1:]:
        prev = levels[-1]
        if hierarchical:
            lvl = tuple(c for parent in prev for c in _greedy_cover(parent, dist, float(eps)))
        else:
            lvl = tuple(_greedy_cover(range(n), dist, float(eps)))
            if len(lvl) < len(prev):
                lvl = _common_refinement(prev, lvl)
        levels.append(lvl)
    if force_singletons and any(len(c) > 1 for c in levels[-1]):
        bps.append(bps[-1] / 2)
        levels.append(tuple((i,) for c in levels[-1] for i in c))
    return PartitionSeries(tuple(bps), tuple(levels), n, nested=hierarchical)


def dyadic_breakpoints(delta, min_distance: float, max_halvings: int = 60) -> list[Fraction]:
    """``delta * 2^-j`` for ``j = 0, 1, ...`` until the value drops below ``min_distance``.

    Closed balls of radius below the minimum pairwise distance are
    singletons, so the last level of a ball series built on these is too.
    """
    delta = as_fraction(delta)
    out = [delta]
    while float(out[-1]) >= min_distance and len(out) <= max_halvings:
        out.append(out[-1] / 2)
    return out


# ---------------------------------------------------------------------------
# validation

class SeriesKind(enum.Enum):
    NFP = "NFP"
    DFP_ONLY = "DFP_only"
    INVALID = "Invalid"


@dataclass(frozen=True)
class SeriesValidation:
    verdict: SeriesKind
    violations: tuple[str, ...]
    singleton_final: bool
    dfp_checks_pass: bool


def validate_series(series: PartitionSeries) -> SeriesValidation:
    """Check the partition axioms, ``N(Delta) = 1``, monotone counts and nesting."""
    violations = []
    universe = set(range(series.size))
    axioms_ok = True
    for j, lvl in enumerate(series.levels):
        seen: dict[int, int] = {}
        for k, cell in enumerate(lvl):
            if not cell:
                violations.append(f"level {j}: cell {k} is empty")
                axioms_ok = False
            for i in cell:
                if i not in universe:
                    violations.append(f"level {j}: cell {k} has unknown element {i}")
                    axioms_ok = False
                elif i in seen:
                    violations.append(f"level {j}: cells {seen[i]} and {k} overlap at element {i}")
                    axioms_ok = False
                else:
                    seen[i] = k
        missing = universe - set(seen)
        if missing:
            violations.append(f"level {j}: elements {sorted(missing)} not covered")
            axioms_ok = False
    counts = series.counts
    if counts[0] != 1:
        violations.append(f"N at Delta is {counts[0]}, not 1")
        axioms_ok = False
    monotone = all(a <= b for a, b in zip(counts, counts[1:]))
    if not monotone:
        violations.append(f"covering numbers not nondecreasing as eps decreases: {counts}")
    nested = True
    for j in range(1, len(series.levels)):
        parents = [set(c) for c in series.levels[j - 1]]
        for cell in series.levels[j]:
            if not any(set(cell) <= p for p in parents):
                nested = False
                violations.append(f"level {j}: cell {list(cell)} not inside a level-{j - 1} cell")
                break
    dfp = axioms_ok and monotone
    if axioms_ok and nested:
        verdict = SeriesKind.NFP
    elif dfp:
        verdict = SeriesKind.DFP_ONLY
    else:
        verdict = SeriesKind.INVALID
    return SeriesValidation(verdict, tuple(violations), series.is_singleton_final(), dfp)


# ---------------------------------------------------------------------------
# covering numbers and entropy

def n_pi(series: PartitionSeries, eps) -> int:
    """Covering number N_Pi(eps)."""
    return len(series.level_at(eps))


def entropy_integral(series: PartitionSeries, delta) -> float:
    """``int_0^delta sqrt(log(1 + N_Pi(eps))) d eps``, summed exactly per level."""
    delta = as_fraction(delta)
    if not 0 < delta <= series.delta:
        raise ValueError(f"delta={delta} outside (0, {series.delta}]")
    bps = list(series.breakpoints) + [Fraction(0)]
    terms = []
    for j, lvl in enumerate(series.levels):
        hi = min(bps[j], delta)
        lo = bps[j + 1]
        if hi > lo:
            terms.append(float(hi - lo) * math.sqrt(math.log1p(len(lvl))))
    return math.fsum(terms)


def entropy_table(series: PartitionSeries) -> list[tuple[Fraction, int, float]]:
    return [(b, len(lvl), math.sqrt(math.log1p(len(lvl))))
            for b, lvl in zip(series.breakpoints, series.levels)]


def entropy_table_csv(series: PartitionSeries) -> str:
    buf = io.StringIO()
    buf.write("eps,eps_float,N,sqrt_log_1_plus_N\n")
    for b, n, v in entropy_table(series):
        buf.write(f"{b},{float(b)!r},{n},{v!r}\n")
    return buf.getvalue()


@dataclass(frozen=True)
class EntropyProfile:
    """Declared covering-number growth of a countable index set.

    ``kind="power"``: log N(eps) = dim * log(Delta/eps);
    ``kind="exp"``:   log N(eps) = (Delta/eps)^power.
    """

    kind: str
    delta: float
    dim: float = 1.0
    power: float = 1.0

    def log_n(self, eps: float) -> float:
        r = self.delta / eps
        if self.kind == "power":
            return max(self.dim * math.log(r), 0.0)
        if self.kind == "exp":
            return r ** self.power
        raise ValueError(f"unknown entropy profile {self.kind!r}")

    def integral(self) -> float:
        """``int_0^Delta sqrt(log N(eps)) d eps``; ``inf`` when divergent."""
        try:
            return quad(lambda e: math.sqrt(self.log_n(e)), 0.0, self.delta)
        except QuadratureError:
            return math.inf


# ---------------------------------------------------------------------------
# asymptotic separation

@dataclass(frozen=True)
class SeparationResult:
    separates: bool
    eps_table: dict
    witness: tuple[int, ...] | None


def asymptotically_separates(series: PartitionSeries, prefix: IndexSet | int | None = None,
                             max_f: int = 3, max_size: int = 64) -> SeparationResult:
    """Brute-force check that every F with ``|F| <= max_f`` is eventually split.

    For each F the table holds the largest breakpoint ``eps_F`` such that for
    every ``eps`` in ``(0, eps_F]`` each cell holds at most one point of F.
    """
    if max_f < 1:
        raise ValueError("max_f must be at least 1")
    m = series.size if prefix is None else (prefix if isinstance(prefix, int) else len(prefix))
    if m > max_size:
        raise ValueError(f"prefix of size {m} exceeds the brute-force cap {max_size}")
    if m < series.size:
        series = series.restrict(m)
    labels = [series.cell_labels(j) for j in range(len(series.levels))]
    last = len(labels) - 1
    table = {}
    for r in range(1, min(max_f, m) + 1):
        for f in itertools.combinations(range(m), r):
            j = last
            if len({int(labels[j][i]) for i in f}) < r:
                return SeparationResult(False, table, f)
            while j > 0 and len({int(labels[j - 1][i]) for i in f}) == r:
                j -= 1
            table[f] = series.breakpoints[j]
    return SeparationResult(True, table, None)


__all__ = [
    "EntropyProfile", "IndexSet", "PartitionSeries", "SeparationResult", "SeriesKind",
    "SeriesValidation", "as_fraction", "asymptotically_separates", "build_ball_partition_series",
    "dyadic_breakpoints", "entropy_integral", "entropy_table", "entropy_table_csv", "n_pi",
    "validate_series",
]
