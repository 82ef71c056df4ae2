"""Jump-process models (mu, nu), path generation and compensator integrals.

The compensator nu is always deterministic and of product form:
``rate * ds (x) F(dx)`` for finite activity, ``ds (x) levy(x) dx`` for
infinite activity.  Marks live on a sub-interval of the real line.
"""

from __future__ import annotations

import enum
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, stats

EPSABS = 1e-10
EPSREL = 1e-8
QUAD_LIMIT = 200


class ModelError(ValueError):
    """Invalid model parameters."""


class QuadratureError(ArithmeticError):
    """Quadrature did not converge (usually a divergent integral)."""


# ---------------------------------------------------------------------------
# seeding

def generator(seed: int, stream: int = 0) -> np.random.Generator:
    """PCG64 generator for ``(seed, stream)``; streams are independent."""
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(base_seed: int, index: int) -> int:
    """64-bit seed of replication ``index`` under ``base_seed``."""
    if base_seed < 0 or index < 0:
        raise ValueError("seeds and replication indices must be nonnegative")
    word = np.random.SeedSequence([int(base_seed), int(index)]).generate_state(1, np.uint64)[0]
    return int(word)


# ---------------------------------------------------------------------------
# quadrature

def quad(f: Callable[[float], float], a: float, b: float,
         epsabs: float = EPSABS, epsrel: float = EPSREL) -> float:
    """Adaptive Gauss-Kronrod quadrature that raises instead of degrading."""
    if a == b:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel,
                             limit=QUAD_LIMIT, full_output=1)
    value = out[0]
    if len(out) > 3 or not math.isfinite(value):
        msg = out[3] if len(out) > 3 else "non-finite value"
        raise QuadratureError(f"quadrature on [{a}, {b}] failed: {msg.strip()}")
    return float(value)


@dataclass(frozen=True)
class Segment:
    """Piece of the mark space on which an integrand was integrated.

    ``rep`` is an interior point (or the atom) used to evaluate indicators
    that are constant on the segment.
    """

    lo: float
    hi: float
    rep: float
    value: float


def _cut(lo: float, hi: float, breaks: Sequence[float]) -> list[float]:
    inner = sorted({float(b) for b in breaks if lo < b < hi})
    return [lo, *inner, hi]


def _rep(lo: float, hi: float) -> float:
    if math.isinf(lo) and math.isinf(hi):
        return 0.0
    if math.isinf(lo):
        return hi - 1.0
    if math.isinf(hi):
        return lo + 1.0
    return 0.5 * (lo + hi)


def _segment_integrals(f, lo, hi, breaks, weight=None) -> list[Segment]:
    g = f if weight is None else (lambda x: f(x) * weight(x))
    nodes = _cut(lo, hi, breaks)
    return [Segment(a, b, _rep(a, b), quad(g, a, b)) for a, b in zip(nodes[:-1], nodes[1:])]


# ---------------------------------------------------------------------------
# mark distributions

class MarkDistribution:
    """Probability law of the marks of a compound-Poisson measure."""

    name = "abstract"

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def segments(self, f, breaks=()) -> list[Segment]:
        raise NotImplementedError

    def expect(self, f, breaks=()) -> float:
        return math.fsum(s.value for s in self.segments(f, breaks))

    def moment(self, k: int) -> float:
        return self.expect(lambda x: x ** k)

    def scan_grid(self) -> np.ndarray:
        lo, hi = self.support()
        return np.linspace(lo, hi, 4097)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PointMass(MarkDistribution):
    value: float = 1.0
    name = "point_mass"

    def sample(self, rng, n):
        return np.full(n, float(self.value))

    def support(self):
        return (self.value, self.value)

    def pdf(self, x):
        return np.where(np.asarray(x) == self.value, np.inf, 0.0)

    def segments(self, f, breaks=()):
        return [Segment(self.value, self.value, self.value, float(f(self.value)))]

    def moment(self, k):
        return float(self.value) ** k

    def scan_grid(self):
        return np.array([float(self.value)])

    def to_dict(self):
        return {"name": self.name, "value": self.value}


@dataclass(frozen=True)
class Normal(MarkDistribution):
    mean: float = 0.0
    std: float = 1.0
    name = "normal"

    def __post_init__(self):
        if not (self.std > 0 and math.isfinite(self.std) and math.isfinite(self.mean)):
            raise ModelError(f"normal marks need finite mean and std > 0, got {self}")

    def sample(self, rng, n):
        return self.mean + self.std * rng.standard_normal(n)

    def support(self):
        return (-math.inf, math.inf)

    def pdf(self, x):
        return stats.norm.pdf(x, self.mean, self.std)

    def segments(self, f, breaks=()):
        return _segment_integrals(f, -math.inf, math.inf, breaks, self.pdf)

    def moment(self, k):
        return float(stats.norm.moment(k, loc=self.mean, scale=self.std))

    def scan_grid(self):
        return np.linspace(self.mean - 40 * self.std, self.mean + 40 * self.std, 8193)

    def to_dict(self):
        return {"name": self.name, "mean": self.mean, "std": self.std}


@dataclass(frozen=True)
class Uniform(MarkDistribution):
    low: float = -1.0
    high: float = 1.0
    name = "uniform"

    def __post_init__(self):
        if not (math.isfinite(self.low) and math.isfinite(self.high) and self.low < self.high):
            raise ModelError(f"uniform marks need finite low < high, got {self}")

    def sample(self, rng, n):
        return self.low + (self.high - self.low) * rng.random(n)

    def support(self):
        return (self.low, self.high)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.low) & (x <= self.high), 1.0 / (self.high - self.low), 0.0)

    def segments(self, f, breaks=()):
        width = self.high - self.low
        segs = _segment_integrals(f, self.low, self.high, breaks)
        return [Segment(s.lo, s.hi, s.rep, s.value / width) for s in segs]

    def moment(self, k):
        a, b = self.low, self.high
        return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))

    def to_dict(self):
        return {"name": self.name, "low": self.low, "high": self.high}


# ---------------------------------------------------------------------------
# Levy densities

class LevyDensity:
    """Levy density on ``0 < |x| <= radius``."""

    name = "abstract"
    radius: float

    def __call__(self, x):
        raise NotImplementedError

    def mass(self, lo: float, hi: float | None = None) -> float:
        """nu-mass of ``lo < |x| <= hi`` per unit time."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int, lo: float, hi: float) -> np.ndarray:
        raise NotImplementedError

    def segments(self, f, lo: float = 0.0, hi: float | None = None, breaks=()) -> list[Segment]:
        hi = self.radius if hi is None else hi
        neg = _segment_integrals(f, -hi, -lo, [b for b in breaks if b < 0], self)
        pos = _segment_integrals(f, lo, hi, [b for b in breaks if b > 0], self)
        return neg + pos

    def integrate(self, f, lo: float = 0.0, hi: float | None = None, breaks=()) -> float:
        return math.fsum(s.value for s in self.segments(f, lo, hi, breaks))

    def scan_grid(self, lo: float = 0.0, hi: float | None = None) -> np.ndarray:
        hi = self.radius if hi is None else hi
        floor = lo if lo > 0 else hi * 1e-12
        side = np.unique(np.concatenate([np.geomspace(floor, hi, 2049),
                                         np.linspace(floor, hi, 2049)]))
        return np.concatenate([-side[::-1], side])

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLawLevy(LevyDensity):
    """``c_pos * x^(-1-alpha)`` for ``0 < x <= radius``, ``c_neg * |x|^(-1-alpha)`` below 0."""

    alpha: float
    radius: float = 1.0
    c_pos: float = 1.0
    c_neg: float = 1.0
    name = "power"

    def __post_init__(self):
        if not (self.alpha > 0 and self.radius > 0 and self.c_pos >= 0 and self.c_neg >= 0
                and self.c_pos + self.c_neg > 0):
            raise ModelError(f"invalid power-law Levy density {self}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        c = np.where(x > 0, self.c_pos, self.c_neg)
        with np.errstate(divide="ignore"):
            out = c * ax ** (-1.0 - self.alpha)
        return np.where((ax > 0) & (ax <= self.radius), out, 0.0)

    def _side_mass(self, lo, hi):
        return (lo ** -self.alpha - hi ** -self.alpha) / self.alpha

    def mass(self, lo, hi=None):
        hi = self.radius if hi is None else min(hi, self.radius)
        if lo <= 0:
            return math.inf
        if lo >= hi:
            return 0.0
        return (self.c_pos + self.c_neg) * self._side_mass(lo, hi)

    def sample(self, rng, n, lo, hi):
        hi = min(hi, self.radius)
        p_pos = self.c_pos / (self.c_pos + self.c_neg)
        u = 1.0 - rng.random(n)  # (0, 1]
        sign = np.where(rng.random(n) < p_pos, 1.0, -1.0)
        a = lo ** -self.alpha
        b = hi ** -self.alpha
        mag = (a - u * (a - b)) ** (-1.0 / self.alpha)
        mag = np.clip(mag, np.nextafter(lo, math.inf), hi)
        return sign * mag

    def to_dict(self):
        return {"name": self.name, "alpha": self.alpha, "radius": self.radius,
                "c_pos": self.c_pos, "c_neg": self.c_neg}


@dataclass(frozen=True, eq=False)
class GenericLevy(LevyDensity):
    """Levy density given as a callable; sampling by tabulated inverse CDF.

    The inverse CDF is piecewise linear on 1024 geometric cells per side, so
    sampled marks follow the density only approximately inside each cell.
    """

    density: Callable[[np.ndarray], np.ndarray]
    radius: float = 1.0
    name = "generic"
    _tables: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        inside = (ax > 0) & (ax <= self.radius)
        out = np.zeros_like(x)
        if np.any(inside):
            out[inside] = self.density(x[inside])
        return out

    def mass(self, lo, hi=None):
        hi = self.radius if hi is None else min(hi, self.radius)
        if lo >= hi:
            return 0.0
        try:
            return self.integrate(lambda x: 1.0, lo, hi)
        except QuadratureError:
            return math.inf

    def _table(self, lo, hi):
        key = (lo, hi)
        if key not in self._tables:
            side = np.geomspace(lo, hi, 1025)
            nodes = np.concatenate([-side[::-1], side])
            cells = [quad(self, a, b) if not (a < 0 < b) else 0.0
                     for a, b in zip(nodes[:-1], nodes[1:])]
            cum = np.concatenate([[0.0], np.cumsum(cells)])
            self._tables[key] = (nodes, cum / cum[-1])
        return self._tables[key]

    def sample(self, rng, n, lo, hi):
        nodes, cdf = self._table(lo, min(hi, self.radius))
        x = np.interp(rng.random(n), cdf, nodes)
        x = np.where(np.abs(x) <= lo, np.sign(x) * np.nextafter(lo, math.inf), x)
        return x

    def to_dict(self):
        raise ModelError("callable Levy densities are not serialisable")


@dataclass(frozen=True)
class LevyRestriction(MarkDistribution):
    """Normalised restriction of a Levy density to ``lo < |x| <= hi``."""

    levy: LevyDensity
    lo: float
    hi: float
    name = "levy_restriction"

    def sample(self, rng, n):
        return self.levy.sample(rng, n, self.lo, self.hi)

    def support(self):
        return (-self.hi, self.hi)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        return np.where((ax > self.lo) & (ax <= self.hi), self.levy(x), 0.0) / self.levy.mass(self.lo, self.hi)

    def segments(self, f, breaks=()):
        total = self.levy.mass(self.lo, self.hi)
        segs = self.levy.segments(f, self.lo, self.hi, breaks)
        return [Segment(s.lo, s.hi, s.rep, s.value / total) for s in segs]

    def scan_grid(self):
        return self.levy.scan_grid(self.lo, self.hi)

    def to_dict(self):
        return {"name": self.name, "levy": self.levy.to_dict(), "lo": self.lo, "hi": self.hi}


# ---------------------------------------------------------------------------
# models and paths

class ActivityKind(enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"


@dataclass(frozen=True)
class JumpModel:
    """Integer-valued random measure mu with deterministic compensator nu.

    Use :meth:`finite` and :meth:`infinite` rather than the constructor;
    they validate the integrability requirements.
    """

    kind: ActivityKind
    rate: float = 0.0
    mark_dist: MarkDistribution | None = None
    levy_density: LevyDensity | None = None
    truncation_floor: float = 0.0
    truncation_ceiling: float | None = None

    @classmethod
    def finite(cls, rate: float, mark_dist: MarkDistribution) -> "JumpModel":
        if not (math.isfinite(rate) and rate >= 0):
            raise ModelError(f"rate must be finite and nonnegative, got {rate}")
        if mark_dist is None:
            raise ModelError("finite-activity model needs a mark distribution")
        return cls(ActivityKind.FINITE, rate=float(rate), mark_dist=mark_dist)

    @classmethod
    def infinite(cls, levy: LevyDensity, check: bool = True) -> "JumpModel":
        model = cls(ActivityKind.INFINITE, levy_density=levy)
        if check:
            try:
                small = levy.integrate(lambda x: np.minimum(x * x, 1.0))
            except QuadratureError as exc:
                raise ModelError(f"Levy density not integrable against x^2 ^ 1: {exc}") from None
            if not math.isfinite(small):
                raise ModelError("Levy density not integrable against x^2 ^ 1")
            if math.isfinite(levy.mass(0.0)):
                raise ModelError("Levy density has finite total mass; use a finite-activity model")
        return model

    @property
    def is_finite(self) -> bool:
        return self.kind is ActivityKind.FINITE

    def support(self) -> tuple[float, float]:
        if self.is_finite:
            return self.mark_dist.support()
        return (-self.levy_density.radius, self.levy_density.radius)

    def total_mass(self, t: float = 1.0) -> float:
        """nu([0, t] x E)."""
        if self.is_finite:
            return self.rate * t
        return math.inf

    def segments(self, f, breaks=()) -> list[Segment]:
        """Per-unit-time integrals of ``f`` against the mark part of nu."""
        if self.is_finite:
            return [Segment(s.lo, s.hi, s.rep, self.rate * s.value)
                    for s in self.mark_dist.segments(f, breaks)]
        return self.levy_density.segments(f, 0.0, None, breaks)

    def scan_grid(self) -> np.ndarray:
        if self.is_finite:
            return self.mark_dist.scan_grid()
        return self.levy_density.scan_grid()

    def to_dict(self) -> dict:
        if self.is_finite:
            return {"kind": "finite", "rate": self.rate, "marks": self.mark_dist.to_dict(),
                    "truncation_floor": self.truncation_floor}
        return {"kind": "infinite", "levy": self.levy_density.to_dict()}


@dataclass(frozen=True, eq=False)
class JumpPath:
    """One realisation of mu on ``[0, horizon]``."""

    horizon: float
    times: np.ndarray
    marks: np.ndarray
    seed: int
    truncation_floor: float = 0.0
    stream: int = 0

    def __post_init__(self):
        if self.times.shape != self.marks.shape:
            raise ValueError("times and marks must have equal length")
        if self.times.size:
            if self.times[0] <= 0 or self.times[-1] > self.horizon:
                raise ValueError("event times must lie in (0, horizon]")
            if np.any(np.diff(self.times) <= 0):
                raise ValueError("event times must be strictly increasing")
            if self.truncation_floor > 0 and np.any(np.abs(self.marks) <= self.truncation_floor):
                raise ValueError("mark at or below the truncation floor")

    @property
    def events(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.marks.tolist()))

    def __len__(self):
        return int(self.times.size)

    def __eq__(self, other):
        if not isinstance(other, JumpPath):
            return NotImplemented
        return (self.horizon == other.horizon and self.seed == other.seed
                and self.truncation_floor == other.truncation_floor
                and self.times.tobytes() == other.times.tobytes()
                and self.marks.tobytes() == other.marks.tobytes())

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("time,mark\n")
        for t, x in zip(self.times.tolist(), self.marks.tolist()):
            buf.write(f"{t!r},{x!r}\n")
        return buf.getvalue()


def simulate_finite_activity(model: JumpModel, horizon: float, seed: int,
                             stream: int = 0) -> JumpPath:
    """Compound-Poisson path on ``(0, horizon]``, deterministic in ``(seed, stream)``."""
    if not model.is_finite:
        raise ModelError("simulate_finite_activity needs a finite-activity model; truncate first")
    if not (horizon > 0 and math.isfinite(horizon)):
        raise ValueError(f"horizon must be positive and finite, got {horizon}")
    rng = generator(seed, stream)
    n = int(rng.poisson(model.rate * horizon)) if model.rate > 0 else 0
    times = np.sort(horizon * (1.0 - rng.random(n)))
    marks = model.mark_dist.sample(rng, n) if n else np.empty(0)
    return JumpPath(float(horizon), times, marks, int(seed), model.truncation_floor, stream)


def truncate_levy(model: JumpModel, h: float, upper: float | None = None) -> JumpModel:
    """Finite-activity model keeping the jumps with ``h < |x| <= upper``."""
    if model.is_finite:
        raise ModelError("truncate_levy needs an infinite-activity model")
    levy = model.levy_density
    upper = levy.radius if upper is None else upper
    if not h > 0:
        raise ModelError(f"truncation level must be positive (rate diverges at h={h})")
    rate = levy.mass(h, upper)
    if not math.isfinite(rate):
        raise ModelError(f"divergent truncated rate at h={h}")
    if rate <= 0:
        raise ModelError(f"zero-rate truncation: no jumps with {h} < |x| <= {upper}")
    return JumpModel(ActivityKind.FINITE, rate=rate, mark_dist=LevyRestriction(levy, h, upper),
                     truncation_floor=float(h), truncation_ceiling=float(upper))


# ---------------------------------------------------------------------------
# compensator

def mark_integral(f, model: JumpModel, breaks=()) -> float:
    """``int_E f(x) nu(dx)`` per unit time."""
    return math.fsum(s.value for s in model.segments(f, breaks))


def compensator_integral(g, model: JumpModel, t: float, *, homogeneous: bool = False,
                         breaks=()) -> float:
    """``int_0^t int_E g(s, x) nu(ds, dx)``.

    Quadrature runs with absolute tolerance 1e-10 and relative tolerance 1e-8;
    non-convergence raises :class:`QuadratureError`.  ``homogeneous`` declares
    that ``g`` does not depend on time.  ``breaks`` lists mark values where
    ``g`` is discontinuous.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t == 0:
        return 0.0
    if homogeneous:
        return t * mark_integral(lambda x: g(0.0, x), model, breaks)
    return quad(lambda s: mark_integral(lambda x: g(s, x), model, breaks), 0.0, t)


def level_crossings(fn, grid: np.ndarray, level: float, split_at_zero: bool = False,
                    iters: int = 200) -> list[float]:
    """Mark values where the indicator ``fn(x) <= level`` switches.

    Switches are located on ``grid`` and refined by bisection to machine
    precision; regions narrower than the grid spacing may be missed.  With
    ``split_at_zero`` grid cells straddling 0 are skipped (Levy mark spaces
    are cut at 0 anyway).
    """
    if grid.size < 2:
        return []

    def below(x: float) -> bool:
        return bool(np.asarray(fn(np.array([x])))[0] <= level)

    inside = np.asarray(fn(grid), dtype=float) <= level
    out = []
    for i in np.flatnonzero(inside[1:] != inside[:-1]):
        lo, hi = float(grid[i]), float(grid[i + 1])
        if split_at_zero and lo < 0.0 < hi:
            continue
        left = below(lo)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if below(mid) == left:
                lo = mid
            else:
                hi = mid
        out.append(hi)
    return out


# ---------------------------------------------------------------------------
# case classification

class Case(enum.Enum):
    A = "CaseA"
    B = "CaseB"
    NEITHER = "Neither"


@dataclass(frozen=True)
class CaseReport:
    verdict: Case
    case_a: bool
    case_b: bool
    total_mass_finite: bool
    envelope_integral: float
    case_b_integral: float
    separates: bool | None

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "case_a": self.case_a, "case_b": self.case_b,
                "total_mass_finite": self.total_mass_finite,
                "envelope_integral": self.envelope_integral,
                "case_b_integral": self.case_b_integral, "separates": self.separates}


def _safe_compensator(g, model, t, breaks):
    try:
        return compensator_integral(g, model, t, homogeneous=True, breaks=breaks)
    except QuadratureError:
        return math.inf


def classify_case(family, model: JumpModel, t: float, series=None) -> CaseReport:
    """Case A / Case B classification on ``[0, t]``.

    Both integral conditions are reported; ``verdict`` prefers Case A.  When
    ``series`` is None the index set is a finite prefix, which the singleton
    partition always separates.
    """
    from .integrands import envelope  # local import: integrands depends on this module

    env = envelope(family)
    breaks = family.x_breakpoints()
    if family.time_homogeneous:
        wbar = lambda s, x: env(s, x)  # noqa: E731
        a_int = _safe_compensator(wbar, model, t, breaks)
        b_int = _safe_compensator(lambda s, x: np.minimum(env(s, x) ** 2, env(s, x)), model, t, breaks)
    else:
        try:
            a_int = compensator_integral(env, model, t, breaks=breaks)
        except QuadratureError:
            a_int = math.inf
        try:
            b_int = compensator_integral(lambda s, x: np.minimum(env(s, x) ** 2, env(s, x)),
                                         model, t, breaks=breaks)
        except QuadratureError:
            b_int = math.inf
    mass_finite = math.isfinite(model.total_mass(t))
    separates = None
    if series is not None:
        from .partitions import asymptotically_separates
        separates = asymptotically_separates(series, family.index_set).separates
    case_a = mass_finite and math.isfinite(a_int)
    case_b = math.isfinite(b_int) and separates is not False
    verdict = Case.A if case_a else (Case.B if case_b else Case.NEITHER)
    return CaseReport(verdict, case_a, case_b, mass_finite, a_int, b_int, separates)


# ---------------------------------------------------------------------------
# stopping rules

@dataclass(frozen=True)
class FixedTime:
    t0: float

    def evaluate(self, times=None, values=None) -> float:
        return self.t0

    @property
    def cap(self) -> float:
        return self.t0


@dataclass(frozen=True)
class FirstExit:
    """First time ``|X^psi|`` reaches ``level``, capped at ``cap``.

    ``psi_index`` refers to a member of the experiment's index set.
    """

    psi_index: int
    level: float
    cap: float

    def evaluate(self, times: np.ndarray, values: np.ndarray) -> float:
        """``times``/``values`` are checkpoints of a path linear between them."""
        hit = np.flatnonzero(np.abs(values) >= self.level)
        if hit.size == 0:
            return self.cap
        i = int(hit[0])
        if i == 0:
            return float(min(times[0], self.cap))
        t0, t1 = times[i - 1], times[i]
        v0, v1 = values[i - 1], values[i]
        if t1 == t0 or v1 == v0:
            return float(min(t1, self.cap))
        target = math.copysign(self.level, v1)
        frac = (target - v0) / (v1 - v0)
        return float(min(t0 + min(max(frac, 0.0), 1.0) * (t1 - t0), self.cap))


StoppingRule = FixedTime | FirstExit


# ---------------------------------------------------------------------------
# (de)serialisation

_MARKS = {"point_mass": PointMass, "normal": Normal, "uniform": Uniform}


def marks_from_dict(d: dict) -> MarkDistribution:
    d = dict(d)
    name = d.pop("name")
    if name == "std_normal":
        return Normal(0.0, 1.0)
    if name not in _MARKS:
        raise ModelError(f"unknown mark distribution {name!r}")
    return _MARKS[name](**d)


def levy_from_dict(d: dict) -> LevyDensity:
    d = dict(d)
    name = d.pop("name")
    if name != "power":
        raise ModelError(f"unknown Levy density {name!r}")
    return PowerLawLevy(**d)


def model_from_dict(d: dict, check: bool = True) -> JumpModel:
    kind = d.get("kind")
    if kind == "finite":
        return JumpModel.finite(d["rate"], marks_from_dict(d["marks"]))
    if kind == "infinite":
        return JumpModel.infinite(levy_from_dict(d["levy"]), check=check)
    raise ModelError(f"unknown model kind {kind!r}")


__all__ = [
    "ActivityKind", "Case", "CaseReport", "EPSABS", "EPSREL", "FirstExit", "FixedTime",
    "GenericLevy", "JumpModel", "JumpPath", "LevyDensity", "LevyRestriction", "MarkDistribution",
    "ModelError", "Normal", "PointMass", "PowerLawLevy", "QuadratureError", "Segment",
    "StoppingRule", "Uniform", "classify_case", "compensator_integral", "derive_seed", "generator",
    "level_crossings", "mark_integral", "marks_from_dict", "model_from_dict", "quad",
    "simulate_finite_activity", "truncate_levy",
]
