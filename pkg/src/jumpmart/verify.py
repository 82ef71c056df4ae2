"""Monte Carlo experiments: maximal inequalities, boundedness ladders and identity suites.

Every experiment is a pure function of its :class:`ExperimentConfig`.
Replication ``r`` draws from ``derive_seed(seed, r)``; per-replication
results are reduced in index order, so worker count never changes a report.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .bounds import rhs_bound_i, rhs_bound_ii, truncation_level_a
from .integrands import (
    FunctionFamily, IntegrandFamily, envelope, intrinsic_distances, make_family, psi_grid,
    quadratic_modulus,
)
from .integrator import (
    _member_values, annulus_models, annulus_rates, drift_rates, integrate_path, integrate_truncated,
    ladder_path_statistics, simulate_ladder, sup_statistics,
)
from .measure_sim import (
    Case, FirstExit, FixedTime, JumpModel, PowerLawLevy, StoppingRule, Uniform,
    classify_case, compensator_integral, derive_seed, simulate_finite_activity, truncate_levy,
)
from .partitions import (
    EntropyProfile, PartitionSeries, SeriesKind, as_fraction, asymptotically_separates,
    build_ball_partition_series, dyadic_breakpoints, entropy_integral, n_pi, validate_series,
)

SCHEMA_VERSION = 1


class PreconditionError(RuntimeError):
    """The configuration violates a hypothesis the experiment relies on."""


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class PartitionSpec:
    """How the partition series on the index set is built.

    ``metric="intrinsic"`` uses the L2(nu_t) distance between members,
    ``"coordinate"`` uses ``|psi - phi|``.  ``delta=None`` takes the smallest
    multiple of 1/8 at or above the diameter.
    """

    metric: str = "intrinsic"
    delta: Fraction | None = None
    hierarchical: bool = True

    def __post_init__(self):
        if self.metric not in ("intrinsic", "coordinate"):
            raise ValueError(f"unknown partition metric {self.metric!r}")
        if self.delta is not None:
            d = as_fraction(self.delta)
            if d <= 0:
                raise ValueError("partition delta must be positive")
            object.__setattr__(self, "delta", d)

    def to_dict(self) -> dict:
        return {"metric": self.metric, "delta": None if self.delta is None else str(self.delta),
                "hierarchical": self.hierarchical}


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment.  ``K``/``L``/``delta`` set to None mean "auto"."""

    model: JumpModel
    family: IntegrandFamily
    stopping: StoppingRule = FixedTime(1.0)
    reps: int = 1000
    seed: int = 0
    drift_grid: int = 16
    partition: PartitionSpec = PartitionSpec()
    delta: Fraction | None = None
    K: float | None = None
    L: float | None = None
    truncation: float | None = None
    ratio_cap: float = 8.0
    max_rel_se: float = 0.10
    ladder: tuple[float, ...] | None = None
    prefix_sizes: tuple[int, ...] = ()
    tail_levels: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)
    gap_member: int = 0
    entropy_profile: EntropyProfile | None = None
    a_levels: tuple[float, ...] = (0.25, 0.5, 1.0)
    identity_paths: int = 1000
    workers: int = 1
    name: str = "experiment"
    series: PartitionSeries | None = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("no replications: reps must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.drift_grid < 1:
            raise ValueError("drift_grid must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.delta is not None:
            object.__setattr__(self, "delta", as_fraction(self.delta))
            if self.delta <= 0:
                raise ValueError("delta must be positive")
        for label, v in (("K", self.K), ("L", self.L), ("truncation", self.truncation)):
            if v is not None and not v > 0:
                raise ValueError(f"{label} must be positive, got {v}")
        if any(not a > 0 for a in self.a_levels):
            raise ValueError(f"truncation levels must be positive, got {list(self.a_levels)}")
        if self.ladder is not None:
            object.__setattr__(self, "ladder", tuple(float(h) for h in self.ladder))
        n = len(self.family)
        sizes = tuple(int(m) for m in self.prefix_sizes) or (n,)
        if any(not 1 <= m <= n for m in sizes) or list(sizes) != sorted(set(sizes)):
            raise ValueError(f"prefix sizes must be increasing and within 1..{n}, got {list(sizes)}")
        object.__setattr__(self, "prefix_sizes", sizes)
        if not 0 <= self.gap_member < n:
            raise ValueError(f"gap_member {self.gap_member} outside 0..{n - 1}")
        if self.series is not None and self.series.size != n:
            raise ValueError(f"explicit partition series covers {self.series.size} indices, family has {n}")
        if isinstance(self.stopping, FirstExit) and not 0 <= self.stopping.psi_index < n:
            raise ValueError(f"stopping psi_index {self.stopping.psi_index} outside 0..{n - 1}")

    @property
    def horizon(self) -> float:
        return float(self.stopping.cap)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def describe(self) -> dict:
        """JSON-ready echo of the configuration (workers omitted: they never change results)."""
        if isinstance(self.stopping, FixedTime):
            stop = {"kind": "fixed", "t": self.stopping.t0}
        else:
            stop = {"kind": "first_exit", "psi_index": self.stopping.psi_index,
                    "level": self.stopping.level, "cap": self.stopping.cap}
        out = {
            "name": self.name, "model": self.model.to_dict(), "family": self.family.to_dict(),
            "stopping": stop, "reps": self.reps, "seed": self.seed, "drift_grid": self.drift_grid,
            "partition": self.partition.to_dict() if self.series is None else self.series.to_dict(),
            "delta": "auto" if self.delta is None else str(self.delta),
            "K": "auto" if self.K is None else self.K, "L": "auto" if self.L is None else self.L,
            "truncation": self.truncation,
        }
        if self.ladder is not None:
            out["ladder"] = list(self.ladder)
            out["prefix_sizes"] = list(self.prefix_sizes)
            out["tail_levels"] = list(self.tail_levels)
            out["gap_member"] = self.gap_member
        if self.entropy_profile is not None:
            out["entropy_profile"] = dataclasses.asdict(self.entropy_profile)
        return out


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float | None = None
    tolerance: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": self.value,
                "tolerance": self.tolerance, "detail": self.detail}


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "NaN"
        if math.isinf(obj):
            return "Infinity" if obj > 0 else "-Infinity"
        return obj
    if isinstance(obj, (np.floating,)):
        return _jsonable(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


@dataclass
class VerificationReport:
    """Experiment outcome.  ``runtime`` is kept out of the JSON so reruns are byte-identical."""

    kind: str
    config: dict
    results: dict
    checks: list[Check]
    tables: dict[str, list[dict]] = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return _jsonable({
            "schema_version": SCHEMA_VERSION, "kind": self.kind, "config": self.config,
            "results": self.results, "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def table_csv(self, name: str) -> str:
        rows = self.tables[name]
        if not rows:
            return ""
        cols = list(rows[0])
        lines = [",".join(cols)]
        for row in rows:
            lines.append(",".join(_csv_cell(row[c]) for c in cols))
        return "\n".join(lines) + "\n"


def _csv_cell(v) -> str:
    v = _jsonable(v)
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


# ---------------------------------------------------------------------------
# replication driver

def _run_chunk(args):
    fn, ctx, lo, hi = args
    return [fn(ctx, r) for r in range(lo, hi)]


def map_replications(fn: Callable, ctx, reps: int, workers: int = 1, chunk: int = 256) -> list:
    """``[fn(ctx, r) for r in range(reps)]``, optionally spread over processes.

    ``fn`` must be a module-level function.  Results come back in index order.
    """
    if workers <= 1 or reps <= chunk:
        return [fn(ctx, r) for r in range(reps)]
    spans = [(fn, ctx, lo, min(lo + chunk, reps)) for lo in range(0, reps, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        out = []
        for part in pool.map(_run_chunk, spans):
            out.extend(part)
    return out


def mean_and_se(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return float(arr.mean()), math.inf
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


# ---------------------------------------------------------------------------
# partitions on the index set

def _auto_delta(diameter: float) -> Fraction:
    return Fraction(max(1, math.ceil(diameter * 8 - 1e-12)), 8)


def build_series(family: IntegrandFamily, model: JumpModel, t: float,
                 spec: PartitionSpec = PartitionSpec()) -> tuple[PartitionSeries, np.ndarray]:
    """Dyadic ball partitions of the index set under the chosen metric."""
    if spec.metric == "intrinsic":
        dist = intrinsic_distances(family, model, t)
    else:
        p = family.psis
        dist = np.abs(p[:, None] - p[None, :])
    diameter = float(dist.max()) if dist.size else 0.0
    delta = spec.delta if spec.delta is not None else _auto_delta(diameter)
    if float(delta) < diameter:
        raise PreconditionError(f"partition delta {delta} is below the index-set diameter {diameter!r}")
    positive = dist[dist > 0]
    bps = dyadic_breakpoints(delta, float(positive.min())) if positive.size else [delta]
    points = family.index_set.with_distances(dist)
    series = build_ball_partition_series(points, bps, hierarchical=spec.hierarchical)
    return series, dist


def series_for(config: ExperimentConfig, family: IntegrandFamily, model: JumpModel,
               t: float) -> PartitionSeries:
    """Explicit series from the config (restricted to the family's prefix) or a built one."""
    if config.series is not None:
        if len(family) < config.series.size:
            return config.series.restrict(len(family))
        return config.series
    return build_series(family, model, t, config.partition)[0]


def envelope_square_mass(family: IntegrandFamily, model: JumpModel, t: float) -> float:
    """``(envelope^2 * nu)_t``."""
    env = envelope(family)
    return compensator_integral(lambda s, x: env(s, x) ** 2, model, t,
                                homogeneous=family.time_homogeneous, breaks=family.x_breakpoints())


def _auto_threshold(value: float) -> float:
    """Smallest positive integer at or above ``value``."""
    if not math.isfinite(value):
        raise ArithmeticError(f"auto threshold impossible: computed value is {value}")
    return float(max(1, math.ceil(value)))


def _effective_model(config: ExperimentConfig) -> JumpModel:
    if config.model.is_finite:
        return config.model
    if config.truncation is None:
        raise PreconditionError("infinite-activity model needs a truncation level for the maximal "
                                "inequalities (use verify-bounded for the ladder limit)")
    return truncate_levy(config.model, config.truncation)


# ---------------------------------------------------------------------------
# maximal inequalities

@dataclass(frozen=True)
class _MaxContext:
    family: IntegrandFamily
    model: JumpModel
    cells: tuple[tuple[int, ...], ...]
    stopping: StoppingRule
    seed: int
    drift_grid: int
    a: float | None
    part: str
    drifts: object
    stop_drifts: object


def _maximal_rep(ctx: _MaxContext, r: int) -> tuple[float, float, float]:
    cap = float(ctx.stopping.cap)
    path = simulate_finite_activity(ctx.model, cap, derive_seed(ctx.seed, r))
    tau = cap
    if isinstance(ctx.stopping, FirstExit):
        grid, vals, _ = _member_values(ctx.family, [ctx.stopping.psi_index], path, ctx.model, cap,
                                       ctx.drift_grid, None, "full", ctx.stop_drifts)
        tau = ctx.stopping.evaluate(grid.ravel(), vals[0].ravel())
    stat = sup_statistics(ctx.family, ctx.cells, path, ctx.model, tau, ctx.drift_grid,
                          a=ctx.a, part=ctx.part, drifts=ctx.drifts)
    return stat.value, stat.grid_error_bound, tau


def _maximal(config: ExperimentConfig, which: str) -> VerificationReport:
    start = time.perf_counter()
    family = config.family
    model = _effective_model(config)
    cap = config.horizon
    if not family.time_homogeneous:
        raise PreconditionError("maximal experiments need a time-homogeneous family")
    series = series_for(config, family, model, cap)
    case = classify_case(family, model, cap, series if len(family) <= 64 else None)
    if case.verdict is Case.NEITHER:
        raise PreconditionError(f"configuration is neither Case A nor Case B: {case.to_dict()}")
    validation = validate_series(series)
    if validation.verdict is SeriesKind.INVALID:
        raise PreconditionError(f"partition series invalid: {'; '.join(validation.violations)}")
    Delta = series.delta
    delta = config.delta if config.delta is not None else Delta
    if not 0 < delta <= Delta:
        raise PreconditionError(f"delta={delta} outside (0, {Delta}]")
    modulus = quadratic_modulus(family, series, model, cap)
    K = config.K if config.K is not None else _auto_threshold(modulus.value)
    results = {"Delta": Delta, "delta": delta, "modulus": modulus.value, "K": K,
               "K_auto": config.K is None, "case": case.to_dict(),
               "series_counts": series.counts, "series_kind": validation.verdict.value}
    indicator = modulus.value <= K
    if which == "i":
        a = truncation_level_a(delta, K, series)
        cells = series.level_at(delta)
        rhs = rhs_bound_i(series, delta, K)
        drifts = drift_rates(family, model, a)
        part = "low"
        results.update({"a": a, "n_pi_delta_half": n_pi(series, delta / 2),
                        "entropy_integral": entropy_integral(series, delta)})
    else:
        a = None
        cells = (tuple(range(len(family))),)
        l_value = envelope_square_mass(family, model, cap)
        L = config.L if config.L is not None else _auto_threshold(l_value)
        indicator = indicator and l_value <= L
        rhs = rhs_bound_ii(series, K, L)
        drifts = drift_rates(family, model)
        part = "full"
        results.update({"L": L, "L_auto": config.L is None, "envelope_square_mass": l_value,
                        "entropy_integral": entropy_integral(series, Delta)})
    ctx = _MaxContext(family, model, tuple(tuple(c) for c in cells), config.stopping, config.seed,
                      config.drift_grid, a, part, drifts, drift_rates(family, model))
    if indicator:
        out = map_replications(_maximal_rep, ctx, config.reps, config.workers)
        sups = np.array([o[0] for o in out])
        grid_err = max(o[1] for o in out)
        mean_tau = float(np.mean([o[2] for o in out]))
    else:
        sups = np.zeros(config.reps)
        grid_err, mean_tau = 0.0, float("nan")
    lhs, se = mean_and_se(sups)
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    ratio_se = se / rhs if rhs > 0 else math.inf
    rel_se = se / lhs if lhs > 0 else 0.0
    results.update({"indicator": indicator, "lhs_mean": lhs, "lhs_se": se, "rel_se": rel_se,
                    "rhs": rhs, "ratio": ratio, "ratio_se": ratio_se, "max_sup": float(sups.max()),
                    "grid_error_bound_max": grid_err, "mean_stopping_time": mean_tau,
                    "n_cells": len(cells),
                    "seeds": {"base": config.seed, "count": config.reps,
                              "rule": "replication r uses derive_seed(base, r)"}})
    checks = [
        Check("ratio_finite", math.isfinite(ratio), ratio),
        Check("ratio_within_cap", ratio <= config.ratio_cap, ratio, config.ratio_cap),
        Check("relative_se", rel_se <= config.max_rel_se, rel_se, config.max_rel_se),
    ]
    tables = {"summary": [{"name": config.name, "family": family.name, "size": len(family),
                           "lhs": lhs, "se": se, "rhs": rhs, "ratio": ratio, "K": K,
                           "a": a if which == "i" else None,
                           "L": results.get("L")}],
              "modulus_levels": modulus.to_rows()}
    return VerificationReport(f"maximal_{which}", config.describe(), results, checks, tables,
                              time.perf_counter() - start)


def run_maximal_i(config: ExperimentConfig) -> VerificationReport:
    """Truncated oscillation maximum within the delta-level cells against ``K * H(delta)``."""
    return _maximal(config, "i")


def run_maximal_ii(config: ExperimentConfig) -> VerificationReport:
    """Untruncated oscillation maximum over the whole prefix against ``K*H(Delta) + L/(Delta*K)``."""
    return _maximal(config, "ii")


def standard_grid(reps: int = 20000, seed: int = 0, sizes=(2, 8, 32), rates=(1.0, 4.0),
                  families=("linear", "threshold")) -> list[ExperimentConfig]:
    """Grid over prefix size, jump rate and family with Uniform(-1, 1) marks on [0, 1]."""
    out = []
    for name in families:
        for rate in rates:
            for n in sizes:
                fam = make_family(name, psi_grid("grid", n, 0.0, 1.0))
                out.append(ExperimentConfig(JumpModel.finite(rate, Uniform(-1.0, 1.0)), fam,
                                            reps=reps, seed=seed,
                                            name=f"{name}-rate{rate:g}-n{n}"))
    return out


# ---------------------------------------------------------------------------
# boundedness along truncation ladders

@dataclass(frozen=True)
class _LadderContext:
    family: IntegrandFamily
    model: JumpModel
    pieces: tuple
    first: np.ndarray
    ladder: tuple[float, ...]
    horizon: float
    seed: int
    prefix_sizes: tuple[int, ...]
    gap_member: int


def _ladder_rep(ctx: _LadderContext, r: int):
    paths = simulate_ladder(ctx.model, ctx.horizon, ctx.ladder, derive_seed(ctx.seed, r),
                            list(ctx.pieces))
    st = ladder_path_statistics(ctx.family, list(ctx.pieces), paths, ctx.first, ctx.horizon)
    s = np.stack([st.sups[:, :m].max(axis=1) for m in ctx.prefix_sizes], axis=1)
    return st.values[:, ctx.gap_member], s


def _fit_slope(h: np.ndarray, y: np.ndarray) -> float:
    mask = (h > 0) & (y > 0)
    if mask.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(h[mask]), np.log(y[mask]), 1)[0])


def run_boundedness(config: ExperimentConfig) -> VerificationReport:
    """Cauchy gaps, prefix stability and tail curve of ``S_{k,m}`` on coupled ladders."""
    start = time.perf_counter()
    if config.ladder is None:
        raise ValueError("boundedness experiment needs a ladder")
    if not isinstance(config.stopping, FixedTime):
        raise ValueError("boundedness experiment supports a fixed horizon only")
    family, model, horizon = config.family, config.model, config.horizon
    m_max = config.prefix_sizes[-1]
    if config.entropy_profile is not None:
        h_profile = config.entropy_profile.integral()
        if not math.isfinite(h_profile):
            raise PreconditionError(
                f"entropy condition violated: declared profile {config.entropy_profile} has a "
                "divergent entropy integral")
    work = family.prefix(m_max) if m_max < len(family) else family
    series = series_for(config, work, model, horizon)
    validation = validate_series(series)
    if not validation.dfp_checks_pass:
        raise PreconditionError(f"not a decreasing series of finite partitions: "
                                f"{'; '.join(validation.violations)}")
    sep = asymptotically_separates(series)
    if not sep.separates:
        raise PreconditionError(f"partition series does not asymptotically separate the prefix: "
                                f"subset {list(sep.witness)} is never split")
    h_series = entropy_integral(series, series.delta)
    if not math.isfinite(h_series):
        raise PreconditionError("entropy condition violated: divergent entropy integral")
    case = classify_case(work, model, horizon, series)
    if case.verdict is Case.NEITHER:
        raise PreconditionError(f"configuration is neither Case A nor Case B: {case.to_dict()}")

    pieces = annulus_models(model, config.ladder)
    first, second = annulus_rates(work, pieces)
    ctx = _LadderContext(work, model, tuple(pieces), first, config.ladder, horizon, config.seed,
                         config.prefix_sizes, config.gap_member)
    out = map_replications(_ladder_rep, ctx, config.reps, config.workers, chunk=64)
    values = np.stack([o[0] for o in out])          # (R, levels)
    S = np.stack([o[1] for o in out])               # (R, levels, prefixes)
    R, n_levels = values.shape
    ladder = np.asarray(config.ladder)

    gaps = np.diff(values, axis=1)                  # gap k: level k+1 minus level k
    gap_rows = []
    gap_ok = True
    for k in range(n_levels - 1):
        g = gaps[:, k]
        var = float(g.var(ddof=1)) if R > 1 else math.nan
        centred = g - g.mean()
        m4 = float(np.mean(centred ** 4))
        se = math.sqrt(max(m4 - var ** 2, 0.0) / R) if R > 1 else math.inf
        expected = horizon * float(second[k + 1, config.gap_member])
        ok = abs(var - expected) <= 3 * se
        gap_ok = gap_ok and ok
        gap_rows.append({"k": k + 1, "h_upper": float(ladder[k]), "h_lower": float(ladder[k + 1]),
                         "variance": var, "se": se, "expected": expected,
                         "l2_norm": math.sqrt(float(np.mean(g ** 2))), "within_3se": ok})
    l2 = np.array([row["l2_norm"] for row in gap_rows])
    slope = _fit_slope(ladder[:-1], l2) if n_levels > 2 else math.nan
    levy = model.levy_density
    expected_slope = (2 - levy.alpha) / 2 if isinstance(levy, PowerLawLevy) else None

    monotone_violations = int(np.sum(np.diff(S, axis=2) < 0))
    finest = S[:, -1, -1]
    tail = [float(np.mean(finest > M)) for M in config.tail_levels]
    tail_nonincreasing = all(a >= b for a, b in zip(tail, tail[1:]))
    tail_decreases = tail_nonincreasing and len(tail) > 1 and tail[-1] < tail[0]
    s_mean = S.mean(axis=0)

    checks = [Check("monotone_in_prefix", monotone_violations == 0, monotone_violations, 0,
                    "S_{k,m} nondecreasing in m on every path and level"),
              Check("tail_curve_decreases", tail_decreases, tail[-1] if tail else None)]
    if n_levels > 1 and model.levy_density is not None:
        n_bad = sum(not row["within_3se"] for row in gap_rows)
        checks.insert(0, Check("gap_variance_within_3se", gap_ok, n_bad, 3.0,
                               "number of annuli whose gap variance misses the expected value by more than 3 SE"))
    if expected_slope is not None and math.isfinite(slope):
        ratio = slope / expected_slope
        checks.insert(1, Check("gap_decay_exponent", 0.5 <= ratio <= 2.0, slope, expected_slope,
                               "fitted exponent within a factor 2 of (2 - alpha)/2"))
    results = {
        "case": case.to_dict(), "series_counts": series.counts, "entropy_integral": h_series,
        "separation_checked_subsets": len(sep.eps_table),
        "ladder": list(config.ladder), "prefix_sizes": list(config.prefix_sizes),
        "gap_decay_exponent": slope, "expected_decay_exponent": expected_slope,
        "monotone_violations": monotone_violations, "tail": dict(zip(map(repr, config.tail_levels), tail)),
        "S_mean": s_mean.tolist(), "level_values_mean": values.mean(axis=0).tolist(),
        "seeds": {"base": config.seed, "count": R,
                  "rule": "replication r uses derive_seed(base, r); annulus j uses stream j"},
    }
    tables = {
        "gaps": gap_rows,
        "prefix_stability": [{"k": k + 1, "h": float(ladder[k]), "m": m, "S_mean": float(s_mean[k, i])}
                             for k in range(n_levels) for i, m in enumerate(config.prefix_sizes)],
        "tail": [{"M": M, "fraction": f} for M, f in zip(config.tail_levels, tail)],
    }
    return VerificationReport("boundedness", config.describe(), results, checks, tables,
                              time.perf_counter() - start)


# ---------------------------------------------------------------------------
# identity suite

def _identity_rep(ctx, r):
    family, model, t, seed = ctx
    path = simulate_finite_activity(model, t, derive_seed(seed, r))
    return [integrate_path(family, psi, path, model, t) for psi in family.index_set.elements]


def run_identity_suite(config: ExperimentConfig, decomposition_tol: float = 1e-12,
                       linearity_tol: float = 1e-10, homogeneity_tol: float = 1e-12) -> VerificationReport:
    """Decomposition, martingale mean, isometry, linearity and modulus homogeneity checks."""
    start = time.perf_counter()
    family, model = config.family, config.model
    if not model.is_finite:
        raise PreconditionError("identity suite needs a finite-activity model")
    if not isinstance(config.stopping, FixedTime):
        raise ValueError("identity suite uses a fixed horizon")
    t = config.horizon
    psis = family.index_set.elements
    checks = []
    results: dict = {"horizon": t}

    # decomposition X = X^a + X-check^a
    n_dec = min(config.identity_paths, config.reps)
    worst = 0.0
    for r in range(n_dec):
        path = simulate_finite_activity(model, t, derive_seed(config.seed, r))
        for psi in psis:
            x = integrate_path(family, psi, path, model, t)
            for a in config.a_levels:
                lo, hi = integrate_truncated(family, psi, a, path, model, t)
                worst = max(worst, abs(x - (lo + hi)))
    checks.append(Check("decomposition_identity", worst <= decomposition_tol, worst, decomposition_tol,
                        f"{n_dec} paths, a in {list(config.a_levels)}"))

    # martingale mean and isometry
    xs = np.array(map_replications(_identity_rep, (family, model, t, config.seed), config.reps,
                                   config.workers))
    rows = []
    for p, psi in enumerate(psis):
        mean, se = mean_and_se(xs[:, p])
        second_emp = float(np.mean(xs[:, p] ** 2))
        second_exp = compensator_integral(lambda s, x: family.eval(psi, s, x) ** 2, model, t,
                                          homogeneous=family.time_homogeneous,
                                          breaks=family.x_breakpoints())
        rel = abs(second_emp - second_exp) / second_exp if second_exp > 0 else abs(second_emp)
        rows.append({"psi": psi, "mean": mean, "se": se, "second_moment": second_emp,
                     "second_moment_expected": second_exp, "relative_error": rel})
        checks.append(Check(f"martingale_mean[psi={psi!r}]", abs(mean) <= 4 * se if se > 0 else mean == 0,
                            mean, 4 * se))
        checks.append(Check(f"isometry[psi={psi!r}]", rel <= 0.05, rel, 0.05))

    # linearity in the integrand
    i, j = 0, len(psis) - 1
    ca, cb = 2.0, -3.0
    base = family

    def combo(psi, s, x):
        return ca * base.eval(psis[i], s, x) + cb * base.eval(psis[j], s, x) + 0.0 * psi

    lin = FunctionFamily(family.index_set.prefix(1), combo, family.time_homogeneous,
                         family.x_breakpoints())
    worst_lin = 0.0
    for r in range(min(100, config.reps)):
        path = simulate_finite_activity(model, t, derive_seed(config.seed, r))
        lhs = integrate_path(lin, psis[0], path, model, t)
        rhs = ca * xs[r, i] + cb * xs[r, j]
        worst_lin = max(worst_lin, abs(lhs - rhs))
    checks.append(Check("linearity", worst_lin <= linearity_tol, worst_lin, linearity_tol))

    # modulus homogeneity
    series = series_for(config, family, model, t)
    m0 = quadratic_modulus(family, series, model, t).value
    worst_h = 0.0
    for c in (-2.0, 0.5, 10.0):
        mc = quadratic_modulus(family.scaled(c), series, model, t).value
        worst_h = max(worst_h, abs(mc - abs(c) * m0) / max(1.0, abs(c) * m0))
    checks.append(Check("modulus_homogeneity", worst_h <= homogeneity_tol, worst_h, homogeneity_tol))

    results.update({"decomposition_max_error": worst, "linearity_max_error": worst_lin,
                    "modulus": m0, "homogeneity_max_error": worst_h,
                    "seeds": {"base": config.seed, "count": config.reps,
                              "rule": "replication r uses derive_seed(base, r)"}})
    tables = {"members": rows, "checks": [c.to_dict() for c in checks]}
    return VerificationReport("identity", config.describe(), results, checks, tables,
                              time.perf_counter() - start)


__all__ = [
    "Check", "ExperimentConfig", "PartitionSpec", "PreconditionError", "SCHEMA_VERSION",
    "VerificationReport", "build_series", "envelope_square_mass", "map_replications", "series_for",
    "mean_and_se", "run_boundedness", "run_identity_suite", "run_maximal_i", "run_maximal_ii",
    "standard_grid",
]
