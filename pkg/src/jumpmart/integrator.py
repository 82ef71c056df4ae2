"""Compensated integrals W^psi * (mu - nu), truncation splits and path suprema."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .integrands import IntegrandFamily, envelope
from .measure_sim import (
    JumpModel, JumpPath, LevyRestriction, ModelError, compensator_integral, level_crossings,
    mark_integral, quad, simulate_finite_activity, truncate_levy,
)


def _member(family: IntegrandFamily, psi) -> int:
    try:
        return family.index_set.elements.index(psi)
    except ValueError:
        raise ValueError(f"psi={psi!r} is not in the family's index set") from None


def _levy_like(model: JumpModel) -> bool:
    return (not model.is_finite) or isinstance(model.mark_dist, LevyRestriction)


def envelope_crossings(family: IntegrandFamily, model: JumpModel, a: float, t: float = 0.0) -> list[float]:
    """Mark values where ``{envelope(t, x) <= a}`` switches."""
    env = envelope(family)
    return level_crossings(lambda x: env(t, x), model.scan_grid(), a, split_at_zero=_levy_like(model))


# ---------------------------------------------------------------------------
# compensator rates

@dataclass(frozen=True)
class DriftRates:
    """Per-unit-time compensator rates of each member (time-homogeneous families).

    ``low``/``high`` split ``full`` by the envelope indicator at level ``a``.
    """

    full: np.ndarray
    low: np.ndarray | None = None
    high: np.ndarray | None = None
    a: float | None = None

    def part(self, which: str) -> np.ndarray:
        return {"full": self.full, "low": self.low, "high": self.high}[which]


def _split_segments(family, model, member, a, t=0.0):
    """Segment integrals of W^psi at time t, with the indicator of each segment."""
    env = envelope(family)
    breaks = set(family.x_breakpoints())
    if a is not None:
        breaks.update(envelope_crossings(family, model, a, t))
    psi = family.psis[member]
    segs = model.segments(lambda x: family.eval(psi, t, x), sorted(breaks))
    if a is None:
        return segs, None
    ind = [bool(env(t, np.array([s.rep]))[0] <= a) for s in segs]
    return segs, ind


def drift_rates(family: IntegrandFamily, model: JumpModel, a: float | None = None) -> DriftRates:
    """Compensator rates ``int W^psi d nu`` per unit time for every member (memoised)."""
    key = (model, None if a is None else float(a))
    cached = family._rate_cache.get(key)
    if cached is None:
        cached = family._rate_cache[key] = _drift_rates(family, model, a)
    return cached


def _drift_rates(family, model, a):
    if not family.time_homogeneous:
        raise ValueError("drift rates are defined for time-homogeneous families only")
    if a is not None and not a > 0:
        raise ValueError(f"truncation level must be positive, got {a}")
    n = len(family)
    full = np.empty(n)
    for p in range(n):
        psi = family.psis[p]
        full[p] = mark_integral(lambda x: family.eval(psi, 0.0, x), model, family.x_breakpoints())
    if a is None:
        return DriftRates(full)
    low = np.empty(n)
    high = np.empty(n)
    for p in range(n):
        segs, ind = _split_segments(family, model, p, a)
        low[p] = math.fsum(s.value for s, i in zip(segs, ind) if i)
        high[p] = math.fsum(s.value for s, i in zip(segs, ind) if not i)
    return DriftRates(full, low, high, float(a))


def _truncated_compensators(family, member, model, a, t):
    """(low, high) compensators at time ``t``."""
    if t == 0:
        return 0.0, 0.0
    if family.time_homogeneous:
        rates = drift_rates(family, model, a)
        return t * rates.low[member], t * rates.high[member]

    def part(s, keep):
        segs, ind = _split_segments(family, model, member, a, s)
        return math.fsum(sg.value for sg, i in zip(segs, ind) if i == keep)

    return quad(lambda s: part(s, True), 0.0, t), quad(lambda s: part(s, False), 0.0, t)


# ---------------------------------------------------------------------------
# pointwise integrals

def _check_time(path: JumpPath, t: float):
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t > path.horizon:
        raise ValueError(f"t={t} beyond the path horizon {path.horizon}")


def integrate_path(family: IntegrandFamily, psi, path: JumpPath, model: JumpModel, t: float) -> float:
    """``X_t^psi = sum_{s_i <= t} W^psi(s_i, x_i) - int_0^t int W^psi d nu``."""
    _check_time(path, t)
    if not model.is_finite:
        raise ModelError("integrate_path needs a finite-activity model; use integrate_ladder")
    k = int(np.searchsorted(path.times, t, side="right"))
    jumps = math.fsum(np.asarray(family.eval(psi, path.times[:k], path.marks[:k]), dtype=float).tolist())
    if family.time_homogeneous:
        comp = t * drift_rates(family, model).full[_member(family, psi)] if t > 0 else 0.0
    else:
        comp = compensator_integral(lambda s, x: family.eval(psi, s, x), model, t,
                                    breaks=family.x_breakpoints())
    return jumps - comp


def integrate_truncated(family: IntegrandFamily, psi, a: float, path: JumpPath, model: JumpModel,
                        t: float) -> tuple[float, float]:
    """``(X_t^{a,psi}, X-check_t^{a,psi})``: the split of X_t^psi by ``{envelope <= a}``."""
    if not a > 0:
        raise ValueError(f"truncation level must be positive, got {a}")
    _check_time(path, t)
    if not model.is_finite:
        raise ModelError("integrate_truncated needs a finite-activity model")
    member = _member(family, psi)
    k = int(np.searchsorted(path.times, t, side="right"))
    s, x = path.times[:k], path.marks[:k]
    w = np.asarray(family.eval(psi, s, x), dtype=float)
    keep = envelope(family)(s, x) <= a
    c_low, c_high = _truncated_compensators(family, member, model, a, t)
    low = math.fsum(w[keep].tolist()) - c_low
    high = math.fsum(w[~keep].tolist()) - c_high
    return low, high


# ---------------------------------------------------------------------------
# checkpoints and suprema

def checkpoint_grid(times: np.ndarray, horizon: float, drift_grid: int) -> np.ndarray:
    """Shape ``(n+1, drift_grid+1)``: row i spans segment ``[s_i, s_{i+1}]`` (s_0=0, s_{n+1}=horizon)."""
    bounds = np.concatenate([[0.0], times, [horizon]])
    frac = np.arange(drift_grid + 1) / drift_grid
    return bounds[:-1, None] + (bounds[1:] - bounds[:-1])[:, None] * frac[None, :]


def _compensator_curve(family, members, model, grid, part, a):
    """Compensators of the members at every grid time (non-homogeneous families)."""
    flat = grid.ravel()
    order = np.argsort(flat, kind="stable")
    out = np.zeros((len(members), flat.size))
    for r, p in enumerate(members):
        psi = family.psis[p]

        def rate(s):
            if part == "full":
                return mark_integral(lambda x: family.eval(psi, s, x), model, family.x_breakpoints())
            segs, ind = _split_segments(family, model, p, a, s)
            keep = part == "low"
            return math.fsum(sg.value for sg, i in zip(segs, ind) if i == keep)

        acc, prev = 0.0, 0.0
        for idx in order:
            cur = flat[idx]
            if cur > prev:
                acc += quad(rate, prev, cur)
                prev = cur
            out[r, idx] = acc
    return out.reshape((len(members),) + grid.shape)


@dataclass(frozen=True)
class ProcessPath:
    """Checkpoints ``(time, value)`` of one compensated integral."""

    times: np.ndarray
    values: np.ndarray
    psi: float
    a: float | None
    part: str
    truncation_floor: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("time,value\n")
        for t, v in zip(self.times.tolist(), self.values.tolist()):
            buf.write(f"{t!r},{v!r}\n")
        return buf.getvalue()


def _member_values(family, members, path, model, horizon, drift_grid, a, part, drifts):
    """Values of the members on the checkpoint grid, shape ``(P, n+1, g+1)``."""
    if drift_grid < 1:
        raise ValueError("drift_grid must be at least 1")
    if part != "full" and a is None:
        raise ValueError(f"part={part!r} needs a truncation level")
    k = int(np.searchsorted(path.times, horizon, side="right"))
    s, x = path.times[:k], path.marks[:k]
    w = np.asarray(family.values(s, x, members), dtype=float)
    if part != "full":
        keep = envelope(family)(s, x) <= a
        w = w * (keep if part == "low" else ~keep)
    levels = np.concatenate([np.zeros((len(members), 1)), np.cumsum(w, axis=1)], axis=1)
    grid = checkpoint_grid(s, horizon, drift_grid)
    if family.time_homogeneous:
        if drifts is None:
            drifts = drift_rates(family, model, a if part != "full" else None)
        c = drifts.part(part)[list(members)]
        comp = c[:, None, None] * grid[None, :, :]
    else:
        comp = _compensator_curve(family, members, model, grid, part, a)
    return grid, levels[:, :, None] - comp, w


def process_path(family: IntegrandFamily, psi, path: JumpPath, model: JumpModel, drift_grid: int = 16,
                 a: float | None = None, part: str = "full") -> ProcessPath:
    """Checkpoints of ``X^psi`` (or a truncated part): 0, jump times, horizon and the drift grid."""
    member = _member(family, psi)
    grid, vals, w = _member_values(family, [member], path, model, path.horizon, drift_grid, a, part, None)
    times = grid.ravel()
    values = vals[0].ravel()
    # the last grid point of segment i is the left limit at jump i+1; the next
    # row starts with the value after that jump
    return ProcessPath(times, values, float(psi), a, part, path.truncation_floor)


@dataclass(frozen=True)
class SupStatistic:
    value: float
    n_checkpoints: int
    drift_grid: int
    grid_error_bound: float
    times: np.ndarray


def sup_statistics(family: IntegrandFamily, cells: Sequence[Sequence[int]], path: JumpPath,
                   model: JumpModel, horizon: float, drift_grid: int = 16, a: float | None = None,
                   part: str | None = None, drifts: DriftRates | None = None) -> SupStatistic:
    """``sup_t max_cells sup_{psi,phi in cell} |X_t^psi - X_t^phi|`` over checkpoints.

    With ``a`` set the truncated processes ``X^{a,psi}`` are used (``part``
    defaults to ``"low"``).  Checkpoints are 0, both one-sided values at every
    jump, the horizon, and ``drift_grid`` equal steps per inter-jump segment.
    ``grid_error_bound`` bounds the gap to the continuous-time supremum by
    drift slope times grid spacing.
    """
    if drift_grid < 1:
        raise ValueError("drift_grid must be at least 1")
    if horizon > path.horizon:
        raise ValueError(f"horizon {horizon} beyond the path horizon {path.horizon}")
    part = part or ("low" if a is not None else "full")
    if family.time_homogeneous and drifts is None:
        drifts = drift_rates(family, model, a if part != "full" else None)
    members = sorted({int(i) for c in cells for i in c})
    pos = {p: r for r, p in enumerate(members)}
    grid, vals, _ = _member_values(family, members, path, model, horizon, drift_grid, a, part, drifts)
    best = 0.0
    slope = 0.0
    for cell in cells:
        rows = [pos[int(i)] for i in cell]
        v = vals[rows]
        best = max(best, float(np.max(v.max(axis=0) - v.min(axis=0))))
        if family.time_homogeneous and len(rows) > 1:
            cc = drifts.part(part)[[members[r] for r in rows]]
            slope = max(slope, float(cc.max() - cc.min()))
    seg = float(np.max(np.diff(np.concatenate([[0.0], grid[:, 0], [horizon]])))) if grid.size else horizon
    if not family.time_homogeneous:
        diffs = np.abs(np.diff(vals, axis=2))
        slope = float(diffs.max()) * drift_grid / seg if diffs.size and seg > 0 else 0.0
    return SupStatistic(best, int(grid.size), drift_grid, slope * seg / drift_grid, grid.ravel())


# ---------------------------------------------------------------------------
# truncation ladders

def _check_ladder(ladder: Sequence[float]) -> list[float]:
    hs = [float(h) for h in ladder]
    if not hs:
        raise ValueError("empty ladder")
    if any(h <= 0 for h in hs):
        raise ModelError("ladder levels must be positive (divergent annulus rate at h=0)")
    if any(a <= b for a, b in zip(hs, hs[1:])):
        raise ValueError("ladder levels must be strictly decreasing")
    return hs


def annulus_models(model: JumpModel, ladder: Sequence[float]) -> list[JumpModel]:
    """Finite-activity pieces: ``|x| > h_1``, then ``h_{k+1} < |x| <= h_k``.

    A finite-activity model is its own one-level ladder.
    """
    if model.is_finite:
        if len(ladder) > 1:
            raise ValueError("a finite-activity model only admits a one-level ladder")
        return [model]
    hs = _check_ladder(ladder)
    out = [truncate_levy(model, hs[0])]
    for hi, lo in zip(hs, hs[1:]):
        out.append(truncate_levy(model, lo, upper=hi))
    return out


def simulate_ladder(model: JumpModel, horizon: float, ladder: Sequence[float], seed: int,
                    pieces: list[JumpModel] | None = None) -> list[JumpPath]:
    """Coupled annulus paths; annulus ``j`` draws from stream ``j`` of ``seed``."""
    pieces = pieces or annulus_models(model, ladder)
    return [simulate_finite_activity(m, horizon, seed, stream=j) for j, m in enumerate(pieces)]


def annulus_rates(family: IntegrandFamily, pieces: list[JumpModel]) -> tuple[np.ndarray, np.ndarray]:
    """``(int W^psi d nu, int (W^psi)^2 d nu)`` per annulus and member, per unit time."""
    if not family.time_homogeneous:
        raise ValueError("ladder statistics need a time-homogeneous family")
    first = np.array([drift_rates(family, m).full for m in pieces])
    second = np.empty_like(first)
    for j, m in enumerate(pieces):
        for p in range(len(family)):
            psi = family.psis[p]
            second[j, p] = mark_integral(lambda x: family.eval(psi, 0.0, x) ** 2, m, family.x_breakpoints())
    return first, second


def _upper_edges(pieces: list[JumpModel]) -> list[float]:
    out = []
    for m in pieces:
        if m.truncation_ceiling is not None:
            out.append(m.truncation_ceiling)
        else:
            lo, hi = m.support()
            out.append(max(abs(lo), abs(hi)))
    return out


@dataclass(frozen=True)
class LadderStatistics:
    """Per-path ladder output: ``values[k, p]`` at the horizon and ``sups[k, p]`` over time."""

    values: np.ndarray
    sups: np.ndarray


def ladder_path_statistics(family: IntegrandFamily, pieces: list[JumpModel], paths: list[JumpPath],
                           rates: np.ndarray, horizon: float, with_sups: bool = True) -> LadderStatistics:
    """Values and time-suprema of ``|X^{(h_k), psi}|`` for every level and member.

    Level k uses annuli ``0..k``.  Annuli on which a member vanishes (upper
    edge at or below ``vanishes_below(psi)``) are skipped for that member;
    its path at level k then equals its path at the last relevant level.
    Drift is linear between jumps, so the time supremum is attained at
    one-sided jump values, 0, or the horizon.
    """
    n_levels, n_members = len(pieces), len(family)
    edges = _upper_edges(pieces)
    floors = [family.vanishes_below(family.psis[p]) for p in range(n_members)]
    last_rel = np.array([max([j for j in range(n_levels) if edges[j] > floors[p]], default=-1)
                         for p in range(n_members)])
    sums = np.zeros((n_levels, n_members))
    for j, path in enumerate(paths):
        live = [p for p in range(n_members) if last_rel[p] >= j]
        if live and len(path):
            sums[j, live] = np.asarray(family.values(0.0, path.marks, live)).sum(axis=1)
    values = np.cumsum(sums - rates * horizon, axis=0)
    if not with_sups:
        return LadderStatistics(values, np.empty((0, n_members)))

    cum_rates = np.cumsum(rates, axis=0)
    eff_sup = np.full((n_levels, n_members), np.nan)
    need = int(last_rel.max()) if n_members else -1
    merged_t = np.empty(0)
    merged_x = np.empty(0)
    for e in range(need + 1):
        if len(paths[e]):
            t_all = np.concatenate([merged_t, paths[e].times])
            x_all = np.concatenate([merged_x, paths[e].marks])
            order = np.argsort(t_all, kind="stable")
            merged_t, merged_x = t_all[order], x_all[order]
        for p in range(n_members):
            if last_rel[p] < e:
                continue
            w = np.asarray(family.values(0.0, merged_x, [p]))[0]
            c = cum_rates[e, p]
            after = np.cumsum(w)
            before = after - w
            drift = c * merged_t
            cand = [0.0, abs(after[-1] - c * horizon) if w.size else abs(c * horizon)]
            if w.size:
                cand.append(float(np.max(np.abs(after - drift))))
                cand.append(float(np.max(np.abs(before - drift))))
            eff_sup[e, p] = max(cand)
    sups = np.zeros((n_levels, n_members))
    for p in range(n_members):
        if last_rel[p] < 0:
            # member vanishes on every annulus: zero process
            continue
        for k in range(n_levels):
            sups[k, p] = eff_sup[min(k, last_rel[p]), p]
    return LadderStatistics(values, sups)


@dataclass(frozen=True)
class LadderResult:
    levels: tuple[float, ...]
    values: np.ndarray
    gaps: np.ndarray
    gap_variance_expected: np.ndarray
    coupled: bool = True

    def to_json(self) -> str:
        rows = []
        for k, h in enumerate(self.levels):
            rows.append({
                "level": k + 1, "h": h, "value": float(self.values[k]),
                "gap": None if k == 0 else float(self.gaps[k - 1]),
                "gap_variance_expected": None if k == 0 else float(self.gap_variance_expected[k - 1]),
            })
        return json.dumps({"coupled": self.coupled, "levels": rows}, indent=2, sort_keys=True)


def integrate_ladder(family: IntegrandFamily, psi, model: JumpModel, horizon: float,
                     ladder: Sequence[float], seed: int) -> LadderResult:
    """``X_horizon^psi`` along coupled truncations ``h_1 > h_2 > ...``.

    Level k+1 adds the jumps with ``h_{k+1} < |x| <= h_k`` to level k's path.
    ``gap_variance_expected[k]`` is ``horizon * int_annulus (W^psi)^2 d nu``.
    """
    member = _member(family, psi)
    pieces = annulus_models(model, ladder)
    paths = simulate_ladder(model, horizon, ladder, seed, pieces)
    first, second = annulus_rates(family, pieces)
    stats = ladder_path_statistics(family, pieces, paths, first, horizon, with_sups=False)
    values = stats.values[:, member]
    gaps = np.abs(np.diff(values))
    return LadderResult(tuple(float(h) for h in ladder), values, gaps, horizon * second[1:, member])


__all__ = [
    "DriftRates", "LadderResult", "LadderStatistics", "ProcessPath", "SupStatistic",
    "annulus_models", "annulus_rates", "checkpoint_grid", "drift_rates", "envelope_crossings",
    "integrate_ladder", "integrate_path", "integrate_truncated", "ladder_path_statistics",
    "process_path", "simulate_ladder", "sup_statistics",
]
