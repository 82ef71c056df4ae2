"""Integrand families W = {W^psi}, envelope, oscillations and the quadratic modulus."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .measure_sim import JumpModel, QuadratureError, compensator_integral
from .partitions import IndexSet, PartitionSeries


class IntegrandFamily:
    """Deterministic integrands ``W^psi(t, x)`` indexed by a finite prefix.

    Subclasses implement :meth:`kernel`, which must broadcast over numpy
    arrays in all three arguments.
    """

    name = "custom"
    time_homogeneous = True

    def __init__(self, index_set: IndexSet):
        self.index_set = index_set
        self._envelope_cache: dict = {}
        self._oscillation_cache: dict = {}
        self._rate_cache: dict = {}

    def kernel(self, psi, t, x):
        raise NotImplementedError

    @property
    def psis(self) -> np.ndarray:
        return np.asarray(self.index_set.elements, dtype=float)

    def __len__(self):
        return len(self.index_set)

    def eval(self, psi, t, x):
        return self.kernel(psi, t, x)

    def values(self, t, x, members: Sequence[int] | None = None) -> np.ndarray:
        """Array of shape ``(len(members),) + broadcast(t, x).shape``."""
        psis = self.psis if members is None else self.psis[list(members)]
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        shape = np.broadcast_shapes(t.shape, x.shape)
        p = psis.reshape((-1,) + (1,) * len(shape))
        return np.broadcast_to(self.kernel(p, t, x), (len(psis),) + shape)

    def x_breakpoints(self, members: Sequence[int] | None = None) -> tuple[float, ...]:
        """Mark values where some member is discontinuous in x."""
        return ()

    def vanishes_below(self, psi) -> float:
        """``r`` with ``W^psi(t, x) = 0`` whenever ``|x| <= r``."""
        return 0.0

    def with_index_set(self, index_set: IndexSet) -> "IntegrandFamily":
        return type(self)(index_set)

    def prefix(self, m: int) -> "IntegrandFamily":
        return self.with_index_set(self.index_set.prefix(m))

    def scaled(self, c: float) -> "IntegrandFamily":
        return ScaledFamily(self, c)

    def to_dict(self) -> dict:
        return {"name": self.name, "psi": list(self.index_set.elements)}

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_envelope_cache"] = {}
        state["_oscillation_cache"] = {}
        state["_rate_cache"] = {}
        return state


class LinearFamily(IntegrandFamily):
    """``W^psi(t, x) = psi * x``."""

    name = "linear"

    def kernel(self, psi, t, x):
        return psi * x + 0.0 * t


class ThresholdFamily(IntegrandFamily):
    """``W^psi(t, x) = x * 1{|x| > psi}``."""

    name = "threshold"

    def kernel(self, psi, t, x):
        return np.where(np.abs(x) > psi, x, 0.0) + 0.0 * t

    def x_breakpoints(self, members=None):
        psis = self.psis if members is None else self.psis[list(members)]
        pos = sorted({float(p) for p in psis if p > 0})
        return tuple([-p for p in reversed(pos)] + pos)

    def vanishes_below(self, psi):
        return max(float(psi), 0.0)


class SineFamily(IntegrandFamily):
    """``W^psi(t, x) = sin(psi * x)``."""

    name = "sine"

    def kernel(self, psi, t, x):
        return np.sin(psi * x) + 0.0 * t


class FunctionFamily(IntegrandFamily):
    """Family built from a broadcasting callable ``func(psi, t, x)``."""

    def __init__(self, index_set: IndexSet, func: Callable, time_homogeneous: bool = True,
                 breakpoints: Sequence[float] = ()):
        super().__init__(index_set)
        self.func = func
        self.time_homogeneous = time_homogeneous
        self._breaks = tuple(breakpoints)

    def kernel(self, psi, t, x):
        return self.func(psi, t, x)

    def x_breakpoints(self, members=None):
        return self._breaks

    def with_index_set(self, index_set):
        return FunctionFamily(index_set, self.func, self.time_homogeneous, self._breaks)


class ScaledFamily(IntegrandFamily):
    """``c * W^psi`` for a base family W."""

    def __init__(self, base: IntegrandFamily, c: float):
        super().__init__(base.index_set)
        self.base = base
        self.c = float(c)
        self.name = f"{base.name}*{self.c!r}"
        self.time_homogeneous = base.time_homogeneous

    def kernel(self, psi, t, x):
        return self.c * self.base.kernel(psi, t, x)

    def x_breakpoints(self, members=None):
        return self.base.x_breakpoints(members)

    def vanishes_below(self, psi):
        return self.base.vanishes_below(psi)

    def with_index_set(self, index_set):
        return ScaledFamily(self.base.with_index_set(index_set), self.c)

    def to_dict(self):
        return {**self.base.to_dict(), "scale": self.c}


CATALOG = {"linear": LinearFamily, "threshold": ThresholdFamily, "sine": SineFamily}


def van_der_corput(n: int, base: int = 2) -> list[float]:
    """First ``n`` points of the base-``base`` radical-inverse sequence (starts at 0)."""
    out = []
    for i in range(n):
        q, denom, k = 0.0, 1.0, i
        while k:
            denom *= base
            k, r = divmod(k, base)
            q += r / denom
        out.append(q)
    return out


def psi_grid(kind: str, n: int, low: float = 0.0, high: float = 1.0) -> list[float]:
    """``"grid"``: n equispaced points on [low, high]; ``"dyadic"``: van der Corput prefix of [low, high)."""
    if n < 1:
        raise ValueError("need at least one index")
    if kind == "grid":
        if n == 1:
            return [float(low)]
        return [float(v) for v in np.linspace(low, high, n)]
    if kind == "dyadic":
        return [low + (high - low) * v for v in van_der_corput(n)]
    raise ValueError(f"unknown psi grid kind {kind!r}")


def make_family(name: str, psis: Sequence[float], scale: float = 1.0) -> IntegrandFamily:
    if name not in CATALOG:
        raise ValueError(f"unknown integrand family {name!r}; choose from {sorted(CATALOG)}")
    family = CATALOG[name](IndexSet.from_coordinates(psis))
    return family if scale == 1.0 else family.scaled(scale)


# ---------------------------------------------------------------------------
# envelope and oscillation

def envelope(family: IntegrandFamily) -> Callable:
    """Evaluator ``(t, x) -> max_psi |W^psi(t, x)|`` over the prefix."""
    fn = family._envelope_cache.get("all")
    if fn is None:
        def fn(t, x):
            return np.max(np.abs(family.values(t, x)), axis=0)
        family._envelope_cache["all"] = fn
    return fn


def oscillation(family: IntegrandFamily, cell: Sequence[int]) -> Callable:
    """Evaluator ``(t, x) -> max_{psi,phi in cell} |W^psi - W^phi|``."""
    key = tuple(int(i) for i in cell)
    if not key:
        raise ValueError("oscillation of an empty cell")
    fn = family._oscillation_cache.get(key)
    if fn is None:
        if len(key) == 1:
            def fn(t, x):
                return np.zeros(np.broadcast_shapes(np.shape(t), np.shape(x)))
        else:
            def fn(t, x):
                v = family.values(t, x, key)
                return np.max(v, axis=0) - np.min(v, axis=0)
        family._oscillation_cache[key] = fn
    return fn


def _nu_integral(g, family: IntegrandFamily, model: JumpModel, t: float, members=None) -> float:
    return compensator_integral(g, model, t, homogeneous=family.time_homogeneous,
                                breaks=family.x_breakpoints(members))


def intrinsic_distances(family: IntegrandFamily, model: JumpModel, t: float) -> np.ndarray:
    """``d(psi, phi) = sqrt(int |W^psi - W^phi|^2 d nu_t)`` for all pairs."""
    n = len(family)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            osc = oscillation(family, (i, j))
            d[i, j] = d[j, i] = math.sqrt(_nu_integral(lambda s, x: osc(s, x) ** 2,
                                                       family, model, t, (i, j)))
    return d


# ---------------------------------------------------------------------------
# quadratic modulus

@dataclass(frozen=True)
class LevelModulus:
    level: int
    eps: Fraction
    eps_next: Fraction | None
    n_cells: int
    v_max: float
    value: float


@dataclass(frozen=True)
class ModulusResult:
    value: float
    levels: tuple[LevelModulus, ...]

    def to_rows(self) -> list[dict]:
        return [{"level": lv.level, "eps": str(lv.eps),
                 "eps_next": None if lv.eps_next is None else str(lv.eps_next),
                 "n_cells": lv.n_cells, "v_max": lv.v_max, "value": lv.value}
                for lv in self.levels]


def quadratic_modulus(family: IntegrandFamily, series: PartitionSeries, model: JumpModel,
                      t: float) -> ModulusResult:
    """Quadratic Pi-modulus at time ``t``.

    On the constancy interval ``(eps_{j+1}, eps_j]`` the supremum of
    ``sqrt(v)/eps`` is the one-sided limit ``sqrt(v)/eps_{j+1}``.  On the
    last interval ``(0, eps_J]`` it is 0 when all cells have zero oscillation
    integral and ``inf`` otherwise.  Divergent cell integrals give ``inf``.
    """
    if series.size != len(family):
        raise ValueError(f"series partitions {series.size} indices, family has {len(family)}")
    rows = []
    n_levels = len(series.levels)
    for j, lvl in enumerate(series.levels):
        vs = []
        for cell in lvl:
            if len(cell) == 1:
                vs.append(0.0)
                continue
            osc = oscillation(family, cell)
            try:
                vs.append(_nu_integral(lambda s, x: osc(s, x) ** 2, family, model, t, cell))
            except QuadratureError:
                vs.append(math.inf)
        v_max = max(vs)
        if j + 1 < n_levels:
            nxt = series.breakpoints[j + 1]
            value = math.sqrt(v_max) / float(nxt)
        else:
            nxt = None
            value = 0.0 if v_max == 0.0 else math.inf
        rows.append(LevelModulus(j, series.breakpoints[j], nxt, len(lvl), v_max, value))
    return ModulusResult(max(r.value for r in rows), tuple(rows))


__all__ = [
    "CATALOG", "FunctionFamily", "IntegrandFamily", "LevelModulus", "LinearFamily",
    "ModulusResult", "ScaledFamily", "SineFamily", "ThresholdFamily", "envelope",
    "intrinsic_distances", "make_family", "oscillation", "psi_grid", "quadratic_modulus",
    "van_der_corput",
]
