"""Acceptance criteria as runnable checks.

Each ``criterion_N`` returns a :class:`CriterionResult` whose ``passed``
includes the runtime limit.  Tolerances are fixed here; ``reps`` overrides
exist for quick smoke runs only and are recorded in the result.
"""

from __future__ import annotations

import contextlib
import io
import json
import math
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .integrands import FunctionFamily, make_family, psi_grid, quadratic_modulus
from .integrator import integrate_path, integrate_truncated
from .measure_sim import JumpModel, Normal, PowerLawLevy, Uniform, derive_seed, simulate_finite_activity
from .oracles import (
    entropy_integral_quadrature, power_annulus_second_moment, random_series, separation_table,
)
from .partitions import IndexSet, PartitionSeries, asymptotically_separates, entropy_integral
from .verify import ExperimentConfig, build_series, run_boundedness, run_maximal_i, run_maximal_ii, standard_grid


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    runtime: float
    limit: float | None
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        limit = f" (limit {self.limit:g}s)" if self.limit is not None else ""
        return (f"{'PASS' if self.passed else 'FAIL'} criterion {self.number}: {self.title} "
                f"[{self.runtime:.1f}s{limit}] {self.summary()}")

    def summary(self) -> str:
        keys = self.detail.get("_summary", [])
        return ", ".join(f"{k}={self.detail[k]}" for k in keys)

    def to_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "detail": {k: v for k, v in self.detail.items() if k != "_summary"}}


def _finish(number, title, ok, start, limit, detail, summary_keys):
    runtime = time.perf_counter() - start
    detail = dict(detail, runtime_ok=limit is None or runtime < limit, _summary=list(summary_keys))
    return CriterionResult(number, title, bool(ok and detail["runtime_ok"]), runtime, limit, detail)


TWO_LEVEL = PartitionSeries((Fraction(1), Fraction(1, 2)), (((0, 1),), ((0,), (1,))), 2, nested=True)


# ---------------------------------------------------------------------------

def criterion_1(seed: int = 0, paths: int = 1000) -> CriterionResult:
    """Decomposition identity over three catalog families."""
    start = time.perf_counter()
    cases = [
        ("linear", make_family("linear", [1.0]), JumpModel.finite(2.0, Uniform(-1.0, 1.0)), (0.5,)),
        ("linear3", make_family("linear", [0.0, 0.5, 1.0]), JumpModel.finite(2.0, Normal(0.0, 1.0)),
         (0.25, 0.5, 1.0)),
        ("threshold", make_family("threshold", [0.0, 0.3, 0.7]), JumpModel.finite(3.0, Normal(0.0, 1.0)),
         (0.2, 0.5, 1.5)),
        ("sine", make_family("sine", [0.5, 1.0, 2.0]), JumpModel.finite(2.0, Uniform(-2.0, 2.0)),
         (0.3, 0.6, 0.9)),
    ]
    worst = {}
    for name, fam, model, levels in cases:
        w = 0.0
        for r in range(paths):
            path = simulate_finite_activity(model, 1.0, derive_seed(seed, r))
            for psi in fam.index_set.elements:
                x = integrate_path(fam, psi, path, model, 1.0)
                for a in levels:
                    lo, hi = integrate_truncated(fam, psi, a, path, model, 1.0)
                    w = max(w, abs(x - (lo + hi)))
        worst[name] = w
    max_err = max(worst.values())
    return _finish(1, "decomposition identity X = X^a + Xcheck^a", max_err <= 1e-12, start, 10.0,
                   {"max_error": max_err, "per_family": worst, "paths": paths}, ["max_error"])


def criterion_2(seed: int = 0, reps: int = 100_000) -> CriterionResult:
    """Martingale mean and isometry for the linear family."""
    start = time.perf_counter()
    fam = make_family("linear", [1.0])
    model = JumpModel.finite(2.0, Normal(0.0, 1.0))
    xs = np.array([integrate_path(fam, 1.0, simulate_finite_activity(model, 1.0, derive_seed(seed, r)),
                                  model, 1.0) for r in range(reps)])
    mean = float(xs.mean())
    se = float(xs.std(ddof=1) / math.sqrt(reps))
    second = float(np.mean(xs ** 2))
    expected = 2.0  # rate * E[x^2] * t
    rel = abs(second - expected) / expected
    ok = abs(mean) <= 4 * se and rel <= 0.05
    return _finish(2, "martingale mean and isometry", ok, start, 60.0,
                   {"mean": mean, "se": se, "second_moment": second, "relative_error": rel, "reps": reps},
                   ["mean", "se", "relative_error"])


def criterion_3() -> CriterionResult:
    """Exact entropy sums against adaptive quadrature."""
    start = time.perf_counter()
    constant = PartitionSeries((Fraction(1),), (((0,),),), 1)
    cases = {
        "N=1 on (0,1]": (constant, Fraction(1), math.sqrt(math.log(2))),
        "two-level": (TWO_LEVEL, Fraction(1), 0.5 * math.sqrt(math.log(2)) + 0.5 * math.sqrt(math.log(3))),
    }
    rng = np.random.default_rng(12345)
    for i in range(5):
        s = random_series(rng, int(rng.integers(2, 12)), int(rng.integers(2, 7)))
        cases[f"random-{i}"] = (s, s.delta, None)
    worst = 0.0
    detail = {}
    for name, (series, delta, closed) in cases.items():
        exact = entropy_integral(series, delta)
        oracle = entropy_integral_quadrature(series, delta)
        rel = abs(exact - oracle) / abs(oracle)
        if closed is not None:
            rel = max(rel, abs(exact - closed) / closed)
        worst = max(worst, rel)
        detail[name] = {"exact": exact, "quadrature": oracle, "closed_form": closed}
    return _finish(3, "entropy integral exactness", worst <= 1e-8, start, None,
                   {"max_relative_error": worst, "cases": detail}, ["max_relative_error"])


def criterion_4() -> CriterionResult:
    """Modulus value, homogeneity and monotonicity."""
    start = time.perf_counter()
    fam = make_family("linear", [0.0, 1.0])
    model = JumpModel.finite(1.0, Uniform(-1.0, 1.0))
    m = quadratic_modulus(fam, TWO_LEVEL, model, 1.0).value
    value_err = abs(m - 2 / math.sqrt(3))

    hom = 0.0
    setups = [(fam, TWO_LEVEL, model)]
    big = make_family("threshold", psi_grid("grid", 8, 0.0, 1.5))
    big_model = JumpModel.finite(2.0, Normal(0.0, 1.0))
    big_series, _ = build_series(big, big_model, 1.0)
    setups.append((big, big_series, big_model))
    for f, s, mdl in setups:
        base = quadratic_modulus(f, s, mdl, 1.0).value
        for c in (-2.0, 0.5, 10.0):
            hom = max(hom, abs(quadratic_modulus(f.scaled(c), s, mdl, 1.0).value - abs(c) * base))

    ts = np.linspace(0.1, 1.0, 10)
    inhom = FunctionFamily(IndexSet.from_coordinates([0.0, 0.5, 1.0]),
                           lambda psi, t, x: psi * x * (1.0 + t), time_homogeneous=False)
    inhom_series, _ = build_series(inhom, model, 1.0)
    curves = {
        "linear": [quadratic_modulus(fam, TWO_LEVEL, model, float(t)).value for t in ts],
        "threshold": [quadratic_modulus(big, big_series, big_model, float(t)).value for t in ts],
        "time-dependent": [quadratic_modulus(inhom, inhom_series, model, float(t)).value for t in ts],
    }
    mono_t = all(a <= b for c in curves.values() for a, b in zip(c, c[1:]))
    by_m = [quadratic_modulus(big.prefix(k), big_series.restrict(k), big_model, 1.0).value
            for k in range(1, len(big) + 1)]
    mono_m = all(a <= b for a, b in zip(by_m, by_m[1:]))
    ok = value_err <= 1e-10 and hom <= 1e-12 and mono_t and mono_m
    return _finish(4, "quadratic modulus value, homogeneity, monotonicity", ok, start, None,
                   {"modulus": m, "value_error": value_err, "homogeneity_error": hom,
                    "monotone_in_t": mono_t, "monotone_in_m": mono_m, "by_prefix": by_m},
                   ["value_error", "homogeneity_error", "monotone_in_t", "monotone_in_m"])


def _ratio_grid(number, runner, seed, reps):
    start = time.perf_counter()
    rows = []
    for cfg in standard_grid(reps=reps, seed=seed):
        rep = runner(cfg)
        r = rep.results
        rows.append({"name": cfg.name, "family": cfg.family.name, "rate": cfg.model.rate,
                     "size": len(cfg.family), "ratio": r["ratio"], "rel_se": r["rel_se"],
                     "lhs": r["lhs_mean"], "rhs": r["rhs"], "K": r["K"]})
    finite = all(math.isfinite(row["ratio"]) for row in rows)
    max_ratio = max(row["ratio"] for row in rows)
    max_rel_se = max(row["rel_se"] for row in rows)
    growth = []
    for fam in ("linear", "threshold"):
        for rate in (1.0, 4.0):
            sel = {row["size"]: row["ratio"] for row in rows if row["family"] == fam and row["rate"] == rate}
            growth.append(sel[32] / sel[2])
    max_growth = max(growth)
    ok = finite and max_rel_se <= 0.10 and max_ratio <= 8.0 and max_growth <= 2.0
    title = "ratio uniformity, " + ("truncated maximum vs K*H(delta)" if number == 5
                                    else "untruncated maximum vs K*H(Delta) + L/(Delta K)")
    return _finish(number, title, ok, start, 600.0,
                   {"max_ratio": max_ratio, "max_rel_se": max_rel_se, "max_growth_32_vs_2": max_growth,
                    "reps": reps, "rows": rows},
                   ["max_ratio", "max_rel_se", "max_growth_32_vs_2"])


def criterion_5(seed: int = 0, reps: int = 20_000) -> CriterionResult:
    return _ratio_grid(5, run_maximal_i, seed, reps)


def criterion_6(seed: int = 0, reps: int = 20_000) -> CriterionResult:
    return _ratio_grid(6, run_maximal_ii, seed, reps)


def criterion_7(seed: int = 0, reps: int = 10_000) -> CriterionResult:
    """Coupled-ladder diagnostics for two stability indices."""
    start = time.perf_counter()
    ladder = tuple(2.0 ** -k for k in range(1, 13))
    out = {}
    ok = True
    for alpha in (0.5, 1.5):
        cfg = ExperimentConfig(JumpModel.infinite(PowerLawLevy(alpha)),
                               make_family("threshold", psi_grid("dyadic", 16)), reps=reps, seed=seed,
                               ladder=ladder, prefix_sizes=(1, 2, 4, 8, 16), name=f"ladder-alpha{alpha}")
        rep = run_boundedness(cfg)
        gaps = rep.tables["gaps"]
        misses = []
        for row in gaps:
            closed = power_annulus_second_moment(alpha, row["h_lower"], row["h_upper"])
            if abs(row["variance"] - closed) > 3 * row["se"]:
                misses.append(row["k"])
        expected = (2 - alpha) / 2
        slope = rep.results["gap_decay_exponent"]
        slope_ok = 0.5 <= slope / expected <= 2.0
        tail = [f for f in rep.results["tail"].values()]
        tail_ok = all(a >= b for a, b in zip(tail, tail[1:])) and tail[-1] < tail[0]
        mono_ok = rep.results["monotone_violations"] == 0
        a_ok = not misses
        ok = ok and a_ok and slope_ok and tail_ok and mono_ok
        out[f"alpha={alpha}"] = {"gap_misses": misses, "slope": slope, "expected_slope": expected,
                                 "monotone_violations": rep.results["monotone_violations"], "tail": tail,
                                 "a": a_ok, "b": slope_ok, "c": mono_ok and tail_ok}
    summary = {k: f"a={v['a']} b={v['b']} (slope {v['slope']:.3f}) c={v['c']}" for k, v in out.items()}
    return _finish(7, "coupled ladder gaps, decay exponent, prefix monotonicity and tails", ok, start, 900.0,
                   {**out, **{f"summary {k}": v for k, v in summary.items()}, "reps": reps},
                   [f"summary {k}" for k in summary])


def criterion_8(seed: int = 2024, n_series: int = 50) -> CriterionResult:
    """Brute-force separation against a direct reading of the definition."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    mismatches = []
    n_true = 0
    for i in range(n_series):
        s = random_series(rng, int(rng.integers(1, 17)), int(rng.integers(1, 7)))
        got = asymptotically_separates(s, max_f=3)
        sep, table, witness = separation_table(s, max_f=3)
        n_true += sep
        same = got.separates == sep and (not sep or got.eps_table == table) and got.witness == witness
        if not same:
            mismatches.append(i)
    return _finish(8, "separation certificate matches direct oracle", not mismatches, start, None,
                   {"mismatches": mismatches, "series": n_series, "separating": n_true},
                   ["mismatches", "separating"])


def criterion_9(seed: int = 0) -> CriterionResult:
    """Reruns of every experiment subcommand give byte-identical outputs."""
    from .cli import main
    from .configs import example_configs, suite_config

    start = time.perf_counter()
    runs = {name: (name, raw, []) for name, raw in example_configs(quick=True).items()}
    quick_suite = dict(suite_config(), reps=2000, identity_paths=50)
    runs["suite"] = ("suite", quick_suite, ["--criteria", "3,8"])
    runs["verify-max-i (csv)"] = ("verify-max-i", example_configs(quick=True)["verify-max-i"],
                                  ["--format", "csv"])
    differing = []
    codes = {}
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for i, (label, (command, raw, extra)) in enumerate(runs.items()):
            cfg_path = tmp / f"config-{i}.json"
            cfg_path.write_text(json.dumps(raw))
            outs = []
            for run in range(2):
                out = tmp / f"out-{i}-{run}"
                with contextlib.redirect_stdout(io.StringIO()):
                    code = main([command, "--config", str(cfg_path), "--out", str(out),
                                 "--seed", str(seed), *extra])
                codes.setdefault(label, []).append(code)
                outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())} if out.exists() else {})
            if outs[0] != outs[1] or not outs[0]:
                differing.append(label)
    ok = not differing and all(c[0] in (0, 1) and c[0] == c[1] for c in codes.values())
    return _finish(9, "CLI determinism", ok, start, None, {"differing": differing, "exit_codes": codes},
                   ["differing", "exit_codes"])


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}
_REPS_ARG = {1: "paths", 2: "reps", 5: "reps", 6: "reps", 7: "reps"}
_SEEDED = {1, 2, 5, 6, 7, 9}


def run_criteria(numbers=None, seed: int = 0, reps: int | None = None) -> list[CriterionResult]:
    """Run the selected criteria (all by default) in order."""
    numbers = sorted(CRITERIA) if numbers is None else list(numbers)
    unknown = [n for n in numbers if n not in CRITERIA]
    if unknown:
        raise ValueError(f"unknown acceptance criteria {unknown}; choose from {sorted(CRITERIA)}")
    out = []
    for n in numbers:
        kwargs = {}
        if n in _SEEDED:
            kwargs["seed"] = seed
        if reps is not None and n in _REPS_ARG:
            kwargs[_REPS_ARG[n]] = reps
        out.append(CRITERIA[n](**kwargs))
    return out


__all__ = ["CRITERIA", "CriterionResult", "TWO_LEVEL", "run_criteria"] + [f"criterion_{i}" for i in range(1, 10)]
