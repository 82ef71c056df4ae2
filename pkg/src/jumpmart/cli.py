"""Command-line front end.

Every subcommand reads a JSON config, computes all outputs in memory and
only then writes them under ``--out``, so a failed run leaves no files.

Exit codes: 0 success, 1 verdict failure, 2 usage/config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .config import ConfigError, load_config
from .integrands import quadratic_modulus
from .integrator import integrate_path, process_path
from .measure_sim import ModelError, simulate_finite_activity, truncate_levy, derive_seed
from .partitions import entropy_integral, entropy_table_csv, validate_series
from .verify import (
    SCHEMA_VERSION, Check, ExperimentConfig, PreconditionError, VerificationReport, run_boundedness,
    run_identity_suite, run_maximal_i, run_maximal_ii, series_for,
)

EXIT_OK, EXIT_VERDICT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
SUBCOMMANDS = ("simulate", "entropy", "modulus", "verify-max-i", "verify-max-ii", "verify-bounded", "suite")


def _u64(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jumpmart", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(SUBCOMMANDS) + "}")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "suite", help="experiment config (JSON)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=_u64, help="override the config seed")
        p.add_argument("--reps", type=_positive, help="override the number of replications")
        p.add_argument("--format", choices=("json", "csv"), default="json",
                       help="format of the main report file")
        if name == "suite":
            p.add_argument("--criteria", default=None,
                           help="comma-separated acceptance criteria to run (default: all)")
    return parser


# ---------------------------------------------------------------------------
# subcommand bodies: each returns (report, {filename: text})

def _simulation_model(config: ExperimentConfig):
    model = config.model
    if model.is_finite:
        return model
    h = config.truncation if config.truncation is not None else (config.ladder[-1] if config.ladder else None)
    if h is None:
        raise PreconditionError("simulating an infinite-activity model needs 'truncation' or a 'ladder'")
    return truncate_levy(model, h)


def _cmd_simulate(config: ExperimentConfig, raw: dict):
    model = _simulation_model(config)
    t = config.horizon
    n_paths = min(raw.get("simulate", {}).get("paths", 3), config.reps)
    files, rows = {}, []
    for r in range(n_paths):
        path = simulate_finite_activity(model, t, derive_seed(config.seed, r))
        files[f"jumps_{r}.csv"] = path.to_csv()
        for p, psi in enumerate(config.family.index_set.elements):
            pp = process_path(config.family, psi, path, model, config.drift_grid)
            files[f"process_{r}_psi{p}.csv"] = pp.to_csv()
            rows.append({"path": r, "psi": psi, "jumps": len(path),
                         "value": integrate_path(config.family, psi, path, model, t)})
    report = VerificationReport("simulate", config.describe(),
                                {"paths": n_paths, "simulated_model": model.to_dict(), "values": rows},
                                [], {"values": rows})
    return report, files


def _cmd_entropy(config: ExperimentConfig, raw: dict):
    series = series_for(config, config.family, config.model, config.horizon)
    validation = validate_series(series)
    integral = entropy_integral(series, series.delta)
    results = {"Delta": series.delta, "counts": series.counts, "entropy_integral": integral,
               "series": series.to_dict(), "validation": validation.verdict.value,
               "violations": list(validation.violations), "singleton_final": validation.singleton_final}
    checks = [Check("series_valid", validation.dfp_checks_pass, None, None,
                    "; ".join(validation.violations))]
    report = VerificationReport("entropy", config.describe(), results, checks)
    return report, {"entropy.csv": entropy_table_csv(series)}


def _cmd_modulus(config: ExperimentConfig, raw: dict):
    t = config.horizon
    model = config.model if config.truncation is None else truncate_levy(config.model, config.truncation)
    series = series_for(config, config.family, model, t)
    result = quadratic_modulus(config.family, series, model, t)
    times = raw.get("modulus_times", [])
    curve = [{"t": float(s), "modulus": quadratic_modulus(config.family, series, model, float(s)).value}
             for s in times]
    results = {"modulus": result.value, "levels": result.to_rows(), "Delta": series.delta,
               "counts": series.counts, "modulus_vs_time": curve}
    report = VerificationReport("modulus", config.describe(), results, [],
                                {"modulus_levels": result.to_rows(), "modulus_vs_time": curve})
    files = {"modulus_levels.csv": report.table_csv("modulus_levels")}
    if curve:
        files["modulus_vs_time.csv"] = report.table_csv("modulus_vs_time")
    return report, files


def _tables_as_files(report: VerificationReport) -> dict:
    return {f"{name}.csv": report.table_csv(name) for name in sorted(report.tables) if report.tables[name]}


def _cmd_experiment(runner):
    def run(config: ExperimentConfig, raw: dict):
        report = runner(config)
        return report, _tables_as_files(report)
    return run


def _cmd_suite(config: ExperimentConfig | None, raw: dict | None, criteria=None, seed=None, reps=None):
    from .acceptance import run_criteria

    files = {}
    checks = []
    results = {}
    if config is not None:
        identity = run_identity_suite(config)
        checks.extend(Check(f"identity:{c.name}", c.passed, c.value, c.tolerance, c.detail)
                      for c in identity.checks)
        results["identity"] = identity.results
        files["identity.json"] = identity.to_json()
    outcomes = run_criteria(criteria, seed=seed if seed is not None else 0, reps=reps)
    for o in outcomes:
        print(o.line(), flush=True)
        checks.append(Check(f"criterion_{o.number}", o.passed, None, None, o.title))
    results["criteria"] = [o.to_dict() for o in outcomes]
    report = VerificationReport("suite", config.describe() if config is not None else {}, results, checks,
                                {"criteria": [{"criterion": o.number, "title": o.title, "passed": o.passed}
                                              for o in outcomes]})
    files.update(_tables_as_files(report))
    return report, files


COMMANDS = {
    "simulate": _cmd_simulate,
    "entropy": _cmd_entropy,
    "modulus": _cmd_modulus,
    "verify-max-i": _cmd_experiment(run_maximal_i),
    "verify-max-ii": _cmd_experiment(run_maximal_ii),
    "verify-bounded": _cmd_experiment(run_boundedness),
}


def _report_csv(report: VerificationReport) -> str:
    """Flattened ``key,value`` rows of the report document."""
    rows = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else str(k), obj[k])
        elif isinstance(obj, list):
            for i, v in enumerate(obj):
                walk(f"{prefix}[{i}]", v)
        else:
            text = "" if obj is None else (repr(obj) if isinstance(obj, float) else str(obj))
            if any(ch in text for ch in ",\"\n"):
                text = '"' + text.replace('"', '""') + '"'
            rows.append(f"{prefix},{text}")

    walk("", report.to_dict())
    return "key,value\n" + "\n".join(rows) + "\n"


def _write(out: Path, files: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)


def _summary(report: VerificationReport) -> list[str]:
    lines = [f"{report.kind}: {'PASS' if report.passed else 'FAIL'}"]
    r = report.results
    for key in ("lhs_mean", "lhs_se", "rhs", "ratio", "a", "K", "L", "modulus", "entropy_integral",
                "gap_decay_exponent", "decomposition_max_error"):
        if key in r:
            lines.append(f"  {key} = {r[key]}")
    for c in report.checks:
        lines.append(f"  [{'ok' if c.passed else 'FAIL'}] {c.name}" + (f" = {c.value}" if c.value is not None else ""))
    return lines


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    start = time.perf_counter()
    try:
        config, raw = (None, None)
        if args.config is not None:
            config, raw = load_config(args.config, seed=args.seed, reps=args.reps)
        if args.command == "suite":
            criteria = None
            if args.criteria:
                try:
                    criteria = [int(c) for c in args.criteria.split(",")]
                except ValueError:
                    raise ConfigError([("--criteria", f"not a list of integers: {args.criteria!r}")]) from None
            report, files = _cmd_suite(config, raw, criteria, args.seed, args.reps)
        else:
            report, files = COMMANDS[args.command](config, raw)
    except ConfigError as exc:
        for path, msg in exc.errors:
            print(f"config error at {path}: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except (PreconditionError, ModelError, ValueError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.format == "json":
        files["report.json"] = report.to_json()
    else:
        files["report.csv"] = _report_csv(report)
    try:
        _write(Path(args.out), files)
    except OSError as exc:
        print(f"cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for line in _summary(report):
        print(line)
    print(f"  runtime {time.perf_counter() - start:.2f}s; wrote {len(files)} files to {args.out}")
    return EXIT_OK if report.passed else EXIT_VERDICT


__all__ = ["EXIT_NUMERIC", "EXIT_OK", "EXIT_USAGE", "EXIT_VERDICT", "SCHEMA_VERSION", "build_parser", "main"]
