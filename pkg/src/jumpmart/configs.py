"""Example configs, one per CLI subcommand.

``python -m jumpmart.configs DIR`` writes them as JSON files.  ``quick``
variants shrink replication counts for smoke tests.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

TWO_LEVEL_SERIES = {"breakpoints": ["1", "1/2"], "levels": [[[0, 1]], [[0], [1]]], "size": 2, "nested": True}


def example_configs(quick: bool = False) -> dict[str, dict]:
    uniform_two_point = {
        "schema_version": 1,
        "model": {"kind": "finite", "rate": 2.0, "marks": {"name": "uniform", "low": -1.0, "high": 1.0}},
        "family": {"name": "linear", "psi": [0.0, 1.0]},
        "horizon": 1.0,
        "partition": {"explicit": TWO_LEVEL_SERIES},
        "delta": "1",
        "K": "auto",
        "seed": 7,
    }
    return {
        "simulate": {
            "schema_version": 1, "name": "simulate-linear",
            "model": {"kind": "finite", "rate": 2.0, "marks": {"name": "std_normal"}},
            "family": {"name": "linear", "psi": [0.0, 0.5, 1.0]},
            "horizon": 1.0, "seed": 1, "simulate": {"paths": 3},
        },
        "entropy": {
            "schema_version": 1, "name": "entropy-two-level",
            "model": {"kind": "finite", "rate": 1.0, "marks": {"name": "uniform", "low": -1.0, "high": 1.0}},
            "family": {"name": "linear", "psi": [0.0, 1.0]},
            "partition": {"explicit": TWO_LEVEL_SERIES},
        },
        "modulus": {
            "schema_version": 1, "name": "modulus-two-point",
            "model": {"kind": "finite", "rate": 1.0, "marks": {"name": "uniform", "low": -1.0, "high": 1.0}},
            "family": {"name": "linear", "psi": [0.0, 1.0]},
            "horizon": 1.0,
            "partition": {"explicit": TWO_LEVEL_SERIES},
            "modulus_times": [0.25, 0.5, 0.75, 1.0],
        },
        "verify-max-i": dict(uniform_two_point, name="maximal-i-two-point", reps=500 if quick else 10000),
        "verify-max-ii": dict(uniform_two_point, name="maximal-ii-two-point", L="auto",
                              reps=500 if quick else 10000),
        "verify-bounded": {
            "schema_version": 1, "name": "ladder-threshold",
            "model": {"kind": "infinite", "levy": {"name": "power", "alpha": 0.5}},
            "family": {"name": "threshold", "psi_grid": {"kind": "dyadic", "n": 16}},
            "horizon": 1.0,
            "ladder": {"base": 2.0, "levels": 6 if quick else 12},
            "prefix_sizes": [1, 2, 4, 8, 16],
            "reps": 200 if quick else 10000, "seed": 3,
        },
    }


def suite_config() -> dict:
    """Default identity-suite config used by ``jumpmart suite``."""
    return {
        "schema_version": 1, "name": "identity-linear",
        "model": {"kind": "finite", "rate": 2.0, "marks": {"name": "std_normal"}},
        "family": {"name": "linear", "psi": [0.5, 1.0]},
        "horizon": 1.0, "reps": 100000, "identity_paths": 1000, "a_levels": [0.25, 0.5, 1.0], "seed": 0,
    }


def write_examples(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    docs = dict(example_configs())
    docs["suite"] = suite_config()
    out = []
    for name, raw in docs.items():
        path = directory / f"{name}.json"
        path.write_text(json.dumps(raw, indent=2) + "\n")
        out.append(path)
    return out


if __name__ == "__main__":
    for p in write_examples(sys.argv[1] if len(sys.argv) > 1 else "configs"):
        print(p)
