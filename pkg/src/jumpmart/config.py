"""JSON experiment configs: schema validation and construction of :class:`ExperimentConfig`.

A config is a JSON object with ``schema_version`` 1.  Models, families and
partitions are chosen from named catalogs; ``"auto"`` selects the computed
thresholds for ``delta``, ``K`` and ``L``.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .integrands import CATALOG, make_family, psi_grid
from .measure_sim import FirstExit, FixedTime, ModelError, model_from_dict
from .partitions import EntropyProfile, PartitionSeries, as_fraction
from .verify import ExperimentConfig, PartitionSpec

CONFIG_SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists ``(field path, message)`` pairs."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("; ".join(f"{path}: {msg}" for path, msg in errors))


_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_RATIONAL = {"oneOf": [_POSITIVE, {"type": "string", "pattern": r"^\s*\d+(\s*/\s*\d+)?\s*$"}]}
_AUTO_OR = lambda schema: {"oneOf": [{"const": "auto"}, schema]}  # noqa: E731

_MARKS = {
    "type": "object",
    "required": ["name"],
    "properties": {
        "name": {"enum": ["point_mass", "normal", "std_normal", "uniform"]},
        "value": {"type": "number"}, "mean": {"type": "number"}, "std": _POSITIVE,
        "low": {"type": "number"}, "high": {"type": "number"},
    },
    "additionalProperties": False,
}

_MODEL = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["finite", "infinite"]},
        "rate": _POSITIVE,
        "marks": _MARKS,
        "levy": {
            "type": "object",
            "required": ["name", "alpha"],
            "properties": {
                "name": {"const": "power"},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2},
                "radius": _POSITIVE, "c_pos": {"type": "number", "minimum": 0},
                "c_neg": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "finite"}}},
         "then": {"required": ["rate", "marks"]}},
        {"if": {"properties": {"kind": {"const": "infinite"}}},
         "then": {"required": ["levy"]}},
    ],
    "additionalProperties": False,
}

_FAMILY = {
    "type": "object",
    "required": ["name"],
    "properties": {
        "name": {"enum": sorted(CATALOG)},
        "psi": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "psi_grid": {
            "type": "object",
            "required": ["kind", "n"],
            "properties": {"kind": {"enum": ["grid", "dyadic"]}, "n": {"type": "integer", "minimum": 1},
                           "low": {"type": "number"}, "high": {"type": "number"}},
            "additionalProperties": False,
        },
        "scale": {"type": "number"},
    },
    "oneOf": [{"required": ["psi"]}, {"required": ["psi_grid"]}],
    "additionalProperties": False,
}

_PARTITION = {
    "type": "object",
    "properties": {
        "metric": {"enum": ["intrinsic", "coordinate"]},
        "delta": _AUTO_OR(_RATIONAL),
        "hierarchical": {"type": "boolean"},
        "explicit": {
            "type": "object",
            "required": ["breakpoints", "levels", "size"],
            "properties": {
                "breakpoints": {"type": "array", "items": _RATIONAL, "minItems": 1},
                "levels": {"type": "array", "items": {"type": "array", "items": {
                    "type": "array", "items": {"type": "integer", "minimum": 0}}}},
                "size": {"type": "integer", "minimum": 1},
                "nested": {"type": "boolean"},
                "schema_version": {"const": 1},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

_STOPPING = {
    "oneOf": [
        {"type": "object", "required": ["kind", "t"],
         "properties": {"kind": {"const": "fixed"}, "t": _POSITIVE}, "additionalProperties": False},
        {"type": "object", "required": ["kind", "psi_index", "level", "cap"],
         "properties": {"kind": {"const": "first_exit"}, "psi_index": {"type": "integer", "minimum": 0},
                        "level": _POSITIVE, "cap": _POSITIVE},
         "additionalProperties": False},
    ]
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "jumpmart experiment config",
    "type": "object",
    "required": ["schema_version", "model", "family"],
    "properties": {
        "schema_version": {"const": CONFIG_SCHEMA_VERSION},
        "name": {"type": "string"},
        "model": _MODEL,
        "family": _FAMILY,
        "horizon": _POSITIVE,
        "stopping": _STOPPING,
        "reps": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "drift_grid": {"type": "integer", "minimum": 1},
        "partition": _PARTITION,
        "delta": _AUTO_OR(_RATIONAL),
        "K": _AUTO_OR(_POSITIVE),
        "L": _AUTO_OR(_POSITIVE),
        "truncation": _POSITIVE,
        "ratio_cap": _POSITIVE,
        "max_rel_se": _POSITIVE,
        "ladder": {
            "oneOf": [
                {"type": "object", "required": ["h"], "additionalProperties": False,
                 "properties": {"h": {"type": "array", "items": _POSITIVE, "minItems": 1}}},
                {"type": "object", "required": ["levels"], "additionalProperties": False,
                 "properties": {"base": {"type": "number", "exclusiveMinimum": 1},
                                "levels": {"type": "integer", "minimum": 1}}},
            ]
        },
        "prefix_sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "tail_levels": {"type": "array", "items": _POSITIVE, "minItems": 1},
        "gap_member": {"type": "integer", "minimum": 0},
        "entropy_profile": {
            "type": "object", "required": ["kind", "delta"], "additionalProperties": False,
            "properties": {"kind": {"enum": ["power", "exp"]}, "delta": _POSITIVE,
                           "dim": _POSITIVE, "power": _POSITIVE},
        },
        "a_levels": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "identity_paths": {"type": "integer", "minimum": 1},
        "workers": {"type": "integer", "minimum": 1},
        "simulate": {
            "type": "object", "additionalProperties": False,
            "properties": {"paths": {"type": "integer", "minimum": 1}},
        },
        "modulus_times": {"type": "array", "items": _POSITIVE, "minItems": 1},
    },
    "not": {"required": ["horizon", "stopping"]},
    "additionalProperties": False,
}


def _path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    return "/" + "/".join(parts) if parts else "/"


def validate_config(raw) -> None:
    """Raise :class:`ConfigError` listing every schema violation with its field path."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        raise ConfigError([(_path(e), e.message) for e in errors])


def _auto(value, convert):
    return None if value is None or value == "auto" else convert(value)


def _family(d: dict):
    if "psi" in d:
        psis = [float(v) for v in d["psi"]]
    else:
        g = d["psi_grid"]
        psis = psi_grid(g["kind"], g["n"], g.get("low", 0.0), g.get("high", 1.0))
    return make_family(d["name"], psis, d.get("scale", 1.0))


def _ladder(d: dict | None):
    if d is None:
        return None
    if "h" in d:
        return tuple(float(h) for h in d["h"])
    base = float(d.get("base", 2.0))
    return tuple(base ** -k for k in range(1, int(d["levels"]) + 1))


def build_config(raw: dict, *, seed: int | None = None, reps: int | None = None) -> ExperimentConfig:
    """Validate ``raw`` and build the experiment; ``seed``/``reps`` override the file."""
    validate_config(raw)
    errors: list[tuple[str, str]] = []

    def guarded(path, fn, *args):
        try:
            return fn(*args)
        except (ValueError, ModelError, KeyError, TypeError) as exc:
            errors.append((path, str(exc)))
            return None

    model = guarded("/model", model_from_dict, raw["model"])
    family = guarded("/family", _family, raw["family"])
    if "stopping" in raw and raw["stopping"]["kind"] == "first_exit":
        s = raw["stopping"]
        stopping = FirstExit(int(s["psi_index"]), float(s["level"]), float(s["cap"]))
    elif "stopping" in raw:
        stopping = FixedTime(float(raw["stopping"]["t"]))
    else:
        stopping = FixedTime(float(raw.get("horizon", 1.0)))
    part = raw.get("partition", {})
    spec = guarded("/partition", lambda: PartitionSpec(part.get("metric", "intrinsic"),
                                                        _auto(part.get("delta"), as_fraction),
                                                        part.get("hierarchical", True)))
    series = None
    if "explicit" in part:
        series = guarded("/partition/explicit", PartitionSeries.from_dict, part["explicit"])
    profile = None
    if "entropy_profile" in raw:
        p = raw["entropy_profile"]
        profile = EntropyProfile(p["kind"], float(p["delta"]), float(p.get("dim", 1.0)),
                                 float(p.get("power", 1.0)))
    if errors:
        raise ConfigError(errors)
    kwargs = dict(
        model=model, family=family, stopping=stopping,
        reps=reps if reps is not None else raw.get("reps", 1000),
        seed=seed if seed is not None else raw.get("seed", 0),
        drift_grid=raw.get("drift_grid", 16), partition=spec,
        delta=_auto(raw.get("delta"), as_fraction), K=_auto(raw.get("K"), float),
        L=_auto(raw.get("L"), float), truncation=raw.get("truncation"),
        ladder=_ladder(raw.get("ladder")), prefix_sizes=tuple(raw.get("prefix_sizes", ())),
        entropy_profile=profile, gap_member=raw.get("gap_member", 0),
        identity_paths=raw.get("identity_paths", 1000), workers=raw.get("workers", 1),
        name=raw.get("name", "experiment"), series=series,
    )
    for key in ("ratio_cap", "max_rel_se"):
        if key in raw:
            kwargs[key] = float(raw[key])
    for key in ("tail_levels", "a_levels"):
        if key in raw:
            kwargs[key] = tuple(float(v) for v in raw[key])
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError([("/", str(exc))]) from exc


def load_config(path: str | Path, *, seed: int | None = None, reps: int | None = None) -> tuple[ExperimentConfig, dict]:
    """Read, validate and build a config file; returns the experiment and the raw document."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([("<file>", f"cannot read {path}: {exc.strerror or exc}")]) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("<file>", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")]) from exc
    return build_config(raw, seed=seed, reps=reps), raw


__all__ = ["CONFIG_SCHEMA_VERSION", "ConfigError", "SCHEMA", "build_config", "load_config",
           "validate_config"]
