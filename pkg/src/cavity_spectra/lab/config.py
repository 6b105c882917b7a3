"""Experiment configuration: JSON schema, validation with JSON pointers, defaults."""
import copy
import json

import jsonschema
import numpy as np

from ..exceptions import ConfigError

KINDS = ("validate", "spectrum", "derivative-check", "branches", "split", "genericity", "lipschitz")

DOMAIN_PRESETS = {
    "cube-pi": (np.pi, np.pi, np.pi),
    "box-anisotropic": (np.pi, 1.1 * np.pi, 1.3 * np.pi),
}

PERMITTIVITY_PRESETS = ("eps-identity", "eps-scaled-identity", "eps-diag", "eps-sine")

_number3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_positive = {"type": "number", "exclusiveMinimum": 0}

_direction = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["identity", "constant", "random-constant", "diagonal-bump", "splitting", "scalar-bump"]},
        "matrix": {"type": "array", "items": _number3, "minItems": 3, "maxItems": 3},
        "count": {"type": "integer", "minimum": 1},
        "weights": _number3,
        "h": {"enum": [1, 2, 3]},
        "bump": {"type": "string", "pattern": "^(center|corner[0-2])$"},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kind", "domain", "mesh", "permittivity", "tau"],
    "properties": {
        "kind": {"enum": list(KINDS)},
        "domain": {
            "type": "object",
            "properties": {"preset": {"enum": list(DOMAIN_PRESETS)}, "extent": {**_number3, "items": _positive}},
            "oneOf": [{"required": ["preset"]}, {"required": ["extent"]}],
            "additionalProperties": False,
        },
        "mesh": {
            "type": "object",
            "required": ["subdivisions"],
            "properties": {
                "subdivisions": {
                    "oneOf": [
                        {"type": "integer", "minimum": 1},
                        {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 3, "maxItems": 3},
                    ]
                }
            },
            "additionalProperties": False,
        },
        "quadrature_degree": {"type": "integer", "minimum": 1, "maximum": 19},
        "permittivity": {
            "type": "object",
            "properties": {
                "preset": {"enum": list(PERMITTIVITY_PRESETS)},
                "alpha": _positive,
                "diag": {**_number3, "items": _positive},
                "amplitude": {"type": "number"},
                "expressions": {
                    "type": "object",
                    "propertyNames": {"enum": ["xx", "xy", "xz", "yy", "yz", "zz"]},
                    "additionalProperties": {"type": "string"},
                },
            },
            "oneOf": [{"required": ["preset"]}, {"required": ["expressions"]}],
            "additionalProperties": False,
        },
        "tau": _positive,
        "k": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": {
            "type": "object",
            "properties": {
                "solver_tol": _positive,
                "cluster_tol": _positive,
                "r_max": {"oneOf": [_positive, {"type": "null"}]},
                "match_tol": _positive,
                "gap_min": _positive,
            },
            "additionalProperties": False,
        },
        "params": {
            "type": "object",
            "properties": {
                "directions": {"type": "array", "items": _direction, "minItems": 1},
                "direction": _direction,
                "n": {"type": "integer", "minimum": 1},
                "t_grid": {"type": "array", "items": {"type": "number"}, "minItems": 2},
                "fd_steps": {"type": "array", "items": _positive, "minItems": 1},
                "cluster": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2},
                "T": _positive,
                "candidates": {"enum": ["diagonal", "scalar"]},
                "delta": _positive,
                "budget": {"type": "integer", "minimum": 1},
                "auto_tau": {"type": "boolean"},
                "n_pairs": {"type": "integer", "minimum": 1},
                "radius": _positive,
                "j": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                "nested_distances": {"type": "array", "items": _positive, "minItems": 2},
                "n_directions": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {"directory": {"type": "string"}, "plot": {"type": "boolean"}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

DEFAULTS = {
    "quadrature_degree": 5,
    "k": 12,
    "seed": 0,
    "tolerances": {"solver_tol": 1e-8, "cluster_tol": 1e-3, "r_max": None, "match_tol": 0.02, "gap_min": 1e-3},
    "params": {},
    "output": {"directory": "out", "plot": False},
}


def _pointer(path):
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def _error_pointer(error):
    path = list(error.absolute_path)
    if error.validator == "required" and isinstance(error.instance, dict):
        missing = [name for name in error.validator_value if name not in error.instance]
        if missing:
            path.append(missing[0])
    elif error.validator == "additionalProperties" and isinstance(error.instance, dict):
        allowed = set(error.schema.get("properties", {}))
        extra = sorted(k for k in error.instance if k not in allowed)
        if extra:
            path.append(extra[0])
    return _pointer(path)


def validate_config(config):
    """Raise ConfigError, carrying the JSON pointer of the first violation."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: (len(e.absolute_path), _error_pointer(e), e.message))
    if errors:
        err = errors[0]
        pointer = _error_pointer(err)
        raise ConfigError(f"{pointer or '/'}: {err.message}", pointer=pointer)
    return config


def resolve_config(config):
    """Validated config with every default filled in."""
    validate_config(config)
    out = copy.deepcopy(config)
    for key, value in DEFAULTS.items():
        if isinstance(value, dict):
            merged = copy.deepcopy(value)
            merged.update(out.get(key, {}))
            out[key] = merged
        else:
            out.setdefault(key, value)
    if "preset" in out["domain"]:
        out["domain"]["extent"] = list(DOMAIN_PRESETS[out["domain"]["preset"]])
    return out


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", pointer="") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", pointer="") from exc
    return validate_config(config)
