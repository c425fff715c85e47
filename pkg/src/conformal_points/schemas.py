"""JSON schemas for the CLI configuration files.

Every subcommand validates its configuration against the schema below
before any computation runs; unknown keys are rejected.  The schemas are
plain dicts so they can be dumped as documentation (`confpoints schemas`).
"""

from __future__ import annotations

_EXPR = {"type": "string", "minLength": 1}

_TOLERANCES = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "grid_n": {"type": "integer", "minimum": 16},
        "zero_tol": {"type": "number", "exclusiveMinimum": 0},
        "activation_tol": {"type": "number", "exclusiveMinimum": 0},
        "newton_tol": {"type": "number", "exclusiveMinimum": 0},
        "newton_max_iter": {"type": "integer", "minimum": 1},
        "dedup_radius": {"type": "number", "exclusiveMinimum": 0},
        "boundary_clearance": {"type": "number", "exclusiveMinimum": 0},
        "winding_samples": {"type": "integer", "minimum": 8},
        "max_refine_depth": {"type": "integer", "minimum": 1},
        "integrality_tol": {"type": "number", "exclusiveMinimum": 0},
        "isolation_samples": {"type": "integer", "minimum": 16},
        "degenerate_grid_count": {"type": "integer", "minimum": 1},
    },
}

_SURFACE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["disc", "annulus", "torus", "sphere", "ellipsoid"]},
        "inner_radius": {"type": "number", "exclusiveMinimum": 0,
                         "exclusiveMaximum": 1},
        "tau": {"type": "array", "items": {"type": "number"},
                "minItems": 2, "maxItems": 2},
        "semi_axes": {"type": "array", "items": {"type": "number",
                                                 "exclusiveMinimum": 0},
                      "minItems": 3, "maxItems": 3},
    },
}

_ENTRIES = {"type": "array", "items": _EXPR, "minItems": 3, "maxItems": 3}

_FIELD = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "entries": _ENTRIES,
        "random_trig": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "degree": {"type": "integer", "minimum": 1, "maximum": 6},
                "seed": {"type": "integer", "minimum": 0},
                "amplitude": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "pullback": {
            "type": "object",
            "additionalProperties": False,
            "required": ["components"],
            "properties": {
                "components": {"type": "array", "items": _EXPR,
                               "minItems": 2, "maxItems": 2},
            },
        },
    },
    "minProperties": 1,
    "maxProperties": 1,
}

_METRIC = {
    "type": "object",
    "additionalProperties": False,
    "required": ["entries"],
    "properties": {"entries": _ENTRIES},
}

VERIFY = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["surface", "field"],
    "properties": {
        "surface": _SURFACE,
        "metric": _METRIC,
        "field": _FIELD,
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": _TOLERANCES,
    },
}

DIFFEO = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["surface", "map"],
    "properties": {
        "surface": _SURFACE,
        "metric": _METRIC,
        "map": {
            "type": "object",
            "additionalProperties": False,
            "required": ["components"],
            "properties": {
                "components": {"type": "array", "items": _EXPR,
                               "minItems": 2, "maxItems": 2},
                "boundary_permutation": {"type": "array",
                                         "items": {"type": "integer",
                                                   "minimum": 0}},
                "area_corollary": {"type": "boolean"},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": _TOLERANCES,
    },
}

VECTOR_FIELD = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["surface", "vector_field"],
    "properties": {
        "surface": _SURFACE,
        "metric": _METRIC,
        "vector_field": {
            "type": "object",
            "additionalProperties": False,
            "required": ["real", "imag"],
            "properties": {"real": _EXPR, "imag": _EXPR},
        },
        "linearization": {"type": "boolean"},
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": _TOLERANCES,
    },
}

UMBILICS = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["surface"],
    "properties": {
        "surface": _SURFACE,
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": _TOLERANCES,
    },
}

REALIZE = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["surface", "data"],
    "properties": {
        "surface": _SURFACE,
        "data": {
            "type": "object",
            "additionalProperties": False,
            "required": ["points", "indices", "windings"],
            "properties": {
                "points": {"type": "array",
                           "items": {"type": "array",
                                     "items": {"type": "number"},
                                     "minItems": 2, "maxItems": 2}},
                "indices": {"type": "array", "items": {"type": "integer"}},
                "windings": {"type": "array", "items": {"type": "integer"}},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": _TOLERANCES,
    },
}

EXPLORE = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["explore"],
    "properties": {
        "explore": {
            "type": "object",
            "additionalProperties": False,
            "required": ["bidegree"],
            "properties": {
                "bidegree": {"type": "integer", "minimum": 0, "maximum": 8},
                "restarts": {"type": "integer", "minimum": 1},
                "iterations": {"type": "integer", "minimum": 1},
                "grid": {"type": "integer", "minimum": 64},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": _TOLERANCES,
    },
}

BY_SUBCOMMAND = {
    "verify": VERIFY,
    "diffeo": DIFFEO,
    "vf": VECTOR_FIELD,
    "umbilics": UMBILICS,
    "realize": REALIZE,
    "explore": EXPLORE,
}
