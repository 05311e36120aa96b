"""Necessary-condition checks for Finsler and Landsberg metrizability of sprays.

Specs are dicts with the same layout as the CLI's JSON documents; reports come
back as dicts.
"""

import json

from ._finmet import (
    SCHEMA_VERSION,
    Expression,
    SamplingExhausted,
    Spray,
    VectorField,
    __version__,
    lie_bracket,
    liouville_field,
)
from . import _finmet

__all__ = [
    "SCHEMA_VERSION",
    "Expression",
    "SamplingExhausted",
    "Spray",
    "VectorField",
    "__version__",
    "analyze",
    "check_energy",
    "config_hash",
    "distribution",
    "jet",
    "lie_bracket",
    "liouville_field",
    "normalize_spec",
]


def _text(spec):
    return spec if isinstance(spec, str) else json.dumps(spec)


def normalize_spec(spec):
    """The input document with every default filled in."""
    return json.loads(_finmet._normalize_spec(_text(spec)))


def config_hash(spec):
    return _finmet._config_hash(_text(spec))


def analyze(spec):
    """Full pipeline; the report carries both verdicts."""
    return json.loads(_finmet._analyze(_text(spec)))


def check_energy(spec):
    return json.loads(_finmet._check_energy(_text(spec)))


def distribution(spec, which="holonomy"):
    return json.loads(_finmet._distribution(_text(spec), which))


def jet(spec, x, y):
    return json.loads(_finmet._jet(_text(spec), list(x), list(y)))
