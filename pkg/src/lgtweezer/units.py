"""Strict unit parsing for scene configuration files.

Every physical quantity in a config file is written as a string with an
explicit unit suffix ("600 um", "1 mK", "20 ms").  Unknown suffixes and
dimension mismatches are hard errors; silent unit bugs are the main risk
in a file format that mixes um/nm/mK/uK/ms.
"""

from __future__ import annotations

import re

# suffix -> (dimension, factor to SI base unit)
_UNITS = {
    "m": ("length", 1.0),
    "mm": ("length", 1e-3),
    "um": ("length", 1e-6),
    "nm": ("length", 1e-9),
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "us": ("time", 1e-6),
    "ns": ("time", 1e-9),
    "K": ("temperature", 1.0),
    "mK": ("temperature", 1e-3),
    "uK": ("temperature", 1e-6),
    "m/s": ("velocity", 1.0),
    "m/s^2": ("acceleration", 1.0),
    "kg": ("mass", 1.0),
    "rad": ("angle", 1.0),
}

_QUANTITY_RE = re.compile(r"^\s*([+-]?[0-9.eE+-]+)\s*([a-zA-Z/^0-9]*)\s*$")


class UnitError(ValueError):
    """Raised for unknown suffixes or dimension mismatches."""


def parse_quantity(text: str | float | int, dimension: str) -> float:
    """Parse ``text`` into an SI value of the requested dimension.

    Bare numbers are accepted only for dimension="dimensionless".
    """
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        if dimension == "dimensionless":
            return float(text)
        raise UnitError(
            f"bare number {text!r} given where a {dimension} with explicit "
            f"units is required"
        )
    if not isinstance(text, str):
        raise UnitError(f"cannot parse quantity from {text!r}")

    m = _QUANTITY_RE.match(text)
    if not m:
        raise UnitError(f"malformed quantity {text!r}")
    value_s, suffix = m.groups()
    try:
        value = float(value_s)
    except ValueError as exc:
        raise UnitError(f"malformed number in {text!r}") from exc

    if dimension == "dimensionless":
        if suffix:
            raise UnitError(f"{text!r}: dimensionless value must not carry a unit")
        return value
    if not suffix:
        raise UnitError(f"{text!r}: missing unit suffix (expected a {dimension})")
    if suffix not in _UNITS:
        raise UnitError(f"{text!r}: unknown unit suffix {suffix!r}")
    dim, factor = _UNITS[suffix]
    if dim != dimension:
        raise UnitError(f"{text!r} is a {dim}, expected a {dimension}")
    return value * factor
