"""Parsing of SI-suffixed command-line quantities."""

from __future__ import annotations

import math
import re

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_RE = re.compile(rf"^\s*({_NUMBER})\s*([^\s\d].*?)?\s*$")

_LENGTH = {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9, "pm": 1e-12}
_TIME = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9, "ps": 1e-12}
_FREQ = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12}
_VOLUME = {"m3": 1.0, "mm3": 1e-9, "um3": 1e-18, "µm3": 1e-18}


class UnitError(ValueError):
    pass


def _split(text: str):
    m = _RE.match(str(text))
    if not m:
        raise UnitError(f"cannot parse quantity {text!r}")
    return float(m.group(1)), (m.group(2) or "")


def _scaled(text, table, kind):
    value, unit = _split(text)
    if not unit:
        return value
    if unit not in table:
        raise UnitError(f"unknown {kind} unit {unit!r} in {text!r}; use one of {', '.join(table)}")
    return value * table[unit]


def parse_length(text) -> float:
    return _scaled(text, _LENGTH, "length")


def parse_time(text) -> float:
    return _scaled(text, _TIME, "time")


def parse_volume(text) -> float:
    return _scaled(text, _VOLUME, "volume")


def parse_number(text) -> float:
    value, unit = _split(text)
    if unit:
        raise UnitError(f"expected a bare number, got {text!r}")
    return value


def parse_rate(text, angular: bool = False) -> float:
    """Angular rate in rad/s.

    ``"10MHz"`` means 2 pi x 10^7 rad/s unless ``angular`` is set, in which
    case the Hz-suffixed value is taken as already angular. Bare numbers and
    ``rad/s`` values are returned unchanged.
    """
    value, unit = _split(text)
    if not unit or unit == "rad/s":
        return value
    if unit.endswith("rad/s"):
        prefix = unit[: -len("rad/s")]
        scale = {"k": 1e3, "M": 1e6, "G": 1e9}.get(prefix)
        if scale is None:
            raise UnitError(f"unknown rate unit {unit!r} in {text!r}")
        return value * scale
    if unit not in _FREQ:
        raise UnitError(f"unknown rate unit {unit!r} in {text!r}; use Hz/kHz/MHz/GHz or rad/s")
    hz = value * _FREQ[unit]
    return hz if angular else 2 * math.pi * hz
