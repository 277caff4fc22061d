"""Parsing of numbers with unit suffixes.

Sizes use binary prefixes (``MB`` and ``MiB`` both mean 2**20 bytes),
bandwidths use decimal ones (``Gbps`` is 1e9 bits per second).
"""

from __future__ import annotations

import re

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z/]*)\s*$")

_TIME = {"": 1.0, "s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9}
_BYTES = {
    "": 1, "b": 1, "B": 1,
    "KB": 2**10, "KiB": 2**10, "kB": 2**10,
    "MB": 2**20, "MiB": 2**20,
    "GB": 2**30, "GiB": 2**30,
}
_RATE = {
    "": 1.0, "bps": 1.0, "Kbps": 1e3, "kbps": 1e3, "Mbps": 1e6, "Gbps": 1e9, "Tbps": 1e12,
}


def _split(text: str) -> tuple[float, str]:
    m = _NUMBER.match(str(text))
    if not m:
        raise ValueError(f"cannot read quantity {text!r}")
    return float(m.group(1)), m.group(2)


def parse_time(text: str) -> float:
    """Seconds."""
    v, unit = _split(text)
    if unit not in _TIME:
        raise ValueError(f"unknown time unit {unit!r} in {text!r}")
    return v * _TIME[unit]


def parse_bytes(text: str) -> float:
    v, unit = _split(text)
    if unit not in _BYTES:
        raise ValueError(f"unknown size unit {unit!r} in {text!r}")
    return v * _BYTES[unit]


def parse_bandwidth(text: str) -> float:
    """Bits per second."""
    v, unit = _split(text)
    if unit not in _RATE:
        raise ValueError(f"unknown bandwidth unit {unit!r} in {text!r}")
    return v * _RATE[unit]
