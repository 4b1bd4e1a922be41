"""Flat binary cube files with a plain-text sidecar header.

A cube named ``scene.bsq`` is stored as the raw band-sequential payload
plus ``scene.bsq.hdr`` holding one ``key = value`` per line.  Keys are
case-insensitive and unknown keys are ignored, so headers written by
other tools remain readable.  Recognised keys::

    samples     image width
    lines       image height
    bands       band count
    data type   4 (32-bit float) or 5 (64-bit float)
    interleave  bsq
    byte order  0 (little-endian)

Payloads are little-endian; 32-bit data widens to float64 on read.
"""

from __future__ import annotations

import numpy as np

from .cube import HsCube
from .errors import ParseError, SizeError

__all__ = ["read_cube", "write_cube", "header_path"]

_DTYPE_CODES = {"float32": 4, "float64": 5}
_CODE_DTYPES = {4: np.dtype("<f4"), 5: np.dtype("<f8")}


def header_path(path) -> str:
    return str(path) + ".hdr"


def write_cube(cube: HsCube, path, dtype: str = "float64") -> None:
    """Write payload and header; ``dtype`` picks the stored precision."""
    if dtype not in _DTYPE_CODES:
        raise ParseError(f"unsupported dtype {dtype!r}, expected 'float32' or 'float64'")
    code = _DTYPE_CODES[dtype]
    with open(path, "wb") as handle:
        handle.write(np.ascontiguousarray(cube.planes, dtype=_CODE_DTYPES[code]).tobytes())
    lines = [
        f"samples = {cube.width}",
        f"lines = {cube.height}",
        f"bands = {cube.bands}",
        f"data type = {code}",
        "interleave = bsq",
        "byte order = 0",
    ]
    with open(header_path(path), "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def _parse_header(path) -> dict[str, str]:
    fields: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}: line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = " ".join(key.lower().split())
            if not key:
                raise ParseError(f"{path}: line {lineno}: empty key")
            fields[key] = value.strip()
    return fields


def _header_int(fields: dict[str, str], key: str, path) -> int:
    if key not in fields:
        raise ParseError(f"{path}: missing required key '{key}'")
    try:
        value = int(fields[key])
    except ValueError:
        raise ParseError(f"{path}: key '{key}' has non-integer value {fields[key]!r}") from None
    return value


def read_cube(path) -> HsCube:
    """Read a cube written by :func:`write_cube` (or a compatible tool)."""
    hdr = header_path(path)
    fields = _parse_header(hdr)
    width = _header_int(fields, "samples", hdr)
    height = _header_int(fields, "lines", hdr)
    bands = _header_int(fields, "bands", hdr)
    code = _header_int(fields, "data type", hdr)
    if min(width, height, bands) < 1:
        raise ParseError(f"{hdr}: dimensions must be positive")
    if code not in _CODE_DTYPES:
        raise ParseError(f"{hdr}: unsupported data type code {code}")
    interleave = fields.get("interleave", "bsq").lower()
    if interleave != "bsq":
        raise ParseError(f"{hdr}: unsupported interleave {interleave!r}, expected 'bsq'")
    byte_order = _header_int(fields, "byte order", hdr) if "byte order" in fields else 0
    if byte_order != 0:
        raise ParseError(f"{hdr}: only little-endian (byte order = 0) payloads are supported")
    dtype = _CODE_DTYPES[code]
    expected = bands * height * width * dtype.itemsize
    with open(path, "rb") as handle:
        payload = handle.read()
    if len(payload) != expected:
        raise SizeError(
            f"{path}: payload holds {len(payload)} bytes but header announces "
            f"{expected} ({bands}x{height}x{width} {dtype.name})"
        )
    data = np.frombuffer(payload, dtype=dtype).reshape(bands, height, width)
    return HsCube(data.astype(np.float64))
