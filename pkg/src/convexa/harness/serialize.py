"""
Curve documents: canonical JSON for framed curves.

The encoding is UTF-8 JSON with sorted keys and no insignificant whitespace;
reals use Python's shortest round-trip repr, so a curve read back has
bit-identical arrays.
"""
import json
import logging
from pathlib import Path

import numpy as np

from convexa.errors import FormatError, VersionUnsupported
from convexa.geometry import rotations as rot
from convexa.geometry.curves import FramedCurve

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"
_ARRAY_FIELDS = ("grid", "v", "v_hat")


def _plain(value):
    """Converts numpy scalars and arrays inside metadata into JSON values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def to_document(curve: FramedCurve) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "grid": curve.grid.tolist(),
        "lifts": curve.lifts.tolist(),
        "v": curve.v.tolist(),
        "v_hat": curve.v_hat.tolist(),
        "base": curve.base.tolist(),
        "metadata": _plain(curve.metadata),
    }


def serialize(curve: FramedCurve) -> bytes:
    text = json.dumps(
        to_document(curve),
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    )
    return text.encode("utf-8")


def _real_array(doc: dict, key: str, location: str) -> np.ndarray:
    if key not in doc:
        raise FormatError(f"missing field '{key}'", location)
    values = doc[key]
    if not isinstance(values, list) or not values:
        raise FormatError("expected a non-empty array", location)
    for i, x in enumerate(values):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise FormatError(f"expected a number, got {type(x).__name__}", f"{location}[{i}]")
    return np.array(values, dtype=float)


def _quaternion_rows(doc: dict, key: str, location: str) -> np.ndarray:
    if key not in doc:
        raise FormatError(f"missing field '{key}'", location)
    rows = doc[key]
    if not isinstance(rows, list) or not rows:
        raise FormatError("expected a non-empty array", location)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != 4:
            raise FormatError("expected a quaternion [w, x, y, z]", f"{location}[{i}]")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise FormatError(f"expected a number, got {type(x).__name__}", f"{location}[{i}][{j}]")
    return np.array(rows, dtype=float)


def from_document(doc) -> FramedCurve:
    if not isinstance(doc, dict):
        raise FormatError("document must be a JSON object")
    if "format_version" not in doc:
        raise FormatError("missing field 'format_version'", "$.format_version")
    version = doc["format_version"]
    if version != FORMAT_VERSION:
        raise VersionUnsupported(f"format version {version!r} is not supported", "$.format_version")

    grid = _real_array(doc, "grid", "$.grid")
    lifts = _quaternion_rows(doc, "lifts", "$.lifts")
    arrays = {key: _real_array(doc, key, f"$.{key}") for key in _ARRAY_FIELDS[1:]}
    for key, values in (("lifts", lifts), *arrays.items()):
        if len(values) != len(grid):
            raise FormatError(f"{len(values)} entries for a grid of {len(grid)} points", f"$.{key}")

    base = rot.ONE
    if "base" in doc:
        if not isinstance(doc["base"], list) or len(doc["base"]) != 4:
            raise FormatError("expected a quaternion [w, x, y, z]", "$.base")
        base = _real_array(doc, "base", "$.base")
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise FormatError("expected an object", "$.metadata")

    try:
        return FramedCurve(grid, lifts, arrays["v"], arrays["v_hat"], base, metadata)
    except ValueError as e:
        raise FormatError(str(e)) from e


def deserialize(data: bytes) -> FramedCurve:
    try:
        doc = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise FormatError(f"not UTF-8: {e}") from e
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    return from_document(doc)


def save_curve(curve: FramedCurve, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(serialize(curve))
    logger.info(f"wrote curve document {path} ({curve.cells} cells)")
    return path


def load_curve(path) -> FramedCurve:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e.strerror}") from e
    return deserialize(data)
