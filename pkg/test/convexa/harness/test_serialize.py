"""
Tests for curve documents: canonical JSON encoding and its error reporting.
"""
import json

import numpy as np
import pytest

from convexa.errors import FormatError, VersionUnsupported
from convexa.geometry import rotations as rot
from convexa.geometry.deform import LoopSpec, add_loops
from convexa.geometry.families import nu
from convexa.harness.serialize import (
    FORMAT_VERSION,
    deserialize,
    from_document,
    load_curve,
    save_curve,
    serialize,
    to_document,
)


@pytest.fixture
def document():
    return to_document(nu(2, 16))


def test_round_trip_is_bit_identical():
    curve = nu(2, 256)
    back = deserialize(serialize(curve))
    assert np.array_equal(back.grid, curve.grid)
    assert np.array_equal(back.lifts, curve.lifts)
    assert np.array_equal(back.v, curve.v)
    assert np.array_equal(back.v_hat, curve.v_hat)
    assert back.metadata == {"family": "nu", "s": 2.0}


def test_encoding_is_canonical():
    data = serialize(nu(1, 8))
    assert data == serialize(nu(1, 8))
    text = data.decode("utf-8")
    assert " " not in text
    assert list(json.loads(text)) == sorted(json.loads(text))


def test_base_and_metadata_survive():
    curve = add_loops(nu(1, 64), LoopSpec(0.5, 1)).with_base(rot.quat(1.0, 2.0, 3.0, 4.0))
    back = deserialize(serialize(curve))
    np.testing.assert_allclose(back.base, curve.base, atol=1e-15)
    assert back.metadata["loops"] == [[0.5, 1]]


def test_numpy_metadata_is_converted():
    curve = nu(1, 8).with_metadata(point=np.array([0.0, 0.0, -1.0]), k=np.int64(3))
    doc = json.loads(serialize(curve))
    assert doc["metadata"]["point"] == [0.0, 0.0, -1.0]
    assert doc["metadata"]["k"] == 3


def test_missing_field_is_located(document):
    del document["v_hat"]
    with pytest.raises(FormatError) as info:
        from_document(document)
    assert info.value.location == "$.v_hat"


def test_unsupported_version(document):
    document["format_version"] = "0"
    with pytest.raises(VersionUnsupported):
        from_document(document)
    assert FORMAT_VERSION == "1"


@pytest.mark.parametrize("mutate, location", [
    (lambda d: d["grid"].__setitem__(1, "x"), "$.grid[1]"),
    (lambda d: d["lifts"].__setitem__(0, [1.0, 0.0]), "$.lifts[0]"),
    (lambda d: d["v"].pop(), "$.v"),
    (lambda d: d.__setitem__("base", [1.0]), "$.base"),
    (lambda d: d.__setitem__("metadata", []), "$.metadata"),
])
def test_malformed_documents(document, mutate, location):
    mutate(document)
    with pytest.raises(FormatError) as info:
        from_document(document)
    assert info.value.location == location


def test_invalid_bytes():
    with pytest.raises(FormatError):
        deserialize(b"{not json")
    with pytest.raises(FormatError):
        deserialize(b"\xff\xfe")
    with pytest.raises(FormatError):
        deserialize(b"[]")


def test_save_and_load(tmp_path):
    curve = nu(3, 32)
    path = save_curve(curve, tmp_path / "curves" / "nu3.json")
    assert path.exists()
    assert np.array_equal(load_curve(path).lifts, curve.lifts)
    with pytest.raises(FormatError):
        load_curve(tmp_path / "missing.json")
