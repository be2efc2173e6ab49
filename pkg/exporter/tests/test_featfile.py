"""Binary embedding format: golden bytes, round trips, corruption."""

import struct
from hashlib import blake2b

import numpy as np
import pytest

from signet_exporter import featfile


def test_golden_byte_layout(tmp_path):
    p = str(tmp_path / "x.feat")
    featfile.write_feat(p, np.array([[1.0, -2.0]], dtype=np.float32))
    raw = open(p, "rb").read()
    payload = struct.pack("<2f", 1.0, -2.0)
    want = (b"FEATSEQ1" + struct.pack("<II", 1, 2) + payload
            + blake2b(payload, digest_size=8).digest())
    assert raw == want


def test_round_trip_and_byte_stability(tmp_path):
    p = str(tmp_path / "x.feat")
    arr = np.linspace(-3, 3, 12, dtype=np.float32).reshape(3, 4)
    featfile.write_feat(p, arr)
    back = featfile.read_feat(p)
    assert back.dtype == np.float32
    assert np.array_equal(back, arr)
    raw = open(p, "rb").read()
    featfile.write_feat(p, back)
    assert open(p, "rb").read() == raw


def test_write_rejects_bad_shapes(tmp_path):
    p = str(tmp_path / "x.feat")
    with pytest.raises(ValueError):
        featfile.write_feat(p, np.zeros(4, dtype=np.float32))
    with pytest.raises(ValueError):
        featfile.write_feat(p, np.zeros((0, 4), dtype=np.float32))


@pytest.mark.parametrize("mutate, hint", [
    (lambda b: b"WRONGMAG" + bytes(b[8:]), "magic"),
    (lambda b: bytes(b[:-2]), "payload"),
    (lambda b: bytes(b[:-1]) + bytes([b[-1] ^ 1]), "checksum"),
    (lambda b: bytes(b[:12]) + b"\x63" + bytes(b[13:]), ""),
])
def test_corruption_rejected(tmp_path, mutate, hint):
    p = str(tmp_path / "x.feat")
    featfile.write_feat(p, np.ones((2, 3), dtype=np.float32))
    raw = open(p, "rb").read()
    open(p, "wb").write(mutate(bytearray(raw)))
    with pytest.raises(featfile.FeatFormatError) as err:
        featfile.read_feat(p)
    assert hint in str(err.value)


def test_too_short_file(tmp_path):
    p = str(tmp_path / "x.feat")
    open(p, "wb").write(b"FEATSEQ1\x01")
    with pytest.raises(featfile.FeatFormatError, match="short"):
        featfile.read_feat(p)
