"""Reader/writer for the signet runtime's binary embedding format.

One file holds one (T, D) float32 sequence:

    magic "FEATSEQ1" | u32 T | u32 D | T*D float32, row-major |
    u64 blake2b-8 digest of the float payload -- all little-endian.

A parity probe is a single-frame sequence (T=1) written in this format so
the runtime's cache reader can consume it directly.
"""

import struct
from hashlib import blake2b

import numpy as np

MAGIC = b"FEATSEQ1"


class FeatFormatError(ValueError):
    """File does not parse as a valid embedding sequence."""


def _checksum(payload):
    return int.from_bytes(blake2b(payload, digest_size=8).digest(), "little")


def write_feat(path, vectors):
    """Write a (T, D) float32 array; returns the byte count written."""
    arr = np.ascontiguousarray(vectors, dtype="<f4")
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"vectors must be non-empty (T, D), got shape {arr.shape}")
    payload = arr.tobytes()
    blob = (MAGIC + struct.pack("<II", arr.shape[0], arr.shape[1])
            + payload + struct.pack("<Q", _checksum(payload)))
    with open(path, "wb") as fh:
        fh.write(blob)
    return len(blob)


def read_feat(path):
    """Read a file written by write_feat back into a (T, D) float32 array."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(MAGIC) + 8 + 8:
        raise FeatFormatError(f"{path}: too short for a valid sequence")
    if raw[:len(MAGIC)] != MAGIC:
        raise FeatFormatError(f"{path}: bad magic {raw[:len(MAGIC)]!r}")
    t, d = struct.unpack_from("<II", raw, len(MAGIC))
    payload = raw[len(MAGIC) + 8:-8]
    if len(payload) != t * d * 4:
        raise FeatFormatError(
            f"{path}: header claims {t}x{d} floats, payload holds {len(payload)} bytes")
    (stored,) = struct.unpack_from("<Q", raw, len(raw) - 8)
    if stored != _checksum(payload):
        raise FeatFormatError(f"{path}: checksum mismatch")
    return np.frombuffer(payload, dtype="<f4").reshape(t, d).copy()
