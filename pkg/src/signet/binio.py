"""Shared binary-file machinery: checksums, atomic writes, framed envelopes.

The feature cache and checkpoint files both use the same envelope idea:
a fixed 8-byte magic, fixed-size little-endian header fields, a payload,
and a trailing 8-byte checksum of the payload (blake2b with digest_size=8,
read little-endian). Corruption is reported through the error classes
below so callers can tell a wrong file type from a damaged one.
"""

import os
import tempfile
from hashlib import blake2b


class FormatError(ValueError):
    """A binary artifact file is malformed."""


class BadMagicError(FormatError):
    """File does not start with the expected magic bytes."""


class TruncatedFileError(FormatError):
    """File ends before the declared payload/checksum is complete."""


class FieldMismatchError(FormatError):
    """Header fields are inconsistent with the payload actually present."""


class ChecksumError(FormatError):
    """Payload checksum does not match the stored value."""


def u64_digest(payload):
    """64-bit payload checksum, also used as a generic content digest."""
    return int.from_bytes(blake2b(payload, digest_size=8).digest(), "little")


def write_atomic(path, data):
    """Write bytes via a temp file + rename so readers never see partial files."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def check_magic(data, magic, what):
    if len(data) < len(magic):
        raise TruncatedFileError(f"{what}: file shorter than magic header")
    if data[: len(magic)] != magic:
        raise BadMagicError(f"{what}: bad magic {data[:len(magic)]!r}, expected {magic!r}")


def check_checksum(payload, stored, what):
    actual = u64_digest(payload)
    if actual != stored:
        raise ChecksumError(f"{what}: checksum mismatch (stored {stored:#018x}, computed {actual:#018x})")
