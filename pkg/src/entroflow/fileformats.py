"""Portable on-disk containers for sequence corpora and seed records.

Both formats share a 10-byte header: 4-byte magic, format version as
little-endian u16, record count as little-endian u32.

EFSQ  sequence corpus: each record is 200 float32 values, little endian.
EFSD  seed records: each record is the 575-byte mantissa payload followed
      by the 32-byte SHA-256 digest of the parent sequence.

Readers reject unknown magics, future format versions, truncated bodies,
and trailing bytes; writers always produce version FORMAT_VERSION.  A
write/read/write cycle is byte-identical.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ParseError, SchemaVersionError, UnsupportedFormat
from .seedsrc import SEED_BYTES, SEQUENCE_LEN, FloatSequence, SeedMaterial

__all__ = [
    "FORMAT_VERSION",
    "SEQUENCE_MAGIC",
    "SEED_MAGIC",
    "write_sequences",
    "read_sequences",
    "write_seeds",
    "read_seeds",
]

FORMAT_VERSION = 1
SEQUENCE_MAGIC = b"EFSQ"
SEED_MAGIC = b"EFSD"

_HEADER = struct.Struct("<4sHI")
_DIGEST_BYTES = 32
_SEQ_RECORD = SEQUENCE_LEN * 4
_SEED_RECORD = SEED_BYTES + _DIGEST_BYTES


def _read_header(raw: bytes, magic: bytes, path) -> int:
    if len(raw) < _HEADER.size:
        raise ParseError(f"{path}: shorter than a container header")
    got_magic, version, count = _HEADER.unpack_from(raw)
    if got_magic != magic:
        raise UnsupportedFormat(f"{path}: expected {magic.decode()} container, found {got_magic!r}")
    if version > FORMAT_VERSION:
        raise SchemaVersionError(f"{path}: format version {version} is newer than {FORMAT_VERSION}")
    return count


def _check_body(raw: bytes, count: int, record_size: int, path) -> bytes:
    body = raw[_HEADER.size :]
    want = count * record_size
    if len(body) < want:
        raise ParseError(f"{path}: body holds {len(body)} bytes, header promises {want}")
    if len(body) > want:
        raise ParseError(f"{path}: {len(body) - want} trailing bytes after last record")
    return body


def write_sequences(path, sequences) -> None:
    """Write a FloatSequence corpus as an EFSQ container."""
    sequences = list(sequences)
    parts = [_HEADER.pack(SEQUENCE_MAGIC, FORMAT_VERSION, len(sequences))]
    for seq in sequences:
        parts.append(seq.values.astype("<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_sequences(path) -> list[FloatSequence]:
    """Read an EFSQ container back into FloatSequence records."""
    raw = Path(path).read_bytes()
    count = _read_header(raw, SEQUENCE_MAGIC, path)
    body = _check_body(raw, count, _SEQ_RECORD, path)
    values = np.frombuffer(body, dtype="<f4").reshape(count, SEQUENCE_LEN)
    return [FloatSequence(values=row, origin="efsq") for row in values]


def write_seeds(path, seeds) -> None:
    """Write SeedMaterial records as an EFSD container."""
    seeds = list(seeds)
    parts = [_HEADER.pack(SEED_MAGIC, FORMAT_VERSION, len(seeds))]
    for seed in seeds:
        if len(seed.parent_digest) != _DIGEST_BYTES:
            raise ParseError(f"parent digest must be {_DIGEST_BYTES} bytes")
        parts.append(seed.bits)
        parts.append(seed.parent_digest)
    Path(path).write_bytes(b"".join(parts))


def read_seeds(path) -> list[SeedMaterial]:
    """Read an EFSD container back into SeedMaterial records."""
    raw = Path(path).read_bytes()
    count = _read_header(raw, SEED_MAGIC, path)
    body = _check_body(raw, count, _SEED_RECORD, path)
    out = []
    for i in range(count):
        rec = body[i * _SEED_RECORD : (i + 1) * _SEED_RECORD]
        out.append(SeedMaterial(bits=rec[:SEED_BYTES], parent_digest=rec[SEED_BYTES:]))
    return out
