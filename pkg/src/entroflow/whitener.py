"""SHA-512 Hash-DRBG (SP 800-90A) used to whiten raw seed material.

State is the standard (V, C, reseed_counter) triple with seedlen = 888
bits.  Instantiation derives V from the entropy input through Hash_df;
each generate call runs Hashgen and then advances V, so two successive
requests never reuse counter-block output.  Large requests are served in
internal calls of at most 2**19 bits (the standard's per-request ceiling),
each a full generate with its own state update.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .bitstream import BitStream
from .errors import RequestTooLarge, ReseedRequired, SeedLengthError
from .seedsrc import SeedMaterial

__all__ = [
    "SEEDLEN_BITS",
    "OUTLEN_BITS",
    "MAX_REQUEST_BITS",
    "RESEED_INTERVAL",
    "DrbgState",
    "hash_df",
    "instantiate",
    "reseed_drbg",
    "generate_bytes",
    "generate_bits",
]

SEEDLEN_BITS = 888
SEEDLEN_BYTES = SEEDLEN_BITS // 8  # 111
OUTLEN_BITS = 512
MAX_REQUEST_BITS = 1 << 19  # per internal generate call
RESEED_INTERVAL = 1 << 48  # generate calls allowed between reseeds
_MOD = 1 << SEEDLEN_BITS


def hash_df(material: bytes, n_bits: int) -> bytes:
    """SP 800-90A Hash_df: stretch/compress material to n_bits."""
    if n_bits <= 0 or n_bits > 255 * OUTLEN_BITS:
        raise SeedLengthError("hash_df output size out of range")
    out = bytearray()
    rounds = -(-n_bits // OUTLEN_BITS)
    frame = n_bits.to_bytes(4, "big")
    for counter in range(1, rounds + 1):
        out += hashlib.sha512(bytes([counter]) + frame + material).digest()
    out = out[: -(-n_bits // 8)]
    if n_bits % 8:
        out[-1] &= 0xFF << (8 - n_bits % 8) & 0xFF
    return bytes(out)


@dataclass
class DrbgState:
    v: bytes  # 111 bytes
    c: bytes  # 111 bytes
    reseed_counter: int


def _entropy_bytes(seed) -> bytes:
    if isinstance(seed, SeedMaterial):
        return seed.bits
    return bytes(seed)


def instantiate(seed, personalization: bytes = b"") -> DrbgState:
    """Fresh DRBG state from entropy input plus optional personalization.

    The nonce is folded into the entropy input (one physical seed supplies
    both), so seed_material is entropy || personalization.  The entropy
    input must carry at least seedlen bits.
    """
    entropy = _entropy_bytes(seed)
    if len(entropy) * 8 < SEEDLEN_BITS:
        raise SeedLengthError(
            f"entropy input must be >= {SEEDLEN_BITS} bits, got {len(entropy) * 8}"
        )
    v = hash_df(entropy + bytes(personalization), SEEDLEN_BITS)
    c = hash_df(b"\x00" + v, SEEDLEN_BITS)
    return DrbgState(v=v, c=c, reseed_counter=1)


def reseed_drbg(state: DrbgState, seed, additional: bytes = b"") -> None:
    """Standard reseed: V <- Hash_df(0x01 || V || entropy || additional)."""
    entropy = _entropy_bytes(seed)
    if len(entropy) * 8 < SEEDLEN_BITS:
        raise SeedLengthError("reseed entropy too short")
    v = hash_df(b"\x01" + state.v + entropy + bytes(additional), SEEDLEN_BITS)
    state.v = v
    state.c = hash_df(b"\x00" + v, SEEDLEN_BITS)
    state.reseed_counter = 1


def _hashgen(v: bytes, n_bytes: int) -> bytes:
    out = bytearray()
    data = int.from_bytes(v, "big")
    for _ in range(-(-n_bytes // 64)):
        out += hashlib.sha512(data.to_bytes(SEEDLEN_BYTES, "big")).digest()
        data = (data + 1) % _MOD
    return bytes(out[:n_bytes])


def _generate_one(state: DrbgState, n_bytes: int) -> bytes:
    if 8 * n_bytes > MAX_REQUEST_BITS:
        raise RequestTooLarge(f"one generate call serves at most {MAX_REQUEST_BITS} bits")
    if state.reseed_counter > RESEED_INTERVAL:
        raise ReseedRequired("DRBG generate budget exhausted; reseed first")
    out = _hashgen(state.v, n_bytes)
    h = hashlib.sha512(b"\x03" + state.v).digest()
    v_new = (
        int.from_bytes(state.v, "big")
        + int.from_bytes(h, "big")
        + int.from_bytes(state.c, "big")
        + state.reseed_counter
    ) % _MOD
    state.v = v_new.to_bytes(SEEDLEN_BYTES, "big")
    state.reseed_counter += 1
    return out


def generate_bytes(state: DrbgState, n_bytes: int) -> bytes:
    """Produce n_bytes, splitting into standard-sized generate calls."""
    if n_bytes < 0:
        raise SeedLengthError("byte count must be non-negative")
    chunk = MAX_REQUEST_BITS // 8
    out = bytearray()
    left = n_bytes
    while left > 0:
        take = min(left, chunk)
        out += _generate_one(state, take)
        left -= take
    return bytes(out)


def generate_bits(state: DrbgState, n_bits: int) -> BitStream:
    """Bit-count variant of generate_bytes; pads to whole bytes internally."""
    raw = generate_bytes(state, -(-n_bits // 8))
    arr = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:n_bits]
    return BitStream.from_bits(arr)
