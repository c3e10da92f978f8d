"""Bit-level container shared by the whitener and the bit-domain batteries.

Bits are stored packed, most significant bit first within each byte.  Any
padding bits after ``bit_len`` are kept at zero so equal streams compare
equal as bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError

__all__ = ["BitStream", "as_bit_array"]


def as_bit_array(source) -> np.ndarray:
    """Coerce a BitStream or 0/1 array-like to a flat uint8 array."""
    if isinstance(source, BitStream):
        return source.bits()
    arr = np.asarray(source, dtype=np.uint8).ravel()
    if arr.size and arr.max() > 1:
        raise ShapeError("bit arrays must be 0/1")
    return arr


@dataclass(frozen=True)
class BitStream:
    """An immutable bit string of explicit length."""

    data: bytes
    bit_len: int

    def __post_init__(self) -> None:
        if self.bit_len < 0:
            raise ShapeError("bit_len must be non-negative")
        need = (self.bit_len + 7) // 8
        if len(self.data) != need:
            raise ShapeError(
                f"{len(self.data)} bytes cannot hold exactly {self.bit_len} bits"
            )
        if self.bit_len % 8:
            tail = self.data[-1] & ((1 << (8 - self.bit_len % 8)) - 1)
            if tail:
                raise ShapeError("padding bits past bit_len must be zero")

    def __len__(self) -> int:
        return self.bit_len

    @classmethod
    def from_bytes(cls, data: bytes, bit_len: int | None = None) -> "BitStream":
        if bit_len is None:
            bit_len = 8 * len(data)
        return cls(bytes(data), bit_len)

    @classmethod
    def from_bits(cls, bits) -> "BitStream":
        """Pack an iterable or array of 0/1 values."""
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
        arr = arr.astype(np.uint8).ravel()
        if arr.size and arr.max() > 1:
            raise ShapeError("bits must be 0 or 1")
        return cls(np.packbits(arr).tobytes(), int(arr.size))

    def bits(self) -> np.ndarray:
        """Unpack to a uint8 array of 0/1 values, length ``bit_len``."""
        if self.bit_len == 0:
            return np.zeros(0, dtype=np.uint8)
        return np.unpackbits(np.frombuffer(self.data, dtype=np.uint8))[: self.bit_len]

    def pm1(self) -> np.ndarray:
        """Map bits to the +1/-1 alphabet (1 -> +1, 0 -> -1) as int8."""
        return (self.bits().astype(np.int8) << 1) - 1

    def slice(self, start: int, stop: int) -> "BitStream":
        if not (0 <= start <= stop <= self.bit_len):
            raise ShapeError("slice out of range")
        return BitStream.from_bits(self.bits()[start:stop])

    def concat(self, other: "BitStream") -> "BitStream":
        return BitStream.from_bits(np.concatenate([self.bits(), other.bits()]))
