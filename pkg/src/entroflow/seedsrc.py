"""Physical entropy sources and their reduction to seed material.

Two harvesters are provided: 16-bit PCM WAV recordings of RF noise, and
timing jitter of a fixed CPU busy loop.  Both yield int16 sample blocks
that are normalised into 200-value float sequences in [0, 1); the 23-bit
float32 mantissas of one sequence concatenate to 4600 bits of raw seed
material.
"""

from __future__ import annotations

import hashlib
import time
import wave
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InsufficientData,
    InsufficientTimerResolution,
    ParseError,
    ShapeError,
    UnsupportedFormat,
)

__all__ = [
    "SEQUENCE_LEN",
    "MANTISSA_BITS",
    "SEED_BITS",
    "SEED_BYTES",
    "RawSampleBlock",
    "FloatSequence",
    "SeedMaterial",
    "JitterConfig",
    "load_rf_wav",
    "write_rf_wav",
    "collect_cpu_jitter",
    "samples_to_sequences",
    "extract_mantissa_bits",
]

SEQUENCE_LEN = 200
MANTISSA_BITS = 23
SEED_BITS = SEQUENCE_LEN * MANTISSA_BITS  # 4600
SEED_BYTES = SEED_BITS // 8  # 4600 is a whole number of bytes: 575

# Largest float32 strictly below 1; the upper clamp for normalised values.
FLOAT32_BELOW_ONE = np.nextafter(np.float32(1.0), np.float32(0.0))


@dataclass
class RawSampleBlock:
    """A run of int16 samples from one physical source."""

    samples: np.ndarray  # int16, 1-D
    rate: int  # samples per second (0 for timer-based sources)
    source: str  # "rf_wav" or "cpu_jitter"
    channels: int = 1  # channel count of the original recording

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.int16).ravel()
        if self.samples.size == 0:
            raise ShapeError("sample block cannot be empty")

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_seconds(self) -> float:
        return len(self) / self.rate if self.rate else float("nan")


@dataclass
class FloatSequence:
    """Exactly 200 float32 values in [0, 1)."""

    values: np.ndarray
    origin: str = "unknown"

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float32).ravel()
        if v.size != SEQUENCE_LEN:
            raise ShapeError(f"a sequence holds {SEQUENCE_LEN} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ShapeError("sequence values must be finite")
        if v.min() < 0.0 or v.max() >= 1.0:
            raise ShapeError("sequence values must lie in [0, 1)")
        self.values = v

    def digest(self) -> bytes:
        """SHA-256 of the little-endian float32 encoding (identity of the data)."""
        return hashlib.sha256(self.values.astype("<f4").tobytes()).digest()


@dataclass(frozen=True)
class SeedMaterial:
    """4600 bits of raw seed extracted from one sequence."""

    bits: bytes  # 575 bytes, mantissa bits MSB-first
    parent_digest: bytes  # digest() of the source FloatSequence

    def __post_init__(self) -> None:
        if len(self.bits) != SEED_BYTES:
            raise ShapeError(f"seed payload must be {SEED_BYTES} bytes")

    @property
    def nbits(self) -> int:
        return SEED_BITS


@dataclass
class JitterConfig:
    """Knobs for the CPU-jitter harvester."""

    busy_iterations: int = 1000  # fixed integer busy-loop length per sample
    min_resolution_ns: int = 100  # coarsest acceptable monotonic clock step

    def __post_init__(self) -> None:
        if self.busy_iterations <= 0:
            raise ShapeError("busy_iterations must be positive")


def load_rf_wav(path) -> RawSampleBlock:
    """Read a 16-bit PCM WAV file; stereo is averaged to mono.

    The averaging uses integer floor division so a written mono block
    round-trips bit-exactly.
    """
    try:
        with wave.open(str(path), "rb") as wf:
            channels = wf.getnchannels()
            sampwidth = wf.getsampwidth()
            rate = wf.getframerate()
            nframes = wf.getnframes()
            raw = wf.readframes(nframes)
    except (wave.Error, EOFError, OSError) as exc:
        raise ParseError(f"cannot read WAV file {path}: {exc}") from exc
    if sampwidth != 2:
        raise UnsupportedFormat(f"need 16-bit PCM, got sample width {sampwidth}")
    if channels not in (1, 2):
        raise UnsupportedFormat(f"need mono or stereo, got {channels} channels")
    data = np.frombuffer(raw, dtype="<i2")
    if data.size == 0:
        raise ParseError(f"empty data chunk in {path}")
    if channels == 2:
        pairs = data.reshape(-1, 2).astype(np.int32)
        data = ((pairs[:, 0] + pairs[:, 1]) // 2).astype(np.int16)
    return RawSampleBlock(samples=data, rate=rate, source="rf_wav", channels=channels)


def write_rf_wav(path, block: RawSampleBlock) -> None:
    """Write a sample block as mono 16-bit PCM."""
    if block.rate <= 0:
        raise ShapeError("WAV output needs a positive sample rate")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(block.rate)
        wf.writeframes(block.samples.astype("<i2").tobytes())


def _busy(iterations: int) -> int:
    # Fixed integer arithmetic; the work is constant, the duration is not.
    x = 0
    for _ in range(iterations):
        x = (x * 1103515245 + 12345) & 0xFFFFFFFF
    return x


def collect_cpu_jitter(n_samples: int, config: JitterConfig | None = None) -> RawSampleBlock:
    """Harvest ``n_samples`` int16 values from busy-loop timing jitter.

    Each sample is the low 16 bits of the monotonic-clock delta around one
    run of the busy loop, reinterpreted as a signed int16.  Collection is
    single threaded; scheduling noise is part of the signal.
    """
    if n_samples <= 0:
        raise InsufficientData("need a positive sample count")
    cfg = config or JitterConfig()
    res = time.get_clock_info("perf_counter").resolution
    if res * 1e9 > cfg.min_resolution_ns:
        raise InsufficientTimerResolution(
            f"clock step {res * 1e9:.0f} ns exceeds {cfg.min_resolution_ns} ns"
        )
    out = np.empty(n_samples, dtype=np.uint16)
    iters = cfg.busy_iterations
    t0 = time.perf_counter_ns()
    for i in range(n_samples):
        _busy(iters)
        t1 = time.perf_counter_ns()
        out[i] = (t1 - t0) & 0xFFFF
        t0 = t1
    return RawSampleBlock(
        samples=out.view(np.int16), rate=0, source="cpu_jitter", channels=1
    )


def samples_to_sequences(block: RawSampleBlock) -> list[FloatSequence]:
    """Normalise int16 samples to [0, 1) and chunk into 200-value sequences.

    The map is v = (x + 32768) / 65536, which is exact in float32 for every
    int16 input.  A trailing remainder shorter than 200 samples is dropped.
    """
    n = len(block) // SEQUENCE_LEN
    if n == 0:
        raise InsufficientData(
            f"{len(block)} samples cannot fill a {SEQUENCE_LEN}-value sequence"
        )
    x = block.samples[: n * SEQUENCE_LEN].astype(np.float64)
    v = ((x + 32768.0) / 65536.0).astype(np.float32).reshape(n, SEQUENCE_LEN)
    return [FloatSequence(values=row, origin=block.source) for row in v]


def extract_mantissa_bits(seq: FloatSequence) -> SeedMaterial:
    """Concatenate the 23 float32 fraction bits of each value, MSB first."""
    u = seq.values.view(np.uint32)
    frac = (u & np.uint32(0x7FFFFF)).astype(np.uint32)
    shifts = np.arange(MANTISSA_BITS - 1, -1, -1, dtype=np.uint32)
    bits = ((frac[:, None] >> shifts[None, :]) & 1).astype(np.uint8).ravel()
    return SeedMaterial(bits=np.packbits(bits).tobytes(), parent_digest=seq.digest())
