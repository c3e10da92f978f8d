"""Shared demo plumbing: a synthetic stand-in for an RF noise capture.

Samples come from 8192 spread-out int16 codes with a faint cosine density
tilt, so raw windows carry a realistic Shannon/min-entropy gap while the
corpus histogram stays nearly flat.
"""

from __future__ import annotations

import numpy as np

from entroflow.seedsrc import RawSampleBlock

N_CODES = 8192
TILT = 0.03


def synth_rf_block(n: int, seed: int, rate: int = 8000) -> RawSampleBlock:
    rng = np.random.default_rng(seed)
    out = np.empty(n, dtype=np.int64)
    filled = 0
    while filled < n:
        k = rng.integers(0, N_CODES, size=2 * (n - filled) + 64)
        keep = rng.random(k.size) < (1.0 + TILT * np.cos(np.pi * k / N_CODES)) / (1.0 + TILT)
        take = k[keep][: n - filled]
        out[filled : filled + take.size] = take
        filled += take.size
    step = 65536 // N_CODES
    pcm = (out * step + step // 2 - 32768).astype(np.int16)
    return RawSampleBlock(samples=pcm, rate=rate, source="rf_wav")


def banner(title: str) -> None:
    print()
    print(title)
    print("-" * len(title))
