"""entroflow: physical entropy, a hybrid neural generator, and test batteries.

The pipeline runs in four stages:

1. seedsrc      harvest RF-noise WAV or CPU-jitter samples into 200-value
                float sequences and 4600-bit seed material
2. generator    the hybrid inner/outer model that turns seeded windows
                into full-entropy float sequences
3. whitener     SHA-512 Hash-DRBG (SP 800-90A) producing bit streams
4. batteries    floatstats (float domain), bitstats (SP 800-22 subset),
                crypto_eval (adversarial block tests)
"""

from __future__ import annotations

__version__ = "0.1.0"

from . import (
    bitstats,
    bitstream,
    config,
    crypto_eval,
    errors,
    fileformats,
    floatstats,
    generator,
    nnet,
    results,
    seedsrc,
    whitener,
)

__all__ = [
    "__version__",
    "bitstats",
    "bitstream",
    "config",
    "crypto_eval",
    "errors",
    "fileformats",
    "floatstats",
    "generator",
    "nnet",
    "results",
    "seedsrc",
    "whitener",
]
