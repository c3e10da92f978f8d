"""Adversarial block tests: can cheap attacks get a grip on the output?

The stream is cut into 2048-bit blocks.  Each block is probed three ways:

- hamming_distance: the first 1024 bits play the role of material an
  attacker already saw, the second 1024 the value being protected; their
  Hamming distance must look Binomial(1024, 1/2).
- next_bit: a logistic model is trained on every sliding 16-bit window
  of the block to predict the following bit (and, on the reversed block,
  the preceding one).  Held-out accuracy meaningfully above coin-flipping
  flags structure.
- block_acf: the autocorrelation of the +-1-mapped block must stay small
  at every lag up to 64.

The logistic regression is plain batched gradient descent on purpose:
the attack must be self-contained, deterministic, and cheap enough to run
on tens of thousands of blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy import special, stats

from .bitstream import BitStream, as_bit_array
from .errors import InsufficientData, ShapeError
from .results import BatteryReport, TestResult

__all__ = [
    "CryptoConfig",
    "split_blocks",
    "hamming_distance_test",
    "next_bit_test",
    "block_acf_test",
    "crypto_battery",
    "BLOCK_BITS",
]

BLOCK_BITS = 2048


@dataclass
class CryptoConfig:
    alpha: float = 0.01  # hamming-distance significance
    window: int = 16  # next-bit feature width
    train_frac: float = 0.8  # contiguous split: 1625 train / 407 test
    acc_threshold: float = 0.6  # next-bit fail line
    learning_rate: float = 2.0
    n_iter: int = 48
    max_lag: int = 64
    acf_threshold: float = 0.10
    chunk: int = 512  # blocks per regression batch


def split_blocks(stream, block_bits: int = BLOCK_BITS) -> np.ndarray:
    """Cut a stream into full blocks, dropping the remainder."""
    bits = as_bit_array(stream)
    if block_bits <= 0:
        raise ShapeError("block_bits must be positive")
    n_blocks = bits.size // block_bits
    if n_blocks == 0:
        raise InsufficientData(
            f"{bits.size} bits do not fill one {block_bits}-bit block"
        )
    return bits[: n_blocks * block_bits].reshape(n_blocks, block_bits)


def _as_blocks(blocks) -> np.ndarray:
    if isinstance(blocks, BitStream):
        return split_blocks(blocks)
    arr = np.asarray(blocks, dtype=np.uint8)
    if arr.ndim == 1:
        arr = split_blocks(arr)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ShapeError("expected a (n_blocks, block_bits) bit array")
    if arr.size and arr.max() > 1:
        raise ShapeError("bit arrays must be 0/1")
    return arr


def binomial_two_sided_p(count, n: int) -> np.ndarray:
    """Two-sided exact binomial(n, 1/2) p-value, doubling the smaller tail.

    Past five sigma the continuity-corrected normal tail is used instead;
    the difference there is far below any decision threshold.
    """
    k = np.atleast_1d(np.asarray(count, dtype=np.int64))
    sigma = math.sqrt(n) / 2.0
    dev = np.abs(k - n / 2.0)
    p = np.empty(k.shape, dtype=np.float64)
    far = dev > 5.0 * sigma
    if far.any():
        p[far] = special.erfc((dev[far] - 0.5) / (sigma * math.sqrt(2.0)))
    near = ~far
    if near.any():
        lo = stats.binom.cdf(k[near], n, 0.5)
        hi = stats.binom.sf(k[near] - 1, n, 0.5)
        p[near] = np.minimum(2.0 * np.minimum(lo, hi), 1.0)
    return p


def hamming_distance_test(blocks, alpha: float = 0.01) -> list:
    """Per block: distance between the two halves vs Binomial(half, 1/2)."""
    arr = _as_blocks(blocks)
    half = arr.shape[1] // 2
    hd = (arr[:, :half] != arr[:, half:]).sum(axis=1)
    pvals = binomial_two_sided_p(hd, half)
    return [
        TestResult(
            name="hamming_distance",
            statistic=float(d),
            p_value=float(p),
            passed=bool(p >= alpha),
            alpha=alpha,
            details={"half_bits": half},
        )
        for d, p in zip(hd, pvals)
    ]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return special.expit(z)


def _logistic_accuracy(x_train, y_train, x_test, y_test, lr: float, n_iter: int):
    """Batched logistic regression; returns held-out accuracy per block.

    x_*: (blocks, samples, features) float32 with a trailing bias column,
    y_*: (blocks, samples) float32 in {0, 1}.  Weights start at zero and
    take ``n_iter`` full-batch gradient steps, so the fit is deterministic.
    """
    n_samples = x_train.shape[1]
    w = np.zeros((x_train.shape[0], x_train.shape[2], 1), dtype=np.float32)
    yt = y_train[:, :, None]
    for _ in range(n_iter):
        p = _sigmoid(x_train @ w)
        grad = np.swapaxes(x_train, 1, 2) @ (p - yt) / n_samples
        w -= lr * grad
    pred = (x_test @ w)[:, :, 0] > 0.0
    return (pred == (y_test > 0.5)).mean(axis=1)


def next_bit_test(
    blocks,
    backward: bool = False,
    window: int = 16,
    train_frac: float = 0.8,
    acc_threshold: float = 0.6,
    learning_rate: float = 2.0,
    n_iter: int = 48,
    chunk: int = 512,
) -> list:
    """Sliding-window next-bit prediction; fails when accuracy > threshold."""
    arr = _as_blocks(blocks)
    if backward:
        arr = arr[:, ::-1]
    n_blocks, block_bits = arr.shape
    n_windows = block_bits - window
    if n_windows < 10:
        raise ShapeError(f"{block_bits}-bit blocks leave too few {window}-bit windows")
    n_train = int(n_windows * train_frac)
    name = "next_bit_backward" if backward else "next_bit_forward"
    out = []
    for lo in range(0, n_blocks, chunk):
        part = arr[lo : lo + chunk]
        view = np.lib.stride_tricks.sliding_window_view(part, window, axis=1)
        feats = np.concatenate(
            [
                view[:, :n_windows].astype(np.float32),
                np.ones((part.shape[0], n_windows, 1), dtype=np.float32),
            ],
            axis=2,
        )
        labels = part[:, window:].astype(np.float32)
        acc = _logistic_accuracy(
            feats[:, :n_train],
            labels[:, :n_train],
            feats[:, n_train:],
            labels[:, n_train:],
            lr=learning_rate,
            n_iter=n_iter,
        )
        for a in acc:
            out.append(
                TestResult(
                    name=name,
                    statistic=float(a),
                    p_value=None,
                    passed=bool(a <= acc_threshold),
                    alpha=None,
                    details={
                        "threshold": acc_threshold,
                        "n_train": n_train,
                        "n_test": n_windows - n_train,
                    },
                )
            )
    return out


def block_acf(blocks, max_lag: int = 64) -> np.ndarray:
    """Sample autocorrelation of each +-1-mapped block, lags 1..max_lag."""
    arr = _as_blocks(blocks)
    x = arr.astype(np.float64) * 2.0 - 1.0
    x -= x.mean(axis=1, keepdims=True)
    n = x.shape[1]
    if max_lag >= n:
        raise ShapeError("max_lag must be below the block length")
    nfft = sfft.next_fast_len(2 * n)
    spec = sfft.rfft(x, n=nfft, axis=1)
    ac = sfft.irfft(spec * np.conj(spec), n=nfft, axis=1)[:, : max_lag + 1]
    denom = ac[:, :1].copy()
    denom[denom == 0.0] = np.inf  # constant block: define rho = 0
    return ac[:, 1:] / denom


def block_acf_test(blocks, max_lag: int = 64, threshold: float = 0.10) -> list:
    rho = block_acf(blocks, max_lag)
    peak = np.abs(rho).max(axis=1)
    lag_of_peak = np.abs(rho).argmax(axis=1) + 1
    return [
        TestResult(
            name="block_acf",
            statistic=float(m),
            p_value=None,
            passed=bool(m <= threshold),
            alpha=None,
            details={"threshold": threshold, "peak_lag": int(lag), "max_lag": max_lag},
        )
        for m, lag in zip(peak, lag_of_peak)
    ]


def crypto_battery(stream_or_blocks, cfg: CryptoConfig | None = None) -> BatteryReport:
    """All three attacks over every block, plus the acceptance summary."""
    cfg = cfg or CryptoConfig()
    blocks = _as_blocks(stream_or_blocks)
    report = BatteryReport(battery="crypto")
    hd_rows = hamming_distance_test(blocks, alpha=cfg.alpha)
    fwd_rows = next_bit_test(
        blocks,
        backward=False,
        window=cfg.window,
        train_frac=cfg.train_frac,
        acc_threshold=cfg.acc_threshold,
        learning_rate=cfg.learning_rate,
        n_iter=cfg.n_iter,
        chunk=cfg.chunk,
    )
    bwd_rows = next_bit_test(
        blocks,
        backward=True,
        window=cfg.window,
        train_frac=cfg.train_frac,
        acc_threshold=cfg.acc_threshold,
        learning_rate=cfg.learning_rate,
        n_iter=cfg.n_iter,
        chunk=cfg.chunk,
    )
    acf_rows = block_acf_test(blocks, max_lag=cfg.max_lag, threshold=cfg.acf_threshold)
    for rows in (hd_rows, fwd_rows, bwd_rows, acf_rows):
        for i, r in enumerate(rows):
            r.subject = str(i)
            report.add(r)
    hd_vals = np.array([r.statistic for r in hd_rows])
    report.summary = {
        "n_blocks": int(blocks.shape[0]),
        "hd_mean": float(hd_vals.mean()),
        "hd_fail_rate": float(np.mean([not r.passed for r in hd_rows])),
        "next_bit_acc_mean_forward": float(np.mean([r.statistic for r in fwd_rows])),
        "next_bit_acc_mean_backward": float(np.mean([r.statistic for r in bwd_rows])),
        "next_bit_fail_rate_forward": float(np.mean([not r.passed for r in fwd_rows])),
        "next_bit_fail_rate_backward": float(np.mean([not r.passed for r in bwd_rows])),
        "acf_fail_rate": float(np.mean([not r.passed for r in acf_rows])),
        "acf_peak_mean": float(np.mean([r.statistic for r in acf_rows])),
    }
    return report
