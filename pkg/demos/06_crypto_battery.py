#!/usr/bin/env python3
"""Adversarial block battery: attack the stream, expect to lose.

2048-bit blocks face four checks: Hamming distance between halves
(binomial around 1024), a trained next-bit predictor in each direction
(held-out accuracy must stay near coin-flip), and the max autocorrelation
over 64 lags.  The same attacks must succeed against structured input,
otherwise a passing grade means nothing.
"""

import numpy as np
from _support import banner, synth_rf_block

from entroflow.crypto_eval import crypto_battery, next_bit_test, split_blocks
from entroflow.seedsrc import extract_mantissa_bits, samples_to_sequences
from entroflow.whitener import generate_bits, instantiate

corpus = samples_to_sequences(synth_rf_block(10_000, seed=77))
material = b"".join(extract_mantissa_bits(s).bits for s in corpus)
stream = generate_bits(instantiate(material), 1024 * 2048)
blocks = split_blocks(stream)
print(f"{blocks.shape[0]} blocks of {blocks.shape[1]} bits")

report = crypto_battery(blocks)
s = report.summary

banner("Whitened output (should look like coin flips)")
hd = [r.statistic for r in report.by_test()["hamming_distance"]]
print(f"mean half-block hamming distance {s['hd_mean']:.2f} "
      f"(expect 512), measured sd {np.std(hd):.2f} vs binomial sd 16.0")
print(f"hd p-value failures        {s['hd_fail_rate']:.2%}")
print(f"next-bit accuracy fwd/bwd  {s['next_bit_acc_mean_forward']:.4f} / "
      f"{s['next_bit_acc_mean_backward']:.4f} (fail if > 0.6)")
print(f"next-bit failures fwd/bwd  {s['next_bit_fail_rate_forward']:.2%} / "
      f"{s['next_bit_fail_rate_backward']:.2%}")
print(f"max-ACF over 64 lags: mean peak {s['acf_peak_mean']:.3f}, "
      f"failures (>0.10) {s['acf_fail_rate']:.2%}")

banner("The same attacks against structured blocks")
period4 = np.tile(np.array([1, 1, 0, 0], dtype=np.uint8), 512)[None, :]
acc = next_bit_test(period4)[0].statistic
print(f"period-4 block: next-bit predictor reaches accuracy {acc:.2f}")
mirrored = np.tile(blocks[0, :1024], 2)[None, :]
bad = crypto_battery(np.vstack([period4, mirrored]))
flagged = sorted({r.name for r in bad.results if r.passed is False})
print(f"battery flags on period-4 + mirrored-halves blocks: {', '.join(flagged)}")
