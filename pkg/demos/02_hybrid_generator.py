#!/usr/bin/env python3
"""The hybrid generator: a frozen inner model driven through its inputs.

The inner network learns to emit 0.5 for any window of physical samples,
then freezes.  Each cycle the outer stage nudges four window positions so
the frozen model's output returns to 0.5, the window shifts left by one,
and a fresh physical sample enters on the right.  After 50 cycles the
window itself is the output: 200 floats whose Shannon and min-entropy
nearly coincide.
"""

import time

import numpy as np
from _support import banner, synth_rf_block

from entroflow.floatstats import entropy_compare
from entroflow.generator import GeneratorConfig, generate_stream, init_state, seed_cost
from entroflow.nnet import TrainingConfig, new_inner_network, train_inner
from entroflow.seedsrc import samples_to_sequences

corpus = samples_to_sequences(synth_rf_block(80_000, seed=21))
train_corpus, seed_corpus = corpus[:300], corpus[300:]

banner("Training the inner model (constant 0.5 labels)")
net = new_inner_network(rng_seed=5)
log = train_inner(net, train_corpus, TrainingConfig(rng_seed=5))
print(f"epochs {log.epochs_run}, MAE trail "
      + " -> ".join(f"{m:.4f}" for m in log.epoch_mae[:3])
      + f" ... {log.epoch_mae[-1]:.4f}")
print(f"holdout MAE {log.holdout_mae:.4f}; model is now frozen")

banner("Generating")
n_out = 60
need = seed_cost(n_out)
print(f"{n_out} emissions consume {need} seed sequences (1 start + refills)")
t0 = time.perf_counter()
generated = generate_stream(net, seed_corpus, n_out)
dt = time.perf_counter() - t0
print(f"{n_out} sequences in {dt:.2f} s ({dt / n_out * 1e3:.1f} ms each; "
      f"budget is 1 s per emission)")

banner("Entropy transfer (raw seeds vs generated)")
for label, c in (("raw", seed_corpus[:n_out]), ("generated", generated)):
    comp = entropy_compare(c)
    print(f"{label:10s}  shannon {comp.mean_shannon:.3f}  "
          f"min {comp.mean_min_entropy:.3f}  gap {comp.gap:.4f} bits")

banner("Value histogram flatness (50 bins over [0, 1))")
values = np.concatenate([s.values for s in generated])
counts, _ = np.histogram(values, bins=50, range=(0.0, 1.0))
print(f"{values.size} values; max/min bin ratio {counts.max() / counts.min():.3f}")
print("small-corpus noise dominates this ratio: emissions overlap, so each "
      "physical sample recurs in ~4 snapshots; the ratio settles near the "
      "source's own envelope once the corpus reaches ~10^6 values")

banner("Determinism")
again = generate_stream(net, seed_corpus, 3)
same = all(np.array_equal(a.values, b.values) for a, b in zip(generated[:3], again))
print(f"rerun from the same seeds is bit-identical: {same}")
