#!/usr/bin/env python3
"""Bit-domain battery: the SP 800-22 tests over whitened streams.

Every test reports a p-value against alpha = 0.01 or an explicit not-run
reason.  The two excursion tests are special: each walk state needs at
least 500 cycle visits before its statistic is meaningful, so many state
rows legitimately stay not-run and the accounting must say so.
"""

from _support import banner, synth_rf_block

from entroflow.bitstats import NistParams, nist_battery
from entroflow.seedsrc import extract_mantissa_bits, samples_to_sequences
from entroflow.whitener import generate_bits, instantiate

corpus = samples_to_sequences(synth_rf_block(10_000, seed=58))
material = b"".join(extract_mantissa_bits(s).bits for s in corpus)
streams = [
    generate_bits(instantiate(material, personalization=bytes([i])), 1 << 23)
    for i in range(2)
]
print(f"two whitened streams of {len(streams[0])} bits")

report = nist_battery(streams, NistParams())

banner("Per-test outcomes")
rates = report.summary["pass_rates"]
for name, row in sorted(rates.items()):
    not_run = row["n"] - row["n_run"]
    tag = f"{row['n_pass']}/{row['n_run']} pass"
    if not_run:
        tag += f", {not_run}/{row['n']} not run"
    print(f"{name:28s} {tag}")

banner("Excursion not-run accounting (stream 0)")
for r in report.results:
    if r.name == "random_excursions" and r.subject.startswith("0:"):
        state = r.subject.split(":")[1]
        if r.not_run:
            print(f"state {state:3s}  not run ({r.reason})")
        else:
            print(f"state {state:3s}  p = {r.p_value:.4f}")
print("distant states rarely collect 500 cycle visits; that is the expected "
      "profile, not a defect")
