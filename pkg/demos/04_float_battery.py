#!/usr/bin/env python3
"""Float-domain battery: stationarity, independence, fit, and entropy tests.

Every test is calibrated so an ideal uniform source fails about alpha of
the time; structured inputs must actually get caught.  The battery runs
per sequence and aggregates pass rates per test family.
"""

import numpy as np
from _support import banner

from entroflow.floatstats import float_battery
from entroflow.seedsrc import FloatSequence

rng = np.random.default_rng(99)

banner("Ideal uniform corpus (calibration view)")
uniform = [FloatSequence(rng.random(200, dtype=np.float32)) for _ in range(120)]
report = float_battery(uniform)
print(f"{'test':16s} {'pass':>9s}")
for name, row in sorted(report.pass_rates().items()):
    print(f"{name:16s} {row['n_pass']:4d}/{row['n_run']:<4d} ({row['pass_rate']:.1%})")

banner("Structured inputs are caught")
ramp = FloatSequence(np.linspace(0.0, 0.999, 200, dtype=np.float32))
walk = np.cumsum(rng.normal(0, 0.01, 200))
walk = FloatSequence(((walk - walk.min()) / (np.ptp(walk) + 1e-6) * 0.998).astype(np.float32))
half = FloatSequence((rng.random(200, dtype=np.float32) * 0.5).astype(np.float32))
adversarial = float_battery([ramp, walk, half])
for idx, label in ((0, "linear ramp"), (1, "random walk"), (2, "half-range")):
    failed = sorted(
        r.name for r in adversarial.results
        if r.subject == str(idx) and r.passed is False
    )
    print(f"{label:12s} fails: {', '.join(failed)}")
