"""BER of the turbo code over a BPSK AWGN reference channel.

Run:  python demos/demo_turbo_waterfall.py
"""

import math

import numpy as np

from uwoc import turbo
from uwoc.seeding import make_rng

K = 1024
N_FRAMES = 60
rng = make_rng(1)

print(f"{'Eb/N0':>6} {'uncoded BER':>12} {'R=1/2 BER':>12} {'R=1/3 BER':>12}")
for ebn0_db in (0.0, 1.0, 2.0, 3.0):
    ebn0 = 10 ** (ebn0_db / 10.0)
    row = [0.5 * math.erfc(math.sqrt(ebn0))]
    for rate in (turbo.RATE_12, turbo.RATE_13):
        spec = turbo.make_spec(K, rate)
        bits = rng.integers(0, 2, (N_FRAMES, K)).astype(np.int8)
        coded = turbo.turbo_encode_batch(bits, spec)
        sigma2 = 1.0 / (2.0 * ebn0 * spec.rate_value)
        y = (1.0 - 2.0 * coded) + rng.standard_normal(coded.shape) * math.sqrt(sigma2)
        decoded = turbo.turbo_decode_batch(2.0 * y / sigma2, spec)
        row.append(np.mean(decoded != bits))
    print(f"{ebn0_db:6.1f} {row[0]:12.3e} {row[1]:12.3e} {row[2]:12.3e}")

print(f"\n({N_FRAMES} frames of {K} bits per point, 8 decoding iterations,"
      " exact log-MAP)")
