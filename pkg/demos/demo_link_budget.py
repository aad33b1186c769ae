"""Walk through the optical link budget: path loss, noise, SNR, Doppler.

Run:  python demos/demo_link_budget.py
"""

import math

from uwoc import channel as ch

params = ch.OpticalLinkParams()

print("=== Noise budget (A^2) ===")
budget = ch.noise_budget(params)
print(f"solar background : {budget.solar:.4e}")
print(f"shot             : {budget.shot:.4e}")
print(f"dark current     : {budget.dark:.4e}")
print(f"thermal          : {budget.thermal:.4e}")
print(f"total            : {budget.total:.4e}")

print("\n=== Link SNR vs distance (clear ocean, 50 W source) ===")
print(f"{'d [m]':>6} {'atten':>10} {'signal':>12} {'SNR [dB]':>10}")
for d in (1, 5, 10, 15, 20, 25, 30, 40, 50, 60):
    la = ch.attenuation(params.extinction_per_m, d)
    sig = ch.los_signal_power(params, d)
    snr_db = 10 * math.log10(ch.link_snr(params, d))
    print(f"{d:6d} {la:10.4f} {sig:12.4e} {snr_db:10.2f}")

print("\n=== Mobility ===")
for v in (0.1, 0.3, 0.4, 0.5):
    fd = ch.doppler_shift(v, params)
    tc = ch.coherence_time(v, params)
    rho = ch.symbol_correlation(v, params, symbol_period_s=340e-9)
    print(f"v = {v} m/s: Doppler = {fd:.3e} Hz, coherence = {tc * 1e9:7.1f} ns, "
          f"per-symbol correlation = {rho:.4f}")

print("\n=== A small-scale realization (first 5 detectors) ===")
from uwoc.seeding import make_rng

state = ch.draw_channel(params, 20.0, 0.1, make_rng(7))
print("tap gains:")
print(state.tap_gains[:5])
state = ch.evolve_channel(state, make_rng(8))
print("after one symbol period:")
print(state.tap_gains[:5])
