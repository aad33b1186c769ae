"""Alternating optimization of (hidden units, epochs) with switching.

Runs on a synthetic dataset so the demo finishes in about a minute; swap in
a generated dataset CSV (see demo_dataset_and_classifiers.py) for the real
thing.

Run:  python demos/demo_switchopt.py
"""

import numpy as np

from uwoc import dataset as ds
from uwoc.seeding import make_rng
from uwoc.switchopt import SwitchOptParams, run_switchopt

rng = make_rng(11)
labels6 = np.array([1, 3, 5] * 40)
feats = np.abs(rng.standard_normal((120, 128)) + 0.6 * labels6[:, None])
samples = [ds.MLSample(features=f, label6=int(l), distance_m=1.0,
                       speed_m_s=0.1, repeat=0)
           for f, l in zip(feats, labels6)]

params = SwitchOptParams(
    candidates=("lstm", "bilstm", "gru"),
    grid_hidden=(8, 16),
    grid_epochs=(2, 4, 6),
    initial_epochs=2,
    task="three_class",
    k_folds=3,
    seed=3,
)
result = run_switchopt(samples, params)

print(f"switched classifier: {result.u_opt}")
print(f"optimized hidden units: {result.n_h_opt}, epochs: {result.n_p_opt}")
print(f"cross-validated accuracy: {result.omega:.4f}\n")

print("candidate finals:")
for kind, n_h, n_p, omega in result.candidate_finals:
    print(f"  {kind:7s} N_h={n_h:4d} N_p={n_p:2d} omega={omega:.4f}")

print("\nalternation trace:")
for entry in result.trace:
    fixed = ", ".join(f"{k}={v}" for k, v in entry["fixed"].items())
    searched = ", ".join(f"{k}={v}" for k, v in entry["searched"].items())
    print(f"  {entry['candidate']:7s} it={entry['iteration']} "
          f"fix({fixed}) try({searched}) -> {entry['omega']:.4f}")
