"""Generate a small labeled dataset and compare classifier families on it.

A reduced grid (two speeds, coarse distances) keeps this demo at a few
minutes; the full grid lives behind `uwoc dataset`.

Run:  python demos/demo_dataset_and_classifiers.py
"""

import time

import numpy as np

from uwoc import dataset as ds
from uwoc import linksim
from uwoc.mlcore import ClassifierSpec, evaluate

plan = ds.DatasetPlan(
    speeds_m_s=(0.1, 0.5),
    distances_m=tuple(float(d) for d in range(2, 61, 2)),
    repeats=2,
)
options = linksim.SimOptions(frames_per_point=25)

t0 = time.time()
samples, _ = ds.generate(plan, seed=31, options=options)
print(f"{len(samples)} samples in {time.time() - t0:.0f}s")

labels = ds.labels6_of(samples)
print("label counts (configs 1..6):", np.bincount(labels, minlength=7)[1:])
for v in plan.speeds_m_s:
    line = "".join(str(s.label6) for s in samples if s.speed_m_s == v
                   and s.repeat == 0)
    print(f"labels along distance at v={v}: {line}")

print("\n5-fold cross-validated accuracy:")
specs = [
    ClassifierSpec(kind="tree"),
    ClassifierSpec(kind="adaboost"),
    ClassifierSpec(kind="svm"),
    ClassifierSpec(kind="lstm", n_hidden=64, n_epochs=10),
    ClassifierSpec(kind="gru", n_hidden=64, n_epochs=10),
]
for task in ("binary_freq", "three_class", "six_class"):
    parts = []
    for spec in specs:
        report = evaluate(spec, samples, task, k=5, seed=5)
        parts.append(f"{spec.kind}={report.accuracy:.3f}")
    print(f"  {task:12s}: " + "  ".join(parts))
