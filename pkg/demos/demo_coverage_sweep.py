"""Desk-scale coverage sweep: FER and throughput against distance.

Sweeps the three headline configurations at one AUV speed on a coarse
distance grid and prints the coverage summary.  Takes a few minutes.

Run:  python demos/demo_coverage_sweep.py
"""

import time

from uwoc import linksim

plan = linksim.SweepPlan(
    speeds_m_s=(0.1,),
    distances_m=tuple(float(d) for d in range(2, 49, 2)),
    repeats=1,
    config_indices=(2, 3, 5),
)
options = linksim.SimOptions(frames_per_point=30)

t0 = time.time()
rows = linksim.sweep(plan, seed_base=2024, options=options)
print(f"simulated {len(rows)} points in {time.time() - t0:.0f}s\n")

by_cfg = {}
for r in rows:
    by_cfg.setdefault(r.config, []).append(r)

print(f"{'d [m]':>6}", end="")
for c in sorted(by_cfg):
    print(f"  cfg{c} fer  cfg{c} Mb/s", end="")
print()
for i, d in enumerate(plan.distances_m):
    print(f"{d:6.0f}", end="")
    for c in sorted(by_cfg):
        r = by_cfg[c][i]
        print(f"  {r.fer:8.2f}  {r.throughput_bps / 1e6:9.3f}", end="")
    print()

print("\ncoverage at FER < 0.1:")
for c, rs in sorted(by_cfg.items()):
    cov = linksim.coverage_distance([(r.distance_m, r.fer) for r in rs])
    print(f"  {linksim.config_by_index(c).name:30s} -> {cov} m")
