"""Chemotaxis: what distortion does a LEGI gradient sensor behave as if it minimized?

Simulates cells for a few Hill coefficients, recovers the distortion matrix,
aligns each row on the source direction and summarizes the mean profile.
Pass a trial count on the command line for a bigger run (default 200000).
"""
import sys

import numpy as np

from ratelens import LegiParams, SimConfig, hill_sweep

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
results = hill_sweep(LegiParams(), [1, 3, 5], SimConfig(trials, seed=1))

for r in results:
    print(f"h = {r.hill}: peak {r.peak:.3f}, half-height width {r.width:.3f} rad")

# Coarse text rendering of the mean profiles, shift 0 .. 2 pi left to right.
cols = np.linspace(0, results[0].mean.size - 1, 25).astype(int)
top = max(r.peak for r in results)
for r in results:
    bar = "".join(" .:-=+*#%@"[int(9 * v / top)] for v in r.mean[cols])
    print(f"h={r.hill} |{bar}|")
