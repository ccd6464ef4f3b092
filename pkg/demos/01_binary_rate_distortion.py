"""Rate-distortion for a fair coin under Hamming distortion.

This is the one case with a textbook closed form, R(D) = 1 - H_b(D), so it is
a good first look at what the solver returns.
"""
import math

import numpy as np

from ratelens import BaaConfig, DistortionMatrix, Pmf, baa_solve, rd_curve

source = Pmf([0.5, 0.5])
hamming = DistortionMatrix([[0.0, 1.0], [1.0, 0.0]])

# A single multiplier gives one optimal channel.
res = baa_solve(source, hamming, BaaConfig(lam=2.0))
print("strategy P(y|x):")
print(np.round(res.strategy.rows, 4))
print(f"rate {res.rate_bits:.4f} bits at distortion {res.expected_distortion:.4f}")
print(f"iterations: {res.iterations}, converged: {res.converged}")

# Sweep the multiplier and compare with the closed form.
curve = rd_curve(source, hamming, np.geomspace(0.05, 8, 12))
print("\n  lambda      D         R     1-H_b(D)")
for lam, rate, d in curve.points:
    closed = 1 + d * math.log2(d) + (1 - d) * math.log2(1 - d)
    print(f"{lam:8.3f}  {d:.5f}  {rate:.6f}  {closed:.6f}")
