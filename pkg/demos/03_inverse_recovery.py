"""Recovering a distortion function from behaviour.

First from an exact optimal strategy, where recovery is exact up to the
unknown multiplier, then from finite samples of it, where Laplace smoothing
keeps every estimate finite.
"""
import numpy as np

from ratelens import (
    ApoptosisModel,
    BaaConfig,
    CountMatrix,
    baa_solve,
    exp_source,
    hamming_like,
    ibaa_from_counts,
    joint_from_strategy,
    roundtrip_validate,
)

model = ApoptosisModel()
source = exp_source(model)
d = hamming_like(model)

rep = roundtrip_validate(source, d, 4.6)
print(f"exact strategy, lambda 4.6: max error {rep.max_abs_error:.2e}, "
      f"recovered scale {rep.recovered_scale:.6f}")

# A coarser model so that a few million samples cover every cell.
small = ApoptosisModel(gamma=0.5, unit_scale=10, x_max=20, x_th=10)
p_small, d_small = exp_source(small), hamming_like(small)
res = baa_solve(p_small, d_small, BaaConfig(2.0, tol=1e-12))
joint = joint_from_strategy(p_small, res.strategy).probs
rng = np.random.default_rng(1)
for n in (10**4, 10**5, 10**6, 10**7):
    counts = rng.multinomial(n, joint.ravel()).reshape(joint.shape)
    est = ibaa_from_counts(CountMatrix(counts)).distortion.values
    print(f"n = {n:>8}: max |d_est - 2 d| = {np.abs(est - 2 * d_small.values).max():.4f}")
