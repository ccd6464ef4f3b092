"""The binary apoptosis decision: survive or die given a caspase-8 count.

Builds the exponential source, traces R(D) for both distortion functions and
then asks for the strategies at two target distortions.
"""
import numpy as np

from ratelens import (
    ApoptosisModel,
    exp_source,
    hamming_like,
    rd_curve,
    rectified_squared,
    solve_for_distortion,
    zero_rate_distortion,
)

model = ApoptosisModel()          # gamma 0.5 per 100 molecules, threshold 600
source = exp_source(model)
print(f"P(X >= {model.x_th}) = {source.probs[model.above].sum():.5f}")

for name, make in [("hamming-like", hamming_like), ("rectified squared", rectified_squared)]:
    d = make(model)
    curve = rd_curve(source, d)
    print(f"\n{name}: zero-rate distortion {zero_rate_distortion(source, d):.4f}, "
          f"{curve.converged.sum()}/{len(curve)} points converged")
    # the grid is geometric in lambda, so points bunch up at both ends
    D, R = curve.by_distortion()
    _, first = np.unique(np.round(D, 3), return_index=True)
    for i in first[np.linspace(0, first.size - 1, min(6, first.size)).astype(int)]:
        print(f"  D = {D[i]:.4f}   R = {R[i]:.4f} bits")

    for target in (0.031, 0.01):
        res = solve_for_distortion(source, d, target)
        p_die = res.strategy.rows[model.above, 1].mean()
        print(f"  target D = {target}: lambda {res.lam:.3f}, R = {res.rate_bits:.4f} bits, "
              f"mean P(die) above threshold {p_die:.3f}")
