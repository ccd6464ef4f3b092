"""Inverse Blahut-Arimoto: recover the distortion behind an observed strategy.

An optimal strategy has the form ``P(y|x) = P_Y(y) exp(-lam d(x, y)) / f(x)``.
Taking logs with ``lam = 1`` gives ``-ln(P(y|x) / P_Y(y)) = d(x, y) + ln f(x)``.
The per-row term ``ln f(x)`` cannot change the strategy, so it is dropped by
subtracting each row's minimum; the normalizer is never formed explicitly.
The result is only identified up to a positive scale (the unknown ``lam``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blahut import BaaConfig, baa_solve
from .errors import ZeroProbability
from .probcore import (
    CountMatrix,
    DistortionMatrix,
    Pmf,
    Strategy,
    conditional_y_given_x,
    laplace_smooth,
    marginal_y,
)

__all__ = [
    "IbaaResult",
    "RoundtripReport",
    "tilde_distortion",
    "estimate_distortion",
    "ibaa_from_counts",
    "roundtrip_validate",
]


@dataclass(frozen=True, eq=False)
class IbaaResult:
    distortion: DistortionMatrix
    tilde_distortion: np.ndarray
    lambda_assumed: float = 1.0
    row_counts: np.ndarray | None = None

    def sidecar(self) -> dict:
        out = {
            "lambda_assumed": self.lambda_assumed,
            "max_tilde": float(self.tilde_distortion.max()),
            "min_tilde": float(self.tilde_distortion.min()),
        }
        if self.row_counts is not None:
            out["row_counts"] = self.row_counts.tolist()
        return out


def tilde_distortion(strategy: Strategy, p_y: Pmf) -> np.ndarray:
    """Unshifted distortion ``-ln(P(y|x) / P_Y(y))`` (natural log, lambda = 1)."""
    q = strategy.rows
    py = p_y.probs
    if py.size != q.shape[1]:
        raise ValueError(f"output distribution of size {py.size} vs strategy {q.shape}")
    if np.any(py <= 0):
        y = strategy.y_alphabet.labels[int(np.flatnonzero(py <= 0)[0])]
        raise ZeroProbability(f"P_Y({y!r}) = 0")
    if np.any(q <= 0):
        i, j = np.argwhere(q <= 0)[0]
        raise ZeroProbability(
            f"P(y={strategy.y_alphabet.labels[j]!r} | x={strategy.x_alphabet.labels[i]!r}) = 0;"
            " smooth the counts first"
        )
    t = -(np.log(q) - np.log(py)[None, :])
    t.flags.writeable = False
    return t


def estimate_distortion(strategy: Strategy, p_y: Pmf) -> IbaaResult:
    t = tilde_distortion(strategy, p_y)
    d = t - t.min(axis=1, keepdims=True)
    return IbaaResult(DistortionMatrix(d, strategy.x_alphabet, strategy.y_alphabet), t)


def ibaa_from_counts(c: CountMatrix) -> IbaaResult:
    """Full pipeline: smooth, condition, take logs, remove row offsets."""
    joint = laplace_smooth(c)
    res = estimate_distortion(conditional_y_given_x(joint), marginal_y(joint))
    return IbaaResult(res.distortion, res.tilde_distortion, 1.0, c.row_totals.copy())


@dataclass(frozen=True, eq=False)
class RoundtripReport:
    max_abs_error: float
    recovered_scale: float
    lam: float
    converged: bool
    iterations: int
    support: np.ndarray = field(repr=False)
    estimated: np.ndarray = field(repr=False)
    expected: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "max_abs_error": self.max_abs_error,
            "recovered_scale": self.recovered_scale,
            "lambda": self.lam,
            "converged": self.converged,
            "iterations": self.iterations,
            "support_size": int(self.support.sum()),
        }


def roundtrip_validate(
    p_x: Pmf,
    d_true: DistortionMatrix,
    lambda0: float,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    strict: bool = False,
) -> RoundtripReport:
    """Solve forward with ``lambda0``, invert, and compare against ``lambda0 * d_true``.

    Output symbols that the optimal strategy never uses carry no information
    about the distortion. A column is left out of the comparison, and reported
    through ``support``, when any of its strategy entries is zero or subnormal:
    at that magnitude the logarithm has lost most of its significant bits.
    """
    if lambda0 < 0:
        raise ValueError("lambda0 must be nonnegative")
    res = baa_solve(p_x, d_true, BaaConfig(lambda0, tol, max_iter), strict=strict)
    support = np.all(res.strategy.rows >= np.finfo(float).tiny, axis=0)
    ref = d_true.values[:, support]
    expected = lambda0 * (ref - ref.min(axis=1, keepdims=True))

    sub_q = Strategy(res.strategy.rows[:, support])
    sub_py = Pmf.from_weights(res.output_dist.probs[support])
    estimated = estimate_distortion(sub_q, sub_py).distortion.values

    err = float(np.max(np.abs(estimated - expected)))
    base = ref - ref.min(axis=1, keepdims=True)
    denom = float(np.sum(base * base))
    scale = float(np.sum(estimated * base) / denom) if denom > 0 and lambda0 > 0 else 0.0
    return RoundtripReport(err, scale, lambda0, res.converged, res.iterations,
                           support, estimated, expected)
