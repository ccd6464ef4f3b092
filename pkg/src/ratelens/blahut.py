"""Blahut-Arimoto solver for the rate-distortion trade-off.

The solver alternates the exponential-tilt update of the strategy with the
marginal update of the output distribution, starting from a uniform output
distribution, and stops once the output distribution moves by less than
``tol`` in max-norm.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np

from .errors import NotConverged, ShapeMismatch, TargetOutOfRange
from .probcore import (
    DistortionMatrix,
    Pmf,
    Strategy,
    expected_distortion,
    joint_from_strategy,
    mutual_information,
)

__all__ = [
    "BaaConfig",
    "BaaResult",
    "RdCurve",
    "baa_solve",
    "rd_curve",
    "solve_for_distortion",
    "zero_rate_distortion",
    "min_distortion",
    "tilt",
    "default_lambda_grid",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class BaaConfig:
    lam: float
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True, eq=False)
class BaaResult:
    strategy: Strategy
    output_dist: Pmf
    rate_bits: float
    expected_distortion: float
    iterations: int
    converged: bool
    lam: float = float("nan")


@dataclass(frozen=True)
class RdCurve:
    """Points of the R(D) curve in ascending lambda order."""

    lambdas: np.ndarray
    rates: np.ndarray
    distortions: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray

    def __len__(self) -> int:
        return self.lambdas.size

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.lambdas.tolist(), self.rates.tolist(), self.distortions.tolist()))

    def by_distortion(self) -> tuple[np.ndarray, np.ndarray]:
        """(D, R) sorted by increasing distortion."""
        order = np.argsort(self.distortions, kind="stable")
        return self.distortions[order], self.rates[order]


def default_lambda_grid(n: int = 60, lo: float = 1e-2, hi: float = 1e2) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def tilt(p_y: np.ndarray, d: np.ndarray, lam: float) -> np.ndarray:
    """One strategy update: rows proportional to p_y(y) * exp(-lam * d(x, y)).

    Computed in the log domain with the row maximum removed, so no row can
    underflow to all zeros. Columns with p_y == 0 stay exactly zero.
    """
    with np.errstate(divide="ignore"):
        logits = np.log(p_y)[None, :] - lam * d
    logits -= logits.max(axis=1, keepdims=True)
    q = np.exp(logits)
    q /= q.sum(axis=1, keepdims=True)
    return q


def _check(p_x: Pmf, d: DistortionMatrix):
    if p_x.probs.size != d.shape[0]:
        raise ShapeMismatch(f"source of size {p_x.probs.size} vs distortion {d.shape}")


def zero_rate_distortion(p_x: Pmf, d: DistortionMatrix) -> float:
    """D_max: the expected distortion of the best constant output."""
    _check(p_x, d)
    return float(np.min(p_x.probs @ d.values))


def min_distortion(p_x: Pmf, d: DistortionMatrix) -> float:
    """D_min: expected distortion of the per-input best output."""
    _check(p_x, d)
    return float(p_x.probs @ d.values.min(axis=1))


def _package(p_x, d, q, p_y, iterations, converged, lam) -> BaaResult:
    strategy = Strategy(q, d.x_alphabet, d.y_alphabet)
    joint = joint_from_strategy(p_x, strategy)
    return BaaResult(
        strategy=strategy,
        output_dist=Pmf(p_y, d.y_alphabet),
        rate_bits=mutual_information(joint),
        expected_distortion=expected_distortion(joint, d),
        iterations=iterations,
        converged=converged,
        lam=lam,
    )


def _zero_rate(p_x: Pmf, d: DistortionMatrix) -> BaaResult:
    # lambda -> 0+ limit: all output mass on the best constant output(s).
    avg = p_x.probs @ d.values
    best = np.isclose(avg, avg.min(), rtol=0, atol=1e-12)
    p_y = best / best.sum()
    q = np.tile(p_y, (d.shape[0], 1))
    res = _package(p_x, d, q, p_y, 0, True, 0.0)
    # identical rows: the information is zero exactly, not just up to rounding
    return replace(res, rate_bits=0.0)


def baa_solve(
    p_x: Pmf,
    d: DistortionMatrix,
    cfg: BaaConfig,
    *,
    strict: bool = False,
    warn: bool = True,
    callback: Callable[[int, np.ndarray, np.ndarray], None] | None = None,
) -> BaaResult:
    """Optimal strategy for one Lagrange multiplier.

    Args:
        p_x: source distribution over ``d.x_alphabet``.
        d: distortion matrix.
        cfg: multiplier and stopping rule. ``lam == 0`` returns the zero-rate
            limit directly.
        strict: raise :class:`NotConverged` instead of warning.
        warn: emit a :class:`NotConverged` warning when the cap is hit.
        callback: called as ``callback(iteration, strategy_rows, p_y)`` after
            every strategy update (``p_y`` is the distribution that produced it).

    The returned strategy is the tilt of the returned ``output_dist``, so the
    pair satisfies the update equation exactly (up to rounding) even when the
    iteration cap was hit.
    """
    _check(p_x, d)
    if cfg.lam == 0:
        return _zero_rate(p_x, d)

    px = p_x.probs
    dv = d.values
    p_y = np.full(d.shape[1], 1.0 / d.shape[1])
    converged = False
    it = 0
    while it < cfg.max_iter:
        it += 1
        q = tilt(p_y, dv, cfg.lam)
        if callback is not None:
            callback(it, q, p_y)
        new = px @ q
        delta = np.max(np.abs(new - p_y))
        p_y = new
        if delta < cfg.tol:
            converged = True
            break

    p_y = p_y / p_y.sum()
    q = tilt(p_y, dv, cfg.lam)
    if not converged:
        msg = f"BAA did not converge in {cfg.max_iter} iterations (lambda={cfg.lam:g})"
        if strict:
            raise NotConverged(msg)
        if warn:
            warnings.warn(msg, NotConverged, stacklevel=2)
    return _package(p_x, d, q, p_y, it, converged, cfg.lam)


def rd_curve(
    p_x: Pmf,
    d: DistortionMatrix,
    lambda_grid: Iterable[float] | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int = 1,
) -> RdCurve:
    """Trace R(D) by solving once per multiplier in ``lambda_grid``.

    Non-converged points are kept and flagged in ``RdCurve.converged``.
    """
    lams = np.sort(np.asarray(
        default_lambda_grid() if lambda_grid is None else list(lambda_grid), dtype=float
    ))
    if lams.size == 0:
        raise ValueError("lambda grid is empty")
    if np.any(lams < 0):
        raise ValueError("lambda grid must be nonnegative")

    def one(lam):
        return baa_solve(p_x, d, BaaConfig(float(lam), tol, max_iter), warn=False)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, lams))
    else:
        results = [one(lam) for lam in lams]

    n_bad = sum(not r.converged for r in results)
    if n_bad:
        warnings.warn(f"{n_bad} of {len(results)} curve points did not converge", NotConverged,
                      stacklevel=2)
    return RdCurve(
        lambdas=lams,
        rates=np.array([r.rate_bits for r in results]),
        distortions=np.array([r.expected_distortion for r in results]),
        iterations=np.array([r.iterations for r in results]),
        converged=np.array([r.converged for r in results]),
    )


def solve_for_distortion(
    p_x: Pmf,
    d: DistortionMatrix,
    target_d: float,
    tol_d: float = 1e-6,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    lam_max: float = 1e8,
) -> BaaResult:
    """Bisect on lambda until the expected distortion is within ``tol_d`` of the target."""
    d_max = zero_rate_distortion(p_x, d)
    d_min = min_distortion(p_x, d)
    if not (d_min - tol_d <= target_d <= d_max + tol_d):
        raise TargetOutOfRange(
            f"target D={target_d:g} outside feasible range [{d_min:g}, {d_max:g}]"
        )

    def solve(lam):
        return baa_solve(p_x, d, BaaConfig(lam, tol, max_iter), warn=False)

    if target_d >= d_max - tol_d:
        return solve(0.0)

    lo, hi = 0.0, 1.0
    hi_res = solve(hi)
    while hi_res.expected_distortion > target_d + tol_d:
        lo = hi
        hi *= 2.0
        if hi > lam_max:
            raise TargetOutOfRange(f"target D={target_d:g} needs lambda > {lam_max:g}")
        hi_res = solve(hi)
    if abs(hi_res.expected_distortion - target_d) <= tol_d:
        return hi_res

    best = hi_res
    for _ in range(200):
        mid = 0.5 * (lo + hi) if lo == 0 else math.sqrt(lo * hi)
        res = solve(mid)
        err = res.expected_distortion - target_d
        if abs(err) < abs(best.expected_distortion - target_d):
            best = res
        if abs(err) <= tol_d:
            return res
        if err > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    warnings.warn(
        f"bisection stalled at D={best.expected_distortion:g} for target {target_d:g}",
        NotConverged,
        stacklevel=2,
    )
    return best
