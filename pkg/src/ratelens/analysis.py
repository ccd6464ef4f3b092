"""Cyclic alignment of chemotaxis distortion matrices and the Hill sweep."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotSquare
from .ibaa import ibaa_from_counts
from .legi import LegiParams, SimConfig, simulate
from .probcore import DistortionMatrix

__all__ = [
    "AlignedProfile",
    "HillSummary",
    "cyclic_align",
    "unalign",
    "mean_profile",
    "half_height_width",
    "hill_sweep",
]


@dataclass(frozen=True, eq=False)
class AlignedProfile:
    """Rows indexed by source sector, columns by (theta_m - theta_s + pi) mod 2 pi."""

    shifts: np.ndarray
    per_row: np.ndarray
    mean: np.ndarray

    @property
    def centre(self) -> int:
        return self.per_row.shape[1] // 2


def _aligned_columns(n: int) -> np.ndarray:
    # column index of (s, m) is (m - s + n // 2) mod n
    s = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return (j + s - n // 2) % n


def cyclic_align(d) -> AlignedProfile:
    """Rotate each row so the source direction lands on shift pi.

    With an odd sector count the source lands on column ``n // 2``, half a
    sector short of pi.
    """
    values = d.values if isinstance(d, DistortionMatrix) else np.asarray(d, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise NotSquare(f"need a square sector-by-sector matrix, got {values.shape}")
    if isinstance(d, DistortionMatrix) and d.x_alphabet != d.y_alphabet:
        raise NotSquare("input and output alphabets differ")
    n = values.shape[0]
    per_row = np.take_along_axis(values, _aligned_columns(n), axis=1)
    shifts = 2 * np.pi * np.arange(n) / n
    return AlignedProfile(shifts, per_row, per_row.mean(axis=0))


def unalign(ap: AlignedProfile) -> np.ndarray:
    """Inverse of :func:`cyclic_align` on the per-row matrix."""
    n = ap.per_row.shape[0]
    out = np.empty_like(ap.per_row)
    np.put_along_axis(out, _aligned_columns(n), ap.per_row, axis=1)
    return out


def mean_profile(ap: AlignedProfile) -> np.ndarray:
    return ap.per_row.mean(axis=0)


def half_height_width(shifts: np.ndarray, profile: np.ndarray) -> float:
    """Width of the basin around the minimum below half height.

    Half height is ``min + (max - min) / 2``. The crossings on either side of
    the minimum are located by linear interpolation between samples.
    """
    y = np.asarray(profile, dtype=float)
    x = np.asarray(shifts, dtype=float)
    lo, hi = y.min(), y.max()
    if hi == lo:
        return float(x[-1] - x[0] + (x[1] - x[0]))
    level = lo + 0.5 * (hi - lo)
    k = int(np.argmin(y))

    def crossing(step):
        i = k
        while 0 <= i + step < y.size:
            j = i + step
            if y[j] >= level:
                t = (level - y[i]) / (y[j] - y[i])
                return x[i] + t * (x[j] - x[i])
            i = j
        return x[i]

    return float(crossing(+1) - crossing(-1))


@dataclass(frozen=True, eq=False)
class HillSummary:
    hill: int
    shifts: np.ndarray
    mean: np.ndarray
    peak: float
    width: float
    profile: AlignedProfile

    def as_dict(self) -> dict:
        return {"hill": self.hill, "peak": self.peak, "half_height_width": self.width}


def hill_sweep(params_base: LegiParams, hills, sim: SimConfig, workers: int = 1):
    """Simulate, invert and align once per Hill coefficient."""
    hills = list(hills)
    if not hills:
        raise ValueError("hills must be nonempty")
    out = []
    for h in hills:
        params = LegiParams(params_base.a, params_base.b, params_base.k_d, params_base.r_t,
                            params_base.n_sectors, int(h))
        counts = simulate(params, sim, workers=workers)
        ap = cyclic_align(ibaa_from_counts(counts).distortion)
        out.append(HillSummary(int(h), ap.shifts, ap.mean, float(ap.mean.max()),
                               half_height_width(ap.shifts, ap.mean), ap))
    return out
