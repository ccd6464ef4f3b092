"""Binary apoptosis benchmark.

The input is a caspase-8 molecule count on the grid ``0 .. x_max - 1`` drawn
from a truncated exponential law; the output is survive (``y = 0``) or die
(``y = 1``). Counts at or above ``x_th`` belong to the apoptosis side.

``gamma`` is a rate per ``unit_scale`` molecules, so the effective per-molecule
rate is ``gamma / unit_scale``. With the defaults (0.5 per 100 molecules) the
tail mass above the 600-molecule threshold is about ``exp(-3)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .probcore import Alphabet, DistortionMatrix, Pmf

__all__ = ["ApoptosisModel", "exp_source", "hamming_like", "rectified_squared", "OUTPUTS"]

OUTPUTS = Alphabet((0, 1))


@dataclass(frozen=True)
class ApoptosisModel:
    gamma: float = 0.5
    unit_scale: float = 100.0
    x_max: int = 2000
    x_th: int = 600
    squared_denominator: float = 20000.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidParameter("gamma must be positive")
        if not self.unit_scale > 0:
            raise InvalidParameter("unit_scale must be positive")
        if not 0 < self.x_th < self.x_max:
            raise InvalidParameter("need 0 < x_th < x_max")
        if not self.squared_denominator > 0:
            raise InvalidParameter("squared_denominator must be positive")

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.x_max)

    @property
    def inputs(self) -> Alphabet:
        return Alphabet(tuple(range(self.x_max)))

    @property
    def above(self) -> np.ndarray:
        """Boolean mask of inputs on the apoptosis side (x >= x_th)."""
        return self.grid >= self.x_th


def exp_source(m: ApoptosisModel) -> Pmf:
    rate = m.gamma / m.unit_scale
    w = np.exp(-rate * m.grid)
    return Pmf(w / w.sum(), m.inputs)


def hamming_like(m: ApoptosisModel) -> DistortionMatrix:
    above = m.above.astype(float)
    values = np.column_stack([above, 1.0 - above])
    return DistortionMatrix(values, m.inputs, OUTPUTS)


def rectified_squared(m: ApoptosisModel) -> DistortionMatrix:
    """Zero for the correct side of the threshold, (x - x_th)^2 / denominator otherwise."""
    pen = (m.grid - m.x_th).astype(float) ** 2 / m.squared_denominator
    above = m.above
    values = np.column_stack([np.where(above, pen, 0.0), np.where(above, 0.0, pen)])
    return DistortionMatrix(values, m.inputs, OUTPUTS)
