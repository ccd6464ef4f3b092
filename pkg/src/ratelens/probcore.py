"""Finite-alphabet distributions and the information measures built on them.

Every container is an immutable frozen dataclass holding a read-only array
(float64, or int64 for integer counts). Rates are reported in bits.
"""
from __future__ import annotations

from dataclasses import dataclass
from numbers import Real
from typing import Sequence

import numpy as np

from .errors import NonNumericAlphabet, NotNormalized, ShapeMismatch, ZeroRowMass

__all__ = [
    "Alphabet",
    "Pmf",
    "CountMatrix",
    "JointDist",
    "Strategy",
    "DistortionMatrix",
    "entropy",
    "mutual_information",
    "laplace_smooth",
    "marginal_x",
    "marginal_y",
    "conditional_y_given_x",
    "joint_from_strategy",
    "expected_distortion",
    "standard_distortion",
]

# Sums within NORM_TOL of one are accepted as is; drift up to RENORM_TOL is
# silently renormalized; anything larger is rejected.
NORM_TOL = 1e-12
RENORM_TOL = 1e-9


def _frozen(values, ndim: int, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    if arr.ndim != ndim:
        raise ShapeMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


def _normalize(arr: np.ndarray, axis, what: str) -> np.ndarray:
    total = arr.sum(axis=axis, keepdims=axis is not None)
    drift = np.max(np.abs(total - 1.0))
    if drift <= NORM_TOL:
        return arr
    if drift <= RENORM_TOL:
        return arr / total
    raise NotNormalized(f"{what} sums deviate from 1 by {drift:.3g}")


@dataclass(frozen=True)
class Alphabet:
    """Ordered, duplicate-free tuple of symbol labels."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(labels) < 1:
            raise ValueError("an alphabet needs at least one symbol")
        if len(set(labels)) != len(labels):
            raise ValueError("alphabet labels must be unique")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def range(cls, n: int) -> "Alphabet":
        return cls(tuple(range(n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def numeric(self) -> np.ndarray:
        """Labels as a float array; raises if any label is not a real number."""
        if not all(isinstance(v, Real) and not isinstance(v, bool) for v in self.labels):
            raise NonNumericAlphabet("alphabet has non-numeric labels")
        return np.asarray(self.labels, dtype=np.float64)


def _as_alphabet(a, n: int) -> Alphabet:
    if a is None:
        return Alphabet.range(n)
    if not isinstance(a, Alphabet):
        a = Alphabet(tuple(a))
    if a.size != n:
        raise ShapeMismatch(f"alphabet of size {a.size} does not match length {n}")
    return a


@dataclass(frozen=True, eq=False)
class Pmf:
    probs: np.ndarray
    alphabet: Alphabet = None

    def __post_init__(self):
        p = _frozen(self.probs, 1)
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite and nonnegative")
        p = _normalize(p, None, "pmf")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "alphabet", _as_alphabet(self.alphabet, p.size))

    @classmethod
    def from_weights(cls, weights, alphabet=None) -> "Pmf":
        w = np.asarray(weights, dtype=np.float64)
        return cls(w / w.sum(), alphabet)

    @classmethod
    def uniform(cls, n_or_alphabet) -> "Pmf":
        if isinstance(n_or_alphabet, Alphabet):
            return cls(np.full(n_or_alphabet.size, 1.0 / n_or_alphabet.size), n_or_alphabet)
        return cls(np.full(n_or_alphabet, 1.0 / n_or_alphabet))

    def __len__(self) -> int:
        return self.probs.size


class _Matrix:
    """Shared plumbing for matrices indexed by an x and a y alphabet."""

    def _init_axes(self, arr: np.ndarray):
        object.__setattr__(self, "x_alphabet", _as_alphabet(self.x_alphabet, arr.shape[0]))
        object.__setattr__(self, "y_alphabet", _as_alphabet(self.y_alphabet, arr.shape[1]))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.x_alphabet.size, self.y_alphabet.size)


@dataclass(frozen=True, eq=False)
class CountMatrix(_Matrix):
    """Observed event counts L(x, y).

    Fractional weights (e.g. accumulated movement probabilities) are accepted
    as long as they are finite and nonnegative.
    """

    counts: np.ndarray
    x_alphabet: Alphabet = None
    y_alphabet: Alphabet = None

    def __post_init__(self):
        raw = np.asarray(self.counts)
        integral = raw.dtype.kind in "iub"
        c = _frozen(raw, 2, np.int64 if integral else np.float64)
        if c.size == 0:
            raise ShapeMismatch("empty count matrix")
        if np.any(c < 0) or not np.all(np.isfinite(c)):
            raise ValueError("counts must be finite and nonnegative")
        object.__setattr__(self, "counts", c)
        self._init_axes(c)

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)


@dataclass(frozen=True, eq=False)
class JointDist(_Matrix):
    probs: np.ndarray
    x_alphabet: Alphabet = None
    y_alphabet: Alphabet = None

    def __post_init__(self):
        p = _frozen(self.probs, 2)
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("joint probabilities must be finite and nonnegative")
        p = _normalize(p, None, "joint distribution")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)
        self._init_axes(p)


@dataclass(frozen=True, eq=False)
class Strategy(_Matrix):
    """Row-stochastic decision strategy P(y|x)."""

    rows: np.ndarray
    x_alphabet: Alphabet = None
    y_alphabet: Alphabet = None

    def __post_init__(self):
        q = _frozen(self.rows, 2)
        if np.any(q < 0) or not np.all(np.isfinite(q)):
            raise ValueError("strategy entries must be finite and nonnegative")
        q = _normalize(q, 1, "strategy row")
        q.flags.writeable = False
        object.__setattr__(self, "rows", q)
        self._init_axes(q)


@dataclass(frozen=True, eq=False)
class DistortionMatrix(_Matrix):
    values: np.ndarray
    x_alphabet: Alphabet = None
    y_alphabet: Alphabet = None

    def __post_init__(self):
        d = _frozen(self.values, 2)
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("distortion entries must be finite and nonnegative")
        object.__setattr__(self, "values", d)
        self._init_axes(d)

    def scaled(self, a: float) -> "DistortionMatrix":
        return DistortionMatrix(a * self.values, self.x_alphabet, self.y_alphabet)

    def row_offset(self) -> "DistortionMatrix":
        """Same matrix with each row's minimum subtracted."""
        v = self.values - self.values.min(axis=1, keepdims=True)
        return DistortionMatrix(v, self.x_alphabet, self.y_alphabet)


def _xlogy_bits(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    mask = p > 0
    out[mask] = p[mask] * np.log2(q[mask])
    return out


def entropy(p: Pmf) -> float:
    """Shannon entropy in bits, with 0 log 0 taken as 0."""
    probs = p.probs
    h = -_xlogy_bits(probs, probs).sum()
    return max(float(h), 0.0)


def marginal_x(j: JointDist) -> Pmf:
    return Pmf(j.probs.sum(axis=1), j.x_alphabet)


def marginal_y(j: JointDist) -> Pmf:
    return Pmf(j.probs.sum(axis=0), j.y_alphabet)


def mutual_information(j: JointDist) -> float:
    """I(X;Y) in bits. Cells with zero joint mass contribute nothing."""
    pxy = j.probs
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    mask = pxy > 0
    # log form avoids px * py underflowing for subnormal masses
    log_ratio = np.log2(pxy[mask]) - np.log2(np.broadcast_to(px, pxy.shape)[mask]) \
        - np.log2(np.broadcast_to(py, pxy.shape)[mask])
    mi = np.sum(pxy[mask] * log_ratio)
    return max(float(mi), 0.0)


def laplace_smooth(c: CountMatrix) -> JointDist:
    """Add-one smoothing: every (x, y) cell gets strictly positive mass."""
    shifted = c.counts + 1.0
    return JointDist(shifted / shifted.sum(), c.x_alphabet, c.y_alphabet)


def conditional_y_given_x(j: JointDist) -> Strategy:
    row = j.probs.sum(axis=1, keepdims=True)
    empty = np.flatnonzero(row[:, 0] <= 0)
    if empty.size:
        label = j.x_alphabet.labels[empty[0]]
        raise ZeroRowMass(f"row x={label!r} has zero mass")
    return Strategy(j.probs / row, j.x_alphabet, j.y_alphabet)


def joint_from_strategy(p_x: Pmf, s: Strategy) -> JointDist:
    if p_x.probs.size != s.shape[0]:
        raise ShapeMismatch(f"source of size {p_x.probs.size} vs strategy {s.shape}")
    return JointDist(p_x.probs[:, None] * s.rows, s.x_alphabet, s.y_alphabet)


def expected_distortion(j: JointDist, d: DistortionMatrix) -> float:
    if j.shape != d.shape:
        raise ShapeMismatch(f"joint {j.shape} vs distortion {d.shape}")
    return float(np.sum(j.probs * d.values))


def standard_distortion(
    kind: str,
    x_alpha: Alphabet,
    y_alpha: Alphabet,
    numeric_embedding: Sequence[Sequence[float]] | None = None,
) -> DistortionMatrix:
    """Build one of the textbook distortion measures.

    Args:
        kind: ``"hamming"``, ``"squared"`` or ``"absolute"``.
        x_alpha, y_alpha: input and output alphabets.
        numeric_embedding: optional ``(x_values, y_values)`` pair giving the
            numbers behind each label. Without it the labels themselves must
            be numeric for the squared and absolute measures.
    """
    if kind == "hamming":
        vals = np.array(
            [[0.0 if x == y else 1.0 for y in y_alpha.labels] for x in x_alpha.labels]
        )
        return DistortionMatrix(vals, x_alpha, y_alpha)
    if kind not in ("squared", "absolute"):
        raise ValueError(f"unknown distortion kind {kind!r}")
    if numeric_embedding is not None:
        xv = np.asarray(numeric_embedding[0], dtype=np.float64)
        yv = np.asarray(numeric_embedding[1], dtype=np.float64)
        if xv.size != x_alpha.size or yv.size != y_alpha.size:
            raise ShapeMismatch("numeric embedding does not match alphabet sizes")
    else:
        xv, yv = x_alpha.numeric(), y_alpha.numeric()
    diff = xv[:, None] - yv[None, :]
    vals = diff**2 if kind == "squared" else np.abs(diff)
    return DistortionMatrix(vals, x_alpha, y_alpha)
