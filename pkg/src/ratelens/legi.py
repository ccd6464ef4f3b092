"""Monte Carlo LEGI (local excitation, global inhibition) gradient sensing.

A circular cell is split into ``n_sectors`` membrane sectors with ``r_t``
receptors each. For a source at sector angle ``theta_s`` the ligand level in
sector ``i`` is ``a - b (1 - cos(theta_i - theta_s))``; every receptor is bound
independently with probability ``l / (k_d + l)``; the per-sector bound counts
are pushed through the LEGI response and normalized into a distribution over
movement directions.

Randomness is organized in fixed blocks of ``BLOCK_SIZE`` trials, each with
its own ``SeedSequence`` child keyed by the block index. Results therefore do
not depend on how blocks are distributed across workers.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParameter
from .probcore import Alphabet, CountMatrix, Pmf

__all__ = [
    "LegiParams",
    "SimConfig",
    "BLOCK_SIZE",
    "sector_angles",
    "sector_alphabet",
    "ligand_concentration",
    "occupancy",
    "occupancy_matrix",
    "sample_complexes",
    "legi_response",
    "movement_distribution",
    "simulate",
    "simulate_moments",
    "simulate_with_metadata",
    "MovementMoments",
]

BLOCK_SIZE = 10_000


@dataclass(frozen=True)
class LegiParams:
    a: float = 220.0
    b: float = 20.0
    k_d: float = 200.0
    r_t: int = 1000
    n_sectors: int = 100
    hill: int = 1

    def __post_init__(self):
        if not self.b > 0:
            raise InvalidParameter(f"gradient strength b must be positive, got {self.b}")
        if not self.a > 2 * self.b:
            raise InvalidParameter(
                f"need a > 2b so the ligand level a - b(1 - cos) stays positive "
                f"(a={self.a}, b={self.b})"
            )
        if not self.k_d > 0:
            raise InvalidParameter("k_d must be positive")
        if int(self.r_t) != self.r_t or self.r_t < 1:
            raise InvalidParameter("r_t must be an integer >= 1")
        if int(self.n_sectors) != self.n_sectors or self.n_sectors < 2:
            raise InvalidParameter("n_sectors must be an integer >= 2")
        if int(self.hill) != self.hill or self.hill < 1:
            raise InvalidParameter("hill must be an integer >= 1")


@dataclass(frozen=True, eq=False)
class SimConfig:
    trials: int = 1_000_000
    seed: int = 0
    mode: str = "accumulate"
    source_prior: Pmf | None = None

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise InvalidParameter("trials must be an integer >= 1")
        if self.mode not in ("accumulate", "sample"):
            raise InvalidParameter(f"mode must be 'accumulate' or 'sample', got {self.mode!r}")


def sector_angles(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def sector_alphabet(n: int) -> Alphabet:
    """Sector labels: angles in radians rounded to 6 decimals."""
    return Alphabet(tuple(round(float(t), 6) for t in sector_angles(n)))


def ligand_concentration(theta_i, theta_s, params: LegiParams):
    return params.a - params.b * (1.0 - np.cos(np.asarray(theta_i) - np.asarray(theta_s)))


def occupancy(l, k_d: float):
    l = np.asarray(l, dtype=float)
    return l / (k_d + l)


def occupancy_matrix(params: LegiParams) -> np.ndarray:
    """Binding probability f[s, i] for a source in sector s, receptor sector i."""
    th = sector_angles(params.n_sectors)
    return occupancy(ligand_concentration(th[None, :], th[:, None], params), params.k_d)


def sample_complexes(rng: np.random.Generator, params: LegiParams, theta_s: float) -> np.ndarray:
    th = sector_angles(params.n_sectors)
    f = occupancy(ligand_concentration(th, theta_s, params), params.k_d)
    return rng.binomial(params.r_t, f)


def legi_response(c, hill: int) -> np.ndarray:
    """Local signal over global mean: ``(c_i - min c)^h / mean_j (c_j - min c)^h``.

    Works on the last axis, so a batch of trials can be passed at once. A
    flat profile (all counts equal) carries no direction and maps to ones.
    """
    c = np.asarray(c, dtype=np.float64)
    shifted = c - c.min(axis=-1, keepdims=True)
    powered = shifted**hill
    mean = powered.mean(axis=-1, keepdims=True)
    flat = mean == 0
    u = np.divide(powered, mean, out=np.ones_like(powered), where=~flat)
    return u


def movement_distribution(u) -> Pmf:
    u = np.asarray(u, dtype=np.float64)
    return Pmf(u / u.sum())


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _draw_block(params, sim, f_table, prior, block):
    n_sec = params.n_sectors
    start = block * BLOCK_SIZE
    n = min(BLOCK_SIZE, sim.trials - start)
    rng = _block_rng(sim.seed, block)
    if prior is None:
        s = rng.integers(0, n_sec, size=n)
    else:
        s = rng.choice(n_sec, size=n, p=prior)
    c = rng.binomial(params.r_t, f_table[s])
    u = legi_response(c, params.hill)
    return rng, s, u / u.sum(axis=1, keepdims=True)


def _run_block(params, sim, f_table, prior, block):
    n_sec = params.n_sectors
    rng, s, p = _draw_block(params, sim, f_table, prior, block)
    if sim.mode == "sample":
        cdf = np.cumsum(p, axis=1)
        m = (cdf < rng.random(s.size)[:, None] * cdf[:, -1:]).sum(axis=1)
        np.minimum(m, n_sec - 1, out=m)
        flat = np.bincount(s * n_sec + m, minlength=n_sec * n_sec)
        return flat.reshape(n_sec, n_sec).astype(np.int64)
    out = np.zeros((n_sec, n_sec))
    np.add.at(out, s, p)
    return out


def _prepare(params, sim):
    prior = None
    if sim.source_prior is not None:
        if sim.source_prior.probs.size != params.n_sectors:
            raise InvalidParameter("source prior must cover every sector")
        prior = sim.source_prior.probs
    return occupancy_matrix(params), prior, math.ceil(sim.trials / BLOCK_SIZE)


def simulate(
    params: LegiParams,
    sim: SimConfig,
    workers: int = 1,
    progress: Callable[[float], None] | None = None,
) -> CountMatrix:
    """Joint source/movement tallies over ``trials`` simulated cells.

    ``mode="sample"`` draws one movement direction per trial and returns
    integer counts. ``mode="accumulate"`` adds each trial's whole movement
    distribution to its source row, giving fractional expected counts with
    much lower variance. Either way row ``s`` estimates ``P(theta_m | theta_s)``
    up to normalization.
    """
    n_sec = params.n_sectors
    f_table, prior, n_blocks = _prepare(params, sim)
    dtype = np.int64 if sim.mode == "sample" else np.float64
    total = np.zeros((n_sec, n_sec), dtype=dtype)

    def job(b):
        return _run_block(params, sim, f_table, prior, b)

    def merge(results):
        nonlocal total
        step = max(1, n_blocks // 10)
        for b, part in enumerate(results):
            total += part
            if progress is not None and ((b + 1) % step == 0 or b + 1 == n_blocks):
                progress((b + 1) / n_blocks)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            merge(pool.map(job, range(n_blocks)))
    else:
        merge(job(b) for b in range(n_blocks))

    labels = sector_alphabet(n_sec)
    return CountMatrix(total, labels, labels)


@dataclass(frozen=True, eq=False)
class MovementMoments:
    """Per-source-row sums over trials of the movement distribution ``p``.

    ``sum_p[s]`` is the accumulate-mode tally, ``sum_p2[s]`` sums ``p**2`` and
    ``sum_cross[s]`` sums ``p * p[s]``, which is what a standard error for
    ``p[m] - p[s]`` needs.
    """

    n: np.ndarray
    sum_p: np.ndarray
    sum_p2: np.ndarray
    sum_cross: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        return self.sum_p / self.n[:, None]

    def diff_from_source(self) -> tuple[np.ndarray, np.ndarray]:
        """Mean and standard error of ``p[m] - p[s]`` for every (s, m)."""
        n = self.n[:, None]
        mean = self.mean
        idx = np.arange(mean.shape[0])
        ms = mean[idx, idx][:, None]
        e2 = self.sum_p2 / n
        es2 = e2[idx, idx][:, None]
        cross = self.sum_cross / n
        var = e2 + es2 - 2 * cross - (mean - ms) ** 2
        return mean - ms, np.sqrt(np.maximum(var, 0.0) / n)


def simulate_moments(params: LegiParams, sim: SimConfig, workers: int = 1) -> MovementMoments:
    """First and second moments of the per-trial movement distributions.

    Uses the same random stream as :func:`simulate`, so ``sum_p`` equals the
    accumulate-mode counts bit for bit.
    """
    n_sec = params.n_sectors
    f_table, prior, n_blocks = _prepare(params, sim)

    def job(b):
        _, s, p = _draw_block(params, sim, f_table, prior, b)
        parts = np.zeros((3, n_sec, n_sec))
        np.add.at(parts[0], s, p)
        np.add.at(parts[1], s, p * p)
        np.add.at(parts[2], s, p * p[np.arange(s.size), s][:, None])
        return np.bincount(s, minlength=n_sec), parts

    n = np.zeros(n_sec, dtype=np.int64)
    tot = np.zeros((3, n_sec, n_sec))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, range(n_blocks)))
    else:
        results = (job(b) for b in range(n_blocks))
    for cnt, parts in results:
        n += cnt
        tot += parts
    return MovementMoments(n, tot[0], tot[1], tot[2])


def simulate_with_metadata(params: LegiParams, sim: SimConfig, workers: int = 1, progress=None):
    """``simulate`` plus a JSON-ready record of everything needed to rerun it."""
    t0 = time.perf_counter()
    counts = simulate(params, sim, workers=workers, progress=progress)
    meta = {
        "params": {
            "a": params.a, "b": params.b, "k_d": params.k_d, "r_t": params.r_t,
            "n_sectors": params.n_sectors, "hill": params.hill,
        },
        "seed": sim.seed,
        "trials": sim.trials,
        "mode": sim.mode,
        "block_size": BLOCK_SIZE,
        "source_prior": None if sim.source_prior is None else sim.source_prior.probs.tolist(),
        "wall_time_s": time.perf_counter() - t0,
    }
    return counts, meta
