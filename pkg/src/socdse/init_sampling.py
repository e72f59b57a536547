"""Greedy transductive experimental design over the importance-weighted
pool: pick the points whose kernel columns explain the pool best, deflating
the kernel matrix after each pick so later picks cover what is left.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .importance import IcdSpace
from .space import DesignPoint


class InitSamplingError(ValueError):
    pass


@dataclass(frozen=True)
class SimilarityMatrix:
    """Gaussian-kernel Gram matrix over a candidate pool."""

    matrix: np.ndarray       # dense symmetric, unit diagonal
    bandwidth: float
    mu: float


def median_bandwidth(coords: np.ndarray) -> float:
    """Median pairwise Euclidean distance; 1.0 for degenerate pools."""
    coords = np.atleast_2d(coords)
    if coords.shape[0] < 2:
        return 1.0
    med = float(np.median(pdist(coords)))
    return med if med > 0.0 else 1.0


def build_similarity(coords: np.ndarray, mu: float,
                     bandwidth: float | None = None) -> SimilarityMatrix:
    """k(a, b) = exp(-|a-b|^2 / (2 sigma^2)), sigma from the median
    heuristic unless given."""
    if mu <= 0.0:
        raise InitSamplingError(f"regularizer mu must be > 0, got {mu}")
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    sigma = median_bandwidth(coords) if bandwidth is None else bandwidth
    if sigma <= 0.0:
        raise InitSamplingError(f"bandwidth must be > 0, got {sigma}")
    if coords.shape[0] == 1:
        gram = np.ones((1, 1))
    else:
        sq = squareform(pdist(coords, "sqeuclidean"))
        gram = np.exp(-sq / (2.0 * sigma * sigma))
    if not np.all(np.isfinite(gram)):
        raise InitSamplingError("non-finite kernel entries")
    return SimilarityMatrix(matrix=gram, bandwidth=sigma, mu=mu)


def ted_select(sim: SimilarityMatrix, b: int) -> list[int]:
    """Greedy selection of ``b`` pool indices.

    Each round picks the remaining index maximizing |K_col|^2 over its
    regularized diagonal, then deflates K by the picked column's outer
    product.  Ties break to the lowest index.
    """
    k = sim.matrix.copy()
    n = k.shape[0]
    if not 1 <= b <= n:
        raise InitSamplingError(f"need 1 <= b <= pool size {n}, got b={b}")
    mu = sim.mu
    available = np.ones(n, dtype=bool)
    chosen: list[int] = []
    for _ in range(b):
        scores = np.sum(k * k, axis=0) / (np.diag(k) + mu)
        scores[~available] = -np.inf
        z = int(np.argmax(scores))
        chosen.append(z)
        available[z] = False
        col = k[:, z].copy()
        k -= np.outer(col, col) / (col[z] + mu)
    return chosen


def soc_init(pool: IcdSpace, mu: float, b: int, *,
             bandwidth: float | None = None, max_pool: int = 5000,
             seed: int | Sequence[int] = 0) -> list[DesignPoint]:
    """Pick ``b`` diverse initialization points from the weighted pool.

    Pools larger than ``max_pool`` are uniformly subsampled first (the
    dense Gram matrix is quadratic in the pool).  Returns original-space
    design points in selection order.
    """
    if len(pool) == 0:
        raise InitSamplingError("empty candidate pool")
    if b > len(pool):
        raise InitSamplingError(
            f"cannot pick b={b} from a pool of {len(pool)}")
    work = pool
    if len(pool) > max_pool:
        base = [seed] if isinstance(seed, (int, np.integer)) else list(seed)
        rng = np.random.default_rng(base)
        keep = np.sort(rng.choice(len(pool), size=max_pool, replace=False))
        work = pool.subset(keep)
    sim = build_similarity(work.coords, mu, bandwidth)
    chosen = ted_select(sim, b)
    return [work.points[i] for i in chosen]
