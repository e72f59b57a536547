"""Information-gain acquisition over Monte-Carlo samples of the Pareto
front, and the candidate selection built on it.

The whole acquisition path works in maximization convention: costs are
negated going in, so each posterior draw's Pareto-front per-objective
maximum upper-bounds the corresponding objective.  Treating an objective
value as a Gaussian truncated at that bound, observing a candidate reduces
entropy by

    h(g) = g * pdf(g) / (2 * cdf(g)) - ln cdf(g),
    g    = (front_max - mean) / std,

summed over objectives and front samples.  Each term is nonnegative and
vanishes as g grows (candidates the sampled fronts already dominate carry
no information).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import erfcx, log_ndtr

from . import surrogate as sg
from .importance import IcdSpace
from .pareto import nondominated_mask
from .space import DesignPoint

SIGMA_FLOOR = 1e-9
FRONT_POOL_CAP = 512


@dataclass(frozen=True)
class FrontSample:
    """Per-objective maxima of sampled Pareto fronts (maximization
    convention, i.e. negated costs); shape (S, d_y)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite front maxima")
        object.__setattr__(self, "values", v)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]


def sample_front_maxima(state: sg.SurrogateState, pool_coords: np.ndarray,
                        s: int, seed: int | Sequence[int], *,
                        max_pool: int = FRONT_POOL_CAP) -> FrontSample:
    """Draw ``s`` joint posteriors over the pool; for each, extract the
    non-dominated subset and record each objective's maximum (negated
    cost).  Pools beyond ``max_pool`` are seeded-subsampled first."""
    coords = np.atleast_2d(np.asarray(pool_coords, dtype=float))
    if coords.shape[0] == 0:
        raise ValueError("empty pool")
    base = [seed] if isinstance(seed, (int, np.integer)) else list(seed)
    if coords.shape[0] > max_pool:
        rng = np.random.default_rng(base + [7919])
        keep = np.sort(rng.choice(coords.shape[0], size=max_pool,
                                  replace=False))
        coords = coords[keep]
    draws = sg.sample_posterior(state, coords, s, seed)
    maxima = np.empty((s, state.n_objectives))
    for i in range(s):
        costs = draws[i]
        front = costs[nondominated_mask(costs)]
        maxima[i] = -front.min(axis=0)
    return FrontSample(values=maxima)


def entropy_reduction_summand(gamma: np.ndarray) -> np.ndarray:
    """Stable elementwise h(g) = g*pdf(g)/(2*cdf(g)) - ln cdf(g) >= 0.

    pdf/cdf is evaluated through the scaled complementary error function,
    and ln cdf through its dedicated log form, so deeply negative g does
    not underflow.
    """
    g = np.asarray(gamma, dtype=float)
    hazard = np.sqrt(2.0 / np.pi) / erfcx(-g / np.sqrt(2.0))
    out = 0.5 * g * hazard - log_ndtr(g)
    return np.maximum(out, 0.0)


def acquisition_values(state: sg.SurrogateState, coords: np.ndarray,
                       front: FrontSample) -> np.ndarray:
    """Information gain for each candidate row of ``coords``."""
    q = np.atleast_2d(np.asarray(coords, dtype=float))
    mean, std = sg.posterior(state, q)
    mu_max = -mean                                   # to maximization
    sigma = np.maximum(std, SIGMA_FLOOR)
    gamma = ((front.values[None, :, :] - mu_max[:, None, :])
             / sigma[:, None, :])                    # (m, S, d_y)
    return entropy_reduction_summand(gamma).sum(axis=(1, 2))


def acquisition_value(state: sg.SurrogateState, coords: np.ndarray,
                      front: FrontSample) -> float:
    return float(acquisition_values(state, np.atleast_2d(coords), front)[0])


def imoo_select(state: sg.SurrogateState, pool: IcdSpace, s: int,
                seed: int | Sequence[int]) -> DesignPoint:
    """The unevaluated pool member with the highest information gain.

    Ties break to the lowest pool index (argmax keeps the first maximum).
    """
    if len(pool) == 0:
        raise ValueError("empty candidate pool")
    front = sample_front_maxima(state, pool.coords, s, seed)
    scores = acquisition_values(state, pool.coords, front)
    return pool.points[int(np.argmax(scores))]
