"""Per-parameter importance from inter-cluster distances, space pruning,
and the importance-weighted coordinate transform.

The importance of a parameter is the mean pairwise Euclidean distance
between the average metric vectors of the trial groups that share a
candidate on that parameter.  Parameters whose importance falls below a
threshold are fixed to their medium candidate; encoded coordinates are then
weighted elementwise by the normalized importance vector so that influential
parameters dominate distances downstream (init sampling, surrogate kernel).
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from . import space as sp
from .evaluators import Evaluator
from .space import DesignPoint, DesignSpace, ParameterDef

ImportanceVector = np.ndarray  # shape (d_x,), nonnegative, sums to 1


def normalize_importance(raw: np.ndarray) -> ImportanceVector:
    """Scale to sum 1; an all-zero vector falls back to uniform weights
    (zero weights would annihilate every coordinate downstream)."""
    raw = np.asarray(raw, dtype=float)
    total = raw.sum()
    if total <= 0.0:
        return np.full(raw.shape, 1.0 / raw.size)
    return raw / total


def icd_from_trials(space: DesignSpace, points: Sequence[DesignPoint],
                    metrics: np.ndarray, *, standardize: bool = True,
                    normalize: bool = True) -> ImportanceVector:
    """Importance from an existing set of evaluated trials.

    Metric axes are standardized over the trials first (unless disabled) so
    that axes with large units cannot drown the others.  A parameter whose
    trials cover fewer than two candidates scores 0, with a warning.
    """
    y = np.asarray(metrics, dtype=float)
    if len(points) != y.shape[0]:
        raise ValueError("points and metrics disagree in length")
    if y.shape[0] < 2:
        raise ValueError("importance analysis needs at least 2 trials")
    if standardize:
        std = y.std(axis=0)
        std[std == 0.0] = 1.0
        y = (y - y.mean(axis=0)) / std

    assign = np.asarray([space.validate(p) for p in points], dtype=int)
    raw = np.zeros(len(space), dtype=float)
    for i, param in enumerate(space.parameters):
        groups = [y[assign[:, i] == c] for c in range(len(param.candidates))]
        means = [g.mean(axis=0) for g in groups if g.shape[0] > 0]
        if len(means) < 2:
            warnings.warn(
                f"parameter {param.name!r}: trials cover "
                f"{len(means)} candidate(s); importance set to 0",
                stacklevel=2)
            continue
        dist = [float(np.linalg.norm(a - b))
                for a, b in combinations(means, 2)]
        raw[i] = sum(dist) / len(dist)
    return normalize_importance(raw) if normalize else raw


def icd(space: DesignSpace, evaluator: Evaluator, n: int,
        seed: int | None = None, *, standardize: bool = True,
        trial_points: Sequence[DesignPoint] | None = None
        ) -> tuple[ImportanceVector, list[DesignPoint], np.ndarray]:
    """Run ``n`` evaluation trials and score parameter importance.

    Returns (importance, trial points, trial metrics); callers recycle the
    trials as surrogate observations since they cost real evaluations.
    ``trial_points`` overrides the default uniform sampling when the
    evaluator only answers a fixed pool.
    """
    if n < 2:
        raise ValueError(f"importance analysis needs n >= 2 trials, got {n}")
    if trial_points is None:
        points = sp.sample_uniform(space, n, seed)
    else:
        if len(trial_points) < 2:
            raise ValueError("need at least 2 trial points")
        points = [space.validate(p) for p in trial_points]
    metrics = evaluator.evaluate_batch(points)
    v = icd_from_trials(space, points, metrics, standardize=standardize)
    return v, points, metrics


def medium_index(param: ParameterDef) -> int:
    """Index of the medium candidate; even-length lists take the lower
    middle for a deterministic tie-break."""
    return (len(param.candidates) - 1) // 2


def prune(space: DesignSpace, v: ImportanceVector, v_th: float
          ) -> tuple[DesignSpace, np.ndarray]:
    """Fix every parameter with importance below ``v_th`` to its medium
    candidate.  Returns the pruned space and the mask of fixed parameters.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (len(space),):
        raise ValueError(
            f"importance vector has shape {v.shape}, space has "
            f"{len(space)} parameters")
    if v_th < 0.0:
        raise ValueError(f"threshold must be >= 0, got {v_th}")
    mask = v < v_th
    params = []
    for param, fixed in zip(space.parameters, mask):
        if fixed:
            mid = param.candidates[medium_index(param)]
            params.append(ParameterDef(name=param.name, group=param.group,
                                       candidates=(mid,)))
        else:
            params.append(param)
    return DesignSpace(parameters=tuple(params), seed=space.seed), mask


@dataclass(frozen=True)
class IcdSpace:
    """A candidate pool with importance-weighted coordinates.

    Each pool member keeps its original design point so restoring results
    is an exact lookup, never a numeric inversion.
    """

    points: tuple[DesignPoint, ...]
    coords: np.ndarray               # shape (len(points), d_x)
    importance: ImportanceVector
    pruned_mask: np.ndarray          # shape (d_x,), bool

    def __len__(self) -> int:
        return len(self.points)

    def subset(self, indices: Sequence[int]) -> "IcdSpace":
        idx = list(indices)
        return IcdSpace(points=tuple(self.points[i] for i in idx),
                        coords=self.coords[idx],
                        importance=self.importance,
                        pruned_mask=self.pruned_mask)


def transform(space: DesignSpace, points: Sequence[DesignPoint],
              v: ImportanceVector,
              pruned_mask: np.ndarray | None = None) -> IcdSpace:
    """Pair each pool point with its importance-weighted encoding v * x."""
    v = np.asarray(v, dtype=float)
    if pruned_mask is None:
        pruned_mask = np.zeros(len(space), dtype=bool)
    encoded = sp.encode_many(space, points)
    return IcdSpace(points=tuple(tuple(p) for p in points),
                    coords=encoded * v[None, :],
                    importance=v,
                    pruned_mask=np.asarray(pruned_mask, dtype=bool))


def write_importance_csv(space: DesignSpace, v: ImportanceVector,
                         path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parameter", "value"])
        for name, value in zip(space.names, v):
            writer.writerow([name, repr(float(value))])


def read_importance_csv(path: str) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["parameter", "value"]:
            raise ValueError(f"{path}: unexpected header {header}")
        names, values = [], []
        for row in reader:
            if not row:
                continue
            names.append(row[0])
            values.append(float(row[1]))
    return names, np.asarray(values, dtype=float)
