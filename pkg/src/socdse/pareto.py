"""Domination, Pareto-set extraction and archiving, and the ADRS metric.

Minimization convention throughout: a metrics vector dominates another when
it is no worse on every axis and strictly better on at least one.
"""

from __future__ import annotations

import csv
from typing import Iterable, Sequence

import numpy as np

from .space import DesignPoint, DesignSpace


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a`` dominates ``b`` (a <= b everywhere, a < b somewhere)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_mask(metrics: np.ndarray) -> np.ndarray:
    """Boolean mask of rows not dominated by any other row.

    Exact duplicates of a non-dominated row are all kept (equal vectors
    never dominate each other).
    """
    y = np.asarray(metrics, dtype=float)
    n = y.shape[0]
    if n == 0:
        return np.zeros(0, dtype=bool)
    if y.shape[1] == 2:
        return _nondominated_2d(y)
    if n * n * y.shape[1] <= 50_000_000:
        # dominated[i] = exists j with y[j] <= y[i] everywhere, < somewhere
        leq = np.all(y[:, None, :] <= y[None, :, :], axis=2)
        lt = np.any(y[:, None, :] < y[None, :, :], axis=2)
        return ~np.any(leq & lt, axis=0)
    mask = np.empty(n, dtype=bool)
    for i in range(n):
        leq = np.all(y <= y[i], axis=1)
        lt = np.any(y < y[i], axis=1)
        mask[i] = not bool(np.any(leq & lt))
    return mask


def _nondominated_2d(y: np.ndarray) -> np.ndarray:
    """Sort-and-sweep domination for two objectives.

    After lexicographic sorting, a row is dominated exactly when some row
    with strictly smaller first objective has second objective <= its own,
    or a row sharing its first objective has a strictly smaller second.
    """
    n = y.shape[0]
    order = np.lexsort((y[:, 1], y[:, 0]))
    ys = y[order].tolist()
    keep = [True] * n
    best_prev = np.inf
    i = 0
    while i < n:
        f1 = ys[i][0]
        group_min = ys[i][1]
        j = i
        while j < n and ys[j][0] == f1:
            f2 = ys[j][1]
            keep[j] = not (best_prev <= f2 or group_min < f2)
            j += 1
        best_prev = min(best_prev, group_min)
        i = j
    out = np.empty(n, dtype=bool)
    out[order] = keep
    return out


class ParetoArchive:
    """Mutually non-dominated (point, metrics) entries, single writer.

    Inserting a dominated entry is a no-op; inserting a dominating entry
    evicts everything it dominates.  Design points are unique; entries with
    equal metrics but distinct points are both retained.
    """

    def __init__(self) -> None:
        self._points: list[DesignPoint] = []
        self._metrics: list[np.ndarray] = []

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self):
        return iter(zip(self._points, self._metrics))

    @property
    def points(self) -> list[DesignPoint]:
        return list(self._points)

    def metrics(self) -> np.ndarray:
        if not self._metrics:
            return np.empty((0, 0), dtype=float)
        return np.vstack(self._metrics)

    def insert(self, point: Sequence[int], metrics: Sequence[float]) -> bool:
        """Insert one evaluated point; returns True if it was admitted."""
        pt = tuple(int(i) for i in point)
        m = np.asarray(metrics, dtype=float)
        if pt in self._points:
            return False
        if any(dominates(old, m) for old in self._metrics):
            return False
        keep = [not dominates(m, old) for old in self._metrics]
        self._points = [p for p, k in zip(self._points, keep) if k]
        self._metrics = [v for v, k in zip(self._metrics, keep) if k]
        self._points.append(pt)
        self._metrics.append(m)
        return True

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[Sequence[int],
                                                  Sequence[float]]]
                     ) -> "ParetoArchive":
        return pareto_extract(list(entries))


def pareto_extract(entries: Sequence[tuple[Sequence[int], Sequence[float]]]
                   ) -> ParetoArchive:
    """Non-dominated subset of evaluated entries.

    When several entries share the exact same metrics vector, only the
    first occurrence is kept.
    """
    archive = ParetoArchive()
    if not entries:
        return archive
    metrics = np.vstack([np.asarray(m, dtype=float) for _, m in entries])
    mask = nondominated_mask(metrics)
    seen: set[bytes] = set()
    for (point, _), m, keep in zip(entries, metrics, mask):
        if not keep:
            continue
        key = m.tobytes()
        if key in seen:
            continue
        seen.add(key)
        archive._points.append(tuple(int(i) for i in point))
        archive._metrics.append(m)
    return archive


def adrs(reference: np.ndarray, learned: np.ndarray,
         *, normalize: bool = True) -> float:
    """Average distance from the reference set to the learned set.

    Mean over reference points of the Euclidean distance to the nearest
    learned point.  With ``normalize`` (default) both sets are first scaled
    per axis by the reference set's min-max range, so axes with wildly
    different units contribute comparably; a zero range leaves that axis
    unscaled.
    """
    ref = np.atleast_2d(np.asarray(reference, dtype=float))
    own = np.atleast_2d(np.asarray(learned, dtype=float))
    if ref.size == 0 or own.size == 0:
        raise ValueError("ADRS needs non-empty reference and learned sets")
    if ref.shape[1] != own.shape[1]:
        raise ValueError(
            f"dimension mismatch: {ref.shape[1]} vs {own.shape[1]}")
    if normalize:
        lo = ref.min(axis=0)
        span = ref.max(axis=0) - lo
        span[span == 0.0] = 1.0
        ref = (ref - lo) / span
        own = (own - lo) / span
    diff = ref[:, None, :] - own[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    return float(np.mean(dist.min(axis=1)))


def write_archive_csv(space: DesignSpace, archive: ParetoArchive,
                      metric_names: Sequence[str], path: str) -> None:
    """Archive export: parameter columns then metric columns."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(space.names + list(metric_names))
        for point, metrics in archive:
            writer.writerow([str(v) for v in space.values(point)]
                            + [repr(float(m)) for m in metrics])


def write_adrs_csv(history: Sequence[tuple[int, float]], path: str) -> None:
    """ADRS history export: (iteration, adrs) rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "adrs"])
        for iteration, value in history:
            writer.writerow([iteration, repr(float(value))])
