"""End-to-end exploration loop.

One run spends its evaluation budget in three phases: importance trials,
diversity-driven initialization over the importance-weighted pool, and
Bayesian-optimization rounds picking one candidate per round by information
gain.  Importance trials are recycled into the surrogate's observation set
since they cost real evaluations.  A uniform-random baseline with the same
budget and journal format supports quality comparisons.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import acquisition as acq
from . import importance as imp
from . import init_sampling as ted
from . import pareto as par
from . import space as sp
from . import surrogate as sg
from .evaluators import EvaluationError, Evaluator
from .space import DesignPoint, DesignSpace


class RunAborted(RuntimeError):
    """An evaluation failed mid-run; the journal so far rides along so
    callers can flush it."""

    def __init__(self, message: str, journal: "RunJournal") -> None:
        super().__init__(message)
        self.journal = journal


@dataclass(frozen=True)
class RunConfig:
    """Exploration budget and algorithm knobs.

    The evaluation budget is n + b + T: importance trials, initialization
    picks, and one evaluation per optimization round.
    """

    T: int = 40
    n: int = 12
    mu: float = 0.1
    b: int = 20
    v_th: float = 0.07
    S: int = 10
    seed: int = 0
    pool_size: int = 2000
    standardize_icd: bool = True
    adrs_normalize: bool = True
    gp_restarts: int = 3
    gp_max_iter: int = 200

    def __post_init__(self) -> None:
        checks = [
            (self.T >= 0, f"T must be >= 0, got {self.T}"),
            (self.n >= 2, f"n must be >= 2, got {self.n}"),
            (self.b >= 1, f"b must be >= 1, got {self.b}"),
            (self.mu > 0.0, f"mu must be > 0, got {self.mu}"),
            (self.v_th >= 0.0, f"v_th must be >= 0, got {self.v_th}"),
            (self.S >= 1, f"S must be >= 1, got {self.S}"),
            (self.pool_size >= 1,
             f"pool_size must be >= 1, got {self.pool_size}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    @property
    def budget(self) -> int:
        return self.n + self.b + self.T


@dataclass
class RunJournal:
    """Per-iteration log: one record for the init phase (iteration 0),
    then one per optimization round; free-form notes ride along."""

    records: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, record: dict) -> None:
        self.records.append(record)

    def note(self, message: str) -> None:
        self.notes.append(message)

    @property
    def total_evaluations(self) -> int:
        return sum(r["evals"] for r in self.records)

    def adrs_history(self) -> list[tuple[int, float]]:
        return [(r["iteration"], r["adrs"]) for r in self.records
                if r.get("adrs") is not None]

    def save_jsonl(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for record in self.records:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
            for message in self.notes:
                fh.write(json.dumps({"phase": "note", "note": message},
                                    sort_keys=True) + "\n")

    @staticmethod
    def load_jsonl(path: str) -> "RunJournal":
        journal = RunJournal()
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                record = json.loads(line)
                if record.get("phase") == "note":
                    journal.notes.append(record["note"])
                else:
                    journal.records.append(record)
        return journal


def _dedupe(points: Sequence[DesignPoint]) -> list[DesignPoint]:
    seen: set[DesignPoint] = set()
    out = []
    for p in points:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _entry(space: DesignSpace, point: DesignPoint,
           metrics: np.ndarray) -> dict:
    return {"assignment": list(point),
            "values": [v if isinstance(v, (str, int)) else float(v)
                       for v in space.values(point)],
            "metrics": [float(m) for m in metrics]}


def _restrict_to_pruned(space: DesignSpace, pool: Sequence[DesignPoint],
                        pruned_space: DesignSpace, mask: np.ndarray,
                        min_size: int, journal: RunJournal
                        ) -> list[DesignPoint]:
    """Keep pool rows matching every pruned parameter's medium value.

    Falls back to the unrestricted pool when too few rows survive (a fixed
    dataset need not contain medium-valued rows)."""
    if not np.any(mask):
        return list(pool)
    fixed = {i: pruned_space.parameters[i].candidates[0]
             for i in np.flatnonzero(mask)}
    kept = [p for p in pool
            if all(space.parameters[i].candidates[p[i]] == v
                   for i, v in fixed.items())]
    if len(kept) < min_size:
        journal.note(
            f"pruning left {len(kept)} of {len(pool)} pool rows "
            f"(< {min_size}); keeping the unrestricted pool")
        warnings.warn("pruned assignment too rare in dataset pool; "
                      "pool left unrestricted", stacklevel=3)
        return list(pool)
    if len(kept) < len(pool):
        journal.note(
            f"pruning restricted the pool from {len(pool)} to "
            f"{len(kept)} rows")
    return kept


def _sampled_pool(space: DesignSpace, pruned_space: DesignSpace,
                  size: int, seed: Sequence[int]) -> list[DesignPoint]:
    raw = sp.sample_uniform(pruned_space, size, seed)
    return _dedupe([sp.reindex_point(pruned_space, space, p) for p in raw])


def _abort_on_failure(journal: RunJournal, thunk):
    """Run one evaluation step; on failure, note it and surface the
    journal written so far."""
    try:
        return thunk()
    except EvaluationError as exc:
        journal.note(f"aborted on evaluation failure: {exc}")
        raise RunAborted(str(exc), journal) from exc


def run(space: DesignSpace, evaluator: Evaluator, config: RunConfig, *,
        pool: Sequence[DesignPoint] | None = None,
        reference_front: np.ndarray | None = None
        ) -> tuple[par.ParetoArchive, RunJournal]:
    """Full exploration; returns the Pareto archive of every evaluated
    point (original-space lookups, never inverted coordinates) and the
    journal.

    ``pool`` fixes the candidate pool to given points (tabular datasets
    supply their rows); otherwise a seeded uniform sample of
    ``config.pool_size`` points from the pruned space is used.
    """
    journal = RunJournal()
    seed = config.seed
    t_start = time.perf_counter()

    # importance trials (recycled as observations)
    if pool is not None:
        pool_pts = _dedupe([space.validate(p) for p in pool])
        rng = np.random.default_rng([seed, 10])
        replace = config.n > len(pool_pts)
        idx = rng.choice(len(pool_pts), size=config.n, replace=replace)
        trial_arg = [pool_pts[i] for i in idx]
    else:
        pool_pts = None
        trial_arg = None
    v, trial_pts, trial_metrics = _abort_on_failure(
        journal,
        lambda: imp.icd(space, evaluator, config.n, seed=[seed, 10],
                        standardize=config.standardize_icd,
                        trial_points=trial_arg))

    observed: list[tuple[DesignPoint, np.ndarray]] = list(
        zip(trial_pts, trial_metrics))
    evaluated: set[DesignPoint] = set(trial_pts)

    # prune, build the candidate pool, transform
    pruned_space, mask = imp.prune(space, v, config.v_th)
    if pool_pts is not None:
        candidates = _restrict_to_pruned(space, pool_pts, pruned_space,
                                         mask, config.b, journal)
    else:
        candidates = _sampled_pool(space, pruned_space, config.pool_size,
                                   [seed, 11])
    candidates = [p for p in candidates if p not in evaluated]
    b_eff = min(config.b, len(candidates))
    if b_eff < config.b:
        journal.note(
            f"pool holds only {b_eff} unevaluated points; initializing "
            f"with {b_eff} instead of b={config.b}")
    icd_pool = imp.transform(space, candidates, v, mask)

    # initialization
    if b_eff > 0:
        init_pts = ted.soc_init(icd_pool, config.mu, b_eff,
                                seed=[seed, 12])
        init_metrics = _abort_on_failure(
            journal, lambda: evaluator.evaluate_batch(init_pts))
        observed.extend(zip(init_pts, init_metrics))
        evaluated.update(init_pts)
    remaining = [i for i, p in enumerate(icd_pool.points)
                 if p not in evaluated]

    def cumulative_adrs() -> float | None:
        if reference_front is None:
            return None
        metrics = np.vstack([m for _, m in observed])
        return par.adrs(reference_front, metrics,
                        normalize=config.adrs_normalize)

    def archive_size() -> int:
        return len(par.pareto_extract(observed))

    evals_total = config.n + b_eff
    journal.add({
        "iteration": 0,
        "phase": "init",
        "evals": evals_total,
        "evals_total": evals_total,
        "selected": [_entry(space, p, m)
                     for p, m in observed],
        "importance": [float(x) for x in v],
        "pruned_parameters": [space.names[i] for i in np.flatnonzero(mask)],
        "archive_size": archive_size(),
        "adrs": cumulative_adrs(),
        "gp": None,
        "acquisition_max": None,
        "wall_time_s": time.perf_counter() - t_start,
    })

    # optimization rounds
    gp_params: list[sg.KernelParams] | None = None
    for t in range(1, config.T + 1):
        if not remaining:
            journal.note(
                f"candidate pool exhausted after {evals_total} of "
                f"{config.budget} evaluations")
            break
        t_iter = time.perf_counter()
        x_obs = imp.transform(space, [p for p, _ in observed], v,
                              mask).coords
        y_obs = np.vstack([m for _, m in observed])
        state = sg.fit(x_obs, y_obs,
                       restarts=config.gp_restarts if gp_params is None
                       else 1,
                       max_iter=config.gp_max_iter,
                       seed=[seed, 13, t], init=gp_params)
        gp_params = state.params

        sub = icd_pool.subset(remaining)
        front = acq.sample_front_maxima(state, sub.coords, config.S,
                                        [seed, 14, t])
        scores = acq.acquisition_values(state, sub.coords, front)
        pick = int(np.argmax(scores))
        point = sub.points[pick]
        metrics = _abort_on_failure(journal,
                                    lambda: evaluator.evaluate(point))
        observed.append((point, metrics))
        evaluated.add(point)
        del remaining[pick]
        evals_total += 1

        journal.add({
            "iteration": t,
            "phase": "bo",
            "evals": 1,
            "evals_total": evals_total,
            "selected": [_entry(space, point, metrics)],
            "archive_size": archive_size(),
            "adrs": cumulative_adrs(),
            "gp": [p.as_dict() for p in state.params],
            "acquisition_max": float(scores[pick]),
            "wall_time_s": time.perf_counter() - t_iter,
        })

    archive = par.pareto_extract(observed)
    return archive, journal


def run_random_baseline(space: DesignSpace, evaluator: Evaluator,
                        config: RunConfig, *,
                        pool: Sequence[DesignPoint] | None = None,
                        reference_front: np.ndarray | None = None
                        ) -> tuple[par.ParetoArchive, RunJournal]:
    """Spend the same budget on uniform random distinct pool points.

    Journal format matches :func:`run` with one record per evaluation.
    """
    journal = RunJournal()
    seed = config.seed
    if pool is not None:
        pool_pts = _dedupe([space.validate(p) for p in pool])
    else:
        pool_pts = _sampled_pool(space, space, config.pool_size, [seed, 11])

    budget = config.budget
    k = min(budget, len(pool_pts))
    rng = np.random.default_rng([seed, 20])
    picks = rng.choice(len(pool_pts), size=k, replace=False)

    observed: list[tuple[DesignPoint, np.ndarray]] = []
    evals_total = 0
    for i, j in enumerate(picks):
        t_iter = time.perf_counter()
        point = pool_pts[int(j)]
        metrics = _abort_on_failure(journal,
                                    lambda: evaluator.evaluate(point))
        observed.append((point, metrics))
        evals_total += 1
        adrs_value = None
        if reference_front is not None:
            adrs_value = par.adrs(reference_front,
                                  np.vstack([m for _, m in observed]),
                                  normalize=config.adrs_normalize)
        journal.add({
            "iteration": i,
            "phase": "random",
            "evals": 1,
            "evals_total": evals_total,
            "selected": [_entry(space, point, metrics)],
            "archive_size": len(par.pareto_extract(observed)),
            "adrs": adrs_value,
            "gp": None,
            "acquisition_max": None,
            "wall_time_s": time.perf_counter() - t_iter,
        })
    if k < budget:
        journal.note(
            f"candidate pool exhausted after {k} of {budget} evaluations")

    archive = par.pareto_extract(observed)
    return archive, journal
