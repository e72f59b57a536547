"""Command-line front door: run explorations, generate datasets, and
produce importance reports as plot-ready CSV files.

Exit codes: 0 success, 1 configuration error (message names the offending
field or path), 2 evaluation failure.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np
import yaml

from . import evaluators as ev
from . import importance as imp
from . import pareto as par
from . import space as sp
from . import tuner
from .evaluators import EvaluationError
from .space import SpaceError


class ConfigError(Exception):
    """User-facing configuration problem; exits with code 1."""


_RUN_KEYS = ("T", "n", "b", "mu", "v_th", "S", "seed", "pool_size",
             "evaluator", "dataset")


def _load_space_and_run(space_path: str | None, evaluator_kind: str | None,
                        default_kind: str = "benchmark"
                        ) -> tuple[sp.DesignSpace, dict]:
    """Resolve the design space and the optional ``run`` section of its
    document (file values are defaults; flags override them)."""
    run_section: dict = {}
    if space_path is not None:
        if not os.path.exists(space_path):
            raise ConfigError(f"--space: no such file: {space_path}")
        try:
            with open(space_path, "r", encoding="utf-8") as fh:
                doc = yaml.safe_load(fh.read())
        except yaml.YAMLError as exc:
            raise ConfigError(f"--space: {exc}") from exc
        if isinstance(doc, dict) and isinstance(doc.get("run"), dict):
            run_section = {k: doc["run"][k] for k in _RUN_KEYS
                           if k in doc["run"]}
        try:
            space = sp.load_space(doc, source=space_path)
        except SpaceError as exc:
            raise ConfigError(f"--space: {exc}") from exc
        return space, run_section
    kind = evaluator_kind or default_kind
    if kind == "benchmark":
        return ev.make_benchmark_space(), run_section
    return sp.table1_space(), run_section


def _make_evaluator(kind: str, space: sp.DesignSpace,
                    dataset: str | None):
    """Returns (evaluator, pool or None, reference front or None)."""
    if kind == "tabular":
        if dataset is None:
            raise ConfigError("--dataset: required for the tabular "
                              "evaluator")
        if not os.path.exists(dataset):
            raise ConfigError(f"--dataset: no such file: {dataset}")
        try:
            evaluator, pool = ev.load_tabular(space, dataset)
        except ev.DatasetError as exc:
            raise ConfigError(f"--dataset: {exc}") from exc
        metrics = evaluator.evaluate_batch(pool)
        reference = metrics[par.nondominated_mask(metrics)]
        return evaluator, pool, reference
    if kind == "analytic":
        try:
            return ev.AnalyticSocEvaluator(space), None, None
        except SpaceError as exc:
            raise ConfigError(f"--space: {exc}") from exc
    if kind == "benchmark":
        try:
            evaluator = ev.BenchmarkEvaluator(space)
        except SpaceError as exc:
            raise ConfigError(f"--space: {exc}") from exc
        return evaluator, None, evaluator.reference_front()
    raise ConfigError(f"--evaluator: unknown kind {kind!r}")


def _prepare_out(out: str | None, filenames: list[str],
                 force: bool) -> str:
    if not out:
        raise ConfigError("--out: output directory required (flag or "
                          "SOCDSE_OUT)")
    os.makedirs(out, exist_ok=True)
    if not force:
        for name in filenames:
            path = os.path.join(out, name)
            if os.path.exists(path):
                raise ConfigError(
                    f"--out: {path} exists; pass --force to overwrite")
    return out


def _merge_config(run_section: dict, **flags) -> tuner.RunConfig:
    merged = {}
    for key in ("T", "n", "b", "mu", "v_th", "S", "seed", "pool_size"):
        flag = flags.get(key)
        if flag is not None:
            merged[key] = flag
        elif key in run_section:
            merged[key] = run_section[key]
    try:
        return tuner.RunConfig(**merged)
    except ValueError as exc:
        raise ConfigError(f"run config: {exc}") from exc


_run_options = [
    click.option("--space", "space_path", type=str, default=None,
                 help="Design-space YAML (defaults to the bundled space "
                      "for the chosen evaluator)."),
    click.option("--evaluator", "evaluator_kind",
                 type=click.Choice(["tabular", "analytic", "benchmark"]),
                 default=None, help="Metric evaluator (default benchmark)."),
    click.option("--dataset", type=str, default=None,
                 help="Pre-evaluated CSV for the tabular evaluator."),
    click.option("--T", "T", type=int, default=None,
                 help="Optimization rounds."),
    click.option("--n", "n", type=int, default=None,
                 help="Importance trials (gen-dataset: rows to sample)."),
    click.option("--b", "b", type=int, default=None,
                 help="Initialization picks."),
    click.option("--mu", "mu", type=float, default=None,
                 help="Init-sampling regularizer."),
    click.option("--v-th", "v_th", type=float, default=None,
                 help="Importance pruning threshold."),
    click.option("--S", "S", type=int, default=None,
                 help="Posterior front samples per round."),
    click.option("--seed", type=int, default=None, help="Master seed."),
    click.option("--pool-size", type=int, default=None,
                 help="Candidate pool size for sampled pools."),
    click.option("--out", envvar="SOCDSE_OUT", type=str, default=None,
                 help="Output directory (or SOCDSE_OUT)."),
    click.option("--force", is_flag=True,
                 help="Overwrite existing output files."),
    click.option("-v", "--verbose", count=True),
]


def _with_options(func):
    for option in reversed(_run_options):
        func = option(func)
    return func


@click.group()
def main() -> None:
    """Multi-objective design-space exploration."""


@main.command("explore")
@_with_options
def cmd_explore(space_path, evaluator_kind, dataset, T, n, b, mu, v_th, S,
                seed, pool_size, out, force, verbose) -> None:
    """Run a full exploration and write pareto.csv, journal.jsonl,
    importance.csv, and adrs.csv (when a reference front is known)."""
    try:
        space, run_section = _load_space_and_run(space_path, evaluator_kind)
        kind = evaluator_kind or run_section.get("evaluator", "benchmark")
        dataset = dataset or run_section.get("dataset")
        evaluator, pool, reference = _make_evaluator(kind, space, dataset)
        config = _merge_config(run_section, T=T, n=n, b=b, mu=mu, v_th=v_th,
                               S=S, seed=seed, pool_size=pool_size)
        outputs = ["pareto.csv", "journal.jsonl", "importance.csv"]
        if reference is not None:
            outputs.append("adrs.csv")
        out = _prepare_out(out, outputs, force)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    try:
        archive, journal = tuner.run(space, evaluator, config, pool=pool,
                                     reference_front=reference)
    except tuner.RunAborted as exc:
        exc.journal.save_jsonl(os.path.join(out, "journal.jsonl"))
        click.echo(f"evaluation failed: {exc} "
                   f"(journal flushed to {out})", err=True)
        sys.exit(2)
    except EvaluationError as exc:
        click.echo(f"evaluation failed: {exc}", err=True)
        sys.exit(2)

    par.write_archive_csv(space, archive,
                          evaluator.descriptor.metric_names,
                          os.path.join(out, "pareto.csv"))
    journal.save_jsonl(os.path.join(out, "journal.jsonl"))
    v = np.asarray(journal.records[0]["importance"], dtype=float)
    imp.write_importance_csv(space, v, os.path.join(out, "importance.csv"))
    if reference is not None:
        par.write_adrs_csv(journal.adrs_history(),
                           os.path.join(out, "adrs.csv"))

    click.echo(f"evaluations      {journal.total_evaluations}")
    click.echo(f"archive size     {len(archive)}")
    history = journal.adrs_history()
    if history:
        click.echo(f"final adrs       {history[-1][1]:.6f}")
    click.echo(f"outputs          {out}")
    if verbose:
        names = space.names + list(evaluator.descriptor.metric_names)
        click.echo("  ".join(names))
        for point, metrics in archive:
            row = [str(x) for x in space.values(point)]
            row += [f"{m:.6g}" for m in metrics]
            click.echo("  ".join(row))
    sys.exit(0)


@main.command("gen-dataset")
@_with_options
def cmd_gen_dataset(space_path, evaluator_kind, dataset, T, n, b, mu, v_th,
                    S, seed, pool_size, out, force, verbose) -> None:
    """Materialize a CSV dataset of uniformly sampled evaluated points."""
    try:
        space, run_section = _load_space_and_run(space_path, evaluator_kind,
                                                 default_kind="analytic")
        kind = evaluator_kind or run_section.get("evaluator", "analytic")
        if kind == "tabular":
            raise ConfigError("--evaluator: gen-dataset needs a synthetic "
                              "evaluator (analytic or benchmark)")
        evaluator, _, _ = _make_evaluator(kind, space, None)
        n_rows = n if n is not None else run_section.get("n", 2500)
        if n_rows < 1:
            raise ConfigError(f"--n: must be >= 1, got {n_rows}")
        seed_val = seed if seed is not None else run_section.get("seed", 0)
        out = _prepare_out(out, ["dataset.csv"], force)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    try:
        points = sp.sample_uniform(space, n_rows, seed_val)
        ev.write_dataset_csv(space, evaluator, points,
                             os.path.join(out, "dataset.csv"))
    except EvaluationError as exc:
        click.echo(f"evaluation failed: {exc}", err=True)
        sys.exit(2)
    click.echo(f"wrote {n_rows} rows to {os.path.join(out, 'dataset.csv')}")
    sys.exit(0)


@main.command("importance")
@_with_options
def cmd_importance(space_path, evaluator_kind, dataset, T, n, b, mu, v_th,
                   S, seed, pool_size, out, force, verbose) -> None:
    """Score parameter importance and report the pruning it implies."""
    try:
        space, run_section = _load_space_and_run(space_path, evaluator_kind,
                                                 default_kind="analytic")
        kind = evaluator_kind or run_section.get("evaluator", "analytic")
        dataset = dataset or run_section.get("dataset")
        evaluator, pool, _ = _make_evaluator(kind, space, dataset)
        n_trials = n if n is not None else run_section.get("n", 30)
        if n_trials < 2:
            raise ConfigError(f"--n: needs >= 2 trials, got {n_trials}")
        threshold = v_th if v_th is not None else run_section.get(
            "v_th", 0.07)
        if threshold < 0:
            raise ConfigError(f"--v-th: must be >= 0, got {threshold}")
        seed_val = seed if seed is not None else run_section.get("seed", 0)
        out = _prepare_out(out, ["importance.csv", "pruning.json"], force)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    try:
        trial_arg = None
        if pool is not None:
            rng = np.random.default_rng([seed_val, 10])
            idx = rng.choice(len(pool), size=n_trials,
                             replace=n_trials > len(pool))
            trial_arg = [pool[i] for i in idx]
        v, _, _ = imp.icd(space, evaluator, n_trials, seed=[seed_val, 10],
                          trial_points=trial_arg)
    except EvaluationError as exc:
        click.echo(f"evaluation failed: {exc}", err=True)
        sys.exit(2)

    imp.write_importance_csv(space, v, os.path.join(out, "importance.csv"))
    pruned_space, mask = imp.prune(space, v, threshold)
    before = space.cardinality()
    after = pruned_space.cardinality()
    reduction = 100.0 * (1.0 - after / before)
    report = {
        "n_trials": int(n_trials),
        "threshold": float(threshold),
        "fixed_parameters": [space.names[i] for i in np.flatnonzero(mask)],
        "cardinality_before": before,
        "cardinality_after": after,
        "reduction_percent": reduction,
    }
    with open(os.path.join(out, "pruning.json"), "w",
              encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"parameters fixed   {len(report['fixed_parameters'])} "
               f"of {len(space)}")
    click.echo(f"space reduction    {reduction:.2f}%")
    click.echo(f"outputs            {out}")
    sys.exit(0)


if __name__ == "__main__":
    main()
