"""Metric evaluators: pluggable stand-ins for a slow synthesis/simulation flow.

Three kinds are provided.  ``tabular`` answers exactly the rows of a
pre-evaluated CSV dataset and supplies those rows as the exploration pool.
``analytic-soc`` is a cheap closed-form SoC cost model over the full-SoC
space (latency cycles, power mW, area mm2).  ``benchmark`` is a discretized
two-objective test function with a known Pareto front, used for quantitative
acceptance of the whole engine.

All evaluators are deterministic, return finite values, and use the
minimization convention on every axis.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .space import DesignPoint, DesignSpace, ParameterDef, SpaceError

MetricsVector = np.ndarray  # shape (d_y,), float, finite


class EvaluationError(RuntimeError):
    """An evaluator could not produce metrics for one or more points."""


class UnknownPointError(EvaluationError):
    """Tabular lookup miss: the caller should restrict its candidate pool
    to the dataset rows."""


class DatasetError(ValueError):
    """Malformed tabular dataset file."""


@dataclass(frozen=True)
class EvaluatorDescriptor:
    kind: str                      # tabular | analytic-soc | benchmark
    metric_names: tuple[str, ...]
    cost_hint_s: float = 0.0

    def __post_init__(self) -> None:
        if len(set(self.metric_names)) != len(self.metric_names):
            raise ValueError("metric names must be unique")

    @property
    def d_y(self) -> int:
        return len(self.metric_names)


class Evaluator:
    """Base class: maps design points of ``space`` to metrics vectors."""

    space: DesignSpace
    descriptor: EvaluatorDescriptor

    def evaluate(self, point: Sequence[int]) -> MetricsVector:
        raise NotImplementedError

    def evaluate_batch(self, points: Sequence[Sequence[int]]) -> np.ndarray:
        """Pointwise map of :meth:`evaluate`; row i answers point i.

        Per-point failures are aggregated into one error listing indices.
        """
        out = np.empty((len(points), self.descriptor.d_y), dtype=float)
        failures = []
        for i, p in enumerate(points):
            try:
                out[i] = self.evaluate(p)
            except (EvaluationError, SpaceError) as exc:
                failures.append((i, str(exc)))
        if failures:
            detail = "; ".join(f"[{i}] {msg}" for i, msg in failures)
            raise EvaluationError(
                f"{len(failures)} of {len(points)} evaluations failed: "
                f"{detail}")
        return out


# ---------------------------------------------------------------------------
# Tabular datasets

def _literal(value) -> str:
    return str(value)


def load_tabular(space: DesignSpace, path: str,
                 *, cost_hint_s: float = 0.0
                 ) -> tuple["TabularEvaluator", list[DesignPoint]]:
    """Load a pre-evaluated dataset; returns the evaluator and its rows as
    the exploration candidate pool (in file order).

    CSV contract: header row holds every parameter name of ``space``
    followed by the metric names; one design point per row, parameter cells
    holding candidate literals; UTF-8 with '.' decimal separator.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        rows = [(lineno, row) for lineno, row in enumerate(reader, start=2)
                if row]

    names = space.names
    missing = [n for n in names if n not in header]
    if missing:
        raise DatasetError(f"{path}: missing parameter columns {missing}")
    param_cols = [header.index(n) for n in names]
    metric_cols = [i for i in range(len(header)) if i not in set(param_cols)]
    if not metric_cols:
        raise DatasetError(f"{path}: no metric columns after parameters")
    metric_names = tuple(header[i] for i in metric_cols)

    literal_maps = [{_literal(c): k for k, c in enumerate(p.candidates)}
                    for p in space.parameters]

    table: dict[DesignPoint, np.ndarray] = {}
    first_line: dict[DesignPoint, int] = {}
    pool: list[DesignPoint] = []
    for lineno, row in rows:
        if len(row) != len(header):
            raise DatasetError(
                f"{path}:{lineno}: expected {len(header)} cells, "
                f"got {len(row)}")
        point = []
        for j, col in enumerate(param_cols):
            cell = row[col].strip()
            try:
                point.append(literal_maps[j][cell])
            except KeyError:
                raise DatasetError(
                    f"{path}:{lineno}: {names[j]!r}: {cell!r} is not a "
                    f"candidate") from None
        point = tuple(point)
        metrics = np.empty(len(metric_cols), dtype=float)
        for k, col in enumerate(metric_cols):
            cell = row[col].strip()
            try:
                metrics[k] = float(cell)
            except ValueError:
                raise DatasetError(
                    f"{path}:{lineno}: non-numeric metric cell "
                    f"{metric_names[k]!r} = {cell!r}") from None
        if not np.all(np.isfinite(metrics)):
            raise DatasetError(f"{path}:{lineno}: non-finite metric value")
        if point in table:
            if not np.array_equal(table[point], metrics):
                raise DatasetError(
                    f"{path}: rows {first_line[point]} and {lineno} repeat "
                    f"the same design point with conflicting metrics")
            continue
        table[point] = metrics
        first_line[point] = lineno
        pool.append(point)

    evaluator = TabularEvaluator(space, table, metric_names,
                                 cost_hint_s=cost_hint_s)
    return evaluator, pool


class TabularEvaluator(Evaluator):
    """Exact-match lookup over a pre-evaluated dataset; no interpolation."""

    def __init__(self, space: DesignSpace,
                 table: dict[DesignPoint, np.ndarray],
                 metric_names: tuple[str, ...],
                 *, cost_hint_s: float = 0.0) -> None:
        self.space = space
        self._table = {k: np.asarray(v, dtype=float)
                       for k, v in table.items()}
        self.descriptor = EvaluatorDescriptor(
            kind="tabular", metric_names=metric_names,
            cost_hint_s=cost_hint_s)

    def evaluate(self, point: Sequence[int]) -> MetricsVector:
        pt = self.space.validate(point)
        try:
            return self._table[pt].copy()
        except KeyError:
            raise UnknownPointError(
                f"design point {self.space.values(pt)} is not in the "
                f"dataset; restrict the candidate pool to dataset rows"
            ) from None

    @property
    def points(self) -> list[DesignPoint]:
        return list(self._table.keys())


# ---------------------------------------------------------------------------
# Analytic SoC cost model
#
# A deliberately simple, fixed-constant model whose only jobs are to be
# deterministic, cheap, and conflict-bearing.  It makes no fidelity claim
# against any real process technology.
#
#   latency = compute + memory stalls + issue overhead, where compute is
#             workload MACs over effective PEs, stalls are off-chip traffic
#             (shrunk by on-chip capacity) over DMA/L2 bandwidth, and issue
#             overhead shrinks with queue/ROB depth and TLB reach;
#   area    = host core + PE array (scales with bit widths and dataflow
#             support) + SRAMs + controller + DMA/TLB;
#   power   = host + leakage proportional to area + PE switching power.

_WORKLOAD_MACS = 2.0e8          # MACs per inference of the modeled network
_WEIGHT_UNITS = 4096.0          # weight traffic scale, data units
_ACT_UNITS = 2048.0             # activation/partial-sum traffic scale
_SP_REUSE = 2048.0              # scratchpad size giving 2x weight refetch
_ACC_REUSE = 512.0              # accumulator size giving 2x result refetch
_ISSUE_UNITS = 2000.0           # baseline control/issue cycles

_UTILIZATION = {"WS": 0.80, "OS": 0.72, "BOTH": 0.88}
_DATAFLOW_AREA = {"WS": 1.00, "OS": 1.05, "BOTH": 1.20}
_HOST_SLOWDOWN = {"c1": 1.00, "c2": 1.18, "c3": 1.35}
_HOST_AREA_MM2 = {"c1": 9.5, "c2": 6.0, "c3": 3.2}
_HOST_POWER_MW = {"c1": 420.0, "c2": 260.0, "c3": 150.0}

_PE_AREA_MM2 = 2.2e-4           # one 8-bit weight-stationary PE
_SP_AREA_MM2 = 1.6e-4           # per scratchpad unit
_ACC_AREA_MM2 = 2.5e-4          # per accumulator unit (wider words)
_L2_AREA_MM2 = 3.5e-3           # per L2 capacity unit per bank
_CTRL_AREA_MM2 = 2.0e-3         # per queue/ROB entry
_IO_AREA_MM2 = 3.0e-3           # per DMA bus/byte-width step
_LEAKAGE_MW_PER_MM2 = 0.9
_PE_POWER_MW = 1.5e-3           # switching power per busy 8-bit PE

_REQUIRED_PARAMS = (
    "HostCore", "L2Bank", "L2Way", "L2Capa", "Tilerow/col", "Meshrow/col",
    "Dataflow", "InputType", "AccType", "OutType", "SpBank", "SpCapa",
    "AccBank", "AccCapa", "LdQueue", "StQueue", "ExQueue", "LdRes",
    "StRes", "ExRes", "MemReq", "DMABus", "DMABytes", "TLBSize",
)

ANALYTIC_METRICS = ("latency_cycles", "power_mw", "area_mm2")


class AnalyticSocEvaluator(Evaluator):
    """Closed-form latency/power/area model over the full-SoC space."""

    def __init__(self, space: DesignSpace, *, cost_hint_s: float = 0.0) -> None:
        missing = [n for n in _REQUIRED_PARAMS if n not in space.names]
        if missing:
            raise SpaceError(
                f"analytic-soc evaluator needs parameters {missing}")
        self.space = space
        self.descriptor = EvaluatorDescriptor(
            kind="analytic-soc", metric_names=ANALYTIC_METRICS,
            cost_hint_s=cost_hint_s)

    def evaluate(self, point: Sequence[int]) -> MetricsVector:
        v = dict(zip(self.space.names, self.space.values(point)))
        log2 = math.log2

        dim = v["Tilerow/col"] * v["Meshrow/col"]
        pes = float(dim * dim)
        util = _UTILIZATION[v["Dataflow"]]
        host = v["HostCore"]
        bits = (v["InputType"] + 0.5 * v["AccType"] + 0.25 * v["OutType"])

        compute = _WORKLOAD_MACS / (pes * util)

        bandwidth = ((v["DMABus"] / 32.0)
                     * (1.0 + 0.25 * log2(v["DMABytes"] / 32.0))
                     * (1.0 + 0.10 * log2(v["MemReq"] / 16.0))
                     * (1.0 + 0.05 * log2(v["L2Bank"]))
                     * (1.0 + 0.05 * log2(v["L2Way"] / 4.0))
                     * (1.0 + 0.15 * log2(v["L2Capa"] / 128.0)))
        sp_units = v["SpBank"] * v["SpCapa"]
        acc_units = v["AccBank"] * v["AccCapa"]
        traffic = ((v["InputType"] / 8.0) * _WEIGHT_UNITS
                   * (1.0 + _SP_REUSE / sp_units)
                   + (v["AccType"] / 8.0) * _ACT_UNITS
                   * (1.0 + _ACC_REUSE / acc_units))
        stall = traffic / bandwidth

        issue = (_ISSUE_UNITS * _HOST_SLOWDOWN[host]
                 * (1.0
                    + 4.0 / v["LdQueue"] + 4.0 / v["StQueue"]
                    + 4.0 / v["ExQueue"]
                    + 2.0 / v["LdRes"] + 2.0 / v["StRes"] + 2.0 / v["ExRes"]
                    + 8.0 / v["TLBSize"]))

        latency = compute + stall + issue

        ctrl_entries = (v["LdQueue"] + v["StQueue"] + v["ExQueue"]
                        + v["LdRes"] + v["StRes"] + v["ExRes"])
        area = (_HOST_AREA_MM2[host]
                + _PE_AREA_MM2 * pes * (bits / 14.0)
                * _DATAFLOW_AREA[v["Dataflow"]]
                + _SP_AREA_MM2 * sp_units
                + _ACC_AREA_MM2 * acc_units
                + _L2_AREA_MM2 * v["L2Bank"] * (v["L2Capa"] / 128.0) * 16.0
                + 0.02 * v["L2Way"]
                + _CTRL_AREA_MM2 * ctrl_entries
                + _IO_AREA_MM2 * (v["DMABus"] + v["DMABytes"]) / 32.0
                + 0.01 * v["TLBSize"]
                + 0.002 * v["MemReq"])

        power = (_HOST_POWER_MW[host]
                 + _LEAKAGE_MW_PER_MM2 * area
                 + _PE_POWER_MW * pes * util * (bits / 14.0))

        return np.array([latency, power, area], dtype=float)


# ---------------------------------------------------------------------------
# Discretized two-objective benchmark with known Pareto front

def make_benchmark_space(n_dims: int = 6, n_levels: int = 10,
                         *, seed: int = 0) -> DesignSpace:
    """Grid space for the benchmark function: ``n_dims`` parameters, each
    with ``n_levels`` evenly spaced candidates in [0, 1]."""
    if n_dims < 1 or n_levels < 2:
        raise SpaceError("benchmark space needs n_dims >= 1, n_levels >= 2")
    levels = tuple(float(x) for x in np.linspace(0.0, 1.0, n_levels))
    params = tuple(
        ParameterDef(name=f"x{i + 1}", group="benchmark", candidates=levels)
        for i in range(n_dims))
    return DesignSpace(parameters=params, seed=seed)


class BenchmarkEvaluator(Evaluator):
    """Two-objective convex-front test function on a numeric grid space.

    f1 = x1 and f2 = g * (1 - sqrt(f1 / g)) with g = 1 + 9 * mean(x2..xd);
    the true front is achieved at x2 = ... = xd = 0.
    """

    def __init__(self, space: DesignSpace, *, cost_hint_s: float = 0.0) -> None:
        for p in space.parameters:
            levels = np.asarray(p.levels, dtype=float)
            if levels.min() < 0.0 or levels.max() > 1.0:
                raise SpaceError(
                    f"benchmark evaluator needs candidates in [0, 1]; "
                    f"parameter {p.name!r} violates this")
        self.space = space
        self.descriptor = EvaluatorDescriptor(
            kind="benchmark", metric_names=("f1", "f2"),
            cost_hint_s=cost_hint_s)

    def evaluate(self, point: Sequence[int]) -> MetricsVector:
        x = np.array([float(val) for val in self.space.values(point)])
        f1 = x[0]
        g = 1.0 + 9.0 * float(np.mean(x[1:])) if x.size > 1 else 1.0
        f2 = g * (1.0 - math.sqrt(f1 / g))
        return np.array([f1, f2], dtype=float)

    def reference_front(self) -> np.ndarray:
        """Analytic Pareto front of the discretized space, ascending in f1."""
        levels = np.sort(np.asarray(self.space.parameters[0].levels, float))
        return np.column_stack([levels, 1.0 - np.sqrt(levels)])


# ---------------------------------------------------------------------------
# Dataset generation

def write_dataset_csv(space: DesignSpace, evaluator: Evaluator,
                      points: Sequence[DesignPoint], path: str) -> None:
    """Materialize (point, metrics) rows in the tabular CSV contract."""
    metrics = evaluator.evaluate_batch(points)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(space.names + list(evaluator.descriptor.metric_names))
        for pt, row in zip(points, metrics):
            writer.writerow([_literal(v) for v in space.values(pt)]
                            + [repr(float(m)) for m in row])
