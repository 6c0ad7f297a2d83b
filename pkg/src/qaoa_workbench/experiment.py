"""Instances x depths x methods x runs: the statistical comparison protocol.

Every random stream is derived from the master seed through
:class:`numpy.random.SeedSequence` spawn keys, so a run's randomness depends
only on its own coordinates (instance, depth, method, run) and never on which
other runs are in the sweep or the order they execute in.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import qaoa
from .errors import CapacityError, OptimizationError
from .maxcut import MaxCutInstance, brute_force_maximum, generate_random_3regular
from .optimizers import (
    StoppingConfig,
    bfgs_maximize,
    initial_points,
    nelder_mead_maximize,
)
from .shots import CostLedger, NoisyOracle, PrecisionConfig

log = logging.getLogger(__name__)

_INSTANCE_STREAM, _START_STREAM, _NOISE_STREAM = 0, 1, 2

SUMMARY_COLUMNS = (
    "method", "epsilon", "delta", "epsilon_ag", "depth",
    "avg", "stddev", "median", "total_cost", "mean_cost",
)


def _seed64(master_seed: int, *key: int) -> int:
    state = np.random.SeedSequence(master_seed, spawn_key=key).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def instance_seed(master_seed: int, instance_index: int) -> int:
    return _seed64(master_seed, _INSTANCE_STREAM, instance_index)


def start_seed(master_seed: int, instance_index: int, depth: int) -> int:
    """Seed of the start points; shared by all methods for the same instance and depth."""
    return _seed64(master_seed, _START_STREAM, instance_index, depth)


def noise_seed(master_seed: int, instance_index: int, depth: int, run_index: int, method: PrecisionConfig) -> int:
    tag = zlib.crc32(method.label.encode())
    return _seed64(master_seed, _NOISE_STREAM, instance_index, depth, run_index, tag)


def make_instances(num_nodes: int, num_instances: int, master_seed: int) -> list[MaxCutInstance]:
    return [
        generate_random_3regular(num_nodes, instance_seed(master_seed, i), instance_id=i)
        for i in range(num_instances)
    ]


@dataclass
class ExperimentConfig:
    num_nodes: int = 16
    depths: tuple[int, ...] = (7,)
    num_instances: int = 128
    runs_per_instance: int = 16
    methods: tuple[PrecisionConfig, ...] = (
        PrecisionConfig(method="nm"),
        PrecisionConfig(method="fd"),
        PrecisionConfig(method="ag"),
    )
    master_seed: int = 0
    output_dir: str | None = None
    exact: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.num_nodes < 4 or self.num_nodes % 2:
            raise ValueError("num_nodes must be an even integer >= 4")
        if self.runs_per_instance < 1 or self.num_instances < 1:
            raise ValueError("need at least one instance and one run per instance")
        self.depths = tuple(int(p) for p in self.depths)
        if not self.depths or min(self.depths) < 1:
            raise ValueError("depths must be positive")
        methods = []
        for m in self.methods:
            if self.exact and not m.exact:
                m = PrecisionConfig(m.epsilon, m.delta, m.epsilon_ag, m.method, exact=True)
            methods.append(m)
        self.methods = tuple(methods)
        if len({m.label for m in self.methods}) != len(self.methods):
            raise ValueError("duplicate method configurations")


@dataclass
class RunRecord:
    instance_id: int
    depth: int
    method: str
    epsilon: float
    delta: float
    epsilon_ag: float
    run_index: int
    seed: int
    stop_reason: str
    final_ratio: float  # exact F_p of the returned point over the optimum
    best_estimate: float  # the optimizer's own (noisy) value at that point
    noisy_ratio: float  # best_estimate over the optimum, not clamped to 1
    total_repetitions: int
    breakdown: dict
    final_point: list
    trace: list  # condensed: one entry per change of the best point

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        return cls(**json.loads(line))


@dataclass
class InstanceSummary:
    instance_id: int
    depth: int
    method: str
    epsilon: float
    delta: float
    epsilon_ag: float
    best_ratio: float
    total_cost: int
    num_runs: int
    best_run: int


@dataclass
class ExperimentResult:
    records: list[RunRecord]
    summaries: list[InstanceSummary]
    table: list[dict]
    errors: list[dict] = field(default_factory=list)


def compute_ratio(instance: MaxCutInstance, params, max_value: int | None = None) -> float:
    """Exact expected cut of the QAOA state over the maximum cut."""
    if max_value is None:
        max_value, _ = brute_force_maximum(instance)
    return qaoa.objective(instance, params) / max_value


def _condense(trace, instance, max_value):
    """Keep the entries where the best point changes, plus the stop entry."""
    out, last_point = [], None
    entries = trace.entries
    for i, e in enumerate(entries):
        is_stop = i == len(entries) - 1
        if e.point == last_point and not is_stop:
            continue
        last_point = e.point
        out.append({
            "eval_index": e.eval_index,
            "repetitions": e.repetitions,
            "estimate": e.value,
            "ratio": qaoa.objective(instance, np.array(e.point)) / max_value,
            "event": e.reason if is_stop else e.event,
        })
    return out


def run_single(
    instance: MaxCutInstance,
    depth: int,
    method: PrecisionConfig,
    run_index: int,
    master_seed: int,
    max_value: int,
) -> RunRecord:
    """One optimization run with its own ledger and noise stream."""
    _, simplex = initial_points(depth, run_index, start_seed(master_seed, instance.instance_id, depth))
    seed = noise_seed(master_seed, instance.instance_id, depth, run_index, method)
    ledger = CostLedger()
    oracle = NoisyOracle(instance, method, ledger, np.random.default_rng(seed))
    stopping = StoppingConfig.for_epsilon(0.0 if method.exact else method.epsilon)
    if method.method == "nm":
        point, estimate, trace = nelder_mead_maximize(oracle.objective, simplex, stopping, ledger)
    else:
        floor_delta = method.delta if method.method == "fd" else 0.0
        point, estimate, trace = bfgs_maximize(
            oracle.objective, oracle.gradient, simplex[0], stopping, floor_delta, ledger
        )
    canonical = qaoa.ParameterVector.from_array(point).canonical().to_array()
    return RunRecord(
        instance_id=instance.instance_id,
        depth=depth,
        method=method.label,
        epsilon=method.epsilon,
        delta=method.delta,
        epsilon_ag=method.epsilon_ag,
        run_index=run_index,
        seed=seed,
        stop_reason=trace.stop_reason,
        final_ratio=qaoa.objective(instance, point) / max_value,
        best_estimate=estimate,
        noisy_ratio=estimate / max_value,
        total_repetitions=ledger.total_repetitions,
        breakdown=dict(ledger.breakdown),
        final_point=[float(v) for v in canonical],
        trace=_condense(trace, instance, max_value),
    )


def _task(args):
    instance, depth, method, run_index, master_seed, max_value = args
    try:
        return run_single(instance, depth, method, run_index, master_seed, max_value)
    except (CapacityError, OptimizationError) as exc:
        return {
            "instance_id": instance.instance_id, "depth": depth, "method": method.label,
            "run_index": run_index, "error": f"{type(exc).__name__}: {exc}",
        }


def summarize_instances(records: Iterable[RunRecord]) -> list[InstanceSummary]:
    """Best-run ratio and summed cost per (instance, depth, method)."""
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.instance_id, r.depth, r.method), []).append(r)
    out = []
    for key in sorted(groups):
        runs = groups[key]
        best = max(runs, key=lambda r: (r.final_ratio, -r.run_index))
        out.append(InstanceSummary(
            instance_id=key[0], depth=key[1], method=key[2],
            epsilon=best.epsilon, delta=best.delta, epsilon_ag=best.epsilon_ag,
            best_ratio=best.final_ratio,
            total_cost=sum(r.total_repetitions for r in runs),
            num_runs=len(runs), best_run=best.run_index,
        ))
    return out


def summarize(summaries: Iterable[InstanceSummary]) -> list[dict]:
    """Average, population standard deviation and median of the best-run ratio
    over instances, with total and per-instance mean repetition cost."""
    groups: dict[tuple, list[InstanceSummary]] = {}
    for s in summaries:
        groups.setdefault((s.method, s.depth), []).append(s)
    rows = []
    for (method, depth) in sorted(groups):
        group = groups[(method, depth)]
        ratios = np.array([s.best_ratio for s in group])
        costs = np.array([s.total_cost for s in group], dtype=float)
        rows.append({
            "method": method,
            "epsilon": group[0].epsilon,
            "delta": group[0].delta,
            "epsilon_ag": group[0].epsilon_ag,
            "depth": depth,
            "avg": float(ratios.mean()),
            "stddev": float(ratios.std()),
            "median": float(np.median(ratios)),
            "total_cost": int(costs.sum()),
            "mean_cost": float(costs.mean()),
        })
    return rows


def cost_curve(records: Sequence[RunRecord]) -> list[tuple[int, float]]:
    """Best ratio reachable at each per-run repetition budget, merged over runs.

    At budget ``c`` each run contributes the ratio of the point it regarded as
    best after spending ``c``; the curve is the running maximum over runs, so
    different stretches may come from different runs.
    """
    events = []
    for i, r in enumerate(records):
        for e in r.trace:
            events.append((e["repetitions"], i, e["ratio"]))
    events.sort(key=lambda t: (t[0], t[1]))
    current: dict[int, float] = {}
    curve: list[tuple[int, float]] = []
    best = -np.inf
    for k, (reps, run, ratio) in enumerate(events):
        current[run] = ratio
        if k + 1 < len(events) and events[k + 1][0] == reps:
            continue
        best = max(best, max(current.values()))
        if curve and curve[-1][1] == best:
            continue
        if curve and curve[-1][0] == reps:
            curve[-1] = (reps, best)
        else:
            curve.append((reps, best))
    return curve


def emit_cost_curves(records: Iterable[RunRecord], out_dir=None) -> dict[tuple, list]:
    """One curve per (instance, method, depth); written as CSV when ``out_dir`` is given."""
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.instance_id, r.method, r.depth), []).append(r)
    curves = {key: cost_curve(sorted(runs, key=lambda r: r.run_index)) for key, runs in sorted(groups.items())}
    if out_dir is not None:
        d = Path(out_dir) / "curves"
        d.mkdir(parents=True, exist_ok=True)
        for (iid, method, depth), curve in curves.items():
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["cumulative_repetitions", "best_ratio"])
            w.writerows((c, repr(v)) for c, v in curve)
            (d / f"{iid:04d}_{method}_p{depth}.csv").write_text(buf.getvalue())
    return curves


def write_summary_csv(rows: Sequence[dict], path) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    Path(path).write_text(buf.getvalue())


def write_instances(instances: Iterable[MaxCutInstance], out_dir) -> None:
    d = Path(out_dir) / "instances"
    d.mkdir(parents=True, exist_ok=True)
    for inst in instances:
        inst.save(d / f"instance_{inst.instance_id:04d}.json")


def read_runs(path) -> list[RunRecord]:
    with open(path) as fh:
        return [RunRecord.from_json(line) for line in fh if line.strip()]


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the whole sweep and, if ``config.output_dir`` is set, write every output file."""
    instances = make_instances(config.num_nodes, config.num_instances, config.master_seed)
    tasks, errors = [], []
    for inst in instances:
        try:
            max_value, _ = brute_force_maximum(inst)
        except CapacityError as exc:
            errors.append({"instance_id": inst.instance_id, "error": f"CapacityError: {exc}"})
            continue
        for depth in config.depths:
            for method in config.methods:
                for run in range(config.runs_per_instance):
                    tasks.append((inst, depth, method, run, config.master_seed, max_value))
    log.info("running %d optimization runs", len(tasks))

    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (8 * config.workers))))
    else:
        results = [_task(t) for t in tasks]

    records = [r for r in results if isinstance(r, RunRecord)]
    errors += [r for r in results if isinstance(r, dict)]
    records.sort(key=lambda r: (r.instance_id, r.depth, r.method, r.run_index))
    summaries = summarize_instances(records)
    table = summarize(summaries)
    result = ExperimentResult(records, summaries, table, errors)

    if config.output_dir is not None:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_instances(instances, out)
        (out / "runs.jsonl").write_text("".join(r.to_json() + "\n" for r in records))
        write_summary_csv(table, out / "summary.csv")
        emit_cost_curves(records, out)
        if errors:
            (out / "errors.jsonl").write_text("".join(json.dumps(e) + "\n" for e in errors))
    return result
