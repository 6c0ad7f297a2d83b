import csv

import numpy as np
import pytest

from qaoa_workbench import qaoa
from qaoa_workbench.experiment import (
    ExperimentConfig,
    InstanceSummary,
    RunRecord,
    compute_ratio,
    cost_curve,
    emit_cost_curves,
    make_instances,
    noise_seed,
    read_runs,
    run_experiment,
    run_single,
    start_seed,
    summarize,
    summarize_instances,
)
from qaoa_workbench.maxcut import brute_force_maximum
from qaoa_workbench.optimizers import initial_points
from qaoa_workbench.shots import PrecisionConfig

from conftest import K4_P1_OPTIMUM

NM, FD, AG = (PrecisionConfig(0.01, 0.1, 0.1, m) for m in ("nm", "fd", "ag"))


def test_compute_ratio(k4):
    assert compute_ratio(k4, np.zeros(2)) == pytest.approx(0.75)
    assert compute_ratio(k4, [5.791665213072507, 2.8591361795509087]) == pytest.approx(K4_P1_OPTIMUM / 4)
    inst = make_instances(8, 3, 1)[2]
    best, _ = brute_force_maximum(inst)
    x = [0.3, 0.2, 0.5, 0.9]
    assert compute_ratio(inst, x) == compute_ratio(inst, x, best) <= 1.0


def test_seeds_depend_only_on_coordinates():
    assert start_seed(7, 2, 3) == start_seed(7, 2, 3) != start_seed(7, 2, 4)
    seeds = {noise_seed(7, 0, 1, r, m) for r in range(4) for m in (NM, FD, AG)}
    assert len(seeds) == 12
    assert noise_seed(7, 0, 1, 0, FD) != noise_seed(7, 0, 1, 0, PrecisionConfig(0.01, 0.01, 0.1, "fd"))


def test_instances_independent_of_sweep_size():
    assert make_instances(10, 3, 5) == make_instances(10, 5, 5)[:3]


@pytest.mark.parametrize("method", ["nm", "fd", "ag"])
def test_k4_exact_run(k4, method):
    config = PrecisionConfig(0.01, 0.1, 0.1, method, exact=True)
    record = run_single(k4, 1, config, 0, 3, 4)
    assert record.total_repetitions == 0
    assert record.final_ratio <= 1.0
    assert record.final_ratio == pytest.approx(record.noisy_ratio, abs=1e-12)
    assert record.method.endswith("-exact")


def test_noisy_run_record(k4):
    record = run_single(k4, 2, FD, 1, 3, 4)
    assert record.total_repetitions == sum(record.breakdown.values()) > 0
    assert record.breakdown["objective"] > 0 and record.breakdown["fd"] > 0
    reps = [e["repetitions"] for e in record.trace]
    assert reps == sorted(reps) and reps[-1] == record.total_repetitions
    assert record.trace[-1]["event"] == record.stop_reason
    assert RunRecord.from_json(record.to_json()) == record
    # the stored point is wrapped to the parameter box but keeps the exact value
    assert all(0 <= g < 2 * np.pi for g in record.final_point[0::2])
    assert qaoa.objective(k4, record.final_point) / 4 == pytest.approx(record.final_ratio, abs=1e-12)


def test_shared_start_points_across_methods(k4):
    _, simplex = initial_points(2, 1, start_seed(3, 0, 2))
    vertex_ratios = [qaoa.objective(k4, v) / 4 for v in simplex]
    fd = run_single(k4, 2, FD, 1, 3, 4)
    nm = run_single(k4, 2, NM, 1, 3, 4)
    # BFGS starts at the first vertex; the simplex's first best point is one of its vertices
    assert fd.trace[0]["ratio"] == pytest.approx(vertex_ratios[0], abs=1e-12)
    assert min(abs(nm.trace[0]["ratio"] - r) for r in vertex_ratios) < 1e-12


def test_summarize_arithmetic():
    summaries = [
        InstanceSummary(0, 5, "nm-e0.01", 0.01, 0.1, 0.1, 0.9, 10, 2, 0),
        InstanceSummary(1, 5, "nm-e0.01", 0.01, 0.1, 0.1, 1.0, 30, 2, 1),
    ]
    (row,) = summarize(summaries)
    assert row["avg"] == pytest.approx(0.95)
    assert row["stddev"] == pytest.approx(0.05)
    assert row["median"] == pytest.approx(0.95)
    assert row["total_cost"] == 40 and row["mean_cost"] == 20.0


def _record(iid, run, ratio, cost, trace=()):
    return RunRecord(iid, 1, "nm-e0.01", 0.01, 0.1, 0.1, run, 0, "plateau", ratio, ratio, ratio, cost,
                     {"objective": cost}, [0.0, 0.0], list(trace))


def test_summarize_instances_post_selects_best_run():
    records = [_record(0, 0, 0.8, 5), _record(0, 1, 0.9, 7), _record(0, 2, 0.9, 1), _record(1, 0, 0.7, 4)]
    s0, s1 = summarize_instances(records)
    assert (s0.best_ratio, s0.best_run, s0.total_cost, s0.num_runs) == (0.9, 1, 13, 3)
    assert (s1.best_ratio, s1.total_cost) == (0.7, 4)


def test_cost_curve_merges_runs():
    t = lambda reps, ratio: {"eval_index": 0, "repetitions": reps, "estimate": 0.0, "ratio": ratio, "event": "x"}  # noqa: E731
    a = _record(0, 0, 0.8, 100, [t(10, 0.5), t(50, 0.8), t(100, 0.8)])
    b = _record(0, 1, 0.9, 200, [t(20, 0.6), t(30, 0.55), t(200, 0.9)])
    curve = cost_curve([a, b])
    assert curve == [(10, 0.5), (20, 0.6), (50, 0.8), (200, 0.9)]
    xs, ys = zip(*curve)
    assert list(xs) == sorted(set(xs)) and list(ys) == sorted(ys)


@pytest.fixture(scope="module")
def small_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    config = ExperimentConfig(num_nodes=6, depths=(1, 2), num_instances=2, runs_per_instance=2,
                              methods=(NM, FD, AG), master_seed=11, output_dir=str(out))
    return config, run_experiment(config), out


def test_sweep_outputs(small_sweep):
    config, result, out = small_sweep
    assert len(result.records) == 2 * 2 * 3 * 2 and not result.errors
    assert sorted(p.name for p in (out / "instances").iterdir()) == ["instance_0000.json", "instance_0001.json"]
    assert read_runs(out / "runs.jsonl") == result.records
    with open(out / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0])[:9] == ["method", "epsilon", "delta", "epsilon_ag", "depth", "avg", "stddev", "median", "total_cost"]
    assert len(rows) == 6
    curves = sorted(p.name for p in (out / "curves").iterdir())
    assert len(curves) == 2 * 3 * 2 and "0001_ag-e0.01-g0.1_p2.csv" in curves
    for path in (out / "curves").iterdir():
        with open(path) as fh:
            data = list(csv.reader(fh))
        assert data[0] == ["cumulative_repetitions", "best_ratio"]
        costs = [int(c) for c, _ in data[1:]]
        ratios = [float(r) for _, r in data[1:]]
        assert costs == sorted(costs) and ratios == sorted(ratios)
        assert all(0 < r <= 1 for r in ratios)


def test_sweep_is_byte_identical(small_sweep, tmp_path):
    config, _, out = small_sweep
    config2 = ExperimentConfig(**{**config.__dict__, "output_dir": str(tmp_path), "workers": 2})
    run_experiment(config2)
    for name in ("runs.jsonl", "summary.csv"):
        assert (out / name).read_bytes() == (tmp_path / name).read_bytes()


def test_runs_do_not_depend_on_sweep_composition(small_sweep):
    config, result, _ = small_sweep
    solo = ExperimentConfig(num_nodes=6, depths=(2,), num_instances=2, runs_per_instance=1,
                            methods=(AG,), master_seed=11)
    (rec0, rec1) = run_experiment(solo).records
    expected = [r for r in result.records if r.depth == 2 and r.method == AG.label and r.run_index == 0]
    assert [rec0, rec1] == expected


def test_single_run_cost_equals_summary(small_sweep):
    config, result, _ = small_sweep
    one = ExperimentConfig(**{**config.__dict__, "runs_per_instance": 1, "output_dir": None})
    res = run_experiment(one)
    for s in res.summaries:
        (rec,) = [r for r in res.records if (r.instance_id, r.depth, r.method) == (s.instance_id, s.depth, s.method)]
        assert s.total_cost == rec.total_repetitions and s.best_ratio == rec.final_ratio


def test_emit_cost_curves_without_directory(small_sweep):
    _, result, _ = small_sweep
    curves = emit_cost_curves(result.records)
    assert len(curves) == 12


def test_exact_sweep_costs_nothing():
    config = ExperimentConfig(num_nodes=4, depths=(1,), num_instances=1, runs_per_instance=3,
                              methods=(NM, FD, AG), exact=True, master_seed=2)
    result = run_experiment(config)
    assert all(r.total_repetitions == 0 for r in result.records)
    assert all(row["avg"] == pytest.approx(K4_P1_OPTIMUM / 4, abs=1e-3) for row in result.table)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(num_nodes=7)
    with pytest.raises(ValueError):
        ExperimentConfig(depths=(0,))
    with pytest.raises(ValueError):
        ExperimentConfig(methods=(NM, NM))


def test_depth_dominance_with_padded_warm_start():
    # warm-starting depth p+1 from the padded depth-p optimum never loses
    from qaoa_workbench.optimizers import StoppingConfig, bfgs_maximize

    inst = make_instances(8, 1, 4)[0]
    best, _ = brute_force_maximum(inst)
    f = lambda x: qaoa.objective(inst, x)  # noqa: E731
    g = lambda x: qaoa.analytic_gradient(inst, x)  # noqa: E731
    stop = StoppingConfig(bfgs_grad_floor_scale=1e-6)
    x, fx, _ = bfgs_maximize(f, g, initial_points(1, 0, 1)[0], stop)
    ratios = [fx / best]
    for p in (2, 3, 4):
        x, fx, _ = bfgs_maximize(f, g, qaoa.ParameterVector.from_array(x).padded().to_array(), stop)
        ratios.append(fx / best)
    assert all(b >= a - 1e-12 for a, b in zip(ratios, ratios[1:]))
