"""Acceptance checks. Each test prints one PASS/FAIL line, collected again in
the terminal summary. The desk-scale statistical comparison is marked slow
(about half an hour on one core); deselect it with ``-m "not slow"``."""

import numpy as np
import pytest

from qaoa_workbench import qaoa
from qaoa_workbench.experiment import ExperimentConfig, run_experiment, run_single
from qaoa_workbench.maxcut import generate_random_3regular
from qaoa_workbench.optimizers import (
    GRADIENT_FLOOR,
    LINE_SEARCH_START,
    PLATEAU,
    SMALL_IMPROVEMENT,
    VERTEX_UPDATE,
    StoppingConfig,
    bfgs_maximize,
    nelder_mead_maximize,
)
from qaoa_workbench.shots import CostLedger, PrecisionConfig, estimate_objective, objective_cost_bound

from conftest import K4_EDGES, K4_P1_OPTIMUM, dense_cost_diag, dense_grid_optimum, report


def gradient_suite():
    """20 random N=8 instance/parameter draws with p cycling through 1, 2, 3."""
    rng = np.random.default_rng(1)
    out = []
    for i in range(20):
        p = 1 + i % 3
        inst = generate_random_3regular(8, int(rng.integers(2**32)), instance_id=i)
        x = rng.uniform(0, 1, 2 * p) * np.tile([2 * np.pi, np.pi], p)
        out.append((inst, x))
    return out


def test_gradient_correctness():
    worst = max(
        np.abs(qaoa.analytic_gradient(inst, x) - qaoa.finite_difference_gradient(inst, x, 1e-5)).max()
        for inst, x in gradient_suite()
    )
    assert report(1, worst < 1e-5, f"analytic vs central differences, worst |diff| = {worst:.2e} (< 1e-05)")


def test_circuit_identity():
    rng = np.random.default_rng(2)
    worst = 0.0
    for trial in range(50):
        n = int(rng.choice([4, 6]))
        p = int(rng.integers(1, 4))
        inst = generate_random_3regular(n, trial)
        x = rng.uniform(-np.pi, np.pi, 2 * p)
        layer = int(rng.integers(1, p + 1))
        if rng.random() < 0.5:
            pos, terms = qaoa.GAMMA, qaoa.cost_generator(inst).terms
        else:
            pos, terms = qaoa.BETA, qaoa.mixer_generator(n).terms
        mu = terms[int(rng.integers(len(terms)))][1]
        nu = qaoa.cost_generator(inst).terms[int(rng.integers(len(inst.edges)))][1]
        state = qaoa.build_gradient_circuit_state(inst, x, layer, mu, pos)
        measured = qaoa.ancilla_expectation(state, nu)
        worst = max(worst, abs(measured - qaoa.overlap_target(inst, x, layer, mu, pos, nu)))
    assert report(2, worst < 1e-10, f"ancilla circuit identity on 50 draws, worst |diff| = {worst:.2e} (< 1e-10)")


def test_gradient_path_equivalence():
    worst = max(
        np.abs(qaoa.circuit_gradient(inst, x) - qaoa.analytic_gradient(inst, x)).max()
        for inst, x in gradient_suite()
    )
    assert report(3, worst < 1e-9, f"circuit vs analytic gradient, worst |diff| = {worst:.2e} (< 1e-09)")


def test_cost_formulas():
    inst = generate_random_3regular(16, 3)
    diag = dense_cost_diag(inst.edges, 16)
    var = float((diag**2).mean() - diag.mean() ** 2)  # exhaustive sum over the uniform distribution
    ledger = CostLedger()
    estimate_objective(inst, np.zeros(2), 0.1, ledger, np.random.default_rng(0))
    ratio = objective_cost_bound(var, 0.05) / objective_cost_bound(var, 0.1)
    ok = ledger.total_repetitions == 600 and var == 6.0 and ratio == 4.0
    assert report(4, ok, f"|s>, N=16, eps=0.1: {ledger.total_repetitions} repetitions (600), Var={var}, eps/2 factor {ratio}")


def test_zero_gradient_point():
    worst, stops = 0.0, []
    for n, p in [(4, 1), (6, 2), (8, 3), (10, 2)]:
        inst = generate_random_3regular(n, n)
        x0 = np.zeros(2 * p)
        for grad in (qaoa.analytic_gradient, qaoa.circuit_gradient):
            worst = max(worst, np.abs(grad(inst, x0)).max())
        _, _, trace = bfgs_maximize(lambda x: qaoa.objective(inst, x), lambda x: qaoa.analytic_gradient(inst, x), x0)
        stops.append(trace.stop_reason == GRADIENT_FLOOR and trace.count(LINE_SEARCH_START) == 0)
    ok = worst < 1e-12 and all(stops)
    assert report(5, ok, f"max |grad| at zero = {worst:.1e}; immediate gradient-floor stops {sum(stops)}/{len(stops)}")


def test_small_instance_optimality(k4):
    _, oracle, _ = dense_grid_optimum(K4_EDGES, 4)
    assert abs(oracle - K4_P1_OPTIMUM) < 1e-9
    hits = {}
    for method in ("nm", "fd", "ag"):
        config = PrecisionConfig(method=method, exact=True)
        values = [run_single(k4, 1, config, run, 2017, 4).final_ratio * 4 for run in range(20)]
        hits[method] = sum(abs(v - oracle) < 1e-3 for v in values)
    ok = all(h >= 18 for h in hits.values())
    detail = ", ".join(f"{m} {h}/20" for m, h in hits.items())
    assert report(6, ok, f"K4 p=1 exact mode within 1e-3 of grid optimum {oracle:.6f}: {detail} (>= 18/20)")


@pytest.mark.slow
def test_desk_scale_comparison(tmp_path):
    config = ExperimentConfig(
        num_nodes=10, depths=(5,), num_instances=20, runs_per_instance=8,
        methods=tuple(PrecisionConfig(0.01, 0.1, 0.1, m) for m in ("nm", "fd", "ag")),
        master_seed=2017, output_dir=str(tmp_path),
    )
    result = run_experiment(config)
    rows = {row["method"].split("-")[0]: row for row in result.table}
    gap = rows["fd"]["avg"] - rows["nm"]["avg"]
    costs = [rows[m]["total_cost"] for m in ("nm", "fd", "ag")]
    ok = not result.errors and gap >= 0.005 and costs[0] < costs[1] < costs[2]
    detail = (
        f"N=10 p=5: avg nm {rows['nm']['avg']:.4f}, fd {rows['fd']['avg']:.4f}, ag {rows['ag']['avg']:.4f} "
        f"(fd - nm = {gap:+.4f}, need >= 0.005); total cost nm {costs[0]:.3g}, fd {costs[1]:.3g}, ag {costs[2]:.3g}"
    )
    assert report(7, ok, detail)


def test_depth_padding_invariance():
    rng = np.random.default_rng(8)
    worst = 0.0
    for i in range(20):
        p = int(rng.integers(1, 5))
        inst = generate_random_3regular(int(rng.choice([4, 6, 8, 10])), i)
        pv = qaoa.ParameterVector.from_array(rng.uniform(-np.pi, np.pi, 2 * p))
        worst = max(worst, abs(qaoa.objective(inst, pv.padded()) - qaoa.objective(inst, pv)))
    assert report(8, worst < 1e-12, f"F with a zero layer appended vs F, worst |diff| = {worst:.1e} (< 1e-12)")


def test_determinism(tmp_path):
    def sweep(out):
        config = ExperimentConfig(
            num_nodes=8, depths=(1, 2), num_instances=2, runs_per_instance=2,
            methods=tuple(PrecisionConfig(0.01, 0.1, 0.1, m) for m in ("nm", "fd", "ag")),
            master_seed=99, output_dir=str(out),
        )
        run_experiment(config)
        return [(out / name).read_bytes() for name in ("runs.jsonl", "summary.csv")]

    ok = sweep(tmp_path / "a") == sweep(tmp_path / "b")
    assert report(9, ok, "two sweeps with the same master seed give byte-identical runs.jsonl and summary.csv")


def test_stopping_rules():
    details, ok = [], True
    for p in (1, 2, 3):
        dim = 2 * p
        _, _, trace = nelder_mead_maximize(lambda x: 1.0, np.zeros(dim), StoppingConfig())
        updates = trace.count(VERTEX_UPDATE) - 1  # first entry records the initial simplex
        ok &= trace.stop_reason == PLATEAU and updates == dim * 20
        _, _, trace = bfgs_maximize(lambda x: 1.0, lambda x: np.ones(dim), np.zeros(dim))
        searches = trace.count(LINE_SEARCH_START)
        ok &= trace.stop_reason == SMALL_IMPROVEMENT and searches == dim
        details.append(f"p={p}: nm {updates} updates, bfgs {searches} line searches")
    assert report(10, ok, "constant objective: " + "; ".join(details))
