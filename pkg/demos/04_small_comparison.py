# A small version of the noisy optimizer comparison: Nelder-Mead against BFGS
# with central-difference and with circuit gradients, all under shot noise.
#
# Takes about a minute. The output directory holds the same files the CLI writes.

import tempfile
from pathlib import Path

from qaoa_workbench.experiment import ExperimentConfig, run_experiment
from qaoa_workbench.shots import PrecisionConfig

out = Path(tempfile.mkdtemp(prefix="qaoa-demo-"))
config = ExperimentConfig(
    num_nodes=8,
    depths=(3,),
    num_instances=4,
    runs_per_instance=4,
    methods=tuple(PrecisionConfig(0.01, 0.1, 0.1, m) for m in ("nm", "fd", "ag")),
    master_seed=7,
    output_dir=str(out),
)
result = run_experiment(config)

print(f"{'method':>14} {'avg ratio':>10} {'median':>8} {'total shots':>12}")
for row in result.table:
    print(f"{row['method']:>14} {row['avg']:>10.4f} {row['median']:>8.4f} {row['total_cost']:>12.3g}")

# how each run stopped
reasons = {}
for r in result.records:
    reasons.setdefault(r.method, []).append(r.stop_reason)
for method, rs in reasons.items():
    print(method, {k: rs.count(k) for k in sorted(set(rs))})

# best ratio against cumulative repetitions for instance 0
for path in sorted((out / "curves").glob("0000_*")):
    lines = path.read_text().splitlines()[1:]
    print(path.name, "->", lines[-1])
print("outputs in", out)
