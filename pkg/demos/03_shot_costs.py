# What estimates cost in repetitions (shots) of the circuit.

import numpy as np

from qaoa_workbench import maxcut, qaoa, shots

inst = maxcut.generate_random_3regular(16, seed=1)

# on the uniform superposition Var[C] = 3N/8, so precision 0.1 needs 6 / 0.01 = 600 shots
ledger = shots.CostLedger()
value = shots.estimate_objective(inst, np.zeros(2), 0.1, ledger, np.random.default_rng(0))
print(f"estimate {value:.4f} (exact {qaoa.objective(inst, np.zeros(2))}), cost {ledger.total_repetitions}")

# halving the precision target quadruples the cost
for eps in (0.1, 0.05, 0.025, 0.01):
    print(f"  eps={eps:<6} repetitions {shots.repetitions_for(shots.objective_cost_bound(6.0, eps))}")

# one full gradient, central differences versus the ancilla circuits,
# at the same objective precision on a typical point of a depth-3 run
inst = maxcut.generate_random_3regular(10, seed=4)
rng = np.random.default_rng(2)
x = rng.uniform(0, 1, 6) * np.tile([2 * np.pi, np.pi], 3)
for method in ("fd", "ag"):
    config = shots.PrecisionConfig(0.01, 0.1, 0.1, method)
    ledger = shots.CostLedger()
    oracle = shots.NoisyOracle(inst, config, ledger, np.random.default_rng(3))
    g = oracle.gradient(x)
    err = np.abs(g - qaoa.analytic_gradient(inst, x)).max()
    print(f"{config.label:>14}: {ledger.total_repetitions:>9} repetitions, max error {err:.3f}")

# the central-difference precision adapts to the size of each component
for g in (0.0, 0.01, 0.1, 1.0):
    print(f"  |dF/dx|={g:<5} -> eps' = {shots.fd_precision(0.01, 0.1, g):.5f}")
