# Gradient components from the one-ancilla circuit, term by term.
#
# Each parameter's gate is exp(-i x G) with G a weighted sum of Pauli strings.
# For every string the circuit prepares a state on register + ancilla, and
# measuring C (x) Z_a gives one term of the derivative.

import numpy as np

from qaoa_workbench import maxcut, qaoa

inst = maxcut.generate_random_3regular(8, seed=3)
rng = np.random.default_rng(0)
x = rng.uniform(0, 1, 4) * [2 * np.pi, np.pi, 2 * np.pi, np.pi]  # depth 2
cost = qaoa.cost_operator(inst)

print("layer 1 beta: generator is the sum of X_i, one circuit per qubit")
total = 0.0
for weight, term in qaoa.mixer_generator(8).terms:
    state = qaoa.build_gradient_circuit_state(inst, x, 1, term, qaoa.BETA)
    value = qaoa.ancilla_expectation(state, cost)
    total += 2 * weight * value
    print(f"  {term.ops}  <C Z_a> = {value:+.5f}  ({state.num_qubits} qubits with the ancilla)")
print(f"sum 2 g <C Z_a> = {total:+.8f}")
print(f"analytic        = {qaoa.analytic_gradient(inst, x)[1]:+.8f}")

# the same numbers with their sampling variances, which drive the shot cost
comps = qaoa.gradient_circuit_terms(inst, x)
for k, comp in enumerate(comps):
    print(f"component {k}: {comp.weights.size} terms, value {comp.value():+.5f}, "
          f"largest term variance {comp.variances.max():.3f}")

# splitting the observable into its own Pauli strings gives the same gradient
termwise = qaoa.circuit_gradient(inst, x, observable=qaoa.cost_generator(inst))
print("termwise vs analytic, max diff:", np.abs(termwise - qaoa.analytic_gradient(inst, x)).max())
