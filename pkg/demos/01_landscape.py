# The QAOA objective on the smallest 3-regular graph, K4.
#
# Run with:  python3 demos/01_landscape.py

import numpy as np

from qaoa_workbench import maxcut, qaoa

k4 = maxcut.generate_random_3regular(4, seed=0)  # the only 3-regular graph on 4 nodes
print("edges:", k4.edges)

best, z = maxcut.brute_force_maximum(k4)
print("maximum cut:", best, "with assignment", z)

# at gamma = beta = 0 the state is the uniform superposition; half the edges are cut on average
print("F at zero:", qaoa.objective(k4, [0.0, 0.0]))

# scan one layer over the full parameter box
gammas = np.linspace(0, 2 * np.pi, 120, endpoint=False)
betas = np.linspace(0, np.pi, 60, endpoint=False)
grid = np.array([[qaoa.objective(k4, [g, b]) for g in gammas] for b in betas])
bi, gi = np.unravel_index(grid.argmax(), grid.shape)
print(f"grid maximum {grid.max():.4f} at gamma={gammas[gi]:.3f}, beta={betas[bi]:.3f}")
print(f"ratio to the true maximum: {grid.max() / best:.4f}")

# the gradient at the grid point is small but not zero; the exact reverse sweep
# and the ancilla-circuit estimator agree to round-off
x = np.array([gammas[gi], betas[bi]])
print("analytic gradient:", qaoa.analytic_gradient(k4, x))
print("circuit gradient: ", qaoa.circuit_gradient(k4, x))
print("central diff. 0.1:", qaoa.finite_difference_gradient(k4, x, 0.1))

# appending a layer with zero angles changes nothing
pv = qaoa.ParameterVector.from_array(x)
print("padded objective equal:", qaoa.objective(k4, pv) == qaoa.objective(k4, pv.padded()))

# a coarse picture of the landscape, rows are beta
chars = " .:-=+*#%@"
lo, hi = grid.min(), grid.max()
for row in grid[::6]:
    print("".join(chars[int((v - lo) / (hi - lo) * 9)] for v in row[::2]))
