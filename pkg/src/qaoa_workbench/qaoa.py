"""QAOA state preparation for MAX-CUT, with the objective and its gradients.

Parameters are handled as a flat array ``(gamma_1, beta_1, ..., gamma_p, beta_p)``.
Gate ``k`` of the circuit is ``exp(-i x_k C)`` for even ``k`` and
``exp(-i x_k B)`` with ``B = sum_i X_i`` for odd ``k``.

Three gradient routes are provided:

* :func:`analytic_gradient` -- reverse sweep over the emulated state (exact,
  not realisable on hardware);
* :func:`circuit_gradient` -- sums ancilla-circuit expectation values term by
  term, the route a quantum device would follow;
* :func:`finite_difference_gradient` -- central differences of any estimator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from . import emulator as em
from .emulator import DiagonalCostOperator, StateVector
from .maxcut import MaxCutInstance

GAMMA, BETA = "gamma", "beta"


@dataclass(frozen=True)
class ParameterVector:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        gammas = tuple(float(g) for g in self.gammas)
        betas = tuple(float(b) for b in self.betas)
        if len(gammas) != len(betas) or not gammas:
            raise ValueError("need the same positive number of gammas and betas")
        if not np.all(np.isfinite(gammas + betas)):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "betas", betas)

    @property
    def depth(self) -> int:
        return len(self.gammas)

    def to_array(self) -> np.ndarray:
        x = np.empty(2 * self.depth)
        x[0::2] = self.gammas
        x[1::2] = self.betas
        return x

    @classmethod
    def from_array(cls, x) -> "ParameterVector":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size == 0 or x.size % 2:
            raise ValueError("flat parameter array must have even, non-zero length")
        return cls(tuple(x[0::2]), tuple(x[1::2]))

    def canonical(self) -> "ParameterVector":
        """Wrap gammas into [0, 2pi) and betas into [0, pi) for reporting."""
        return ParameterVector(
            tuple(np.mod(self.gammas, 2 * np.pi)), tuple(np.mod(self.betas, np.pi))
        )

    def padded(self, extra_layers: int = 1) -> "ParameterVector":
        """Append identity layers (gamma = beta = 0)."""
        zeros = (0.0,) * extra_layers
        return ParameterVector(self.gammas + zeros, self.betas + zeros)


def as_flat(params) -> np.ndarray:
    if isinstance(params, ParameterVector):
        return params.to_array()
    x = np.asarray(params, dtype=float)
    if x.ndim != 1 or x.size == 0 or x.size % 2:
        raise ValueError("flat parameter array must have even, non-zero length")
    return x


@dataclass(frozen=True)
class PauliTerm:
    """Signed product of single-qubit Paulis, e.g. ``-Z_0 Z_3``. Unitary and Hermitian."""

    ops: tuple[tuple[int, str], ...] = ()
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        qubits = [q for q, _ in self.ops]
        if len(set(qubits)) != len(qubits):
            raise ValueError("Pauli term must act on distinct qubits")

    def apply(self, state: StateVector) -> StateVector:
        return em.apply_pauli_product(state, self.ops, self.sign)

    def _apply_inplace(self, psi: np.ndarray) -> None:
        em._pauli_inplace(psi, self.ops)
        if self.sign < 0:
            psi *= -1


@dataclass(frozen=True)
class GeneratorDecomposition:
    """Hermitian operator written as ``constant + sum_mu g_mu P_mu``.

    The constant (identity part) is kept for bookkeeping only; it drops out of
    every gradient. Weights must be non-negative; signs live in the Pauli terms.
    """

    terms: tuple[tuple[float, PauliTerm], ...]
    constant: float = 0.0

    def __post_init__(self):
        if any(w < 0 for w, _ in self.terms):
            raise ValueError("generator weights must be non-negative")

    @property
    def num_terms(self) -> int:
        return len(self.terms)


def cost_generator(instance: MaxCutInstance) -> GeneratorDecomposition:
    """Cut-count observable as ``k_C/2 + sum_edges (1/2)(-Z_a Z_b)``."""
    terms = tuple(
        (0.5, PauliTerm(((a, "Z"), (b, "Z")), sign=-1)) for a, b in instance.edges
    )
    return GeneratorDecomposition(terms, constant=0.5 * instance.num_clauses)


def mixer_generator(num_qubits: int) -> GeneratorDecomposition:
    return GeneratorDecomposition(tuple((1.0, PauliTerm(((i, "X"),))) for i in range(num_qubits)))


@lru_cache(maxsize=128)
def cost_operator(instance: MaxCutInstance) -> DiagonalCostOperator:
    return DiagonalCostOperator.from_instance(instance)


# ---------------------------------------------------------------------------
# state preparation


def _apply_gates(psi, diag, x, start, stop, register_qubits, inverse=False):
    """Apply gates ``start..stop-1`` of the circuit in place (reversed if ``inverse``)."""
    order = range(stop - 1, start - 1, -1) if inverse else range(start, stop)
    sign = -1.0 if inverse else 1.0
    for k in order:
        if k % 2 == 0:
            psi *= np.exp(-1j * sign * x[k] * diag)
        else:
            em._mixer_inplace(psi, sign * x[k], register_qubits)


def _prepared_array(instance, x) -> np.ndarray:
    n = instance.num_nodes
    psi = em.init_plus_state(n).amplitudes
    _apply_gates(psi, cost_operator(instance).diag, x, 0, x.size, range(n))
    return psi


def prepare_state(instance: MaxCutInstance, params) -> StateVector:
    """V(beta_p) U(gamma_p) ... V(beta_1) U(gamma_1) |+...+>."""
    return StateVector(_prepared_array(instance, as_flat(params)))


def objective(instance: MaxCutInstance, params) -> float:
    """Expected number of cut edges in the QAOA state."""
    return em.expectation_diagonal(prepare_state(instance, params), cost_operator(instance))


def objective_and_variance(instance: MaxCutInstance, params) -> tuple[float, float]:
    state = prepare_state(instance, params)
    cost = cost_operator(instance)
    return em.expectation_diagonal(state, cost), em.variance_diagonal(state, cost)


# ---------------------------------------------------------------------------
# emulator-path gradient


def _sum_x(psi, qubits):
    out = np.zeros_like(psi)
    for q in qubits:
        flipped = psi.copy()
        em._x_inplace(flipped, q)
        out += flipped
    return out


def analytic_gradient(instance: MaxCutInstance, params) -> np.ndarray:
    """Exact gradient by one forward and one reverse sweep.

    With ``phi_k`` the state after gate ``k`` and ``lam_k`` the cost-weighted
    final state pulled back to the same point, ``dF/dx_k = 2 Im <lam_k|G_k|phi_k>``.
    """
    x = as_flat(params)
    n = instance.num_nodes
    qubits = range(n)
    diag = cost_operator(instance).diag
    phi = _prepared_array(instance, x)
    lam = diag * phi
    grad = np.empty(x.size)
    for k in range(x.size - 1, -1, -1):
        g_phi = diag * phi if k % 2 == 0 else _sum_x(phi, qubits)
        grad[k] = 2.0 * np.vdot(lam, g_phi).imag
        if k % 2 == 0:
            phase = np.exp(1j * x[k] * diag)
            phi *= phase
            lam *= phase
        else:
            em._mixer_inplace(phi, -x[k], qubits)
            em._mixer_inplace(lam, -x[k], qubits)
    return grad


# ---------------------------------------------------------------------------
# ancilla-circuit gradient


def _gate_index(layer_index, generator_position, depth):
    if not 1 <= layer_index <= depth:
        raise ValueError(f"layer_index must be in [1, {depth}], got {layer_index}")
    if generator_position == GAMMA:
        return 2 * (layer_index - 1)
    if generator_position == BETA:
        return 2 * (layer_index - 1) + 1
    raise ValueError(f"generator_position must be {GAMMA!r} or {BETA!r}")


def _circuit_prefix(instance, x, gate):
    """Register+ancilla state after the ancilla Hadamard and the gates before ``gate``."""
    n = instance.num_nodes
    state = StateVector(np.concatenate([em.init_plus_state(n).amplitudes, np.zeros(1 << n)]))
    state = em.apply_single_qubit_hadamard(state, n)
    psi = state.amplitudes
    _apply_gates(psi, _ancilla_diag(instance), x, 0, gate, range(n))
    return state


@lru_cache(maxsize=128)
def _ancilla_diag(instance):
    d = cost_operator(instance).diag
    return np.concatenate([d, d])


def _circuit_finish(instance, x, gate, prefix: StateVector, term: PauliTerm) -> StateVector:
    n = instance.num_nodes
    state = em.apply_anticontrolled_unitary(prefix, n, term.apply)
    _apply_gates(state.amplitudes, _ancilla_diag(instance), x, gate, x.size, range(n))
    state = em.apply_phase_s(state, n)
    return em.apply_single_qubit_hadamard(state, n)


def build_gradient_circuit_state(
    instance: MaxCutInstance,
    params,
    layer_index: int,
    term: PauliTerm,
    generator_position: str,
) -> StateVector:
    """Output of the gradient circuit on ``N + 1`` qubits (ancilla = qubit ``N``).

    Ancilla |0> -> H; prefix gates; ``term`` applied to the register on the
    ancilla-|0> branch; remaining gates; S and H on the ancilla. Measuring
    ``O (x) Z_ancilla`` then yields ``-Im <g| W P W^dag O |g>`` where ``W`` is
    the suffix from the differentiated gate onwards and ``P`` is ``term``.
    """
    x = as_flat(params)
    for q, _ in term.ops:
        if not 0 <= q < instance.num_nodes:
            raise ValueError("term must act on register qubits only")
    gate = _gate_index(layer_index, generator_position, x.size // 2)
    return _circuit_finish(instance, x, gate, _circuit_prefix(instance, x, gate), term)


def ancilla_expectation(state: StateVector, observable) -> float:
    """<O (x) Z_a> with the ancilla as the top qubit.

    ``observable`` is a :class:`DiagonalCostOperator` on the register or a
    :class:`PauliTerm`.
    """
    n = state.num_qubits - 1
    if isinstance(observable, PauliTerm):
        ops = observable.ops + ((n, "Z"),)
        return observable.sign * em.expectation_pauli_product(state, ops)
    p = state.probabilities()
    half = p.size // 2
    return float(np.dot(p[:half] - p[half:], observable.diag))


def ancilla_variance(state: StateVector, observable) -> float:
    """Variance of the single-shot outcome of ``O (x) Z_a``."""
    mean = ancilla_expectation(state, observable)
    if isinstance(observable, PauliTerm):
        second = 1.0
    else:
        p = state.probabilities()
        half = p.size // 2
        second = float(np.dot(p[:half] + p[half:], observable.diag**2))
    return max(second - mean**2, 0.0)


Generators = Mapping[str, GeneratorDecomposition]


def default_generators(instance: MaxCutInstance) -> dict[str, GeneratorDecomposition]:
    return {GAMMA: cost_generator(instance), BETA: mixer_generator(instance.num_nodes)}


@dataclass
class ComponentTerms:
    """Per-term data for one gradient component measured on ancilla circuits."""

    weights: np.ndarray  # g_mu
    expectations: np.ndarray  # <psi_mu| C (x) Z_a |psi_mu>
    variances: np.ndarray  # single-shot variance of the same observable

    def value(self) -> float:
        return 2.0 * float(np.dot(self.weights, self.expectations))


def gradient_circuit_terms(
    instance: MaxCutInstance, params, generators: Generators | None = None
) -> list[ComponentTerms]:
    """Run every gradient circuit with the cost measured directly on the register."""
    x = as_flat(params)
    generators = default_generators(instance) if generators is None else generators
    cost = cost_operator(instance)
    out = []
    for gate in range(x.size):
        decomposition = generators[GAMMA if gate % 2 == 0 else BETA]
        prefix = _circuit_prefix(instance, x, gate)
        weights, means, variances = [], [], []
        for weight, term in decomposition.terms:
            state = _circuit_finish(instance, x, gate, prefix, term)
            weights.append(weight)
            means.append(ancilla_expectation(state, cost))
            variances.append(ancilla_variance(state, cost))
        out.append(ComponentTerms(np.array(weights), np.array(means), np.array(variances)))
    return out


def circuit_gradient(
    instance: MaxCutInstance,
    params,
    generators: Generators | None = None,
    observable: GeneratorDecomposition | None = None,
) -> np.ndarray:
    """Gradient assembled from ancilla-circuit expectations.

    component = 2 sum_mu sum_nu g_mu c_nu <psi_mu| O_nu (x) Z_a |psi_mu>.
    With ``observable=None`` the cost is measured directly (single nu term);
    otherwise each term of ``observable`` is measured separately.
    """
    if observable is None:
        return np.array([c.value() for c in gradient_circuit_terms(instance, params, generators)])
    x = as_flat(params)
    generators = default_generators(instance) if generators is None else generators
    grad = np.zeros(x.size)
    for gate in range(x.size):
        decomposition = generators[GAMMA if gate % 2 == 0 else BETA]
        prefix = _circuit_prefix(instance, x, gate)
        for g, term in decomposition.terms:
            state = _circuit_finish(instance, x, gate, prefix, term)
            for c, obs in observable.terms:
                grad[gate] += 2.0 * g * c * ancilla_expectation(state, obs)
    return grad


def overlap_target(instance: MaxCutInstance, params, layer_index, term: PauliTerm, generator_position, observable: PauliTerm) -> float:
    """Reference value ``-Im <g| W P W^dag O |g>`` computed without an ancilla."""
    x = as_flat(params)
    n = instance.num_nodes
    gate = _gate_index(layer_index, generator_position, x.size // 2)
    diag = cost_operator(instance).diag
    final = _prepared_array(instance, x)
    # W^dag O |g>, then P, then W
    v = observable.apply(StateVector(final)).amplitudes
    _apply_gates(v, diag, x, gate, x.size, range(n), inverse=True)
    term._apply_inplace(v)
    _apply_gates(v, diag, x, gate, x.size, range(n))
    return -float(np.vdot(final, v).imag)


# ---------------------------------------------------------------------------
# finite differences


def finite_difference_gradient(
    instance: MaxCutInstance,
    params,
    delta: float,
    evaluator: Callable[[np.ndarray], float] | None = None,
) -> np.ndarray:
    """Central differences ``[f(x + delta/2 e_n) - f(x - delta/2 e_n)] / delta``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    x = as_flat(params)
    if evaluator is None:
        evaluator = lambda y: objective(instance, y)  # noqa: E731
    grad = np.empty(x.size)
    for k in range(x.size):
        up, down = x.copy(), x.copy()
        up[k] += delta / 2
        down[k] -= delta / 2
        grad[k] = (evaluator(up) - evaluator(down)) / delta
    return grad


def component_labels(depth: int) -> Sequence[str]:
    return [f"{name}_{n}" for n in range(1, depth + 1) for name in (GAMMA, BETA)]
