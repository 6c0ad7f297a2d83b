"""Dense state-vector emulation.

Basis index ``b`` stores qubit ``i`` in bit ``i``. A clear bit is the +1
eigenstate of Z (``z_i = +1``), a set bit the -1 eigenstate. Gate functions
return a new :class:`StateVector` and leave their input untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CapacityError
from .maxcut import MaxCutInstance, cut_values

MAX_QUBITS = 25  # 24 register qubits plus one ancilla


@dataclass
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        n = amps.size.bit_length() - 1
        if amps.ndim != 1 or amps.size != 1 << n:
            raise ValueError("amplitude count must be a power of two")
        self.amplitudes = amps

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy())


@dataclass(frozen=True)
class DiagonalCostOperator:
    """Cost observable stored as its diagonal in the computational basis."""

    diag: np.ndarray

    @property
    def num_qubits(self) -> int:
        return self.diag.size.bit_length() - 1

    @classmethod
    def from_instance(cls, instance: MaxCutInstance) -> "DiagonalCostOperator":
        if instance.num_nodes > MAX_QUBITS - 1:
            raise CapacityError(f"at most {MAX_QUBITS - 1} register qubits supported")
        return cls(cut_values(instance).astype(np.float64))


def _check_capacity(num_qubits):
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise CapacityError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")


def _check_qubit(state, qubit):
    if not 0 <= qubit < state.num_qubits:
        raise IndexError(f"qubit {qubit} out of range for {state.num_qubits}-qubit state")


def _check_dims(state, cost):
    if state.amplitudes.size != cost.diag.size:
        raise ValueError(
            f"dimension mismatch: state has {state.num_qubits} qubits, operator {cost.num_qubits}"
        )


def basis_state(num_qubits: int, index: int = 0) -> StateVector:
    _check_capacity(num_qubits)
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps)


def init_plus_state(num_qubits: int) -> StateVector:
    """Uniform superposition |+...+>."""
    if not 1 <= num_qubits <= MAX_QUBITS - 1:
        raise CapacityError(f"num_qubits must be in [1, {MAX_QUBITS - 1}], got {num_qubits}")
    dim = 1 << num_qubits
    return StateVector(np.full(dim, dim**-0.5, dtype=np.complex128))


# In-place kernels on raw arrays; the public gate functions wrap these.

def _pair_view(psi: np.ndarray, qubit: int) -> np.ndarray:
    return psi.reshape(-1, 2, 1 << qubit)


def _rx_inplace(psi, qubit, cos_b, sin_b):
    v = _pair_view(psi, qubit)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = cos_b * a0 - 1j * sin_b * a1
    v[:, 1, :] = cos_b * a1 - 1j * sin_b * a0


def _mixer_inplace(psi, beta, qubits):
    c, s = np.cos(beta), np.sin(beta)
    for q in qubits:
        _rx_inplace(psi, q, c, s)


def _x_inplace(psi, qubit):
    v = _pair_view(psi, qubit)
    v[:, [0, 1], :] = v[:, [1, 0], :]


def _z_inplace(psi, qubit):
    _pair_view(psi, qubit)[:, 1, :] *= -1


def _y_inplace(psi, qubit):
    # Y|0> = i|1>, Y|1> = -i|0>
    v = _pair_view(psi, qubit)
    a0 = v[:, 0, :].copy()
    v[:, 0, :] = -1j * v[:, 1, :]
    v[:, 1, :] = 1j * a0


def _h_inplace(psi, qubit):
    v = _pair_view(psi, qubit)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = (a0 + a1) * 0.5**0.5
    v[:, 1, :] = (a0 - a1) * 0.5**0.5


_PAULI_KERNELS = {"X": _x_inplace, "Y": _y_inplace, "Z": _z_inplace}


def _pauli_inplace(psi, paulis):
    for qubit, axis in paulis:
        try:
            _PAULI_KERNELS[axis.upper()](psi, qubit)
        except KeyError:
            raise ValueError(f"unknown Pauli axis {axis!r}") from None


def apply_cost_phase(state: StateVector, cost: DiagonalCostOperator, gamma: float) -> StateVector:
    """exp(-i gamma C) for a diagonal C."""
    _check_dims(state, cost)
    return StateVector(state.amplitudes * np.exp(-1j * gamma * cost.diag))


def apply_mixer(state: StateVector, beta: float, qubits: Iterable[int] | None = None) -> StateVector:
    """exp(-i beta sum_i X_i) over ``qubits`` (default: every qubit)."""
    out = state.amplitudes.copy()
    qubits = range(state.num_qubits) if qubits is None else list(qubits)
    for q in qubits:
        _check_qubit(state, q)
    _mixer_inplace(out, beta, qubits)
    return StateVector(out)


def _single(kernel):
    def gate(state: StateVector, qubit: int) -> StateVector:
        _check_qubit(state, qubit)
        out = state.amplitudes.copy()
        kernel(out, qubit)
        return StateVector(out)

    return gate


apply_single_qubit_x = _single(_x_inplace)
apply_single_qubit_x.__name__ = "apply_single_qubit_x"
apply_single_qubit_hadamard = _single(_h_inplace)
apply_single_qubit_hadamard.__name__ = "apply_single_qubit_hadamard"


def apply_phase_s(state: StateVector, qubit: int) -> StateVector:
    """S = diag(1, i) on ``qubit``."""
    _check_qubit(state, qubit)
    out = state.amplitudes.copy()
    _pair_view(out, qubit)[:, 1, :] *= 1j
    return StateVector(out)


def apply_pauli_product(state: StateVector, paulis: Sequence[tuple[int, str]], sign: float = 1.0) -> StateVector:
    for qubit, _ in paulis:
        _check_qubit(state, qubit)
    out = state.amplitudes.copy()
    _pauli_inplace(out, paulis)
    if sign != 1.0:
        out *= sign
    return StateVector(out)


def apply_anticontrolled_unitary(
    state: StateVector,
    control_qubit: int,
    unitary_on_register: Callable[[StateVector], StateVector],
) -> StateVector:
    """Apply a register unitary on the branch where ``control_qubit`` is |0>.

    The register is made of every qubit below ``control_qubit``; the control
    must therefore be the most significant qubit.
    """
    _check_qubit(state, control_qubit)
    if control_qubit != state.num_qubits - 1:
        raise ValueError("control qubit must be the most significant qubit")
    half = state.amplitudes.size // 2
    out = state.amplitudes.copy()
    branch = StateVector(out[:half].copy())
    norm_in = np.vdot(branch.amplitudes, branch.amplitudes).real
    result = unitary_on_register(branch).amplitudes
    if result.shape != (half,):
        raise ValueError("register unitary changed the register dimension")
    if not np.isclose(np.vdot(result, result).real, norm_in, rtol=1e-9, atol=1e-12):
        raise ValueError("register operation is not norm preserving")
    out[:half] = result
    return StateVector(out)


def expectation_diagonal(state: StateVector, cost: DiagonalCostOperator) -> float:
    _check_dims(state, cost)
    return float(np.dot(state.probabilities(), cost.diag))


def variance_diagonal(state: StateVector, cost: DiagonalCostOperator) -> float:
    _check_dims(state, cost)
    p = state.probabilities()
    mean = np.dot(p, cost.diag)
    # centred form avoids cancellation for large means
    return float(max(np.dot(p, (cost.diag - mean) ** 2), 0.0))


def expectation_pauli_product(state: StateVector, paulis: Sequence[tuple[int, str]]) -> float:
    """<state| prod paulis |state> for a product of single-qubit Paulis on distinct qubits."""
    qubits = [q for q, _ in paulis]
    if len(set(qubits)) != len(qubits):
        raise ValueError("Pauli product must act on distinct qubits")
    value = np.vdot(state.amplitudes, apply_pauli_product(state, paulis).amplitudes)
    if abs(value.imag) > 1e-10:
        raise ArithmeticError(f"non-real Pauli expectation {value}")
    return float(value.real)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.amplitudes.size != b.amplitudes.size:
        raise ValueError("dimension mismatch")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def sample_counts(state: StateVector, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Histogram of ``shots`` computational-basis measurements."""
    p = state.probabilities()
    return rng.multinomial(shots, p / p.sum())
