"""Finite-precision estimates and repetition (shot) accounting.

Estimates are the exact emulator values plus a uniform perturbation whose
half-width is the requested precision. The repetition cost charged for an
estimate is the variance bound ``Var / precision**2``, rounded up, with a floor
of one repetition per estimated quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qaoa
from .maxcut import MaxCutInstance

METHODS = ("nm", "fd", "ag")
OBJECTIVE, FD, AG = "objective", "fd", "ag"


@dataclass(frozen=True)
class PrecisionConfig:
    """Precision targets for one optimization method.

    ``exact=True`` turns every estimate into the noiseless value and charges
    no repetitions (oracle mode for tests).
    """

    epsilon: float = 0.01
    delta: float = 0.1
    epsilon_ag: float = 0.1
    method: str = "nm"
    exact: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not (self.epsilon > 0 and self.delta > 0 and self.epsilon_ag > 0):
            raise ValueError("epsilon, delta and epsilon_ag must be positive")

    @property
    def label(self) -> str:
        if self.method == "nm":
            tail = f"e{self.epsilon:g}"
        elif self.method == "fd":
            tail = f"e{self.epsilon:g}-d{self.delta:g}"
        else:
            tail = f"e{self.epsilon:g}-g{self.epsilon_ag:g}"
        return f"{self.method}-{tail}" + ("-exact" if self.exact else "")


@dataclass
class CostLedger:
    """Running repetition count with a per-kind breakdown."""

    total_repetitions: int = 0
    breakdown: dict = field(default_factory=lambda: {OBJECTIVE: 0, FD: 0, AG: 0})

    def charge(self, kind: str, repetitions: int) -> None:
        repetitions = int(repetitions)
        if repetitions < 0:
            raise ValueError("cannot charge a negative repetition count")
        self.breakdown[kind] = self.breakdown.get(kind, 0) + repetitions
        self.total_repetitions += repetitions

    def snapshot(self) -> dict:
        return {"total_repetitions": self.total_repetitions, "breakdown": dict(self.breakdown)}


def repetitions_for(bound: float) -> int:
    """Round a repetition lower bound up to an integer, minimum 1.

    Values within 1e-9 (relative) of an integer are snapped to it first so that
    floating-point noise in exact variances cannot add a spurious repetition.
    """
    if not math.isfinite(bound):
        raise ValueError(f"non-finite repetition bound {bound}")
    nearest = round(bound)
    if abs(bound - nearest) <= 1e-9 * max(1.0, abs(bound)):
        return max(1, int(nearest))
    return max(1, math.ceil(bound))


def noisy_value(true_value: float, precision: float, rng: np.random.Generator) -> float:
    """``true_value + u`` with ``u ~ Uniform[-precision, precision]``."""
    if precision < 0:
        raise ValueError("precision must be non-negative")
    if precision == 0:
        return float(true_value)
    return float(true_value + rng.uniform(-precision, precision))


def objective_cost_bound(variance: float, epsilon: float) -> float:
    """Pre-rounding repetition count ``Var[C] / epsilon**2``."""
    return variance / epsilon**2


def estimate_objective(
    instance: MaxCutInstance, params, epsilon: float, ledger: CostLedger | None, rng
) -> float:
    """Noisy objective at precision ``epsilon``; ``epsilon == 0`` is the free exact oracle."""
    value, variance = qaoa.objective_and_variance(instance, params)
    if epsilon == 0:
        return value
    if ledger is not None:
        ledger.charge(OBJECTIVE, repetitions_for(objective_cost_bound(variance, epsilon)))
    return noisy_value(value, epsilon, rng)


def fd_precision(epsilon: float, delta: float, true_gradient_component: float) -> float:
    """Adaptive precision for the two finite-difference evaluations of one component."""
    return max(
        delta**3,
        epsilon / 10,
        min(epsilon, delta / math.sqrt(2) * abs(true_gradient_component)),
    )


def estimate_fd_gradient(
    instance: MaxCutInstance, params, config: PrecisionConfig, ledger: CostLedger | None, rng
) -> np.ndarray:
    """Central-difference gradient from noisy objective estimates.

    Component ``n`` costs ``(Var[C]_+ + Var[C]_-) / (2 eps'^2)`` repetitions,
    where the variances are taken at the two shifted points.
    """
    x = qaoa.as_flat(params)
    delta = config.delta
    exact_grad = None if config.exact else qaoa.analytic_gradient(instance, x)
    grad = np.empty(x.size)
    for k in range(x.size):
        up, down = x.copy(), x.copy()
        up[k] += delta / 2
        down[k] -= delta / 2
        f_up, var_up = qaoa.objective_and_variance(instance, up)
        f_down, var_down = qaoa.objective_and_variance(instance, down)
        if config.exact:
            grad[k] = (f_up - f_down) / delta
            continue
        eps_k = fd_precision(config.epsilon, delta, exact_grad[k])
        grad[k] = (noisy_value(f_up, eps_k, rng) - noisy_value(f_down, eps_k, rng)) / delta
        if ledger is not None:
            ledger.charge(FD, repetitions_for((var_up + var_down) / (2 * eps_k**2)))
    return grad


def ag_term_precision(epsilon_ag: float, weight: float, num_terms: int) -> float:
    """Noise half-width on one circuit expectation so that the weighted term
    ``2 g_mu <...>`` carries precision ``epsilon_ag / sqrt(num_terms)``."""
    return epsilon_ag / (2.0 * weight * math.sqrt(num_terms))


def ag_component_cost(epsilon_ag: float, weights, variances) -> float:
    """Pre-rounding bound ``(4 / eps''^2) sum_mu g_mu^2 Var_mu``."""
    weights, variances = np.asarray(weights), np.asarray(variances)
    return 4.0 / epsilon_ag**2 * float(np.dot(weights**2, variances))


def estimate_ag_gradient(
    instance: MaxCutInstance,
    params,
    config: PrecisionConfig,
    ledger: CostLedger | None,
    rng,
    generators: qaoa.Generators | None = None,
) -> np.ndarray:
    """Gradient from noisy ancilla-circuit expectations, cost measured directly.

    Each component is charged ``max(k, ceil(bound))`` repetitions, ``k`` being
    the number of distinct circuits (each must run at least once).
    """
    components = qaoa.gradient_circuit_terms(instance, params, generators)
    grad = np.empty(len(components))
    for i, comp in enumerate(components):
        k = comp.weights.size
        noisy = comp.expectations.copy()
        if not config.exact:
            for j, g in enumerate(comp.weights):
                if g > 0:
                    noisy[j] = noisy_value(noisy[j], ag_term_precision(config.epsilon_ag, g, k), rng)
            if ledger is not None:
                bound = ag_component_cost(config.epsilon_ag, comp.weights, comp.variances)
                ledger.charge(AG, max(k, repetitions_for(bound)))
        grad[i] = 2.0 * float(np.dot(comp.weights, noisy))
    return grad


def allocate_per_term_shots(weights, variances, epsilon: float) -> list[int]:
    """Shots per term so each weighted term has precision ``epsilon / sqrt(k)``."""
    weights, variances = np.asarray(weights, float), np.asarray(variances, float)
    if weights.shape != variances.shape:
        raise ValueError("weights and variances must have the same length")
    k = weights.size
    return [repetitions_for(k * c**2 * v / epsilon**2) for c, v in zip(weights, variances)]


class NoisyOracle:
    """Estimator callbacks for one optimization run.

    Owns nothing but references: the run's ledger and RNG stream are passed in
    so that the caller controls seeding and can read the cost afterwards.
    """

    def __init__(self, instance: MaxCutInstance, config: PrecisionConfig, ledger: CostLedger, rng):
        self.instance = instance
        self.config = config
        self.ledger = ledger
        self.rng = rng

    def objective(self, x) -> float:
        eps = 0.0 if self.config.exact else self.config.epsilon
        return estimate_objective(self.instance, x, eps, self.ledger, self.rng)

    def gradient(self, x) -> np.ndarray:
        if self.config.method == "fd":
            return estimate_fd_gradient(self.instance, x, self.config, self.ledger, self.rng)
        if self.config.method == "ag":
            return estimate_ag_gradient(self.instance, x, self.config, self.ledger, self.rng)
        raise ValueError("Nelder-Mead runs have no gradient oracle")
