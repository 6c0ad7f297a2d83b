"""Nelder-Mead and BFGS maximizers with fixed, automatic stopping rules.

Both drivers work on noisy estimators: every call to ``estimate_fn`` or
``gradient_fn`` may charge repetitions to a ledger, and nothing is ever
re-evaluated once stored. The optional ``ledger`` argument is only read, to
stamp cumulative repetition counts on the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import OptimizationError

# stop reasons
PLATEAU = "plateau"
MAX_SIMPLEX_UPDATES = "max-simplex-updates"
GRADIENT_FLOOR = "gradient-floor"
SMALL_IMPROVEMENT = "small-improvement"
MAX_LINE_SEARCHES = "max-line-searches"
STOP_REASONS = (PLATEAU, MAX_SIMPLEX_UPDATES, GRADIENT_FLOOR, SMALL_IMPROVEMENT, MAX_LINE_SEARCHES)

# trace events
VERTEX_UPDATE = "vertex-update"
LINE_SEARCH_START = "line-search-start"
LINE_SEARCH_END = "line-search-end"
STOP = "stop-reason"


@dataclass(frozen=True)
class StoppingConfig:
    nm_alpha: int = 20
    nm_alpha_halved: int = 10
    nm_epsilon_half_threshold: float = 0.0
    nm_max_updates: int = 8000
    bfgs_grad_floor_scale: float = 1e-3
    bfgs_improvement_tol: float = 1e-4
    bfgs_min_directions: int | None = None  # None: twice the depth, i.e. the dimension
    bfgs_max_line_searches: int = 300
    # line search and simplex coefficients
    armijo: float = 1e-4
    contraction: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 30
    nm_reflect: float = 1.0
    nm_expand: float = 2.0
    nm_contract: float = 0.5
    nm_shrink: float = 0.5

    @classmethod
    def for_epsilon(cls, epsilon: float, **overrides) -> "StoppingConfig":
        """Defaults with the simplex alpha-halving threshold set to ``epsilon / 2``."""
        return cls(nm_epsilon_half_threshold=epsilon / 2, **overrides)

    def with_(self, **changes) -> "StoppingConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class TraceEntry:
    eval_index: int
    point: tuple[float, ...]
    value: float
    repetitions: int
    event: str
    reason: str | None = None


@dataclass
class OptimizerTrace:
    entries: list[TraceEntry] = field(default_factory=list)

    def add(self, eval_index, point, value, repetitions, event, reason=None):
        self.entries.append(
            TraceEntry(eval_index, tuple(float(v) for v in point), float(value), int(repetitions), event, reason)
        )

    @property
    def stop_reason(self) -> str | None:
        stops = [e.reason for e in self.entries if e.event == STOP]
        return stops[-1] if stops else None

    def count(self, event: str) -> int:
        return sum(e.event == event for e in self.entries)


class _Counter:
    """Wraps an estimator: counts calls and rejects non-finite results."""

    def __init__(self, fn, name):
        self.fn, self.name, self.calls = fn, name, 0

    def __call__(self, x):
        self.calls += 1
        out = self.fn(np.array(x, dtype=float))
        if not np.all(np.isfinite(out)):
            raise OptimizationError(f"non-finite {self.name} {out!r} at x={np.asarray(x).tolist()}")
        return out


def _reps(ledger):
    return 0 if ledger is None else ledger.total_repetitions


def nelder_mead_maximize(
    estimate_fn: Callable[[np.ndarray], float],
    initial_point,
    stopping: StoppingConfig | None = None,
    ledger=None,
    initial_step: float = 0.25,
):
    """Maximize ``estimate_fn`` with the Nelder-Mead simplex method.

    ``initial_point`` is either a full simplex of shape ``(d + 1, d)`` or a
    single point, in which case the simplex is built from coordinate steps of
    size ``initial_step``. Returns ``(best_point, best_estimate, trace)``.

    Stops when the best vertex has not changed for ``d * alpha`` simplex
    updates (``alpha`` switches to its halved value while the latest
    improvement of the best vertex is below the configured threshold), or after
    the maximum number of updates.
    """
    stopping = stopping or StoppingConfig()
    f = _Counter(estimate_fn, "objective estimate")
    start = np.asarray(initial_point, dtype=float)
    if start.ndim == 1:
        simplex = np.vstack([start, start + initial_step * np.eye(start.size)])
    else:
        simplex = start.copy()
    dim = simplex.shape[1]
    if dim < 1 or simplex.shape != (dim + 1, dim):
        raise ValueError(f"simplex must have shape (d + 1, d), got {simplex.shape}")

    values = np.array([f(v) for v in simplex], dtype=float)
    trace = OptimizerTrace()
    best_val = values.max()
    trace.add(f.calls, simplex[int(values.argmax())], best_val, _reps(ledger), VERTEX_UPDATE)
    since_improvement = 0
    last_increment = math.inf
    updates = 0
    a, g, rho, sigma = stopping.nm_reflect, stopping.nm_expand, stopping.nm_contract, stopping.nm_shrink

    while True:
        halved = last_increment < stopping.nm_epsilon_half_threshold
        alpha = stopping.nm_alpha_halved if halved else stopping.nm_alpha
        if since_improvement >= dim * alpha:
            reason = PLATEAU
            break
        if updates >= stopping.nm_max_updates:
            reason = MAX_SIMPLEX_UPDATES
            break

        order = np.argsort(-values, kind="stable")
        simplex, values = simplex[order], values[order]
        worst = simplex[-1]
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + a * (centroid - worst)
        fr = f(xr)
        if fr > values[0]:
            xe = centroid + g * (centroid - worst)
            fe = f(xe)
            simplex[-1], values[-1] = (xe, fe) if fe > fr else (xr, fr)
        elif fr > values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            if fr > values[-1]:
                xc = centroid + rho * (xr - centroid)
                fc = f(xc)
                accept = fc >= fr
            else:
                xc = centroid + rho * (worst - centroid)
                fc = f(xc)
                accept = fc > values[-1]
            if accept:
                simplex[-1], values[-1] = xc, fc
            else:
                for i in range(1, dim + 1):
                    simplex[i] = simplex[0] + sigma * (simplex[i] - simplex[0])
                    values[i] = f(simplex[i])
        updates += 1

        new_best = values.max()
        if new_best > best_val:
            last_increment = new_best - best_val
            best_val = new_best
            since_improvement = 0
        else:
            since_improvement += 1
        trace.add(f.calls, simplex[int(values.argmax())], best_val, _reps(ledger), VERTEX_UPDATE)

    i = int(values.argmax())
    trace.add(f.calls, simplex[i], values[i], _reps(ledger), STOP, reason)
    return simplex[i].copy(), float(values[i]), trace


def bfgs_maximize(
    estimate_fn: Callable[[np.ndarray], float],
    gradient_fn: Callable[[np.ndarray], np.ndarray],
    initial_point,
    stopping: StoppingConfig | None = None,
    delta_for_floor: float = 0.0,
    ledger=None,
):
    """Maximize with BFGS and a backtracking (Armijo) line search.

    The inverse Hessian starts as the identity. Updates that violate the
    curvature condition are skipped; a non-ascent direction or a failed line
    search resets it to the identity.
    Returns ``(best_point, best_estimate, trace)``.
    """
    stopping = stopping or StoppingConfig()
    f = _Counter(estimate_fn, "objective estimate")
    grad_fn = _Counter(gradient_fn, "gradient estimate")
    x = np.array(initial_point, dtype=float)
    dim = x.size
    min_dirs = dim if stopping.bfgs_min_directions is None else stopping.bfgs_min_directions
    floor = math.sqrt(dim) * max(stopping.bfgs_grad_floor_scale, delta_for_floor**2)

    fx = float(f(x))
    g = np.asarray(grad_fn(x), dtype=float)
    if g.shape != x.shape:
        raise ValueError(f"gradient has shape {g.shape}, expected {x.shape}")
    H = np.eye(dim)
    trace = OptimizerTrace()
    line_searches = 0

    while True:
        if np.linalg.norm(g) < floor:
            reason = GRADIENT_FLOOR
            break
        if line_searches >= stopping.bfgs_max_line_searches:
            reason = MAX_LINE_SEARCHES
            break

        d = H @ g
        slope = float(g @ d)
        if not slope > 0:
            H = np.eye(dim)
            d, slope = g.copy(), float(g @ g)
        trace.add(f.calls, x, fx, _reps(ledger), LINE_SEARCH_START)

        t = stopping.initial_step
        accepted = False
        for _ in range(stopping.max_backtracks):
            xt = x + t * d
            ft = float(f(xt))
            if ft >= fx + stopping.armijo * t * slope:
                accepted = True
                break
            t *= stopping.contraction
        line_searches += 1

        if accepted:
            improvement = ft - fx
            gt = np.asarray(grad_fn(xt), dtype=float)
            s = xt - x
            y = g - gt  # gradient difference of -F
            sy = float(s @ y)
            if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
                rho = 1.0 / sy
                Hy = H @ y
                H = H - rho * (np.outer(s, Hy) + np.outer(Hy, s)) + (rho**2 * (y @ Hy) + rho) * np.outer(s, s)
            x, fx, g = xt, ft, gt
        else:
            improvement = 0.0
            H = np.eye(dim)
        trace.add(f.calls, x, fx, _reps(ledger), LINE_SEARCH_END)

        if line_searches >= min_dirs and improvement < stopping.bfgs_improvement_tol:
            reason = SMALL_IMPROVEMENT
            break

    trace.add(f.calls, x, fx, _reps(ledger), STOP, reason)
    return x, fx, trace


def initial_points(depth: int, run_index: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Shared start point and Nelder-Mead simplex for one optimization run.

    Gammas are uniform in [0, 2pi) and betas uniform in [0, pi). The simplex's
    first vertex is the start point; its other ``2 * depth`` vertices are
    independent draws. Depends only on ``(seed, run_index)``.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run_index,)))
    dim = 2 * depth
    high = np.tile([2 * np.pi, np.pi], depth)
    simplex = rng.uniform(0.0, 1.0, size=(dim + 1, dim)) * high
    return simplex[0].copy(), simplex
