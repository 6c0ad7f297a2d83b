"""Random 3-regular MAX-CUT instances and their classical objective.

Assignments are arrays over {-1, +1}. When an assignment is encoded as an
integer, bit ``i`` holds node ``i`` and a set bit means ``z_i = -1``; the state
emulator uses the same convention for basis indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CapacityError

DEGREE = 3
MAX_BRUTE_FORCE_NODES = 30
_MAX_PAIRING_ATTEMPTS = 100_000
_ENUM_CHUNK = 1 << 20


@dataclass(frozen=True)
class MaxCutInstance:
    """Undirected 3-regular graph. Edges are stored as sorted ``(i, j)`` with ``i < j``."""

    num_nodes: int
    edges: tuple[tuple[int, int], ...]
    instance_id: int = 0
    seed: int = 0

    def __post_init__(self):
        edges = tuple(sorted((min(a, b), max(a, b)) for a, b in self.edges))
        object.__setattr__(self, "edges", edges)
        _validate(self.num_nodes, edges)

    @property
    def num_clauses(self) -> int:
        return len(self.edges)

    def edge_array(self) -> np.ndarray:
        return np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    def to_dict(self) -> dict:
        return {
            "num_nodes": self.num_nodes,
            "edges": [list(e) for e in self.edges],
            "instance_id": self.instance_id,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MaxCutInstance":
        return cls(
            num_nodes=int(data["num_nodes"]),
            edges=tuple((int(a), int(b)) for a, b in data["edges"]),
            instance_id=int(data.get("instance_id", 0)),
            seed=int(data.get("seed", 0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "MaxCutInstance":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _validate(num_nodes, edges):
    if num_nodes < 4 or num_nodes % 2:
        raise ValueError(f"num_nodes must be an even integer >= 4, got {num_nodes}")
    if len(set(edges)) != len(edges):
        raise ValueError("duplicate edges")
    degree = np.zeros(num_nodes, dtype=int)
    for a, b in edges:
        if a == b:
            raise ValueError(f"self-loop on node {a}")
        if not (0 <= a < num_nodes and 0 <= b < num_nodes):
            raise ValueError(f"edge ({a}, {b}) out of range")
        degree[a] += 1
        degree[b] += 1
    if np.any(degree != DEGREE):
        raise ValueError(f"graph is not 3-regular, degrees={degree.tolist()}")


def generate_random_3regular(num_nodes: int, seed: int, instance_id: int = 0) -> MaxCutInstance:
    """Sample a simple 3-regular graph with the configuration (pairing) model.

    Three stubs per node are paired by a uniform random perfect matching; any
    matching with a self-loop or a repeated edge is discarded as a whole.
    Disconnected graphs are accepted.
    """
    if num_nodes < 4 or num_nodes % 2:
        raise ValueError(f"num_nodes must be an even integer >= 4, got {num_nodes}")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(num_nodes), DEGREE)
    for _ in range(_MAX_PAIRING_ATTEMPTS):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        pairs.sort(axis=1)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        edges = {(int(a), int(b)) for a, b in pairs}
        if len(edges) != len(pairs):
            continue
        return MaxCutInstance(num_nodes, tuple(sorted(edges)), instance_id, seed)
    raise RuntimeError("configuration model failed to produce a simple graph")


def _as_assignment(instance, z) -> np.ndarray:
    z = np.asarray(z)
    if z.shape != (instance.num_nodes,):
        raise ValueError(f"assignment has shape {z.shape}, expected ({instance.num_nodes},)")
    if not np.all((z == 1) | (z == -1)):
        raise ValueError("assignment entries must be -1 or +1")
    return z.astype(np.int64)


def classical_objective(instance: MaxCutInstance, z) -> int:
    """Number of cut edges, sum over edges of (1 - z_i z_j) / 2."""
    z = _as_assignment(instance, z)
    e = instance.edge_array()
    return int(np.sum(z[e[:, 0]] != z[e[:, 1]]))


def assignment_from_index(index: int, num_nodes: int) -> np.ndarray:
    bits = (int(index) >> np.arange(num_nodes)) & 1
    return (1 - 2 * bits).astype(np.int64)


def assignment_to_index(z) -> int:
    z = np.asarray(z)
    return int(np.sum(((1 - z) // 2).astype(np.int64) << np.arange(z.size)))


def cut_values(instance: MaxCutInstance, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Cut value of every encoded assignment in ``range(start, stop)``."""
    n = instance.num_nodes
    stop = (1 << n) if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.zeros(idx.size, dtype=np.int64)
    for a, b in instance.edges:
        out += ((idx >> a) ^ (idx >> b)) & 1
    return out


def brute_force_maximum(instance: MaxCutInstance) -> tuple[int, np.ndarray]:
    """Exhaustive maximum cut; ties go to the lowest encoded assignment."""
    n = instance.num_nodes
    if n > MAX_BRUTE_FORCE_NODES:
        raise CapacityError(f"brute force limited to {MAX_BRUTE_FORCE_NODES} nodes, got {n}")
    best_value, best_index = -1, 0
    total = 1 << n
    for start in range(0, total, _ENUM_CHUNK):
        values = cut_values(instance, start, min(total, start + _ENUM_CHUNK))
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_value, best_index = int(values[i]), start + i
    return best_value, assignment_from_index(best_index, n)
