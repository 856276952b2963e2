"""Decision models: evolvable feed-forward nets, fuzzy rule systems, angle policies.

A NetGenome is a NEAT-style genome: node genes plus innovation-numbered
connection genes over an acyclic feed-forward graph. A FuzzySystem is a
Mamdani-style zero-order system with three triangular membership functions
per input and one rule per antecedent combination. Both evaluate inputs in
[0, 1] to a decision value in [0, 1].
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

ROLES = ("input", "bias", "hidden", "output")
ACTIVATIONS = ("sigmoid", "tanh", "relu")

NET_FORMAT = "net-genome v1"
FUZZY_FORMAT = "fuzzy-system v1"

WEIGHT_LIMIT = 8.0  # connection weights live in [-WEIGHT_LIMIT, WEIGHT_LIMIT]


def logistic(x: float) -> float:
    # clamp the exponent so extreme sums saturate instead of overflowing
    if x < -60.0:
        return 0.0
    if x > 60.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(-x))


def _relu(x: float) -> float:
    return x if x > 0.0 else 0.0


_ACTIVATION_FNS: dict[str, Callable[[float], float]] = {
    "sigmoid": logistic,
    "tanh": math.tanh,
    "relu": _relu,
}


@dataclass(frozen=True)
class NodeGene:
    id: int
    role: str
    activation: str = "sigmoid"

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown node role {self.role!r}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass
class ConnGene:
    innovation: int
    src: int
    dst: int
    weight: float
    enabled: bool = True

    def clone(self) -> "ConnGene":
        return ConnGene(self.innovation, self.src, self.dst, self.weight, self.enabled)


@dataclass
class NetGenome:
    """Nodes plus innovation-numbered connections; mutated only via clones."""

    nodes: list[NodeGene]
    connections: list[ConnGene]
    input_count: int
    output_count: int

    def clone(self) -> "NetGenome":
        return NetGenome(
            list(self.nodes),
            [c.clone() for c in self.connections],
            self.input_count,
            self.output_count,
        )

    def node_ids(self) -> set[int]:
        return {n.id for n in self.nodes}


def _has_cycle(node_ids: set[int], edges: Sequence[tuple[int, int]]) -> bool:
    adjacency: dict[int, list[int]] = {n: [] for n in node_ids}
    for src, dst in edges:
        adjacency[src].append(dst)
    WHITE, GREY, BLACK = 0, 1, 2
    colour = dict.fromkeys(node_ids, WHITE)
    for start in node_ids:
        if colour[start] != WHITE:
            continue
        stack: list[tuple[int, int]] = [(start, 0)]
        colour[start] = GREY
        while stack:
            node, idx = stack[-1]
            if idx < len(adjacency[node]):
                stack[-1] = (node, idx + 1)
                nxt = adjacency[node][idx]
                if colour[nxt] == GREY:
                    return True
                if colour[nxt] == WHITE:
                    colour[nxt] = GREY
                    stack.append((nxt, 0))
            else:
                colour[node] = BLACK
                stack.pop()
    return False


def validate_genome(genome: NetGenome) -> None:
    """Raise ValueError on any structural invariant violation."""
    ids = [n.id for n in genome.nodes]
    if len(ids) != len(set(ids)):
        raise ValueError("duplicate node ids")
    roles = {n.id: n.role for n in genome.nodes}
    if sum(1 for r in roles.values() if r == "input") != genome.input_count:
        raise ValueError("input node count does not match input_count")
    if sum(1 for r in roles.values() if r == "output") != genome.output_count:
        raise ValueError("output node count does not match output_count")
    innovations = [c.innovation for c in genome.connections]
    if len(innovations) != len(set(innovations)):
        raise ValueError("duplicate innovation ids")
    for c in genome.connections:
        if c.src not in roles or c.dst not in roles:
            raise ValueError(f"connection {c.innovation} references an unknown node")
        if roles[c.dst] in ("input", "bias"):
            raise ValueError(f"connection {c.innovation} feeds into an {roles[c.dst]} node")
        if not math.isfinite(c.weight):
            raise ValueError(f"connection {c.innovation} has a non-finite weight")
    enabled = [(c.src, c.dst) for c in genome.connections if c.enabled]
    if _has_cycle(genome.node_ids(), enabled):
        raise ValueError("enabled connections form a cycle")


def _topological_order(genome: NetGenome) -> list[int]:
    incoming: dict[int, int] = {n.id: 0 for n in genome.nodes}
    adjacency: dict[int, list[int]] = {n.id: [] for n in genome.nodes}
    for c in genome.connections:
        if c.enabled:
            incoming[c.dst] += 1
            adjacency[c.src].append(c.dst)
    ready = sorted(n for n, deg in incoming.items() if deg == 0)
    order: list[int] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        for nxt in adjacency[node]:
            incoming[nxt] -= 1
            if incoming[nxt] == 0:
                ready.append(nxt)
    if len(order) != len(genome.nodes):
        raise ValueError("enabled connections form a cycle")
    return order


def compile_network(genome: NetGenome) -> Callable[[Sequence[float]], float]:
    """Build a reusable evaluator for a single-output genome.

    Shares semantics with ann_forward: nodes evaluate in topological order,
    hidden nodes apply their declared activation to the weighted input sum,
    and the output node always maps its sum through the logistic so the
    result lands in [0, 1].
    """
    if genome.output_count != 1:
        raise ValueError("evaluation requires exactly one output node")
    validate_genome(genome)
    order = _topological_order(genome)
    slot = {node_id: i for i, node_id in enumerate(order)}
    info = {n.id: n for n in genome.nodes}
    input_slots = [slot[n.id] for n in genome.nodes if n.role == "input"]
    bias_slots = [slot[n.id] for n in genome.nodes if n.role == "bias"]
    incoming: dict[int, list[tuple[int, float]]] = {n.id: [] for n in genome.nodes}
    for c in genome.connections:
        if c.enabled:
            incoming[c.dst].append((slot[c.src], c.weight))
    plan = []
    output_slot = -1
    for node_id in order:
        node = info[node_id]
        if node.role in ("input", "bias"):
            continue
        fn = logistic if node.role == "output" else _ACTIVATION_FNS[node.activation]
        plan.append((slot[node_id], fn, tuple(incoming[node_id])))
        if node.role == "output":
            output_slot = slot[node_id]

    n_slots = len(order)

    def run(inputs: Sequence[float]) -> float:
        if len(inputs) != genome.input_count:
            raise ValueError(
                f"expected {genome.input_count} inputs, got {len(inputs)}"
            )
        values = [0.0] * n_slots
        for s, v in zip(input_slots, inputs):
            values[s] = float(v)
        for s in bias_slots:
            values[s] = 1.0
        for s, fn, terms in plan:
            total = 0.0
            for src_slot, weight in terms:
                total += values[src_slot] * weight
            values[s] = fn(total)
        return values[output_slot]

    return run


def ann_forward(genome: NetGenome, inputs: Sequence[float]) -> float:
    """Evaluate a genome on one input vector; returns a value in [0, 1]."""
    return compile_network(genome)(inputs)


# --- fuzzy systems ---------------------------------------------------------


def triangular_membership(x: float, a: float, b: float, c: float) -> float:
    """Triangle with feet a, c and peak b; degenerate sides act as shoulders.

    a == b makes a left shoulder (membership 1 for x <= b); b == c makes a
    right shoulder (membership 1 for x >= b).
    """
    if not a <= b <= c:
        raise ValueError(f"vertices must satisfy a <= b <= c, got ({a}, {b}, {c})")
    if x == b:
        return 1.0
    if x < b:
        if a == b:
            return 1.0
        v = (x - a) / (b - a)
    else:
        if c == b:
            return 1.0
        v = (c - x) / (c - b)
    return min(1.0, max(0.0, v))


MFS_PER_INPUT = 3


@dataclass(frozen=True)
class FuzzySystem:
    """Per-input triangular partitions plus a complete rule grid."""

    input_count: int
    mfs: tuple[tuple[tuple[float, float, float], ...], ...]
    rules: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self) -> None:
        if self.input_count < 1:
            raise ValueError("input_count must be at least 1")
        if len(self.mfs) != self.input_count:
            raise ValueError("one MF triple set required per input")
        for i, partition in enumerate(self.mfs):
            if len(partition) != MFS_PER_INPUT:
                raise ValueError(f"input {i}: expected {MFS_PER_INPUT} membership functions")
            for a, b, c in partition:
                if not 0.0 <= a <= b <= c <= 1.0:
                    raise ValueError(f"input {i}: vertices ({a}, {b}, {c}) not sorted within [0, 1]")
            self._check_coverage(i, partition)
        if not self.rules:
            raise ValueError("rule list must not be empty")
        for ants, consequent in self.rules:
            if len(ants) != self.input_count:
                raise ValueError("each rule needs one antecedent index per input")
            if any(not 0 <= a < MFS_PER_INPUT for a in ants):
                raise ValueError(f"antecedent indices must be in [0, {MFS_PER_INPUT}), got {ants}")
            if not 0.0 <= consequent <= 1.0:
                raise ValueError(f"consequent {consequent} outside [0, 1]")
        seen = {tuple(ants) for ants, _ in self.rules}
        if len(seen) != len(self.rules) or len(self.rules) != MFS_PER_INPUT**self.input_count:
            raise ValueError(
                "rules must enumerate every antecedent combination exactly once"
            )

    @staticmethod
    def _check_coverage(index: int, partition: tuple[tuple[float, float, float], ...]) -> None:
        # max membership is piecewise linear and convex between vertex
        # breakpoints, so positivity at every breakpoint is a complete check
        breakpoints = {0.0, 1.0}
        for a, b, c in partition:
            breakpoints.update((a, b, c))
        for x in sorted(p for p in breakpoints if 0.0 <= p <= 1.0):
            if all(triangular_membership(x, *mf) == 0.0 for mf in partition):
                raise ValueError(f"input {index}: no membership function covers x={x}")


def fuzzy_infer(system: FuzzySystem, inputs: Sequence[float]) -> float:
    """Weighted-average inference; 0.5 when no rule fires."""
    if len(inputs) != system.input_count:
        raise ValueError(f"expected {system.input_count} inputs, got {len(inputs)}")
    for v in inputs:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"input {v} outside [0, 1]")
    memberships = [
        [triangular_membership(x, *mf) for mf in partition]
        for x, partition in zip(inputs, system.mfs)
    ]
    num = 0.0
    den = 0.0
    for ants, consequent in system.rules:
        strength = 1.0
        for i, a in enumerate(ants):
            mu = memberships[i][a]
            if mu < strength:
                strength = mu
        num += strength * consequent
        den += strength
    if den == 0.0:
        return 0.5
    return num / den


def _tri_batch(x: np.ndarray, a: float, b: float, c: float) -> np.ndarray:
    left = (x <= b).astype(float) if b == a else (x - a) / (b - a)
    right = (x >= b).astype(float) if c == b else (c - x) / (c - b)
    mu = np.where(x < b, left, right)
    mu = np.where(x == b, 1.0, mu)
    return np.clip(mu, 0.0, 1.0)


def fuzzy_infer_batch(system: FuzzySystem, inputs: np.ndarray) -> np.ndarray:
    """Vectorised fuzzy_infer over rows of `inputs`; identical semantics."""
    x = np.asarray(inputs, dtype=float)
    if x.ndim != 2 or x.shape[1] != system.input_count:
        raise ValueError(f"expected shape (n, {system.input_count})")
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise ValueError("inputs outside [0, 1]")
    # memberships[s, i, j] = mu of MF j of input i at row s
    memberships = np.empty((x.shape[0], system.input_count, MFS_PER_INPUT))
    for i, partition in enumerate(system.mfs):
        for j, (a, b, c) in enumerate(partition):
            memberships[:, i, j] = _tri_batch(x[:, i], a, b, c)
    ants = np.array([r[0] for r in system.rules])  # (n_rules, input_count)
    consequents = np.array([r[1] for r in system.rules])
    cols = np.arange(system.input_count)
    strengths = memberships[:, cols[None, :], ants].min(axis=2)
    den = strengths.sum(axis=1)
    num = strengths @ consequents
    return np.where(den == 0.0, 0.5, num / np.maximum(den, 1e-300))


# --- scan-angle policies ----------------------------------------------------

ALPHA_RANGE = 180.0


@dataclass(frozen=True)
class AlphaPolicy:
    """Next-scan-angle chooser: fixed point, random, net-backed, or fuzzy-backed."""

    symbol: str  # P fixed, R random, N net model, F fuzzy model
    angle: float = 90.0
    model: object | None = None

    def __post_init__(self) -> None:
        if self.symbol not in ("P", "R", "N", "F"):
            raise ValueError(f"unknown alpha policy symbol {self.symbol!r}")
        if not 0.0 <= self.angle <= ALPHA_RANGE:
            raise ValueError(f"angle {self.angle} outside [0, {ALPHA_RANGE}]")
        if self.symbol == "N" and not isinstance(self.model, NetGenome):
            raise ValueError("alpha policy N requires a NetGenome model")
        if self.symbol == "F" and not isinstance(self.model, FuzzySystem):
            raise ValueError("alpha policy F requires a FuzzySystem model")


def alpha_decide(policy: AlphaPolicy, context: Sequence[float], rng: random.Random) -> float:
    """Pick the next acquisition angle in degrees within [0, 180]."""
    if policy.symbol == "P":
        return policy.angle
    if policy.symbol == "R":
        return rng.uniform(0.0, ALPHA_RANGE)
    if policy.symbol == "N":
        return ann_forward(policy.model, context) * ALPHA_RANGE
    return fuzzy_infer(policy.model, context) * ALPHA_RANGE


# --- serialization ----------------------------------------------------------


def genome_to_dict(genome: NetGenome) -> dict:
    validate_genome(genome)
    return {
        "format": NET_FORMAT,
        "input_count": genome.input_count,
        "output_count": genome.output_count,
        "nodes": [[n.id, n.role, n.activation] for n in genome.nodes],
        "connections": [
            [c.innovation, c.src, c.dst, c.weight, c.enabled] for c in genome.connections
        ],
    }


def genome_from_dict(doc: dict) -> NetGenome:
    if doc.get("format") != NET_FORMAT:
        raise ValueError(f"not a {NET_FORMAT} document")
    genome = NetGenome(
        nodes=[NodeGene(int(i), str(r), str(a)) for i, r, a in doc["nodes"]],
        connections=[
            ConnGene(int(i), int(s), int(d), float(w), bool(e))
            for i, s, d, w, e in doc["connections"]
        ],
        input_count=int(doc["input_count"]),
        output_count=int(doc["output_count"]),
    )
    validate_genome(genome)
    return genome


def fuzzy_to_dict(system: FuzzySystem) -> dict:
    return {
        "format": FUZZY_FORMAT,
        "input_count": system.input_count,
        "mfs": [[list(mf) for mf in partition] for partition in system.mfs],
        "rules": [[list(ants), consequent] for ants, consequent in system.rules],
    }


def fuzzy_from_dict(doc: dict) -> FuzzySystem:
    if doc.get("format") != FUZZY_FORMAT:
        raise ValueError(f"not a {FUZZY_FORMAT} document")
    return FuzzySystem(
        input_count=int(doc["input_count"]),
        mfs=tuple(
            tuple(tuple(float(v) for v in mf) for mf in partition) for partition in doc["mfs"]
        ),
        rules=tuple(
            (tuple(int(a) for a in ants), float(consequent)) for ants, consequent in doc["rules"]
        ),
    )


def save_model(model: NetGenome | FuzzySystem, path: str) -> None:
    doc = genome_to_dict(model) if isinstance(model, NetGenome) else fuzzy_to_dict(model)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path: str) -> NetGenome | FuzzySystem:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    kind = doc.get("format")
    if kind == NET_FORMAT:
        return genome_from_dict(doc)
    if kind == FUZZY_FORMAT:
        return fuzzy_from_dict(doc)
    raise ValueError(f"unrecognised model format {kind!r}")
