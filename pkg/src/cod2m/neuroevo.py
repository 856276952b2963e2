"""Topology-growing neuroevolution for the decision nets.

Genomes start minimal (inputs and bias fully connected to the outputs) and
grow through weight perturbation, add-connection, and add-node mutations.
Structural genes carry innovation numbers handed out by a registry shared
across the run, so identical structural mutations receive identical ids and
crossover can align genes by innovation. The population is partitioned into
species by a compatibility distance over gene mismatches and weight
differences; offspring quotas use shift-normalised fitness sharing, each
species keeps its champion verbatim, and species that fail to improve for
`staleness_limit` generations stop reproducing (the champion's species is
exempt). Fitness is the negated RMSE of the net over the training rows, so
greater is better and 0.0 is a perfect fit.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import metrics
from .models import (
    WEIGHT_LIMIT,
    ConnGene,
    NetGenome,
    NodeGene,
    compile_network,
)

TrainRow = tuple[Sequence[float], float]


@dataclass(frozen=True)
class NeatConfig:
    population_size: int = 150
    generations: int = 100
    weight_mutate_rate: float = 0.8
    weight_perturb_sigma: float = 0.8
    add_connection_rate: float = 0.1
    add_node_rate: float = 0.03
    compatibility_coeffs: tuple[float, float, float] = (1.0, 1.0, 0.4)
    compatibility_threshold: float = 3.0
    survival_fraction: float = 0.25
    crossover_rate: float = 0.75
    staleness_limit: int = 15
    fitness_stop: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        for name in ("weight_mutate_rate", "add_connection_rate", "add_node_rate", "crossover_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.weight_perturb_sigma < 0:
            raise ValueError("weight_perturb_sigma must be >= 0")
        if len(self.compatibility_coeffs) != 3:
            raise ValueError("compatibility_coeffs must be (c1, c2, c3)")
        if self.compatibility_threshold <= 0:
            raise ValueError("compatibility_threshold must be positive")
        if not 0.0 < self.survival_fraction <= 1.0:
            raise ValueError("survival_fraction must lie in (0, 1]")
        if self.staleness_limit < 1:
            raise ValueError("staleness_limit must be >= 1")


class InnovationRegistry:
    """Hands out structural-gene ids, reusing them for repeated structures."""

    def __init__(self, input_count: int, output_count: int) -> None:
        self._connection_ids: dict[tuple[int, int], int] = {}
        self._split_nodes: dict[int, int] = {}
        self._next_innovation = 0
        # fixed node layout: inputs, bias, outputs, then grown hidden nodes
        self._next_node = input_count + 1 + output_count

    def connection_id(self, src: int, dst: int) -> int:
        key = (src, dst)
        if key not in self._connection_ids:
            self._connection_ids[key] = self._next_innovation
            self._next_innovation += 1
        return self._connection_ids[key]

    def node_for_split(self, innovation: int) -> int:
        if innovation not in self._split_nodes:
            self._split_nodes[innovation] = self.fresh_node()
        return self._split_nodes[innovation]

    def fresh_node(self) -> int:
        node = self._next_node
        self._next_node += 1
        return node


def init_population(
    cfg: NeatConfig,
    input_count: int,
    output_count: int,
    registry: InnovationRegistry | None = None,
    rng: random.Random | None = None,
) -> list[NetGenome]:
    """Minimal genomes: every input and the bias wired straight to each output."""
    if input_count < 1 or output_count < 1:
        raise ValueError("input_count and output_count must be positive")
    registry = registry or InnovationRegistry(input_count, output_count)
    rng = rng or random.Random(cfg.seed)
    input_ids = list(range(input_count))
    bias_id = input_count
    output_ids = list(range(input_count + 1, input_count + 1 + output_count))
    nodes = (
        [NodeGene(i, "input") for i in input_ids]
        + [NodeGene(bias_id, "bias")]
        + [NodeGene(o, "output", "sigmoid") for o in output_ids]
    )
    population = []
    for _ in range(cfg.population_size):
        connections = [
            ConnGene(registry.connection_id(src, dst), src, dst, rng.uniform(-1.0, 1.0))
            for dst in output_ids
            for src in input_ids + [bias_id]
        ]
        population.append(NetGenome(list(nodes), connections, input_count, output_count))
    return population


def _reachable(genome: NetGenome, start: int, goal: int) -> bool:
    # reachability over the full gene structure, disabled genes included, so
    # re-enabling an inherited gene can never close a cycle
    adjacency: dict[int, list[int]] = {}
    for c in genome.connections:
        adjacency.setdefault(c.src, []).append(c.dst)
    stack = [start]
    seen = {start}
    while stack:
        node = stack.pop()
        if node == goal:
            return True
        for nxt in adjacency.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def _mutate_weights(genome: NetGenome, cfg: NeatConfig, rng: random.Random) -> None:
    for conn in genome.connections:
        if rng.random() < cfg.weight_mutate_rate:
            w = conn.weight + rng.gauss(0.0, cfg.weight_perturb_sigma)
            conn.weight = min(WEIGHT_LIMIT, max(-WEIGHT_LIMIT, w))


def _try_add_connection(genome: NetGenome, registry: InnovationRegistry, rng: random.Random) -> None:
    roles = {n.id: n.role for n in genome.nodes}
    sources = sorted(n for n, r in roles.items() if r in ("input", "bias", "hidden"))
    targets = sorted(n for n, r in roles.items() if r in ("hidden", "output"))
    occupied = {(c.src, c.dst) for c in genome.connections}
    candidates = [
        (src, dst)
        for src in sources
        for dst in targets
        if src != dst and (src, dst) not in occupied and not _reachable(genome, dst, src)
    ]
    if not candidates:
        return
    src, dst = candidates[rng.randrange(len(candidates))]
    genome.connections.append(
        ConnGene(registry.connection_id(src, dst), src, dst, rng.uniform(-1.0, 1.0))
    )


def _try_add_node(genome: NetGenome, registry: InnovationRegistry, rng: random.Random) -> None:
    enabled = [c for c in genome.connections if c.enabled]
    if not enabled:
        return
    conn = enabled[rng.randrange(len(enabled))]
    conn.enabled = False
    node_id = registry.node_for_split(conn.innovation)
    if node_id in genome.node_ids():  # same gene split twice down one lineage
        node_id = registry.fresh_node()
    genome.nodes.append(NodeGene(node_id, "hidden", "sigmoid"))
    genome.connections.append(
        ConnGene(registry.connection_id(conn.src, node_id), conn.src, node_id, 1.0)
    )
    genome.connections.append(
        ConnGene(registry.connection_id(node_id, conn.dst), node_id, conn.dst, conn.weight)
    )


def mutate(
    genome: NetGenome,
    cfg: NeatConfig,
    registry: InnovationRegistry,
    rng: random.Random,
) -> NetGenome:
    """Return a mutated copy: weight perturbation, add-connection, add-node."""
    child = genome.clone()
    _mutate_weights(child, cfg, rng)
    if rng.random() < cfg.add_connection_rate:
        _try_add_connection(child, registry, rng)
    if rng.random() < cfg.add_node_rate:
        _try_add_node(child, registry, rng)
    return child


def crossover(fitter: NetGenome, other: NetGenome, rng: random.Random) -> NetGenome:
    """Innovation-aligned recombination biased toward the fitter parent.

    Matching genes come from either parent with equal probability; disjoint
    and excess genes come from the fitter parent only, so the child's
    structure is a copy of the fitter's.
    """
    other_genes = {c.innovation: c for c in other.connections}
    connections = []
    for gene in fitter.connections:
        counterpart = other_genes.get(gene.innovation)
        if counterpart is not None and rng.random() < 0.5:
            connections.append(counterpart.clone())
        else:
            connections.append(gene.clone())
    return NetGenome(list(fitter.nodes), connections, fitter.input_count, fitter.output_count)


def compatibility(a: NetGenome, b: NetGenome, coeffs: tuple[float, float, float]) -> float:
    """c1*excess/N + c2*disjoint/N + c3*mean|weight delta| over matching genes."""
    c1, c2, c3 = coeffs
    genes_a = {c.innovation: c for c in a.connections}
    genes_b = {c.innovation: c for c in b.connections}
    if not genes_a and not genes_b:
        return 0.0
    max_a = max(genes_a, default=-1)
    max_b = max(genes_b, default=-1)
    cutoff = min(max_a, max_b)
    matching = genes_a.keys() & genes_b.keys()
    excess = disjoint = 0
    for innovation in genes_a.keys() ^ genes_b.keys():
        if innovation > cutoff:
            excess += 1
        else:
            disjoint += 1
    weight_delta = (
        sum(abs(genes_a[i].weight - genes_b[i].weight) for i in matching) / len(matching)
        if matching
        else 0.0
    )
    n = max(len(genes_a), len(genes_b))
    if len(genes_a) < 20 and len(genes_b) < 20:
        n = 1
    return c1 * excess / n + c2 * disjoint / n + c3 * weight_delta


@dataclass
class Species:
    representative: NetGenome
    members: list[int] = field(default_factory=list)
    staleness: int = 0
    best_fitness: float = -math.inf
    staleness_exceeded: bool = False


def _speciate(
    species_list: list[Species],
    population: list[NetGenome],
    cfg: NeatConfig,
) -> list[Species]:
    for species in species_list:
        species.members = []
    for index, genome in enumerate(population):
        for species in species_list:
            if compatibility(genome, species.representative, cfg.compatibility_coeffs) < cfg.compatibility_threshold:
                species.members.append(index)
                break
        else:
            species_list.append(Species(representative=genome.clone(), members=[index]))
    return [s for s in species_list if s.members]


def _allocate_offspring(
    species_list: list[Species],
    fitnesses: list[float],
    population_size: int,
    champion_index: int,
) -> list[int]:
    min_fit = min(fitnesses)
    strengths = []
    for species in species_list:
        if species.staleness_exceeded and champion_index not in species.members:
            strengths.append(0.0)
        else:
            strengths.append(
                sum(fitnesses[i] - min_fit + 1e-9 for i in species.members) / len(species.members)
            )
    total = sum(strengths)
    if total <= 0.0:
        strengths = [float(len(s.members)) for s in species_list]
        total = sum(strengths)
    quotas = [population_size * s / total for s in strengths]
    alloc = [int(q) for q in quotas]
    remainders = sorted(
        range(len(quotas)), key=lambda i: (-(quotas[i] - alloc[i]), i)
    )
    shortfall = population_size - sum(alloc)
    for i in remainders[:shortfall]:
        alloc[i] += 1
    return alloc


def _fitness_function(train: Sequence[TrainRow]) -> Callable[[NetGenome], float]:
    inputs = [row[0] for row in train]
    targets = [row[1] for row in train]

    def fitness(genome: NetGenome) -> float:
        net = compile_network(genome)
        return -metrics.rmse(targets, [net(x) for x in inputs])

    return fitness


def evolve(
    train: Sequence[TrainRow],
    cfg: NeatConfig,
    input_count: int,
    output_count: int = 1,
    on_generation: Callable[[int, list[NetGenome], float], None] | None = None,
) -> NetGenome:
    """Run the generational loop and return the best genome ever seen."""
    if not train:
        raise ValueError("training data must not be empty")
    for row_inputs, target in train:
        if len(row_inputs) != input_count:
            raise ValueError("training row arity does not match input_count")
        if not 0.0 <= target <= 1.0:
            raise ValueError(f"target {target} outside [0, 1]")
    rng = random.Random(cfg.seed)
    registry = InnovationRegistry(input_count, output_count)
    fitness_of = _fitness_function(train)
    population = init_population(cfg, input_count, output_count, registry, rng)
    fitnesses = [fitness_of(g) for g in population]
    best_index = max(range(len(population)), key=lambda i: (fitnesses[i], -i))
    best = population[best_index].clone()
    best_fitness = fitnesses[best_index]
    species_list: list[Species] = []
    for generation in range(cfg.generations):
        if cfg.fitness_stop is not None and best_fitness >= cfg.fitness_stop:
            break
        species_list = _speciate(species_list, population, cfg)
        champion_index = max(range(len(population)), key=lambda i: (fitnesses[i], -i))
        for species in species_list:
            species_best = max(fitnesses[i] for i in species.members)
            if species_best > species.best_fitness:
                species.best_fitness = species_best
                species.staleness = 0
            else:
                species.staleness += 1
            species.staleness_exceeded = species.staleness >= cfg.staleness_limit
        alloc = _allocate_offspring(species_list, fitnesses, cfg.population_size, champion_index)
        next_population: list[NetGenome] = []
        for species, quota in zip(species_list, alloc):
            if quota == 0:
                continue
            ranked = sorted(species.members, key=lambda i: (-fitnesses[i], i))
            next_population.append(population[ranked[0]].clone())  # species elite
            parents = ranked[: max(1, math.ceil(cfg.survival_fraction * len(ranked)))]
            for _ in range(quota - 1):
                if rng.random() < cfg.crossover_rate and len(parents) > 1:
                    i = parents[rng.randrange(len(parents))]
                    j = parents[rng.randrange(len(parents))]
                    if (fitnesses[j], -j) > (fitnesses[i], -i):
                        i, j = j, i
                    child = crossover(population[i], population[j], rng)
                else:
                    child = population[parents[rng.randrange(len(parents))]].clone()
                next_population.append(mutate(child, cfg, registry, rng))
        for species in species_list:
            species.representative = population[species.members[0]].clone()
        population = next_population
        fitnesses = [fitness_of(g) for g in population]
        gen_best = max(range(len(population)), key=lambda i: (fitnesses[i], -i))
        if fitnesses[gen_best] > best_fitness:
            best_fitness = fitnesses[gen_best]
            best = population[gen_best].clone()
        if on_generation is not None:
            on_generation(generation, population, best_fitness)
    return best
