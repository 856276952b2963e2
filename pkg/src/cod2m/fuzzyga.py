"""Genetic tuning of fuzzy systems over a discrete gene space.

A chromosome holds every membership-function vertex as an integer level on
a uniform quantization grid plus one consequent level per rule of the
complete 3^inputs rule grid. Decoding sorts each vertex triple, maps levels
to [0, 1], and repairs coverage holes so every decoded system is valid.
Selection is by tournament; recombination draws one of four crossover
strategies by configured weights; two mutation operators shift a vertex by
one level or reset a consequent. Fitness is the negated RMSE over the
training rows.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .models import MFS_PER_INPUT, FuzzySystem, fuzzy_infer_batch, triangular_membership

TrainRow = tuple[Sequence[float], float]

VERTICES_PER_MF = 3
CROSSOVER_STRATEGIES = ("X1", "X2", "X3", "X4")


@dataclass
class FuzzyChromosome:
    """Flat integer genes: MF vertices first, then rule consequents."""

    mf_genes: list[int]
    rule_genes: list[int]
    quantization: int

    def __post_init__(self) -> None:
        if self.quantization < 8:
            raise ValueError("quantization must be at least 8 levels")
        for gene in itertools.chain(self.mf_genes, self.rule_genes):
            if not isinstance(gene, int) or not 0 <= gene < self.quantization:
                raise ValueError(f"gene {gene!r} outside [0, {self.quantization})")

    def clone(self) -> "FuzzyChromosome":
        return FuzzyChromosome(list(self.mf_genes), list(self.rule_genes), self.quantization)


def mf_gene_count(input_count: int) -> int:
    return input_count * MFS_PER_INPUT * VERTICES_PER_MF

def rule_gene_count(input_count: int) -> int:
    return MFS_PER_INPUT**input_count


@dataclass(frozen=True)
class FgaConfig:
    population_size: int = 100
    generations: int = 100
    vertex_mutation_rate: float = 0.6
    consequent_mutation_rate: float = 0.5
    crossover_weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    tournament_size: int = 3
    elitism_count: int = 2
    quantization: int = 64
    fitness_stop: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        for name in ("vertex_mutation_rate", "consequent_mutation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if len(self.crossover_weights) != len(CROSSOVER_STRATEGIES):
            raise ValueError("crossover_weights must list four weights")
        if any(w < 0 for w in self.crossover_weights) or sum(self.crossover_weights) <= 0:
            raise ValueError("crossover_weights must be non-negative and sum to a positive value")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be in [0, population_size)")
        if self.quantization < 8:
            raise ValueError("quantization must be at least 8 levels")


def random_chromosome(input_count: int, quantization: int, rng: random.Random) -> FuzzyChromosome:
    return FuzzyChromosome(
        mf_genes=[rng.randrange(quantization) for _ in range(mf_gene_count(input_count))],
        rule_genes=[rng.randrange(quantization) for _ in range(rule_gene_count(input_count))],
        quantization=quantization,
    )


def _coverage_holes(partition: list[list[float]]) -> list[float]:
    breakpoints = {0.0, 1.0}
    for a, b, c in partition:
        breakpoints.update((a, b, c))
    return [
        x
        for x in sorted(breakpoints)
        if 0.0 <= x <= 1.0 and all(triangular_membership(x, *mf) == 0.0 for mf in partition)
    ]


def _repair_coverage(partition: list[list[float]]) -> None:
    """Stretch membership functions until every x in [0, 1] has support.

    Boundary holes collapse the outermost MF's outer foot onto its peak,
    making a shoulder that reaches the boundary; interior holes stretch the
    nearest MF's near foot to the adjacent peak so supports overlap. Peaks
    never move, so each repair only enlarges support and the loop cannot
    oscillate. Every value written is 0, 1, or an existing vertex, so
    repairs stay on the quantization grid.
    """
    for _ in range(16):
        holes = _coverage_holes(partition)
        if not holes:
            return
        x = holes[0]
        if x == 0.0:
            mf = min(partition, key=lambda m: (m[0], m[1]))
            mf[0] = mf[1]
        elif x == 1.0:
            mf = max(partition, key=lambda m: (m[2], m[1]))
            mf[2] = mf[1]
        else:
            mf = min(partition, key=lambda m: (max(m[0] - x, x - m[2], 0.0), m[1]))
            if mf[2] <= x:  # nearest support sits left of the hole
                peaks_right = [m[1] for m in partition if m[1] > x]
                mf[2] = min(peaks_right) if peaks_right else 1.0
                mf[1] = min(mf[1], mf[2])
            else:  # nearest support sits right of the hole
                peaks_left = [m[1] for m in partition if m[1] < x]
                mf[0] = max(peaks_left) if peaks_left else 0.0
                mf[1] = max(mf[1], mf[0])
    raise AssertionError("coverage repair did not converge")


def decode(chromosome: FuzzyChromosome, input_count: int) -> FuzzySystem:
    """Map levels to [0, 1], sort each vertex triple, repair, and build."""
    if len(chromosome.mf_genes) != mf_gene_count(input_count):
        raise ValueError("mf_genes length does not match input_count")
    if len(chromosome.rule_genes) != rule_gene_count(input_count):
        raise ValueError("rule_genes length does not match input_count")
    top = chromosome.quantization - 1
    partitions = []
    position = 0
    for _ in range(input_count):
        partition = []
        for _ in range(MFS_PER_INPUT):
            levels = sorted(chromosome.mf_genes[position : position + VERTICES_PER_MF])
            partition.append([level / top for level in levels])
            position += VERTICES_PER_MF
        _repair_coverage(partition)
        partitions.append(tuple(tuple(mf) for mf in partition))
    antecedents = itertools.product(range(MFS_PER_INPUT), repeat=input_count)
    rules = tuple(
        (ants, level / top) for ants, level in zip(antecedents, chromosome.rule_genes)
    )
    return FuzzySystem(input_count=input_count, mfs=tuple(partitions), rules=rules)


def encode_nearest(system: FuzzySystem, quantization: int) -> FuzzyChromosome:
    """Quantize a system back to genes (nearest level per value)."""
    top = quantization - 1
    mf_genes = [
        round(v * top) for partition in system.mfs for mf in partition for v in mf
    ]
    rule_genes = [round(consequent * top) for _, consequent in system.rules]
    return FuzzyChromosome(mf_genes, rule_genes, quantization)


def mutate(chromosome: FuzzyChromosome, cfg: FgaConfig, rng: random.Random) -> FuzzyChromosome:
    """Apply the vertex-shift and consequent-reset operators independently."""
    child = chromosome.clone()
    if rng.random() < cfg.vertex_mutation_rate:
        index = rng.randrange(len(child.mf_genes))
        step = rng.choice((-1, 1))
        child.mf_genes[index] = min(child.quantization - 1, max(0, child.mf_genes[index] + step))
    if rng.random() < cfg.consequent_mutation_rate:
        index = rng.randrange(len(child.rule_genes))
        child.rule_genes[index] = rng.randrange(child.quantization)
    return child


def crossover(
    parent_a: FuzzyChromosome,
    parent_b: FuzzyChromosome,
    strategy: str,
    rng: random.Random,
) -> FuzzyChromosome:
    """Recombine the flattened gene strings with the named strategy."""
    if strategy not in CROSSOVER_STRATEGIES:
        raise ValueError(f"unknown crossover strategy {strategy!r}")
    if parent_a.quantization != parent_b.quantization:
        raise ValueError("parents use different quantization grids")
    split_at = len(parent_a.mf_genes)
    flat_a = parent_a.mf_genes + parent_a.rule_genes
    flat_b = parent_b.mf_genes + parent_b.rule_genes
    if len(flat_a) != len(flat_b):
        raise ValueError("parents have different gene counts")
    length = len(flat_a)
    if strategy == "X1":
        cut = rng.randrange(1, length)
        flat = flat_a[:cut] + flat_b[cut:]
    elif strategy == "X2":
        flat = [a if rng.random() < 0.5 else b for a, b in zip(flat_a, flat_b)]
    elif strategy == "X3":
        if rng.random() < 0.5:
            flat = parent_a.mf_genes + parent_b.rule_genes
        else:
            flat = parent_b.mf_genes + parent_a.rule_genes
    else:
        i, j = sorted(rng.sample(range(length + 1), 2))
        flat = flat_a[:i] + flat_b[i:j] + flat_a[j:]
    return FuzzyChromosome(flat[:split_at], flat[split_at:], parent_a.quantization)


def _choose_strategy(weights: Sequence[float], rng: random.Random) -> str:
    """Sample a crossover strategy; zero-weight strategies are never drawn."""
    total = sum(weights)
    draw = rng.random() * total
    cumulative = 0.0
    for strategy, weight in zip(CROSSOVER_STRATEGIES, weights):
        cumulative += weight
        if weight > 0.0 and draw < cumulative:
            return strategy
    return next(
        s for s, w in zip(reversed(CROSSOVER_STRATEGIES), reversed(weights)) if w > 0.0
    )


def _fitness_function(train: Sequence[TrainRow], input_count: int) -> Callable[[FuzzyChromosome], float]:
    inputs = np.array([list(row[0]) for row in train], dtype=float)
    targets = np.array([row[1] for row in train], dtype=float)

    def fitness(chromosome: FuzzyChromosome) -> float:
        system = decode(chromosome, input_count)
        predicted = fuzzy_infer_batch(system, inputs)
        return -math.sqrt(float(np.mean((targets - predicted) ** 2)))

    return fitness


def _tournament(fitnesses: list[float], cfg: FgaConfig, rng: random.Random) -> int:
    best = rng.randrange(len(fitnesses))
    for _ in range(cfg.tournament_size - 1):
        contender = rng.randrange(len(fitnesses))
        if (fitnesses[contender], -contender) > (fitnesses[best], -best):
            best = contender
    return best


def evolve(
    train: Sequence[TrainRow],
    cfg: FgaConfig,
    input_count: int,
    on_generation: Callable[[int, list[FuzzyChromosome], float], None] | None = None,
) -> FuzzySystem:
    """Run the GA and return the decoded best chromosome ever seen."""
    if not train:
        raise ValueError("training data must not be empty")
    for row_inputs, target in train:
        if len(row_inputs) != input_count:
            raise ValueError("training row arity does not match input_count")
        if not 0.0 <= target <= 1.0:
            raise ValueError(f"target {target} outside [0, 1]")
    rng = random.Random(cfg.seed)
    fitness_of = _fitness_function(train, input_count)
    population = [
        random_chromosome(input_count, cfg.quantization, rng)
        for _ in range(cfg.population_size)
    ]
    fitnesses = [fitness_of(c) for c in population]
    best_index = max(range(len(population)), key=lambda i: (fitnesses[i], -i))
    best = population[best_index].clone()
    best_fitness = fitnesses[best_index]
    for generation in range(cfg.generations):
        if cfg.fitness_stop is not None and best_fitness >= cfg.fitness_stop:
            break
        ranked = sorted(range(len(population)), key=lambda i: (-fitnesses[i], i))
        next_population = [population[i].clone() for i in ranked[: cfg.elitism_count]]
        while len(next_population) < cfg.population_size:
            parent_a = population[_tournament(fitnesses, cfg, rng)]
            parent_b = population[_tournament(fitnesses, cfg, rng)]
            strategy = _choose_strategy(cfg.crossover_weights, rng)
            child = crossover(parent_a, parent_b, strategy, rng)
            next_population.append(mutate(child, cfg, rng))
        population = next_population
        fitnesses = [fitness_of(c) for c in population]
        gen_best = max(range(len(population)), key=lambda i: (fitnesses[i], -i))
        if fitnesses[gen_best] > best_fitness:
            best_fitness = fitnesses[gen_best]
            best = population[gen_best].clone()
        if on_generation is not None:
            on_generation(generation, population, best_fitness)
    return decode(best, input_count)
