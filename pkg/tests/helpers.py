"""Hand-built fixtures shared across test modules.

The dataset builder avoids the synthetic generator on purpose: tests of
splitting, training, and reporting should not inherit its geometry.
"""
import random

from cod2m.dataset import (
    SENSOR_ORDER,
    Condition,
    Dataset,
    DatasetHeader,
    Sample,
)
from cod2m.models import WEIGHT_LIMIT, NetGenome


def assert_genome_invariants(genome: NetGenome) -> None:
    """Structural soundness a genome must keep through any evolution step."""
    ids = [n.id for n in genome.nodes]
    assert len(ids) == len(set(ids)), "duplicate node ids"
    innovations = [c.innovation for c in genome.connections]
    assert len(innovations) == len(set(innovations)), "duplicate innovations"
    id_set = set(ids)
    for c in genome.connections:
        assert c.src in id_set and c.dst in id_set, "dangling connection endpoint"
        assert abs(c.weight) <= WEIGHT_LIMIT, "weight outside limit"
    pairs = [(c.src, c.dst) for c in genome.connections]
    assert len(pairs) == len(set(pairs)), "parallel connections"
    # acyclic over the full structure, disabled genes included: Kahn's algorithm
    indegree = {i: 0 for i in id_set}
    outgoing: dict[int, list[int]] = {i: [] for i in id_set}
    for src, dst in pairs:
        indegree[dst] += 1
        outgoing[src].append(dst)
    queue = [i for i, d in indegree.items() if d == 0]
    removed = 0
    while queue:
        node = queue.pop()
        removed += 1
        for nxt in outgoing[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                queue.append(nxt)
    assert removed == len(id_set), "cycle in gene structure"

DAY_CONDITIONS = {
    1: Condition(day=1, illumination=0.8, humidity=0.1, time_of_day="morning"),
    2: Condition(day=2, illumination=0.35, humidity=0.9, time_of_day="afternoon"),
}


def build_dataset(n_per_day: int = 8, dims: int = 2, seed: int = 0) -> Dataset:
    """Small labeled dataset covering both days, regions, and classes.

    Labels correlate with feature magnitude so trained models have signal,
    and positions alternate across y=550 so a C3 split stays stratified for
    any n_per_day >= 4.
    """
    if n_per_day < 4:
        raise ValueError("need at least 4 samples per day for stratified splits")
    rng = random.Random(seed)
    header = DatasetHeader(dims={kind: dims for kind in SENSOR_ORDER})
    samples = []
    sid = 0
    for day in (1, 2):
        for i in range(n_per_day):
            label = i % 2 == 1
            y = 100.0 + 10.0 * i if i % 4 < 2 else 900.0 + 10.0 * i
            x = 30.0 + 7.0 * (i % 20)
            base = 0.75 if label else 0.25
            features = {
                kind: tuple(
                    min(1.0, max(0.0, base + rng.uniform(-0.1, 0.1)))
                    for _ in range(dims)
                )
                for kind in SENSOR_ORDER
            }
            samples.append(
                Sample(
                    id=sid,
                    position=(x, y),
                    condition=DAY_CONDITIONS[day],
                    features=features,
                    label=label,
                )
            )
            sid += 1
    return Dataset(header=header, samples=tuple(samples))
