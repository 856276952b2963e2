"""Cooperative fusion operators against sort/mean/majority oracles."""
import itertools
import statistics

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cod2m.dataset import SENSOR_ORDER, SensorKind
from cod2m.fusion import (
    DECISION_THRESHOLD,
    AggKind,
    BetaSet,
    OmegaMethod,
    aggregate,
    binarize,
    omega,
    system_decision,
    vote,
)
from cod2m.models import NetGenome, NodeGene
from cod2m.neuroevo import InnovationRegistry, init_population
from cod2m.neuroevo import NeatConfig

_beta_values = st.tuples(*([st.floats(min_value=0.0, max_value=1.0, allow_nan=False)] * 5))


def test_betaset_requires_five_values_in_range():
    with pytest.raises(ValueError):
        BetaSet((0.1, 0.2, 0.3, 0.4))
    with pytest.raises(ValueError):
        BetaSet((0.1, 0.2, 0.3, 0.4, 1.4))


@given(_beta_values)
def test_aggregate_matches_sort_and_mean_oracles(values):
    b = BetaSet(values)
    ordered = sorted(values)
    assert aggregate(b, AggKind.MAX) == ordered[-1]
    assert aggregate(b, AggKind.MDN) == ordered[2]
    assert aggregate(b, AggKind.MDN) == statistics.median(values)
    assert aggregate(b, AggKind.AVG) == pytest.approx(sum(values) / 5, abs=1e-15)


def test_vote_matches_majority_oracle_on_all_32_patterns():
    for pattern in itertools.product((0.3, 0.7), repeat=5):
        expected = 1.0 if sum(v >= 0.5 for v in pattern) >= 3 else 0.0
        assert vote(BetaSet(pattern)) == expected


def test_vote_counts_exact_threshold_as_positive():
    assert vote(BetaSet((0.5, 0.5, 0.5, 0.0, 0.0))) == 1.0
    assert vote(BetaSet((0.5, 0.5, 0.49, 0.0, 0.0))) == 0.0


def test_omega_dispatch_matches_aggregates():
    b = BetaSet((0.1, 0.9, 0.4, 0.6, 0.5))
    assert omega(b, OmegaMethod("M")) == aggregate(b, AggKind.MAX)
    assert omega(b, OmegaMethod("Bavg")) == aggregate(b, AggKind.AVG)
    assert omega(b, OmegaMethod("Bmdn")) == aggregate(b, AggKind.MDN)
    assert omega(b, OmegaMethod("V")) == vote(b)


def test_omega_net_method_runs_a_genome():
    registry = InnovationRegistry(5, 1)
    genome = init_population(NeatConfig(population_size=2), 5, 1, registry, __import__("random").Random(0))[0]
    method = OmegaMethod("N", genome)
    value = omega(BetaSet((0.2, 0.4, 0.6, 0.8, 1.0)), method)
    assert 0.0 < value < 1.0


def test_omega_method_validates_models():
    with pytest.raises(ValueError):
        OmegaMethod("Z")
    with pytest.raises(ValueError):
        OmegaMethod("N")  # needs a genome
    with pytest.raises(ValueError):
        OmegaMethod("V", model=object())
    bad = NetGenome(
        nodes=[NodeGene(0, "input"), NodeGene(1, "bias"), NodeGene(2, "output")],
        connections=[],
        input_count=1,
        output_count=1,
    )
    with pytest.raises(ValueError, match="five"):
        OmegaMethod("N", bad)


def test_binarize_threshold_edges():
    assert binarize(0.5) is True
    assert binarize(0.49999999) is False
    assert binarize(0.2, threshold=0.2) is True
    with pytest.raises(ValueError):
        binarize(1.5)


def test_system_decision_picks_max_and_reports_verdict():
    sensor, value, verdict = system_decision([0.1, 0.2, 0.9, 0.3, 0.4])
    assert sensor is SensorKind.UV
    assert value == 0.9
    assert verdict is True
    sensor, value, verdict = system_decision([0.1, 0.2, 0.3, 0.2, 0.1])
    assert sensor is SensorKind.UV
    assert verdict is False


def test_system_decision_breaks_ties_toward_broadcast_order():
    sensor, value, _ = system_decision([0.4, 0.9, 0.9, 0.9, 0.1])
    assert sensor is SensorKind.IR  # first maximum in VS, IR, UV, TM, GP order
    assert value == 0.9


def test_system_decision_requires_five_values():
    with pytest.raises(ValueError):
        system_decision([0.5, 0.5])


def test_decision_threshold_is_half():
    assert DECISION_THRESHOLD == 0.5
