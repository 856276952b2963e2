"""Cooperative decision fusion over the five local sensor decisions.

Every agent broadcasts its local decision value; the ordered 5-tuple of
those values (VS, IR, UV, TM, GP) is the input to each agent's cooperative
decision operator.
"""

from __future__ import annotations

import enum
import statistics
from dataclasses import dataclass
from typing import Sequence

from .dataset import SENSOR_ORDER, SensorKind
from .models import FuzzySystem, NetGenome, ann_forward, fuzzy_infer

DECISION_THRESHOLD = 0.5
VOTE_QUORUM = 3

OMEGA_SYMBOLS = ("N", "F", "V", "M", "Bavg", "Bmdn")


@dataclass(frozen=True)
class BetaSet:
    """The five local decision values, in canonical sensor order."""

    values: tuple[float, float, float, float, float]

    def __post_init__(self) -> None:
        if len(self.values) != len(SENSOR_ORDER):
            raise ValueError(f"BetaSet needs {len(SENSOR_ORDER)} values, got {len(self.values)}")
        for v in self.values:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"decision value {v} outside [0, 1]")


class AggKind(enum.Enum):
    MAX = "Max"
    AVG = "Avg"
    MDN = "Mdn"


def aggregate(b: BetaSet, kind: AggKind) -> float:
    """Order-statistic fusion of the broadcast decision values."""
    if kind is AggKind.MAX:
        return max(b.values)
    if kind is AggKind.AVG:
        return sum(b.values) / len(b.values)
    return statistics.median(b.values)


def vote(b: BetaSet) -> float:
    """Majority vote: 1.0 iff at least three values reach the decision threshold."""
    ayes = sum(1 for v in b.values if v >= DECISION_THRESHOLD)
    return 1.0 if ayes >= VOTE_QUORUM else 0.0


@dataclass(frozen=True)
class OmegaMethod:
    """A cooperative decision operator, selected by config symbol.

    N: evolved net over the BetaSet. F: fuzzy system over the BetaSet.
    V: majority vote. M: max. Bavg: mean. Bmdn: median.
    """

    symbol: str
    model: NetGenome | FuzzySystem | None = None

    def __post_init__(self) -> None:
        if self.symbol not in OMEGA_SYMBOLS:
            raise ValueError(f"unknown omega symbol {self.symbol!r}")
        if self.symbol == "N":
            if not isinstance(self.model, NetGenome):
                raise ValueError("omega method N requires a NetGenome")
            if self.model.input_count != len(SENSOR_ORDER):
                raise ValueError("omega net must take the five decision values as inputs")
        elif self.symbol == "F":
            if not isinstance(self.model, FuzzySystem):
                raise ValueError("omega method F requires a FuzzySystem")
            if self.model.input_count != len(SENSOR_ORDER):
                raise ValueError("omega fuzzy system must take five inputs")
        elif self.model is not None:
            raise ValueError(f"omega method {self.symbol} takes no model")


_AGG_FOR_SYMBOL = {"M": AggKind.MAX, "Bavg": AggKind.AVG, "Bmdn": AggKind.MDN}


def omega(b: BetaSet, method: OmegaMethod) -> float:
    """Compute one agent's cooperative decision value."""
    if method.symbol == "N":
        return ann_forward(method.model, b.values)
    if method.symbol == "F":
        return fuzzy_infer(method.model, b.values)
    if method.symbol == "V":
        return vote(b)
    return aggregate(b, _AGG_FOR_SYMBOL[method.symbol])


def binarize(value: float, threshold: float = DECISION_THRESHOLD) -> bool:
    """True (object present) iff value reaches the threshold."""
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"decision value {value} outside [0, 1]")
    return value >= threshold


def system_decision(omegas: Sequence[float]) -> tuple[SensorKind, float, bool]:
    """The team verdict: the greatest cooperative value and its verdict.

    Ties resolve to the earliest sensor in canonical order.
    """
    if len(omegas) != len(SENSOR_ORDER):
        raise ValueError(f"need {len(SENSOR_ORDER)} cooperative values, got {len(omegas)}")
    best_kind = SENSOR_ORDER[0]
    best_value = omegas[0]
    for kind, value in zip(SENSOR_ORDER[1:], omegas[1:]):
        if value > best_value:
            best_kind, best_value = kind, value
    return best_kind, best_value, binarize(best_value)
