"""Study harness: agent sweeps, training, evaluation, and report tables.

A study runs one unit per (split case, seed): train the shared decision
models on the training half, enumerate the configured agent variants,
score both halves, then keep the records the report tables need.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import (
    DEFAULT_REGION_BOUNDARY,
    SENSOR_ORDER,
    Dataset,
    Sample,
    SensorKind,
    SplitCase,
    split,
)
from .fusion import DECISION_THRESHOLD, BetaSet, OmegaMethod, omega, system_decision
from .fuzzyga import FgaConfig
from .fuzzyga import evolve as fga_evolve
from .metrics import RocCurve, auc, confusion, rates, rmse, roc, write_roc_csv
from .models import (
    ALPHA_RANGE,
    AlphaPolicy,
    FuzzySystem,
    NetGenome,
    compile_network,
    fuzzy_infer_batch,
    load_model,
    save_model,
)
from .neuroevo import NeatConfig
from .neuroevo import evolve as neat_evolve
from .synthgen import GenConfig, Terrain, default_terrain, nearest_object_distance

log = logging.getLogger("cod2m.experiment")

ALPHA_SWEEP_SYMBOLS = ("N", "F", "P", "R")
BETA_SWEEP_SYMBOLS = ("N",)
OMEGA_SWEEP_SYMBOLS = ("N", "F", "V", "M", "Bavg", "Bmdn")
DEFAULT_SWEEP = {
    "alpha": ("P",),
    "beta": ("N",),
    "omega": OMEGA_SWEEP_SYMBOLS,
}
ANGLE_CANDIDATES = tuple(float(a) for a in range(0, 181, 15))
MODELS_FORMAT = "cod2m-models v1"
RESULTS_FORMAT = "cod2m-study v1"
STAGES = ("train", "validation")

_SEED_MIX = 0x9E3779B97F4A7C15


def child_seed(seed: int, tag: str) -> int:
    """Derive a stream-specific seed so sibling trainers never share RNG state."""
    return (seed * _SEED_MIX + zlib.crc32(tag.encode("utf-8"))) % (1 << 63)


# --- agent configuration ----------------------------------------------------


@dataclass(frozen=True)
class AgentConfig:
    """One agent variant: sensor plus the three decision-policy symbols."""

    sensor: SensorKind
    alpha: str
    beta: str
    omega: str

    def __post_init__(self) -> None:
        if self.alpha not in ALPHA_SWEEP_SYMBOLS:
            raise ValueError(f"unknown alpha symbol {self.alpha!r}")
        if self.beta not in BETA_SWEEP_SYMBOLS:
            raise ValueError(f"unknown beta symbol {self.beta!r}")
        if self.omega not in OMEGA_SWEEP_SYMBOLS:
            raise ValueError(f"unknown omega symbol {self.omega!r}")

    @property
    def label(self) -> str:
        return f"{self.sensor.value}:{self.alpha}/{self.beta}/{self.omega}"


def normalize_sweep(sweep: dict | None) -> dict[str, tuple[str, ...]]:
    """Validate a sweep mapping and fill in defaults for missing levels."""
    merged = dict(DEFAULT_SWEEP)
    if sweep is not None:
        for key, symbols in sweep.items():
            if key not in DEFAULT_SWEEP:
                raise ValueError(f"unknown sweep level {key!r}")
            chosen = tuple(symbols)
            if not chosen:
                raise ValueError(f"sweep level {key!r} must list at least one symbol")
            if len(set(chosen)) != len(chosen):
                raise ValueError(f"sweep level {key!r} repeats a symbol")
            merged[key] = chosen
    allowed = {
        "alpha": ALPHA_SWEEP_SYMBOLS,
        "beta": BETA_SWEEP_SYMBOLS,
        "omega": OMEGA_SWEEP_SYMBOLS,
    }
    for key, chosen in merged.items():
        for symbol in chosen:
            if symbol not in allowed[key]:
                raise ValueError(f"sweep level {key!r} does not accept {symbol!r}")
    return merged


def enumerate_configs(sweep: dict | None = None) -> dict[SensorKind, list[AgentConfig]]:
    """List every agent variant per sensor, in a fixed nested-loop order."""
    merged = normalize_sweep(sweep)
    out: dict[SensorKind, list[AgentConfig]] = {}
    for kind in SENSOR_ORDER:
        out[kind] = [
            AgentConfig(kind, a, b, w)
            for a in merged["alpha"]
            for b in merged["beta"]
            for w in merged["omega"]
        ]
    return out


# --- training ----------------------------------------------------------------


@dataclass
class ModelBundle:
    """Every trained model a sweep can reference, keyed by sensor."""

    seed: int
    beta: dict[SensorKind, NetGenome]
    omega_ann: dict[SensorKind, NetGenome]
    omega_fuzzy: dict[SensorKind, FuzzySystem]
    alpha_ann: dict[SensorKind, NetGenome]
    alpha_fuzzy: dict[SensorKind, FuzzySystem]


@dataclass(frozen=True)
class TrainedAgent:
    """An agent variant bound to its trained models."""

    config: AgentConfig
    beta_model: NetGenome
    omega_method: OmegaMethod
    alpha_policy: AlphaPolicy


def _beta_rows(samples: Sequence[Sample], kind: SensorKind) -> list[tuple[tuple[float, ...], float]]:
    return [(tuple(s.features[kind]), 1.0 if s.label else 0.0) for s in samples]


def best_scan_angle(terrain: Terrain, position: tuple[float, float]) -> float:
    """Angle whose half-step reach lands closest to an object; ties go low."""
    x, y = position
    half = terrain.scan_step / 2.0
    best = None
    for angle in ANGLE_CANDIDATES:
        point = (x + math.cos(math.radians(angle)) * half, y)
        key = (nearest_object_distance(terrain, point), angle)
        if best is None or key < best:
            best = key
    return best[1]


def _alpha_rows(
    samples: Sequence[Sample], kind: SensorKind, terrain: Terrain
) -> list[tuple[tuple[float, ...], float]]:
    return [
        (tuple(s.features[kind]), best_scan_angle(terrain, s.position) / ALPHA_RANGE)
        for s in samples
    ]


def train_models(
    train: Dataset,
    sweep: dict | None,
    neat_cfg: NeatConfig,
    fga_cfg: FgaConfig,
    seed: int,
    terrain: Terrain | None = None,
) -> ModelBundle:
    """Train exactly the models the sweep needs, one seeded stream each."""
    merged = normalize_sweep(sweep)
    bundle = ModelBundle(seed, {}, {}, {}, {}, {})
    samples = train.samples
    for kind in SENSOR_ORDER:
        cfg = dataclasses.replace(neat_cfg, seed=child_seed(seed, f"beta:{kind.value}"))
        bundle.beta[kind] = neat_evolve(
            _beta_rows(samples, kind), cfg, train.header.dims[kind]
        )
    beta_sets = _beta_table(bundle.beta, samples)
    omega_rows = [
        (bs.values, 1.0 if s.label else 0.0) for bs, s in zip(beta_sets, samples)
    ]
    if "N" in merged["omega"]:
        for kind in SENSOR_ORDER:
            cfg = dataclasses.replace(
                neat_cfg, seed=child_seed(seed, f"omega-ann:{kind.value}")
            )
            bundle.omega_ann[kind] = neat_evolve(omega_rows, cfg, len(SENSOR_ORDER))
    if "F" in merged["omega"]:
        for kind in SENSOR_ORDER:
            cfg = dataclasses.replace(
                fga_cfg, seed=child_seed(seed, f"omega-fuzzy:{kind.value}")
            )
            bundle.omega_fuzzy[kind] = fga_evolve(omega_rows, cfg, len(SENSOR_ORDER))
    if "N" in merged["alpha"] or "F" in merged["alpha"]:
        if terrain is None:
            terrain = default_terrain()
        for kind in SENSOR_ORDER:
            rows = _alpha_rows(samples, kind, terrain)
            if "N" in merged["alpha"]:
                cfg = dataclasses.replace(
                    neat_cfg, seed=child_seed(seed, f"alpha-ann:{kind.value}")
                )
                bundle.alpha_ann[kind] = neat_evolve(rows, cfg, train.header.dims[kind])
            if "F" in merged["alpha"]:
                cfg = dataclasses.replace(
                    fga_cfg, seed=child_seed(seed, f"alpha-fuzzy:{kind.value}")
                )
                bundle.alpha_fuzzy[kind] = fga_evolve(rows, cfg, train.header.dims[kind])
    return bundle


def _alpha_policy(bundle: ModelBundle, config: AgentConfig) -> AlphaPolicy:
    if config.alpha == "N":
        return AlphaPolicy("N", model=bundle.alpha_ann[config.sensor])
    if config.alpha == "F":
        return AlphaPolicy("F", model=bundle.alpha_fuzzy[config.sensor])
    return AlphaPolicy(config.alpha)


def _omega_method(bundle: ModelBundle, config: AgentConfig) -> OmegaMethod:
    if config.omega == "N":
        return OmegaMethod("N", bundle.omega_ann[config.sensor])
    if config.omega == "F":
        return OmegaMethod("F", bundle.omega_fuzzy[config.sensor])
    return OmegaMethod(config.omega)


def build_agents(bundle: ModelBundle, sweep: dict | None = None) -> list[TrainedAgent]:
    """Bind every sweep variant to its models, sensors in broadcast order."""
    configs = enumerate_configs(sweep)
    agents = []
    for kind in SENSOR_ORDER:
        if kind not in bundle.beta:
            raise ValueError(f"bundle is missing the {kind.value} decision model")
        for config in configs[kind]:
            agents.append(
                TrainedAgent(
                    config,
                    bundle.beta[kind],
                    _omega_method(bundle, config),
                    _alpha_policy(bundle, config),
                )
            )
    return agents


def train_agents(
    train: Dataset,
    sweep: dict | None,
    neat_cfg: NeatConfig,
    fga_cfg: FgaConfig,
    seed: int,
    terrain: Terrain | None = None,
) -> list[TrainedAgent]:
    """Convenience wrapper: train the bundle, then bind the sweep to it."""
    bundle = train_models(train, sweep, neat_cfg, fga_cfg, seed, terrain)
    return build_agents(bundle, sweep)


# --- evaluation ---------------------------------------------------------------


@dataclass(frozen=True)
class MetricSet:
    """Threshold metrics plus the ROC for one score stream."""

    accuracy: float
    rmse: float
    auc: float
    roc: RocCurve

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "rmse": self.rmse,
            "auc": self.auc,
            "roc": [[p[0], p[1]] for p in self.roc.points],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricSet":
        curve = RocCurve(tuple((float(f), float(t)) for f, t in doc["roc"]))
        return cls(float(doc["accuracy"]), float(doc["rmse"]), float(doc["auc"]), curve)


def metric_set(scores: Sequence[float], labels: Sequence[bool]) -> MetricSet:
    """Score a stream against its labels at the standing 0.5 threshold."""
    cm = confusion(scores, labels, DECISION_THRESHOLD)
    _, _, acc = rates(cm)
    curve = roc(scores, labels)
    targets = [1.0 if t else 0.0 for t in labels]
    return MetricSet(acc, rmse(targets, scores), auc(curve), curve)


def _beta_table(
    beta_models: dict[SensorKind, NetGenome], samples: Sequence[Sample]
) -> list[BetaSet]:
    nets = {kind: compile_network(beta_models[kind]) for kind in SENSOR_ORDER}
    return [
        BetaSet(tuple(nets[kind](s.features[kind]) for kind in SENSOR_ORDER))
        for s in samples
    ]


@dataclass
class Evaluation:
    """Per-sensor and per-agent scores for one dataset pass."""

    labels: list[bool]
    beta_scores: dict[SensorKind, list[float]]
    beta_metrics: dict[SensorKind, MetricSet]
    omega_scores: list[list[float]]
    omega_metrics: list[MetricSet]
    system_accuracy: float | None


def _omega_stream(
    method: OmegaMethod, beta_sets: Sequence[BetaSet], net_cache: dict[int, object]
) -> list[float]:
    if method.symbol == "N":
        key = id(method.model)
        if key not in net_cache:
            net_cache[key] = compile_network(method.model)
        net = net_cache[key]
        return [net(bs.values) for bs in beta_sets]
    if method.symbol == "F":
        table = np.array([bs.values for bs in beta_sets], dtype=float)
        return [float(v) for v in fuzzy_infer_batch(method.model, table)]
    return [omega(bs, method) for bs in beta_sets]


def evaluate(agents: Sequence[TrainedAgent], data: Dataset) -> Evaluation:
    """Score every agent on the dataset; adds the team verdict for full teams.

    Requires one shared local model per sensor and coverage of all five
    sensors, because every cooperative decision reads the full broadcast.
    """
    if not agents:
        raise ValueError("need at least one agent")
    beta_models: dict[SensorKind, NetGenome] = {}
    for agent in agents:
        kind = agent.config.sensor
        seen = beta_models.get(kind)
        if seen is None:
            beta_models[kind] = agent.beta_model
        elif seen != agent.beta_model:
            raise ValueError(f"agents disagree on the {kind.value} local model")
    if set(beta_models) != set(SENSOR_ORDER):
        raise ValueError("agents must cover all five sensors")
    samples = data.samples
    labels = [s.label for s in samples]
    beta_sets = _beta_table(beta_models, samples)
    beta_scores = {
        kind: [bs.values[i] for bs in beta_sets]
        for i, kind in enumerate(SENSOR_ORDER)
    }
    beta_metrics = {
        kind: metric_set(beta_scores[kind], labels) for kind in SENSOR_ORDER
    }
    net_cache: dict[int, object] = {}
    omega_scores = [
        _omega_stream(agent.omega_method, beta_sets, net_cache) for agent in agents
    ]
    omega_metrics = [metric_set(stream, labels) for stream in omega_scores]
    system_accuracy = None
    if len(agents) == len(SENSOR_ORDER):
        by_kind = {agent.config.sensor: i for i, agent in enumerate(agents)}
        hits = 0
        for row, label in enumerate(labels):
            omegas = [omega_scores[by_kind[kind]][row] for kind in SENSOR_ORDER]
            _, _, verdict = system_decision(omegas)
            hits += verdict == label
        system_accuracy = hits / len(labels)
    return Evaluation(
        labels, beta_scores, beta_metrics, omega_scores, omega_metrics, system_accuracy
    )


# --- per-unit results ---------------------------------------------------------


@dataclass(frozen=True)
class AgentOutcome:
    """One sensor's line in the summary: local metrics plus its best variant."""

    sensor: SensorKind
    beta_train: MetricSet
    beta_validation: MetricSet
    best_config: AgentConfig
    omega_train: MetricSet
    omega_validation: MetricSet


@dataclass(frozen=True)
class OmegaRecord:
    """A single highlighted cooperative variant with both stage metrics."""

    config: AgentConfig
    train: MetricSet
    validation: MetricSet


@dataclass(frozen=True)
class CaseResult:
    """Everything one (case, seed) unit contributes to the report."""

    case: SplitCase
    seed: int
    agents: tuple[AgentOutcome, ...]
    best_omega: OmegaRecord
    worst_omega: OmegaRecord
    auc_distribution: dict[str, tuple[tuple[str, str, str, float], ...]]
    system_accuracy: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "case": self.case.name,
            "region_boundary": self.case.region_boundary,
            "seed": self.seed,
            "agents": [
                {
                    "sensor": a.sensor.value,
                    "beta_train": a.beta_train.to_dict(),
                    "beta_validation": a.beta_validation.to_dict(),
                    "best_config": _config_to_dict(a.best_config),
                    "omega_train": a.omega_train.to_dict(),
                    "omega_validation": a.omega_validation.to_dict(),
                }
                for a in self.agents
            ],
            "best_omega": _record_to_dict(self.best_omega),
            "worst_omega": _record_to_dict(self.worst_omega),
            "auc_distribution": {
                stage: [list(row) for row in rows]
                for stage, rows in self.auc_distribution.items()
            },
            "system_accuracy": dict(self.system_accuracy),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CaseResult":
        name = doc["case"]
        boundary = doc.get("region_boundary")
        case = SplitCase(name, boundary if name == "C3" else None)
        agents = tuple(
            AgentOutcome(
                SensorKind(a["sensor"]),
                MetricSet.from_dict(a["beta_train"]),
                MetricSet.from_dict(a["beta_validation"]),
                _config_from_dict(a["best_config"]),
                MetricSet.from_dict(a["omega_train"]),
                MetricSet.from_dict(a["omega_validation"]),
            )
            for a in doc["agents"]
        )
        dist = {
            stage: tuple(
                (str(s), str(al), str(om), float(v)) for s, al, om, v in rows
            )
            for stage, rows in doc["auc_distribution"].items()
        }
        return cls(
            case,
            int(doc["seed"]),
            agents,
            _record_from_dict(doc["best_omega"]),
            _record_from_dict(doc["worst_omega"]),
            dist,
            {stage: float(v) for stage, v in doc["system_accuracy"].items()},
        )


def _config_to_dict(config: AgentConfig) -> dict:
    return {
        "sensor": config.sensor.value,
        "alpha": config.alpha,
        "beta": config.beta,
        "omega": config.omega,
    }


def _config_from_dict(doc: dict) -> AgentConfig:
    return AgentConfig(SensorKind(doc["sensor"]), doc["alpha"], doc["beta"], doc["omega"])


def _record_to_dict(record: OmegaRecord) -> dict:
    return {
        "config": _config_to_dict(record.config),
        "train": record.train.to_dict(),
        "validation": record.validation.to_dict(),
    }


def _record_from_dict(doc: dict) -> OmegaRecord:
    return OmegaRecord(
        _config_from_dict(doc["config"]),
        MetricSet.from_dict(doc["train"]),
        MetricSet.from_dict(doc["validation"]),
    )


def _select_best(
    agents: Sequence[TrainedAgent], val: Evaluation, indices: Sequence[int]
) -> int:
    """Highest validation accuracy; break ties by RMSE, then sweep order."""
    def key(pos: int) -> tuple[float, float, int]:
        i = indices[pos]
        m = val.omega_metrics[i]
        return (-m.accuracy, m.rmse, pos)

    return indices[min(range(len(indices)), key=key)]


def run_unit(
    dataset: Dataset,
    case: SplitCase,
    sweep: dict | None,
    neat_cfg: NeatConfig,
    fga_cfg: FgaConfig,
    seed: int,
    terrain: Terrain | None = None,
) -> CaseResult:
    """Train and evaluate one (case, seed) unit end to end."""
    log.info("unit %s seed %d: splitting and training", case.name, seed)
    train, val = split(dataset, case)
    overlap = {s.id for s in train.samples} & {s.id for s in val.samples}
    if overlap:
        raise ValueError(f"split leaked sample ids across stages: {sorted(overlap)[:5]}")
    bundle = train_models(train, sweep, neat_cfg, fga_cfg, seed, terrain)
    agents = build_agents(bundle, sweep)
    ev_train = evaluate(agents, train)
    ev_val = evaluate(agents, val)

    by_kind: dict[SensorKind, list[int]] = {kind: [] for kind in SENSOR_ORDER}
    for i, agent in enumerate(agents):
        by_kind[agent.config.sensor].append(i)
    best_by_kind = {
        kind: _select_best(agents, ev_val, by_kind[kind]) for kind in SENSOR_ORDER
    }
    outcomes = tuple(
        AgentOutcome(
            kind,
            ev_train.beta_metrics[kind],
            ev_val.beta_metrics[kind],
            agents[best_by_kind[kind]].config,
            ev_train.omega_metrics[best_by_kind[kind]],
            ev_val.omega_metrics[best_by_kind[kind]],
        )
        for kind in SENSOR_ORDER
    )
    best_index = _select_best(agents, ev_val, list(range(len(agents))))
    worst_index = min(
        range(len(agents)), key=lambda i: (ev_val.omega_metrics[i].auc, -i)
    )
    best_record = OmegaRecord(
        agents[best_index].config,
        ev_train.omega_metrics[best_index],
        ev_val.omega_metrics[best_index],
    )
    worst_record = OmegaRecord(
        agents[worst_index].config,
        ev_train.omega_metrics[worst_index],
        ev_val.omega_metrics[worst_index],
    )
    dist = {
        "train": tuple(
            (a.config.sensor.value, a.config.alpha, a.config.omega, m.auc)
            for a, m in zip(agents, ev_train.omega_metrics)
        ),
        "validation": tuple(
            (a.config.sensor.value, a.config.alpha, a.config.omega, m.auc)
            for a, m in zip(agents, ev_val.omega_metrics)
        ),
    }
    team = [agents[best_by_kind[kind]] for kind in SENSOR_ORDER]
    system = {
        "train": evaluate(team, train).system_accuracy,
        "validation": evaluate(team, val).system_accuracy,
    }
    log.info(
        "unit %s seed %d: best %s val acc %.3f",
        case.name,
        seed,
        best_record.config.label,
        best_record.validation.accuracy,
    )
    return CaseResult(case, seed, outcomes, best_record, worst_record, dist, system)


def _run_unit_packed(args: tuple) -> CaseResult:
    return run_unit(*args)


def run_study(
    dataset: Dataset,
    cases: Sequence[SplitCase],
    sweep: dict | None,
    neat_cfg: NeatConfig,
    fga_cfg: FgaConfig,
    seeds: Sequence[int],
    jobs: int = 1,
    terrain: Terrain | None = None,
) -> list[CaseResult]:
    """Run every (case, seed) unit, optionally across worker processes.

    Each unit derives all randomness from its own seed, so the result list
    is identical whatever the job count.
    """
    if not cases:
        raise ValueError("need at least one split case")
    if not seeds:
        raise ValueError("need at least one seed")
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    units = [
        (dataset, case, sweep, neat_cfg, fga_cfg, seed, terrain)
        for case in cases
        for seed in seeds
    ]
    if jobs == 1 or len(units) == 1:
        return [_run_unit_packed(u) for u in units]
    with ProcessPoolExecutor(max_workers=min(jobs, len(units))) as pool:
        return list(pool.map(_run_unit_packed, units))


def save_results(results: Sequence[CaseResult], path: str) -> None:
    doc = {"format": RESULTS_FORMAT, "results": [r.to_dict() for r in results]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_results(path: str) -> list[CaseResult]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or doc.get("format") != RESULTS_FORMAT:
        raise ValueError(f"{path}: not a {RESULTS_FORMAT} file")
    return [CaseResult.from_dict(d) for d in doc["results"]]


# --- report -------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _summary_rows(result: CaseResult) -> list[dict]:
    rows = []
    for outcome in result.agents:
        rows.append(
            {
                "agent": outcome.sensor.value,
                "level": "beta",
                "alpha": "-",
                "omega": "-",
                "train": outcome.beta_train,
                "validation": outcome.beta_validation,
            }
        )
    for outcome in result.agents:
        rows.append(
            {
                "agent": outcome.sensor.value,
                "level": "omega",
                "alpha": outcome.best_config.alpha,
                "omega": outcome.best_config.omega,
                "train": outcome.omega_train,
                "validation": outcome.omega_validation,
            }
        )
    return rows


_METRIC_COLUMNS = (
    ("train_acc", "train", "accuracy", max),
    ("train_rmse", "train", "rmse", min),
    ("train_auc", "train", "auc", max),
    ("val_acc", "validation", "accuracy", max),
    ("val_rmse", "validation", "rmse", min),
    ("val_auc", "validation", "auc", max),
)


def _write_summary(result: CaseResult, path: str) -> None:
    rows = _summary_rows(result)
    bests = {
        name: pick(getattr(row[stage], attr) for row in rows)
        for name, stage, attr, pick in _METRIC_COLUMNS
    }
    header = ["agent", "level", "alpha", "omega"]
    header += [name for name, *_ in _METRIC_COLUMNS]
    header += [f"{name}_best" for name, *_ in _METRIC_COLUMNS]
    lines = [",".join(header)]
    for row in rows:
        cells = [row["agent"], row["level"], row["alpha"], row["omega"]]
        for name, stage, attr, _ in _METRIC_COLUMNS:
            cells.append(_fmt(getattr(row[stage], attr)))
        for name, stage, attr, _ in _METRIC_COLUMNS:
            cells.append("1" if getattr(row[stage], attr) == bests[name] else "0")
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_auc_table(result: CaseResult, path: str) -> None:
    lines = ["stage,agent,alpha,omega,auc"]
    for stage in STAGES:
        for sensor, alpha, omega_symbol, value in result.auc_distribution[stage]:
            lines.append(f"{stage},{sensor},{alpha},{omega_symbol},{_fmt(value)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def report(results: Sequence[CaseResult], out_dir: str) -> list[str]:
    """Write the per-unit summary, ROC, and AUC tables; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def emit_roc(curve: RocCurve, name: str) -> None:
        path = os.path.join(out_dir, name)
        write_roc_csv(curve, path)
        written.append(path)

    for result in results:
        tag = f"{result.case.name}_seed{result.seed}"
        summary_path = os.path.join(out_dir, f"summary_{tag}.csv")
        _write_summary(result, summary_path)
        written.append(summary_path)
        auc_path = os.path.join(out_dir, f"auc_{tag}.csv")
        _write_auc_table(result, auc_path)
        written.append(auc_path)
        for outcome in result.agents:
            sensor = outcome.sensor.value
            emit_roc(outcome.beta_train.roc, f"roc_{tag}_{sensor}_beta_train.csv")
            emit_roc(
                outcome.beta_validation.roc, f"roc_{tag}_{sensor}_beta_validation.csv"
            )
            emit_roc(outcome.omega_train.roc, f"roc_{tag}_{sensor}_omega_train.csv")
            emit_roc(
                outcome.omega_validation.roc, f"roc_{tag}_{sensor}_omega_validation.csv"
            )
        emit_roc(result.worst_omega.train.roc, f"roc_{tag}_worst_omega_train.csv")
        emit_roc(
            result.worst_omega.validation.roc, f"roc_{tag}_worst_omega_validation.csv"
        )
    return written


# --- study configuration --------------------------------------------------------


@dataclass(frozen=True)
class StudyConfig:
    """Everything a study run needs besides the output directory."""

    generator: GenConfig | None
    dataset_path: str | None
    cases: tuple[SplitCase, ...]
    sweep: dict[str, tuple[str, ...]]
    neat: NeatConfig
    fuzzy: FgaConfig
    seeds: tuple[int, ...]


_STUDY_KEYS = {
    "dataset",
    "generator",
    "cases",
    "region_boundary",
    "sweep",
    "neat",
    "fuzzy",
    "seeds",
}


def _config_from_fields(cls, doc: dict, what: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - names
    if unknown:
        raise ValueError(f"{what} has unknown fields: {sorted(unknown)}")
    coerced = dict(doc)
    for key in ("compatibility_coeffs", "crossover_weights"):
        if key in coerced:
            coerced[key] = tuple(coerced[key])
    return cls(**coerced)


def study_config_from_dict(doc: dict) -> StudyConfig:
    if not isinstance(doc, dict):
        raise ValueError("study configuration must be a JSON object")
    unknown = set(doc) - _STUDY_KEYS
    if unknown:
        raise ValueError(f"study configuration has unknown fields: {sorted(unknown)}")
    has_dataset = "dataset" in doc
    has_generator = "generator" in doc
    if has_dataset == has_generator:
        raise ValueError("study configuration needs exactly one of dataset/generator")
    generator = None
    dataset_path = None
    if has_generator:
        from .synthgen import config_from_dict

        generator = config_from_dict(doc["generator"])
    else:
        dataset_path = doc["dataset"]
        if not isinstance(dataset_path, str) or not dataset_path:
            raise ValueError("dataset must be a non-empty path string")
    boundary = doc.get("region_boundary", DEFAULT_REGION_BOUNDARY)
    case_names = doc.get("cases", ["C1", "C2", "C3"])
    if not case_names:
        raise ValueError("cases must list at least one split case")
    cases = tuple(
        SplitCase.C3(boundary) if name == "C3" else SplitCase(name)
        for name in case_names
    )
    sweep = normalize_sweep(doc.get("sweep"))
    neat = _config_from_fields(NeatConfig, doc.get("neat", {}), "neat configuration")
    fuzzy = _config_from_fields(FgaConfig, doc.get("fuzzy", {}), "fuzzy configuration")
    seeds = tuple(int(s) for s in doc.get("seeds", [0]))
    if not seeds:
        raise ValueError("seeds must list at least one seed")
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    return StudyConfig(generator, dataset_path, cases, sweep, neat, fuzzy, seeds)


def load_study_config(path: str) -> StudyConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    return study_config_from_dict(doc)


# --- model bundle persistence ----------------------------------------------------

_BUNDLE_GROUPS = ("beta", "omega_ann", "omega_fuzzy", "alpha_ann", "alpha_fuzzy")


def save_bundle(bundle: ModelBundle, sweep: dict | None, out_dir: str) -> str:
    """Write each model plus a manifest; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    manifest: dict = {
        "format": MODELS_FORMAT,
        "seed": bundle.seed,
        "sweep": {k: list(v) for k, v in normalize_sweep(sweep).items()},
        "models": {},
    }
    for group in _BUNDLE_GROUPS:
        table: dict[SensorKind, object] = getattr(bundle, group)
        entry = {}
        for kind in SENSOR_ORDER:
            if kind not in table:
                continue
            name = f"{group}_{kind.value}.json"
            save_model(table[kind], os.path.join(out_dir, name))
            entry[kind.value] = name
        manifest["models"][group] = entry
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def load_bundle(model_dir: str) -> tuple[ModelBundle, dict[str, tuple[str, ...]]]:
    """Read a manifest directory back into a bundle and its sweep."""
    path = os.path.join(model_dir, "manifest.json")
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or doc.get("format") != MODELS_FORMAT:
        raise ValueError(f"{path}: not a {MODELS_FORMAT} manifest")
    sweep = normalize_sweep({k: tuple(v) for k, v in doc["sweep"].items()})
    bundle = ModelBundle(int(doc["seed"]), {}, {}, {}, {}, {})
    for group in _BUNDLE_GROUPS:
        entry = doc["models"].get(group, {})
        table = getattr(bundle, group)
        for name, file_name in entry.items():
            table[SensorKind(name)] = load_model(os.path.join(model_dir, file_name))
    return bundle, sweep
