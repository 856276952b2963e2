"""Deterministic synthetic two-day acquisition campaign over a scanned terrain.

The terrain is a rectangle scanned on a fixed-step grid with a handful of
buried objects at known coordinates. A sample's label is purely geometric:
true iff the scan position lies within the object radius of some object.
Features derive from a Gaussian proximity kernel of the distance from the
effective sensing point (the scan position shifted along the scan axis by
the acquisition angle), warped per sensor kind, then degraded by the day's
conditions: a deterministic illumination bias on the derived channels, a
deterministic contrast washout toward mid-scale that grows with
illumination deficit and humidity, one zero-mean Gaussian environment
jitter per acquisition that shifts every sensor's gain in proportion to
its condition susceptibility, and small independent per-channel noise.
Everything is reproducible from the seed.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass

from .dataset import (
    DEFAULT_REGION_BOUNDARY,
    SENSOR_ORDER,
    Condition,
    Dataset,
    DatasetError,
    DatasetHeader,
    Sample,
    SensorKind,
)

REFERENCE_ILLUMINATION = 0.8  # bright morning; bias, washout, and extra noise vanish here
ILLUMINATION_BIAS_GAIN = 0.25
WASHOUT_ILLUMINATION_GAIN = 1.0
WASHOUT_HUMIDITY_GAIN = 0.3
WASHOUT_CEILING = 0.9
NOISE_ILLUMINATION_GAIN = 8.0
NOISE_HUMIDITY_GAIN = 6.0
FEATURE_DIMS = 4

# warp exponent for the derived channels, one per sensor kind
_SHAPE_EXPONENT = {
    SensorKind.VS: 0.6,
    SensorKind.IR: 0.9,
    SensorKind.UV: 1.3,
    SensorKind.TM: 1.7,
    SensorKind.GP: 2.2,
}


@dataclass(frozen=True)
class Terrain:
    """Scanned rectangle (mm), grid step, and buried-object geometry."""

    width: float = 670.0
    height: float = 1100.0
    scan_step: float = 50.0
    ied_positions: tuple[tuple[float, float], ...] = ((550.0, 250.0), (350.0, 600.0), (500.0, 850.0))
    ied_radius: float = 75.0

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("terrain bounds must be positive")
        if self.scan_step <= 0:
            raise ValueError("scan step must be positive")
        if self.ied_radius <= 0:
            raise ValueError("object radius must be positive")
        if not self.ied_positions:
            raise ValueError("terrain needs at least one buried object")
        for x, y in self.ied_positions:
            if not (0.0 <= x <= self.width and 0.0 <= y <= self.height):
                raise ValueError(f"object at ({x}, {y}) outside terrain bounds")


def default_terrain() -> Terrain:
    return Terrain()


def grid_positions(terrain: Terrain) -> list[tuple[float, float]]:
    """All scan positions: the step-aligned lattice covering the terrain."""
    xs = [i * terrain.scan_step for i in range(int(terrain.width // terrain.scan_step) + 1)]
    ys = [j * terrain.scan_step for j in range(int(terrain.height // terrain.scan_step) + 1)]
    return [(x, y) for x in xs for y in ys]


@dataclass(frozen=True)
class SensorModel:
    """Response and degradation parameters for one sensor kind."""

    kind: SensorKind
    noise_sigma: float
    illumination_sensitivity: float
    humidity_sensitivity: float
    dims: int = FEATURE_DIMS

    def __post_init__(self) -> None:
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        for name in ("illumination_sensitivity", "humidity_sensitivity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not 1 <= self.dims <= FEATURE_DIMS:
            raise ValueError(f"dims must lie in [1, {FEATURE_DIMS}]")


DEFAULT_SENSOR_MODELS: dict[SensorKind, SensorModel] = {
    SensorKind.VS: SensorModel(SensorKind.VS, 0.030, 0.90, 0.80),
    SensorKind.IR: SensorModel(SensorKind.IR, 0.030, 0.40, 0.60),
    SensorKind.UV: SensorModel(SensorKind.UV, 0.030, 0.70, 0.70),
    SensorKind.TM: SensorModel(SensorKind.TM, 0.035, 0.00, 0.75),
    SensorKind.GP: SensorModel(SensorKind.GP, 0.032, 0.00, 0.72),
}

DEFAULT_DAY_CONDITIONS = (
    Condition(day=1, illumination=0.8, humidity=0.1, time_of_day="morning"),
    Condition(day=2, illumination=0.35, humidity=0.9, time_of_day="afternoon"),
)


def ideal_features(model: SensorModel, distance: float, ied_radius: float, cond: Condition) -> tuple[float, ...]:
    """Noise-free response: proximity kernel plus per-kind warped channels.

    Channel 0 is the pure proximity kernel; channels 1..3 are fixed
    nonlinear transforms of it plus the deterministic illumination bias.
    """
    sigma = ied_radius / 2.0
    f0 = math.exp(-(distance * distance) / (2.0 * sigma * sigma))
    p = _SHAPE_EXPONENT[model.kind]
    bias = model.illumination_sensitivity * (REFERENCE_ILLUMINATION - cond.illumination) * ILLUMINATION_BIAS_GAIN
    channels = [f0, f0**p, 1.0 - (1.0 - f0) ** p, 4.0 * f0 * (1.0 - f0)]
    out = [channels[0]]
    out.extend(min(1.0, max(0.0, ch + bias)) for ch in channels[1 : model.dims])
    return tuple(out)


def noise_scale(model: SensorModel, cond: Condition) -> float:
    """Gaussian noise level; poor light and damp ground amplify the floor."""
    deficit = max(0.0, REFERENCE_ILLUMINATION - cond.illumination)
    return model.noise_sigma * (
        1.0
        + model.illumination_sensitivity * deficit * NOISE_ILLUMINATION_GAIN
        + model.humidity_sensitivity * cond.humidity * NOISE_HUMIDITY_GAIN
    )


def washout_amount(model: SensorModel, cond: Condition) -> float:
    """Deterministic contrast collapse toward mid-scale under these conditions."""
    deficit = max(0.0, REFERENCE_ILLUMINATION - cond.illumination)
    w = (
        model.illumination_sensitivity * deficit * WASHOUT_ILLUMINATION_GAIN
        + model.humidity_sensitivity * cond.humidity * WASHOUT_HUMIDITY_GAIN
    )
    return min(WASHOUT_CEILING, w)


@dataclass(frozen=True)
class GenConfig:
    terrain: Terrain
    samples_per_day: int
    day_conditions: tuple[Condition, Condition]
    sensor_models: dict[SensorKind, SensorModel]
    seed: int

    def __post_init__(self) -> None:
        if self.samples_per_day < 1:
            raise ValueError("samples_per_day must be positive")
        days = tuple(c.day for c in self.day_conditions)
        if days != (1, 2):
            raise ValueError("day_conditions must describe day 1 then day 2")
        if set(self.sensor_models) != set(SENSOR_ORDER):
            raise ValueError("sensor_models must cover exactly the five sensors")
        for kind, model in self.sensor_models.items():
            if model.kind is not kind:
                raise ValueError(f"sensor model under key {kind.value} describes {model.kind.value}")


def default_config(seed: int = 0, samples_per_day: int = 100) -> GenConfig:
    return GenConfig(
        terrain=default_terrain(),
        samples_per_day=samples_per_day,
        day_conditions=DEFAULT_DAY_CONDITIONS,
        sensor_models=dict(DEFAULT_SENSOR_MODELS),
        seed=seed,
    )


def nearest_object_distance(terrain: Terrain, point: tuple[float, float]) -> float:
    return min(math.dist(point, ied) for ied in terrain.ied_positions)


def acquire_sample(
    terrain: Terrain,
    position: tuple[float, float],
    cond: Condition,
    angle: float,
    rng: random.Random,
    *,
    sensor_models: dict[SensorKind, SensorModel] | None = None,
    sample_id: int = 0,
) -> Sample:
    """Simulate one acquisition at a scan position under given conditions.

    The label depends only on the scan position; the acquisition angle
    shifts the effective sensing point along the scan axis by
    cos(angle) * step/2, changing the features but never the label.
    """
    x, y = position
    if not (0.0 <= x <= terrain.width and 0.0 <= y <= terrain.height):
        raise ValueError(f"position ({x}, {y}) outside terrain bounds")
    if not 0.0 <= angle <= 180.0:
        raise ValueError(f"angle {angle} outside [0, 180] degrees")
    models = DEFAULT_SENSOR_MODELS if sensor_models is None else sensor_models
    label = nearest_object_distance(terrain, position) <= terrain.ied_radius
    effective = (x + math.cos(math.radians(angle)) * terrain.scan_step / 2.0, y)
    sensed_distance = nearest_object_distance(terrain, effective)
    features: dict[SensorKind, tuple[float, ...]] = {}
    # One environment jitter per acquisition: every sensor drifts together,
    # each scaled by its own susceptibility, so neither channel averaging
    # nor cross-sensor fusion can cancel a bad moment.
    env = rng.gauss(0.0, 1.0)
    for kind in SENSOR_ORDER:
        model = models[kind]
        base = ideal_features(model, sensed_distance, terrain.ied_radius, cond)
        w = washout_amount(model, cond)
        offset = env * noise_scale(model, cond)
        values = []
        for v in base:
            v = v * (1.0 - w) + 0.5 * w + offset + rng.gauss(0.0, model.noise_sigma)
            values.append(min(1.0, max(0.0, v)))
        features[kind] = tuple(values)
    return Sample(sample_id, position, cond, features, label)


def _region_classes_ok(terrain: Terrain, positions: list[tuple[float, float]]) -> bool:
    # both default split regions need both classes, else C3 (and potentially
    # C1/C2) could not stratify; mirrors the guarantee the campaign design makes
    for region_filter in (lambda p: p[1] < DEFAULT_REGION_BOUNDARY, lambda p: p[1] >= DEFAULT_REGION_BOUNDARY):
        region = [p for p in positions if region_filter(p)]
        labels = {nearest_object_distance(terrain, p) <= terrain.ied_radius for p in region}
        if labels != {True, False}:
            return False
    return True


def generate_dataset(config: GenConfig) -> Dataset:
    """Run the two-day campaign: same positions both days, per-day conditions."""
    rng = random.Random(config.seed)
    grid = grid_positions(config.terrain)
    if config.samples_per_day > len(grid):
        raise ValueError(
            f"samples_per_day={config.samples_per_day} exceeds the {len(grid)}-position scan grid"
        )
    positions: list[tuple[float, float]] | None = None
    for _ in range(1000):
        candidate = rng.sample(grid, config.samples_per_day)
        if _region_classes_ok(config.terrain, candidate):
            positions = candidate
            break
    if positions is None:
        raise ValueError("could not draw a position sample with both classes in both regions")
    samples: list[Sample] = []
    sample_id = 0
    for cond in config.day_conditions:
        for position in positions:
            samples.append(
                acquire_sample(
                    config.terrain,
                    position,
                    cond,
                    angle=90.0,
                    rng=rng,
                    sensor_models=config.sensor_models,
                    sample_id=sample_id,
                )
            )
            sample_id += 1
    header = DatasetHeader(
        dims={kind: config.sensor_models[kind].dims for kind in SENSOR_ORDER},
        terrain=(config.terrain.width, config.terrain.height),
    )
    return Dataset(header, tuple(samples))


# --- config file round-trip --------------------------------------------------

_GENCONFIG_KEYS = {"terrain", "samples_per_day", "day_conditions", "sensor_models", "seed"}
_TERRAIN_KEYS = {"width", "height", "scan_step", "ied_positions", "ied_radius"}
_CONDITION_KEYS = {"day", "illumination", "humidity", "time_of_day"}
_SENSOR_KEYS = {"noise_sigma", "illumination_sensitivity", "humidity_sensitivity", "dims"}


def _check_keys(doc: dict, allowed: set[str], what: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise DatasetError(f"unknown {what} fields: {sorted(unknown)}")


def config_to_dict(config: GenConfig) -> dict:
    t = config.terrain
    return {
        "terrain": {
            "width": t.width,
            "height": t.height,
            "scan_step": t.scan_step,
            "ied_positions": [list(p) for p in t.ied_positions],
            "ied_radius": t.ied_radius,
        },
        "samples_per_day": config.samples_per_day,
        "day_conditions": [
            {
                "day": c.day,
                "illumination": c.illumination,
                "humidity": c.humidity,
                "time_of_day": c.time_of_day,
            }
            for c in config.day_conditions
        ],
        "sensor_models": {
            kind.value: {
                "noise_sigma": m.noise_sigma,
                "illumination_sensitivity": m.illumination_sensitivity,
                "humidity_sensitivity": m.humidity_sensitivity,
                "dims": m.dims,
            }
            for kind, m in sorted(config.sensor_models.items(), key=lambda kv: SENSOR_ORDER.index(kv[0]))
        },
        "seed": config.seed,
    }


def config_from_dict(doc: dict) -> GenConfig:
    """Build a GenConfig; omitted keys keep defaults, given ones merge over them."""
    _check_keys(doc, _GENCONFIG_KEYS, "generator config")
    base = default_terrain()
    t = doc.get("terrain", {})
    _check_keys(t, _TERRAIN_KEYS, "terrain")
    terrain = Terrain(
        width=float(t.get("width", base.width)),
        height=float(t.get("height", base.height)),
        scan_step=float(t.get("scan_step", base.scan_step)),
        ied_positions=tuple(
            (float(x), float(y)) for x, y in t.get("ied_positions", base.ied_positions)
        ),
        ied_radius=float(t.get("ied_radius", base.ied_radius)),
    )
    conditions = list(DEFAULT_DAY_CONDITIONS)
    for c in doc.get("day_conditions", []):
        _check_keys(c, _CONDITION_KEYS, "condition")
        if "day" not in c:
            raise DatasetError("each day condition override must name its day")
        day = int(c["day"])
        if day not in (1, 2):
            raise DatasetError(f"day must be 1 or 2, got {day}")
        default = DEFAULT_DAY_CONDITIONS[day - 1]
        conditions[day - 1] = Condition(
            day=day,
            illumination=float(c.get("illumination", default.illumination)),
            humidity=float(c.get("humidity", default.humidity)),
            time_of_day=str(c.get("time_of_day", default.time_of_day)),
        )
    sensor_models = dict(DEFAULT_SENSOR_MODELS)
    for key, m in doc.get("sensor_models", {}).items():
        if key not in SensorKind.__members__:
            raise DatasetError(f"unknown sensor kind {key!r}")
        _check_keys(m, _SENSOR_KEYS, "sensor model")
        kind = SensorKind[key]
        default = DEFAULT_SENSOR_MODELS[kind]
        sensor_models[kind] = SensorModel(
            kind=kind,
            noise_sigma=float(m.get("noise_sigma", default.noise_sigma)),
            illumination_sensitivity=float(
                m.get("illumination_sensitivity", default.illumination_sensitivity)
            ),
            humidity_sensitivity=float(
                m.get("humidity_sensitivity", default.humidity_sensitivity)
            ),
            dims=int(m.get("dims", default.dims)),
        )
    return GenConfig(
        terrain=terrain,
        samples_per_day=int(doc.get("samples_per_day", 100)),
        day_conditions=(conditions[0], conditions[1]),
        sensor_models=sensor_models,
        seed=int(doc.get("seed", 0)),
    )


def load_gen_config(path: str) -> GenConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def save_gen_config(config: GenConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(config_to_dict(config), fh, indent=1, sort_keys=True)
        fh.write("\n")
