"""Sample data model, the on-disk dataset format, and train/validation splits.

A dataset is a flat UTF-8 text file:

    cod2m-dataset v1
    dims VS=4 IR=4 UV=4 TM=4 GP=4 terrain=670x1100
    <id>,<day>,<time_of_day>,<illumination>,<humidity>,<x>,<y>,<label>,VS:v;v;..,IR:..,UV:..,TM:..,GP:..

One record per line, sample order preserved. Reals are written with 17
significant digits so that save -> load is bit-exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

MAGIC = "cod2m-dataset v1"
TIMES_OF_DAY = ("morning", "afternoon")
DEFAULT_REGION_BOUNDARY = 550.0


class DatasetError(ValueError):
    """Malformed dataset file or violated dataset invariant."""


class SensorKind(enum.Enum):
    """The five on-board sensors, in canonical order."""

    VS = "VS"  # visible-spectrum camera
    IR = "IR"  # infrared camera
    UV = "UV"  # ultraviolet camera
    TM = "TM"  # thermal imager
    GP = "GP"  # ground-penetrating radar

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


SENSOR_ORDER: tuple[SensorKind, ...] = (
    SensorKind.VS,
    SensorKind.IR,
    SensorKind.UV,
    SensorKind.TM,
    SensorKind.GP,
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Condition:
    """Acquisition-time environment for one campaign day."""

    day: int
    illumination: float
    humidity: float
    time_of_day: str

    def __post_init__(self) -> None:
        if self.day not in (1, 2):
            raise DatasetError(f"day must be 1 or 2, got {self.day}")
        if not 0.0 <= self.illumination <= 1.0:
            raise DatasetError(f"illumination out of [0, 1]: {self.illumination}")
        if not 0.0 <= self.humidity <= 1.0:
            raise DatasetError(f"humidity out of [0, 1]: {self.humidity}")
        if self.time_of_day not in TIMES_OF_DAY:
            raise DatasetError(f"time_of_day must be one of {TIMES_OF_DAY}, got {self.time_of_day!r}")


@dataclass(frozen=True)
class Sample:
    """One acquisition: position, conditions, per-sensor features, truth label."""

    id: int
    position: tuple[float, float]
    condition: Condition
    features: dict[SensorKind, tuple[float, ...]]
    label: bool


@dataclass(frozen=True)
class DatasetHeader:
    """Per-sensor feature dimensions plus terrain bounds in mm."""

    dims: dict[SensorKind, int]
    terrain: tuple[float, float] = (670.0, 1100.0)

    def __post_init__(self) -> None:
        if set(self.dims) != set(SENSOR_ORDER):
            raise DatasetError("header must declare dimensions for exactly the five sensors")
        for kind, dim in self.dims.items():
            if not isinstance(dim, int) or dim < 1:
                raise DatasetError(f"feature dimension for {kind.value} must be a positive integer")
        width, height = self.terrain
        if width <= 0 or height <= 0:
            raise DatasetError("terrain bounds must be positive")


def _check_sample(sample: Sample, header: DatasetHeader) -> None:
    sid = sample.id
    if not isinstance(sid, int) or sid < 0:
        raise DatasetError(f"sample id must be a non-negative integer, got {sid!r}")
    x, y = sample.position
    width, height = header.terrain
    if not (0.0 <= x <= width and 0.0 <= y <= height):
        raise DatasetError(f"sample {sid}: position ({x}, {y}) outside terrain {width}x{height}")
    if set(sample.features) != set(SENSOR_ORDER):
        raise DatasetError(f"sample {sid}: features must cover exactly the five sensors")
    for kind in SENSOR_ORDER:
        vec = sample.features[kind]
        if len(vec) != header.dims[kind]:
            raise DatasetError(
                f"sample {sid}: {kind.value} vector has length {len(vec)}, "
                f"header declares {header.dims[kind]}"
            )
        for v in vec:
            if isinstance(v, bool) or not (
                isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0
            ):
                raise DatasetError(f"sample {sid}: {kind.value} feature {v!r} outside [0, 1]")
    if not isinstance(sample.label, bool):
        raise DatasetError(f"sample {sid}: label must be a bool")


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of samples consistent with one header."""

    header: DatasetHeader
    samples: tuple[Sample, ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for sample in self.samples:
            _check_sample(sample, self.header)
            if sample.id in seen:
                raise DatasetError(f"duplicate sample id {sample.id}")
            seen.add(sample.id)
        labels = {s.label for s in self.samples}
        if labels != {True, False}:
            raise DatasetError("dataset must contain at least one IED and one non-IED sample")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class SplitCase:
    """One of the three train/validation split definitions.

    C1: train on day 1, validate on day 2.
    C2: train on day 2, validate on day 1.
    C3: train where y < region_boundary (both days), validate on the rest.
    """

    name: str
    region_boundary: float | None = None

    def __post_init__(self) -> None:
        if self.name not in ("C1", "C2", "C3"):
            raise DatasetError(f"unknown split case {self.name!r}")
        if self.name == "C3":
            if self.region_boundary is None or not self.region_boundary > 0:
                raise DatasetError("C3 requires a positive region_boundary")
        elif self.region_boundary is not None:
            raise DatasetError(f"{self.name} does not take a region_boundary")

    @classmethod
    def C1(cls) -> "SplitCase":
        return cls("C1")

    @classmethod
    def C2(cls) -> "SplitCase":
        return cls("C2")

    @classmethod
    def C3(cls, region_boundary: float = DEFAULT_REGION_BOUNDARY) -> "SplitCase":
        return cls("C3", region_boundary)


def split(dataset: Dataset, case: SplitCase) -> tuple[Dataset, Dataset]:
    """Partition a dataset into (train, validation) per the split case.

    Sample order is preserved in both halves. Raises DatasetError when the
    case's requirements are not met (a missing day for C1/C2, or a region
    missing one of the two classes for C3).
    """
    if case.name == "C1":
        train = [s for s in dataset.samples if s.condition.day == 1]
        val = [s for s in dataset.samples if s.condition.day == 2]
        if not train or not val:
            raise DatasetError("C1 requires samples from both days")
    elif case.name == "C2":
        train = [s for s in dataset.samples if s.condition.day == 2]
        val = [s for s in dataset.samples if s.condition.day == 1]
        if not train or not val:
            raise DatasetError("C2 requires samples from both days")
    else:
        boundary = case.region_boundary
        train = [s for s in dataset.samples if s.position[1] < boundary]
        val = [s for s in dataset.samples if s.position[1] >= boundary]
        for side, part in (("train", train), ("validation", val)):
            labels = {s.label for s in part}
            if labels != {True, False}:
                missing = "IED" if True not in labels else "non-IED"
                raise DatasetError(
                    f"C3 stratification failed: {side} region has no {missing} samples"
                )
    try:
        return (
            Dataset(dataset.header, tuple(train)),
            Dataset(dataset.header, tuple(val)),
        )
    except DatasetError as exc:
        raise DatasetError(f"{case.name} split produced an invalid subset: {exc}") from exc


def save_dataset(dataset: Dataset, path: str) -> None:
    """Write a dataset in the canonical text format."""
    lines = [MAGIC]
    dims = " ".join(f"{k.value}={dataset.header.dims[k]}" for k in SENSOR_ORDER)
    width, height = dataset.header.terrain
    lines.append(f"dims {dims} terrain={format(width, 'g')}x{format(height, 'g')}")
    for s in dataset.samples:
        sensors = ",".join(
            f"{k.value}:" + ";".join(_fmt(v) for v in s.features[k]) for k in SENSOR_ORDER
        )
        c = s.condition
        lines.append(
            f"{s.id},{c.day},{c.time_of_day},{_fmt(c.illumination)},{_fmt(c.humidity)},"
            f"{_fmt(s.position[0])},{_fmt(s.position[1])},{int(s.label)},{sensors}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise DatasetError(f"{what}: not an integer: {text!r}") from None


def _parse_float(text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DatasetError(f"{what}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise DatasetError(f"{what}: non-finite value {text!r}")
    return value


def _parse_header(line: str) -> DatasetHeader:
    parts = line.split()
    if not parts or parts[0] != "dims":
        raise DatasetError("header line must start with 'dims'")
    dims: dict[SensorKind, int] = {}
    terrain: tuple[float, float] | None = None
    for token in parts[1:]:
        key, _, value = token.partition("=")
        if not value:
            raise DatasetError(f"malformed header token {token!r}")
        if key == "terrain":
            w, _, h = value.partition("x")
            terrain = (_parse_float(w, "terrain width"), _parse_float(h, "terrain height"))
        elif key in SensorKind.__members__:
            dims[SensorKind[key]] = _parse_int(value, f"{key} dimension")
        else:
            raise DatasetError(f"unknown header field {key!r}")
    if terrain is None:
        raise DatasetError("header missing terrain bounds")
    return DatasetHeader(dims, terrain)


def _parse_record(line: str, lineno: int, header: DatasetHeader) -> Sample:
    fields = line.split(",")
    if len(fields) != 8 + len(SENSOR_ORDER):
        raise DatasetError(f"line {lineno}: expected {8 + len(SENSOR_ORDER)} fields, got {len(fields)}")
    sid = _parse_int(fields[0], f"line {lineno} id")
    where = f"sample {sid}"
    condition = Condition(
        day=_parse_int(fields[1], f"{where} day"),
        time_of_day=fields[2],
        illumination=_parse_float(fields[3], f"{where} illumination"),
        humidity=_parse_float(fields[4], f"{where} humidity"),
    )
    position = (
        _parse_float(fields[5], f"{where} x"),
        _parse_float(fields[6], f"{where} y"),
    )
    if fields[7] not in ("0", "1"):
        raise DatasetError(f"{where}: label must be 0 or 1, got {fields[7]!r}")
    features: dict[SensorKind, tuple[float, ...]] = {}
    for kind, field in zip(SENSOR_ORDER, fields[8:]):
        prefix, _, payload = field.partition(":")
        if prefix != kind.value:
            raise DatasetError(f"{where}: expected {kind.value} vector, found {prefix!r}")
        features[kind] = tuple(
            _parse_float(v, f"{where} {kind.value} feature") for v in payload.split(";")
        )
        if len(features[kind]) != header.dims[kind]:
            raise DatasetError(
                f"{where}: {kind.value} vector has length {len(features[kind])}, "
                f"header declares {header.dims[kind]}"
            )
    return Sample(sid, position, condition, features, fields[7] == "1")


def load_dataset(path: str) -> Dataset:
    """Parse a dataset file, validating every invariant."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MAGIC:
        raise DatasetError(f"not a {MAGIC} file")
    if len(lines) < 2:
        raise DatasetError("missing header line")
    header = _parse_header(lines[1])
    samples = tuple(
        _parse_record(line, lineno, header)
        for lineno, line in enumerate(lines[2:], start=3)
        if line
    )
    return Dataset(header, samples)
