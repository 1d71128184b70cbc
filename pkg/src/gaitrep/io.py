"""CSV/JSON persistence and run configuration.

All CSV writes serialize floats with ``repr`` (shortest exact decimal, at
most 17 significant digits) so a read-back reproduces every value bit for
bit, and go through a write-temp-then-rename step so a crash never leaves a
half-written file.
"""

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .gait import N_PARAMS, validate_genotype
from .geometry import RegionOfInterest
from .simulator import DEFAULT_REALITY_GAP, PerturbationProfile, RobotModel, WorldParams

GENOTYPE_COLUMNS = [f"g{i:02d}" for i in range(N_PARAMS)]
ARCHIVE_HEADER = (
    ["id", "source"]
    + GENOTYPE_COLUMNS
    + ["ex", "ey", "alpha", "quality", "t_hat", "novelty_at_insert"]
)
METRICS_HEADER = [
    "evaluations",
    "archive_size",
    "sparseness",
    "median_orientation_error",
    "transferable_count",
]
STATS_HEADER = ["generation", "archive_size", "transferable_count", "median_quality"]
TRANSFERS_HEADER = GENOTYPE_COLUMNS + ["sim_ex", "sim_ey", "real_ex", "real_ey", "score"]
TARGETS_HEADER = ["x", "y"]
ACCURACY_HEADER = ["id", "accuracy"]


class ConfigError(ValueError):
    """A configuration document is missing, malformed, or inconsistent."""


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    _atomic_write_text(path, buf.getvalue())


def _read_csv(path, header):
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            first = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        if first != header:
            raise ValueError(f"{path} has unexpected header {first}")
        return [row for row in reader]


@dataclass(frozen=True)
class ArchiveRow:
    """One persisted repertoire member (genotype kept as a plain tuple)."""

    uid: int
    source: str
    genotype: tuple
    ex: float
    ey: float
    alpha: float
    quality: float
    t_hat: float
    novelty_at_insert: float

    def genotype_array(self):
        arr = np.array(self.genotype, dtype=float)
        validate_genotype(arr)
        return arr

    @property
    def endpoint(self):
        return np.array([self.ex, self.ey])


def rows_from_records(records, source):
    """Project in-memory controller records onto the CSV row type."""
    return [
        ArchiveRow(
            uid=r.uid,
            source=source,
            genotype=tuple(float(g) for g in r.genotype),
            ex=float(r.endpoint[0]),
            ey=float(r.endpoint[1]),
            alpha=float(r.outcome.yaw),
            quality=float(r.quality),
            t_hat=float(r.estimated_transfer),
            novelty_at_insert=float(r.novelty_at_insert),
        )
        for r in records
    ]


def write_archive_csv(path, rows):
    _write_csv(
        path,
        ARCHIVE_HEADER,
        (
            [row.uid, row.source]
            + list(row.genotype)
            + [row.ex, row.ey, row.alpha, row.quality, row.t_hat, row.novelty_at_insert]
            for row in rows
        ),
    )


def read_archive_csv(path):
    out = []
    for row in _read_csv(path, ARCHIVE_HEADER):
        if len(row) != len(ARCHIVE_HEADER):
            raise ValueError(f"{path}: row with {len(row)} fields")
        out.append(
            ArchiveRow(
                uid=int(row[0]),
                source=row[1],
                genotype=tuple(float(v) for v in row[2 : 2 + N_PARAMS]),
                ex=float(row[2 + N_PARAMS]),
                ey=float(row[3 + N_PARAMS]),
                alpha=float(row[4 + N_PARAMS]),
                quality=float(row[5 + N_PARAMS]),
                t_hat=float(row[6 + N_PARAMS]),
                novelty_at_insert=float(row[7 + N_PARAMS]),
            )
        )
    return out


def write_metrics_csv(path, rows):
    _write_csv(path, METRICS_HEADER, rows)


def read_metrics_csv(path):
    return [
        (int(r[0]), int(r[1]), float(r[2]), float(r[3]), int(r[4]))
        for r in _read_csv(path, METRICS_HEADER)
    ]


def write_stats_csv(path, rows):
    _write_csv(path, STATS_HEADER, rows)


def write_transfers_csv(path, transfer_log):
    _write_csv(
        path,
        TRANSFERS_HEADER,
        (
            list(t.genotype)
            + [
                t.sim_endpoint[0],
                t.sim_endpoint[1],
                t.real_endpoint[0],
                t.real_endpoint[1],
                t.score,
            ]
            for t in transfer_log
        ),
    )


def write_targets_csv(path, targets):
    _write_csv(path, TARGETS_HEADER, ([x, y] for x, y in np.asarray(targets, dtype=float)))


def read_targets_csv(path):
    return np.array(
        [[float(r[0]), float(r[1])] for r in _read_csv(path, TARGETS_HEADER)]
    )


def write_accuracy_csv(path, ids, accuracies):
    _write_csv(path, ACCURACY_HEADER, ([i, a] for i, a in zip(ids, accuracies)))


_ALGORITHMS = ("tbr", "ns", "nslc", "nearest", "orientation", "reference")

_CONFIG_DEFAULTS = {
    "algorithm": None,
    "population_size": 100,
    "generations": 1000,
    "mutation_rate": 0.1,
    "k_neighbors": 15,
    "novelty_threshold": 0.10,
    "transfer_threshold": -0.05,
    "transfer_period": 50,
    "transfer_enabled": True,
    "ridge_alpha": 1e-3,
    "metric_cadence": 50,
    "dt": 0.03,
    "episode": 3.0,
    "pseudo_reality": "default",
    "output_dir": "out",
    "targets_count": 100,
    "generations_per_target": 10,
    "pick_radius": 0.10,
    "transfer_bar": -0.10,
    "target": (0.4, -0.3),
    "grid_step": 0.01,
    "snapshots": False,
}


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs: loop parameters, worlds, region, seed, outputs."""

    seed: int | None = None
    algorithm: str | None = None
    population_size: int = 100
    generations: int = 1000
    mutation_rate: float = 0.1
    k_neighbors: int = 15
    novelty_threshold: float = 0.10
    transfer_threshold: float = -0.05
    transfer_period: int = 50
    transfer_enabled: bool = True
    ridge_alpha: float = 1e-3
    metric_cadence: int = 50
    half_angle_deg: float = 60.0
    max_arc: float = 0.6
    dt: float = 0.03
    episode: float = 3.0
    pseudo_profile: PerturbationProfile = field(default_factory=lambda: DEFAULT_REALITY_GAP)
    output_dir: str = "out"
    targets_count: int = 100
    generations_per_target: int = 10
    pick_radius: float = 0.10
    transfer_bar: float = -0.10
    target: tuple = (0.4, -0.3)
    grid_step: float = 0.01
    snapshots: bool = False

    def sim_world(self) -> WorldParams:
        return WorldParams(model=RobotModel(), dt=self.dt, episode=self.episode)

    def pseudo_world(self) -> WorldParams:
        return WorldParams(
            model=RobotModel(), dt=self.dt, episode=self.episode, profile=self.pseudo_profile
        )

    def region(self) -> RegionOfInterest:
        return RegionOfInterest(math.radians(self.half_angle_deg), self.max_arc)

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


def _require(condition, message):
    if not condition:
        raise ConfigError(message)


def _as_int(data, key, minimum):
    v = data[key]
    _require(isinstance(v, int) and not isinstance(v, bool), f"{key} must be an integer")
    _require(v >= minimum, f"{key} must be at least {minimum}")
    return v


def _as_float(data, key):
    v = data[key]
    _require(
        isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v),
        f"{key} must be a finite number",
    )
    return float(v)


def load_config(path) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Unknown keys are rejected, the seed is mandatory, and a perturbation
    profile given as a file path must exist (relative paths resolve against
    the config file's directory).
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    _require(isinstance(data, dict), "config must be a JSON object")

    roi = data.pop("roi", {})
    _require(isinstance(roi, dict), "roi must be an object")
    extra = set(roi) - {"half_angle_deg", "max_arc"}
    _require(not extra, f"unknown roi keys: {sorted(extra)}")

    known = set(_CONFIG_DEFAULTS) | {"seed"}
    extra = set(data) - known
    _require(not extra, f"unknown config keys: {sorted(extra)}")
    _require("seed" in data, "seed is mandatory")

    merged = dict(_CONFIG_DEFAULTS)
    merged.update(data)
    merged["roi_half_angle_deg"] = roi.get("half_angle_deg", 60.0)
    merged["roi_max_arc"] = roi.get("max_arc", 0.6)

    algorithm = merged["algorithm"]
    _require(
        algorithm is None or algorithm in _ALGORITHMS,
        f"algorithm must be one of {_ALGORITHMS}",
    )

    profile_spec = merged["pseudo_reality"]
    if profile_spec == "default":
        profile = DEFAULT_REALITY_GAP
    elif isinstance(profile_spec, dict):
        try:
            profile = PerturbationProfile.from_dict(profile_spec)
        except ValueError as err:
            raise ConfigError(str(err)) from err
    elif isinstance(profile_spec, str):
        ref = Path(profile_spec)
        if not ref.is_absolute():
            ref = path.parent / ref
        _require(ref.is_file(), f"pseudo_reality file not found: {ref}")
        try:
            profile = PerturbationProfile.from_dict(json.loads(ref.read_text()))
        except (json.JSONDecodeError, ValueError) as err:
            raise ConfigError(f"bad perturbation profile {ref}: {err}") from err
    else:
        raise ConfigError("pseudo_reality must be 'default', an object, or a file path")

    target = merged["target"]
    _require(
        isinstance(target, (list, tuple)) and len(target) == 2,
        "target must be a pair of coordinates",
    )

    _require(isinstance(merged["transfer_enabled"], bool), "transfer_enabled must be a boolean")
    _require(isinstance(merged["snapshots"], bool), "snapshots must be a boolean")
    _require(isinstance(merged["output_dir"], str), "output_dir must be a string")

    try:
        config = RunConfig(
            seed=_as_int(merged, "seed", 0),
            algorithm=algorithm,
            population_size=_as_int(merged, "population_size", 2),
            generations=_as_int(merged, "generations", 1),
            mutation_rate=_as_float(merged, "mutation_rate"),
            k_neighbors=_as_int(merged, "k_neighbors", 1),
            novelty_threshold=_as_float(merged, "novelty_threshold"),
            transfer_threshold=_as_float(merged, "transfer_threshold"),
            transfer_period=_as_int(merged, "transfer_period", 1),
            transfer_enabled=merged["transfer_enabled"],
            ridge_alpha=_as_float(merged, "ridge_alpha"),
            metric_cadence=_as_int(merged, "metric_cadence", 1),
            half_angle_deg=_as_float(merged, "roi_half_angle_deg"),
            max_arc=_as_float(merged, "roi_max_arc"),
            dt=_as_float(merged, "dt"),
            episode=_as_float(merged, "episode"),
            pseudo_profile=profile,
            output_dir=merged["output_dir"],
            targets_count=_as_int(merged, "targets_count", 1),
            generations_per_target=_as_int(merged, "generations_per_target", 1),
            pick_radius=_as_float(merged, "pick_radius"),
            transfer_bar=_as_float(merged, "transfer_bar"),
            target=(float(target[0]), float(target[1])),
            grid_step=_as_float(merged, "grid_step"),
            snapshots=merged["snapshots"],
        )
        # surface range errors (dt/episode mismatch, bad roi) as config errors
        config.sim_world()
        config.region()
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(str(err)) from err
    _require(0.0 <= config.mutation_rate <= 1.0, "mutation_rate must lie in [0, 1]")
    _require(config.ridge_alpha > 0.0, "ridge_alpha must be positive")
    _require(config.grid_step > 0.0, "grid_step must be positive")
    return config
