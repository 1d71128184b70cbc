"""Run orchestration shared by the command line and the acceptance suite.

Every entry point here takes a ``RunConfig`` and returns a plain summary
dataclass built from CSV-ready rows, so runs can be farmed out to worker
processes and their results compared or persisted without re-simulating.
"""

import math
from dataclasses import dataclass

import numpy as np

from .baselines import TargetedSearch, TransferTargetedSearch, kmeans_targets
from .evolvers import NoveltyLocalCompetition, NoveltySearch, RepertoireEvolver
from .io import ArchiveRow, RunConfig, rows_from_records
from .simulator import simulate


@dataclass
class RepertoireRun:
    algorithm: str
    seed: int
    n_evaluations: int
    archive_rows: list
    population_rows: list
    metrics: list
    stats: list
    transfers: list
    snapshots: list  # (evaluations, list of ArchiveRow)


@dataclass
class PerTargetRun:
    seed: int
    n_evaluations: int
    targets: np.ndarray
    nearest_rows: list
    oriented_rows: list
    fallback_count: int


@dataclass
class ReferenceRun:
    seed: int
    n_evaluations: int
    target: tuple
    pick_row: ArchiveRow
    feasible: bool
    population_rows: list
    transfers: list
    accuracy: float


def _snapshot_to_rows(snapshot_rows, source):
    return [
        ArchiveRow(
            uid=int(uid),
            source=source,
            genotype=tuple(float(g) for g in genotype),
            ex=ex,
            ey=ey,
            alpha=yaw,
            quality=quality,
            t_hat=t_hat,
            novelty_at_insert=novelty,
        )
        for uid, genotype, ex, ey, yaw, quality, t_hat, novelty in snapshot_rows
    ]


def run_repertoire(config: RunConfig, algorithm: str) -> RepertoireRun:
    """Run one repertoire-growing algorithm: "tbr", "ns", or "nslc"."""
    if config.seed is None:
        raise ValueError("a seed is required")
    world = config.sim_world()
    roi = config.region()
    common = dict(
        population_size=config.population_size,
        generations=config.generations,
        k_neighbors=config.k_neighbors,
        novelty_threshold=config.novelty_threshold,
        mutation_rate=config.mutation_rate,
        metric_cadence=config.metric_cadence,
        roi=roi,
        keep_snapshots=config.snapshots,
        seed=config.seed,
    )
    if algorithm == "tbr":
        est = RepertoireEvolver(
            transfer_threshold=config.transfer_threshold,
            transfer_period=config.transfer_period,
            transfer_enabled=config.transfer_enabled,
            ridge_alpha=config.ridge_alpha,
            **common,
        )
        est.fit(world, config.pseudo_world() if config.transfer_enabled else None)
    elif algorithm == "ns":
        est = NoveltySearch(**common).fit(world)
    elif algorithm == "nslc":
        est = NoveltyLocalCompetition(**common).fit(world)
    else:
        raise ValueError(f"unknown repertoire algorithm: {algorithm}")
    return RepertoireRun(
        algorithm=algorithm,
        seed=config.seed,
        n_evaluations=est.n_evaluations_,
        archive_rows=rows_from_records(est.archive_.records, algorithm),
        population_rows=rows_from_records(est.population_, "population"),
        metrics=list(est.metrics_),
        stats=list(est.stats_),
        transfers=list(est.transfer_log_),
        snapshots=[
            (ev, _snapshot_to_rows(rows, algorithm)) for ev, rows in est.snapshots_
        ],
    )


def _pick_to_row(record, target_index, source):
    row = rows_from_records([record], source)[0]
    # per-target runs restart ids at zero, so the target index is the key
    return ArchiveRow(**{**row.__dict__, "uid": int(target_index)})


def run_per_target_suite(config: RunConfig) -> PerTargetRun:
    """Run one small targeted search per spread target; keep both pick rules.

    Each target's run draws from an independent seed stream derived from
    (config seed, target index), so results do not depend on visit order.
    """
    if config.seed is None:
        raise ValueError("a seed is required")
    world = config.sim_world()
    roi = config.region()
    targets = kmeans_targets(
        roi, count=config.targets_count, seed=config.seed, step=config.grid_step
    )
    nearest_rows = []
    oriented_rows = []
    fallback_count = 0
    evaluations = 0
    for index, (tx, ty) in enumerate(targets):
        est = TargetedSearch(
            target=(float(tx), float(ty)),
            population_size=config.population_size,
            generations=config.generations_per_target,
            mutation_rate=config.mutation_rate,
            pick_radius=config.pick_radius,
            roi=roi,
            seed=np.random.SeedSequence((config.seed, index)),
        ).fit(world)
        nearest_rows.append(_pick_to_row(est.nearest_pick_, index, "nearest"))
        oriented_rows.append(_pick_to_row(est.oriented_pick_, index, "orientation"))
        fallback_count += bool(est.fallback_used_)
        evaluations += est.n_evaluations_
    return PerTargetRun(
        seed=config.seed,
        n_evaluations=evaluations,
        targets=targets,
        nearest_rows=nearest_rows,
        oriented_rows=oriented_rows,
        fallback_count=fallback_count,
    )


def run_reference(config: RunConfig) -> ReferenceRun:
    """Single-target transferability reference run, reported with its accuracy."""
    if config.seed is None:
        raise ValueError("a seed is required")
    world = config.sim_world()
    pseudo = config.pseudo_world()
    est = TransferTargetedSearch(
        target=config.target,
        population_size=config.population_size,
        generations=config.generations,
        transfer_period=config.transfer_period,
        mutation_rate=config.mutation_rate,
        transfer_bar=config.transfer_bar,
        ridge_alpha=config.ridge_alpha,
        roi=config.region(),
        seed=config.seed,
    ).fit(world, pseudo)
    pick = est.pick_
    real = simulate(pick.genotype, pseudo)
    accuracy = math.hypot(
        pick.endpoint[0] - real.endpoint[0], pick.endpoint[1] - real.endpoint[1]
    )
    return ReferenceRun(
        seed=config.seed,
        n_evaluations=est.n_evaluations_,
        target=tuple(config.target),
        pick_row=_pick_to_row(pick, 0, "reference"),
        feasible=est.feasible_,
        population_rows=rows_from_records(est.population_, "population"),
        transfers=list(est.transfer_log_),
        accuracy=accuracy,
    )
