"""Evolutionary loops that grow gait repertoires (sklearn-style estimators).

``RepertoireEvolver`` runs the full three-objective search (novelty, local
quality rank, local transferability rank) with a replace-capable archive and
periodic transfers to a pseudo-real world.  ``NoveltySearch`` and
``NoveltyLocalCompetition`` are the add-only-archive baselines sharing the
same engine with fewer objectives.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .gait import mutate, random_genotype
from .geometry import RegionOfInterest
from .metrics import median_orientation_error, sparseness, transferable_count
from .nsga2 import rank_population, survivor_indices, tournament_winners
from .repertoire import (
    Archive,
    archive_update,
    count_better,
    evaluate_controller,
    nearest_neighbors,
)
from .simulator import simulate, transferability_score
from .surrogate import TransferabilityModel, TransferRecord
from .validation import as_endpoint_array, ensure_rng


@dataclass
class _LoopParams:
    population_size: int
    generations: int
    k_neighbors: int
    novelty_threshold: float
    transfer_threshold: float
    transfer_period: int
    mutation_rate: float
    ridge_alpha: float
    metric_cadence: int
    roi: RegionOfInterest
    rng: np.random.Generator
    n_objectives: int  # 1: novelty; 2: + quality rank; 3: + transfer rank
    archive_replacement: bool
    transfers: bool
    audit: bool
    keep_snapshots: bool

    def validate(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be at least 1")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if self.transfer_period < 1:
            raise ValueError("transfer_period must be at least 1")
        if self.metric_cadence < 1:
            raise ValueError("metric_cadence must be at least 1")


@dataclass
class EvolutionResult:
    archive: Archive
    population: list
    surrogate: TransferabilityModel
    transfer_log: list
    stats: list  # (generation, archive_size, transferable_count, median_quality)
    metrics: list  # (evaluations, archive_size, sparseness, median_orient_err, transferable)
    snapshots: list  # (evaluations, [archive row tuples])
    events: list
    n_evaluations: int


def _snapshot_rows(archive):
    return [
        (
            r.uid,
            r.genotype.copy(),
            float(r.endpoint[0]),
            float(r.endpoint[1]),
            float(r.outcome.yaw),
            float(r.quality),
            float(r.estimated_transfer),
            float(r.novelty_at_insert),
        )
        for r in archive.records
    ]


def _transfer_step(cand, archive, pseudo_world, transfer_log, ridge_alpha, rng):
    """One ground-truth transfer: pick, roll out for real, refit, re-estimate."""
    cand_uids = {r.uid for r in cand}
    pool = cand + [r for r in archive.records if r.uid not in cand_uids]
    picked = pool[int(rng.integers(len(pool)))]
    real = simulate(picked.genotype, pseudo_world)
    score = transferability_score(picked.outcome, real)
    transfer_log.append(
        TransferRecord(
            genotype=picked.genotype.copy(),
            descriptor=picked.descriptor.copy(),
            sim_endpoint=picked.outcome.endpoint.copy(),
            real_endpoint=real.endpoint.copy(),
            score=score,
        )
    )
    surrogate = TransferabilityModel(alpha=ridge_alpha).fit(
        np.stack([t.descriptor for t in transfer_log]).astype(float),
        np.array([t.score for t in transfer_log]),
    )
    estimates = surrogate.predict(np.stack([r.descriptor for r in pool]).astype(float))
    for rec, est in zip(pool, estimates):
        rec.estimated_transfer = float(est)
    archive.refresh_transfer_estimates()
    return surrogate


def run_evolution(world, pseudo_world, params: _LoopParams) -> EvolutionResult:
    params.validate()
    rng = params.rng
    pop_size = params.population_size
    uid_counter = itertools.count()
    surrogate = TransferabilityModel(alpha=params.ridge_alpha)
    archive = Archive()
    transfer_log = []
    stats = []
    metric_rows = []
    snapshots = []
    events = []
    evaluations = 0
    grid = params.roi.grid()

    pop = []
    pop_ranks = pop_crowding = pop_uids = None

    for gen in range(1, params.generations + 1):
        if gen == 1:
            cand = [
                evaluate_controller(random_genotype(rng), world, next(uid_counter))
                for _ in range(pop_size)
            ]
            new_records = cand
        else:
            pairs = rng.integers(0, pop_size, size=(pop_size, 2))
            winners = tournament_winners(pop_ranks, pop_crowding, pop_uids, pairs)
            new_records = [
                evaluate_controller(
                    mutate(pop[w].genotype, params.mutation_rate, rng),
                    world,
                    next(uid_counter),
                )
                for w in winners
            ]
            cand = pop + new_records
        evaluations += len(new_records)
        if surrogate.is_fitted:
            fresh = surrogate.predict(
                np.stack([r.descriptor for r in new_records]).astype(float)
            )
            for rec, est in zip(new_records, fresh):
                rec.estimated_transfer = float(est)

        if params.transfers and gen % params.transfer_period == 0:
            surrogate = _transfer_step(
                cand, archive, pseudo_world, transfer_log, params.ridge_alpha, rng
            )

        # Objective update and archive management, interleaved per controller in
        # ascending id order; each controller sees archive changes made by the
        # previous ones.  The pool is the id-union of candidates and archive.
        cand = sorted(cand, key=lambda r: r.uid)
        cx = np.array([r.endpoint[0] for r in cand])
        cy = np.array([r.endpoint[1] for r in cand])
        cq = np.array([r.quality for r in cand])
        ct = np.array([r.estimated_transfer for r in cand])
        cu = np.array([r.uid for r in cand], dtype=np.int64)
        ax, ay, aq, at, au, aflag = archive.views()
        archive.set_flags(np.isin(au, cu))

        objectives = np.empty((len(cand), params.n_objectives))
        for pos, rec in enumerate(cand):
            ax, ay, aq, at, au, aflag = archive.views()
            px = np.concatenate([cx, ax])
            py = np.concatenate([cy, ay])
            pu = np.concatenate([cu, au])
            excluded = np.concatenate([np.zeros(len(cand), dtype=bool), aflag])
            idx, dists = nearest_neighbors(
                rec.endpoint[0],
                rec.endpoint[1],
                rec.uid,
                px,
                py,
                pu,
                params.k_neighbors,
                excluded=excluded,
            )
            rec.novelty = float(dists.mean())
            objectives[pos, 0] = rec.novelty
            if params.n_objectives >= 2:
                pq = np.concatenate([cq, aq])
                objectives[pos, 1] = -count_better(rec.quality, pq[idx])
            if params.n_objectives >= 3:
                pt = np.concatenate([ct, at])
                objectives[pos, 2] = -count_better(rec.estimated_transfer, pt[idx])

            if params.archive_replacement:
                event = archive_update(
                    archive,
                    rec,
                    novelty_threshold=params.novelty_threshold,
                    transfer_threshold=params.transfer_threshold,
                )
                if params.audit and (event.added or event.branch):
                    events.append((gen, event))
            elif rec.novelty > params.novelty_threshold and rec.uid not in archive:
                archive.append(rec, flag=True)
                if params.audit:
                    events.append((gen, rec.uid, "added", rec.novelty))

        ranks, crowding, _ = rank_population(objectives)
        for pos, rec in enumerate(cand):
            rec.rank = int(ranks[pos])
            rec.crowding = float(crowding[pos])
        cu_all = np.array([r.uid for r in cand], dtype=np.int64)
        keep = survivor_indices(ranks, crowding, cu_all, pop_size)
        pop = [cand[i] for i in keep]
        pop_ranks = ranks[keep]
        pop_crowding = crowding[keep]
        pop_uids = cu_all[keep]

        _, _, aq, at, _, _ = archive.views()
        n_transferable = transferable_count(at)
        stats.append(
            (
                gen,
                len(archive),
                n_transferable,
                float(np.median(aq)) if len(archive) else math.nan,
            )
        )
        if gen % params.metric_cadence == 0 or gen == params.generations:
            if not metric_rows or metric_rows[-1][0] != evaluations:
                metric_rows.append(_metric_row(archive, params.roi, grid, evaluations))
                if params.keep_snapshots:
                    snapshots.append((evaluations, _snapshot_rows(archive)))

    return EvolutionResult(
        archive=archive,
        population=pop,
        surrogate=surrogate,
        transfer_log=transfer_log,
        stats=stats,
        metrics=metric_rows,
        snapshots=snapshots,
        events=events,
        n_evaluations=evaluations,
    )


def _metric_row(archive, roi, grid, evaluations):
    n = len(archive)
    if n == 0:
        return (evaluations, 0, math.nan, math.nan, 0)
    endpoints = archive.endpoints()
    yaws = np.array([r.outcome.yaw for r in archive.records])
    _, _, _, at, _, _ = archive.views()
    return (
        evaluations,
        n,
        sparseness(endpoints, grid),
        median_orientation_error(endpoints, yaws, roi),
        transferable_count(at),
    )


class _RepertoireQueries:
    """Shared post-fit behavior: look up the repertoire by desired endpoint."""

    def query(self, targets):
        """Nearest archived controller record for each target endpoint."""
        pts = as_endpoint_array(targets)
        archive = self.archive_
        if len(archive) == 0:
            raise ValueError("the fitted archive is empty")
        return [archive.records[archive.nearest_index(x, y)] for x, y in pts]

    def predict(self, targets):
        """Endpoints the repertoire actually reaches for the requested targets."""
        return np.array([r.endpoint for r in self.query(targets)])

    def _store(self, result: EvolutionResult):
        self.archive_ = result.archive
        self.population_ = result.population
        self.surrogate_ = result.surrogate
        self.transfer_log_ = result.transfer_log
        self.stats_ = result.stats
        self.metrics_ = result.metrics
        self.snapshots_ = result.snapshots
        self.events_ = result.events
        self.n_evaluations_ = result.n_evaluations
        return self


class RepertoireEvolver(_RepertoireQueries, BaseEstimator):
    """Simultaneous evolution of a full repertoire of walking gaits.

    Controllers compete on behavioral novelty and on quality/transferability
    ranks within their behavioral neighborhood; the archive both collects
    novel endpoints and locally upgrades existing ones.  With
    ``transfer_enabled`` the estimator periodically rolls one controller out
    in the pseudo-real world and regresses endpoint gaps on contact patterns;
    with it disabled the loop runs the pure two-objective variant.
    """

    def __init__(
        self,
        population_size=100,
        generations=1000,
        k_neighbors=15,
        novelty_threshold=0.10,
        transfer_threshold=-0.05,
        transfer_period=50,
        mutation_rate=0.1,
        transfer_enabled=True,
        ridge_alpha=1e-3,
        metric_cadence=50,
        roi=None,
        audit=False,
        keep_snapshots=False,
        seed=None,
    ):
        self.population_size = population_size
        self.generations = generations
        self.k_neighbors = k_neighbors
        self.novelty_threshold = novelty_threshold
        self.transfer_threshold = transfer_threshold
        self.transfer_period = transfer_period
        self.mutation_rate = mutation_rate
        self.transfer_enabled = transfer_enabled
        self.ridge_alpha = ridge_alpha
        self.metric_cadence = metric_cadence
        self.roi = roi
        self.audit = audit
        self.keep_snapshots = keep_snapshots
        self.seed = seed

    def fit(self, world, pseudo_world=None):
        if self.transfer_enabled and pseudo_world is None:
            raise ValueError("transfer_enabled requires a pseudo_world to transfer to")
        params = _LoopParams(
            population_size=self.population_size,
            generations=self.generations,
            k_neighbors=self.k_neighbors,
            novelty_threshold=self.novelty_threshold,
            transfer_threshold=self.transfer_threshold,
            transfer_period=self.transfer_period,
            mutation_rate=self.mutation_rate,
            ridge_alpha=self.ridge_alpha,
            metric_cadence=self.metric_cadence,
            roi=self.roi if self.roi is not None else RegionOfInterest(),
            rng=ensure_rng(self.seed),
            n_objectives=3 if self.transfer_enabled else 2,
            archive_replacement=True,
            transfers=self.transfer_enabled,
            audit=self.audit,
            keep_snapshots=self.keep_snapshots,
        )
        return self._store(run_evolution(world, pseudo_world, params))


class NoveltySearch(_RepertoireQueries, BaseEstimator):
    """Pure novelty search: single objective, add-only archive."""

    _n_objectives = 1

    def __init__(
        self,
        population_size=100,
        generations=1000,
        k_neighbors=15,
        novelty_threshold=0.10,
        mutation_rate=0.1,
        metric_cadence=50,
        roi=None,
        audit=False,
        keep_snapshots=False,
        seed=None,
    ):
        self.population_size = population_size
        self.generations = generations
        self.k_neighbors = k_neighbors
        self.novelty_threshold = novelty_threshold
        self.mutation_rate = mutation_rate
        self.metric_cadence = metric_cadence
        self.roi = roi
        self.audit = audit
        self.keep_snapshots = keep_snapshots
        self.seed = seed

    def fit(self, world, pseudo_world=None):
        del pseudo_world  # accepted for interface symmetry; never used
        params = _LoopParams(
            population_size=self.population_size,
            generations=self.generations,
            k_neighbors=self.k_neighbors,
            novelty_threshold=self.novelty_threshold,
            transfer_threshold=0.0,
            transfer_period=1,
            mutation_rate=self.mutation_rate,
            ridge_alpha=1e-3,
            metric_cadence=self.metric_cadence,
            roi=self.roi if self.roi is not None else RegionOfInterest(),
            rng=ensure_rng(self.seed),
            n_objectives=self._n_objectives,
            archive_replacement=False,
            transfers=False,
            audit=self.audit,
            keep_snapshots=self.keep_snapshots,
        )
        return self._store(run_evolution(world, None, params))


class NoveltyLocalCompetition(NoveltySearch):
    """Novelty search with local quality competition; archive still add-only."""

    _n_objectives = 2
