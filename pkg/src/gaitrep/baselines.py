"""Target seeding and the per-target evolutionary baselines.

The repertoire approach is compared against running one small NSGA-II per
target point.  ``kmeans_targets`` spreads the targets over the region of
interest; ``TargetedSearch`` is the two-objective per-target baseline with
its two pick rules; ``TransferTargetedSearch`` adds the transferability
objective and ground-truth transfers for the single-controller reference
experiment.
"""

import itertools
import math

import numpy as np
from sklearn.base import BaseEstimator

from .gait import mutate, random_genotype
from .geometry import RegionOfInterest
from .nsga2 import nondominated_sort, rank_population, survivor_indices, tournament_winners
from .repertoire import evaluate_controller
from .simulator import simulate, transferability_score
from .surrogate import TransferabilityModel, TransferRecord
from .validation import ensure_rng


def kmeans_targets(roi, count=100, seed=None, step=0.01, max_iter=100, tol=1e-6):
    """Spread ``count`` targets over the region with Lloyd's algorithm.

    Clusters the 1 cm region grid, then snaps each centroid greedily to the
    nearest grid point not already taken, so targets are pairwise distinct
    and guaranteed inside the region.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    grid = roi.grid(step)
    if count > len(grid):
        raise ValueError("count exceeds the number of grid points")
    rng = ensure_rng(seed)
    centroids = grid[rng.choice(len(grid), size=count, replace=False)]
    for _ in range(max_iter):
        d2 = ((grid[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        moved = centroids.copy()
        for j in range(count):
            members = grid[labels == j]
            if len(members):
                moved[j] = members.mean(axis=0)
        shift = np.hypot(*(moved - centroids).T).max()
        centroids = moved
        if shift < tol:
            break
    taken = np.zeros(len(grid), dtype=bool)
    snapped = np.empty_like(centroids)
    for j in range(count):
        d2 = ((grid - centroids[j]) ** 2).sum(axis=1)
        d2[taken] = np.inf
        hit = int(d2.argmin())
        taken[hit] = True
        snapped[j] = grid[hit]
    return snapped


def _target_distance(record, target):
    return math.hypot(record.endpoint[0] - target[0], record.endpoint[1] - target[1])


def _closest(records, target):
    # ties broken toward the smaller id
    return min(records, key=lambda r: (_target_distance(r, target), r.uid))


def _per_target_loop(
    world,
    pseudo_world,
    target,
    pop_size,
    generations,
    mutation_rate,
    rng,
    with_transfer,
    transfer_period,
    ridge_alpha,
):
    """Shared (mu + lambda) NSGA-II loop for a single target point."""
    uid_counter = itertools.count()
    surrogate = TransferabilityModel(alpha=ridge_alpha)
    transfer_log = []
    evaluations = 0
    pop = []
    pop_ranks = pop_crowding = pop_uids = None
    n_obj = 3 if with_transfer else 2

    for gen in range(1, generations + 1):
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
                    mutate(pop[w].genotype, mutation_rate, rng),
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

        if with_transfer and gen % transfer_period == 0:
            picked = cand[int(rng.integers(len(cand)))]
            real = simulate(picked.genotype, pseudo_world)
            transfer_log.append(
                TransferRecord(
                    genotype=picked.genotype.copy(),
                    descriptor=picked.descriptor.copy(),
                    sim_endpoint=picked.outcome.endpoint.copy(),
                    real_endpoint=real.endpoint.copy(),
                    score=transferability_score(picked.outcome, real),
                )
            )
            surrogate = TransferabilityModel(alpha=ridge_alpha).fit(
                np.stack([t.descriptor for t in transfer_log]).astype(float),
                np.array([t.score for t in transfer_log]),
            )
            estimates = surrogate.predict(
                np.stack([r.descriptor for r in cand]).astype(float)
            )
            for rec, est in zip(cand, estimates):
                rec.estimated_transfer = float(est)

        objectives = np.empty((len(cand), n_obj))
        for pos, rec in enumerate(cand):
            objectives[pos, 0] = -_target_distance(rec, target)
            if with_transfer:
                objectives[pos, 1] = rec.estimated_transfer
                objectives[pos, 2] = rec.quality
            else:
                objectives[pos, 1] = rec.quality

        ranks, crowding, _ = rank_population(objectives)
        uids = np.array([r.uid for r in cand], dtype=np.int64)
        keep = survivor_indices(ranks, crowding, uids, pop_size)
        pop = [cand[i] for i in keep]
        pop_ranks = ranks[keep]
        pop_crowding = crowding[keep]
        pop_uids = uids[keep]

    # re-rank the survivors alone so front 0 means the final Pareto set
    final_obj = np.empty((len(pop), n_obj))
    for pos, rec in enumerate(pop):
        final_obj[pos, 0] = -_target_distance(rec, target)
        if with_transfer:
            final_obj[pos, 1] = rec.estimated_transfer
            final_obj[pos, 2] = rec.quality
        else:
            final_obj[pos, 1] = rec.quality
    _, fronts = nondominated_sort(final_obj)
    front = sorted((pop[i] for i in fronts[0]), key=lambda r: r.uid)
    return pop, front, surrogate, transfer_log, evaluations


class TargetedSearch(BaseEstimator):
    """One NSGA-II run toward a single target: minimize distance and |heading error|.

    After fitting, ``nearest_pick_`` is the Pareto member closest to the
    target and ``oriented_pick_`` the best-oriented Pareto member within
    ``pick_radius`` of it (falling back to the nearest pick, with
    ``fallback_used_`` raised, when none qualifies).
    """

    def __init__(
        self,
        target=None,
        population_size=100,
        generations=10,
        mutation_rate=0.1,
        pick_radius=0.10,
        roi=None,
        seed=None,
    ):
        self.target = target
        self.population_size = population_size
        self.generations = generations
        self.mutation_rate = mutation_rate
        self.pick_radius = pick_radius
        self.roi = roi
        self.seed = seed

    def fit(self, world, pseudo_world=None):
        del pseudo_world  # interface symmetry only
        if self.target is None:
            raise ValueError("a target endpoint is required")
        tx, ty = float(self.target[0]), float(self.target[1])
        roi = self.roi if self.roi is not None else RegionOfInterest()
        if not roi.contains(tx, ty):
            raise ValueError("target lies outside the region of interest")
        pop, front, _, _, evaluations = _per_target_loop(
            world,
            None,
            (tx, ty),
            self.population_size,
            self.generations,
            self.mutation_rate,
            ensure_rng(self.seed),
            with_transfer=False,
            transfer_period=1,
            ridge_alpha=1e-3,
        )
        self.population_ = pop
        self.front_ = front
        self.n_evaluations_ = evaluations
        self.nearest_pick_ = _closest(front, (tx, ty))
        within = [r for r in front if _target_distance(r, (tx, ty)) <= self.pick_radius]
        if within:
            self.oriented_pick_ = max(within, key=lambda r: (r.quality, -r.uid))
            self.fallback_used_ = False
        else:
            self.oriented_pick_ = self.nearest_pick_
            self.fallback_used_ = True
        return self


class TransferTargetedSearch(BaseEstimator):
    """Single-target search with the transferability objective and real transfers.

    Minimizes (distance, -estimated transferability, |heading error|)
    while rolling one candidate out in the pseudo-real world every
    ``transfer_period`` generations.  The final pick is the population member
    closest to the target among those whose estimate clears ``transfer_bar``;
    ``feasible_`` reports whether any member cleared it.
    """

    def __init__(
        self,
        target=(0.4, -0.3),
        population_size=100,
        generations=100,
        transfer_period=50,
        mutation_rate=0.1,
        transfer_bar=-0.10,
        ridge_alpha=1e-3,
        roi=None,
        seed=None,
    ):
        self.target = target
        self.population_size = population_size
        self.generations = generations
        self.transfer_period = transfer_period
        self.mutation_rate = mutation_rate
        self.transfer_bar = transfer_bar
        self.ridge_alpha = ridge_alpha
        self.roi = roi
        self.seed = seed

    def fit(self, world, pseudo_world=None):
        if pseudo_world is None:
            raise ValueError("transfers need a pseudo_world to roll out in")
        tx, ty = float(self.target[0]), float(self.target[1])
        roi = self.roi if self.roi is not None else RegionOfInterest()
        if not roi.contains(tx, ty):
            raise ValueError("target lies outside the region of interest")
        pop, front, surrogate, transfer_log, evaluations = _per_target_loop(
            world,
            pseudo_world,
            (tx, ty),
            self.population_size,
            self.generations,
            self.mutation_rate,
            ensure_rng(self.seed),
            with_transfer=True,
            transfer_period=self.transfer_period,
            ridge_alpha=self.ridge_alpha,
        )
        self.population_ = pop
        self.front_ = front
        self.surrogate_ = surrogate
        self.transfer_log_ = transfer_log
        self.n_evaluations_ = evaluations
        qualifying = [r for r in pop if r.estimated_transfer >= self.transfer_bar]
        self.feasible_ = bool(qualifying)
        self.pick_ = _closest(qualifying if qualifying else pop, (tx, ty))
        return self
