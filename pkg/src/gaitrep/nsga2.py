"""Multi-objective selection machinery: non-dominated sorting, crowding, tournaments.

All objectives are maximized.  Ties anywhere are broken deterministically by
ascending id so that identical runs produce identical populations.
"""

import numpy as np


def nondominated_sort(objectives):
    """Fast non-dominated sort.  Returns (ranks, fronts).

    ``objectives`` is (n, m), all maximized.  ``ranks[i]`` is the front index
    of row i; ``fronts`` lists index arrays, best front first.
    """
    obj = np.asarray(objectives, dtype=float)
    if obj.ndim != 2:
        raise ValueError("objectives must be 2-D")
    n = obj.shape[0]
    if n == 0:
        return np.empty(0, dtype=int), []
    ge = (obj[:, None, :] >= obj[None, :, :]).all(axis=2)
    gt = (obj[:, None, :] > obj[None, :, :]).any(axis=2)
    dominates = ge & gt  # dominates[i, j]: i dominates j
    n_dom = dominates.sum(axis=0)
    ranks = np.full(n, -1, dtype=int)
    fronts = []
    remaining = np.ones(n, dtype=bool)
    while remaining.any():
        current = remaining & (n_dom == 0)
        idx = np.flatnonzero(current)
        fronts.append(idx)
        ranks[idx] = len(fronts) - 1
        n_dom = n_dom - dominates[idx].sum(axis=0)
        remaining &= ~current
    return ranks, fronts


def crowding_distances(objectives, fronts):
    """Per-individual crowding distance within each front.

    Boundary individuals get inf.  An objective that is constant within a
    front contributes nothing (and awards no boundary bonus), so an objective
    that is identically constant across the population leaves selection
    exactly as it would be without that objective.
    """
    obj = np.asarray(objectives, dtype=float)
    dist = np.zeros(obj.shape[0])
    for front in fronts:
        if len(front) <= 2:
            dist[front] = np.inf
            continue
        for m in range(obj.shape[1]):
            vals = obj[front, m]
            lo, hi = vals.min(), vals.max()
            if hi == lo:
                continue
            order = np.argsort(vals, kind="stable")
            dist[front[order[0]]] = np.inf
            dist[front[order[-1]]] = np.inf
            gaps = (vals[order[2:]] - vals[order[:-2]]) / (hi - lo)
            dist[front[order[1:-1]]] += gaps
    return dist


def rank_population(objectives):
    """Convenience: ranks, crowding distances and fronts in one call."""
    ranks, fronts = nondominated_sort(objectives)
    return ranks, crowding_distances(objectives, fronts), fronts


def survivor_indices(ranks, crowding, ids, n_survivors):
    """Truncate to the best ``n_survivors`` by (front, crowding desc, id asc)."""
    order = np.lexsort((np.asarray(ids), -np.asarray(crowding), np.asarray(ranks)))
    return order[:n_survivors]


def tournament_winners(ranks, crowding, ids, pairs):
    """Binary tournaments: better front wins, then larger crowding, then smaller id."""
    ranks = np.asarray(ranks)
    crowding = np.asarray(crowding)
    ids = np.asarray(ids)
    a, b = pairs[:, 0], pairs[:, 1]
    rank_tie = ranks[a] == ranks[b]
    crowd_tie = rank_tie & (crowding[a] == crowding[b])
    a_wins = (
        (ranks[a] < ranks[b])
        | (rank_tie & (crowding[a] > crowding[b]))
        | (crowd_tie & (ids[a] <= ids[b]))
    )
    return np.where(a_wins, a, b)
