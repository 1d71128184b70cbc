"""Controller records, behavioral neighborhoods, and the repertoire archive.

The archive is id-unique: a controller is never stored twice.  Replacement
semantics follow from treating the archive as a set: when an incoming
controller both enters by novelty and beats its nearest member, the beaten
member simply leaves.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import orientation_quality
from .simulator import SimOutcome, simulate
from .surrogate import contact_descriptor

#: quality assigned to a controller that does not move at all (its desired
#: heading is undefined, so it gets the worst possible alignment)
NO_DISPLACEMENT_QUALITY = -math.pi


@dataclass(eq=False, slots=True)
class ControllerRecord:
    """One evaluated controller and its evolving objective values."""

    uid: int
    genotype: np.ndarray
    outcome: SimOutcome
    quality: float
    descriptor: np.ndarray
    estimated_transfer: float = 0.0
    novelty: float = math.nan
    novelty_at_insert: float = math.nan
    rank: int = 0
    crowding: float = 0.0

    @property
    def endpoint(self) -> np.ndarray:
        return self.outcome.endpoint


def evaluate_controller(genotype, world, uid, surrogate=None) -> ControllerRecord:
    """Roll out a genotype and wrap the result in a record."""
    outcome = simulate(genotype, world)
    x, y = float(outcome.endpoint[0]), float(outcome.endpoint[1])
    if x == 0.0 and y == 0.0:
        quality = NO_DISPLACEMENT_QUALITY
    else:
        quality = orientation_quality(x, y, outcome.yaw)
    descriptor = contact_descriptor(outcome)
    record = ControllerRecord(
        uid=uid,
        genotype=np.asarray(genotype, dtype=float),
        outcome=outcome,
        quality=quality,
        descriptor=descriptor,
    )
    if surrogate is not None:
        record.estimated_transfer = float(surrogate.predict(descriptor))
    return record


def nearest_neighbors(x, y, own_uid, pool_x, pool_y, pool_uids, k, excluded=None):
    """Indices and distances of the (up to) k nearest pool entries.

    The entry with the caller's own uid is excluded, as are entries flagged in
    ``excluded``.  Distance ties break toward the smaller uid.  Raises if the
    eligible pool is empty.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    d = np.hypot(pool_x - x, pool_y - y)
    bad = pool_uids == own_uid
    if excluded is not None:
        bad = bad | excluded
    d = np.where(bad, np.inf, d)
    order = np.lexsort((pool_uids, d))[:k]
    order = order[np.isfinite(d[order])]
    if order.size == 0:
        raise ValueError("neighborhood pool is empty")
    return order, d[order]


def neighborhood(record: ControllerRecord, pool, k):
    """The k pool members closest to ``record``'s endpoint (record excluded)."""
    px = np.array([r.endpoint[0] for r in pool])
    py = np.array([r.endpoint[1] for r in pool])
    uids = np.array([r.uid for r in pool])
    idx, _ = nearest_neighbors(
        record.endpoint[0], record.endpoint[1], record.uid, px, py, uids, k
    )
    return [pool[i] for i in idx]


def count_better(value, neighbor_values) -> int:
    """Local-competition rank: how many neighbors strictly beat this value."""
    return int(np.sum(np.asarray(neighbor_values) > value))


class Archive:
    """Append/replace store of records with flat arrays for nearest queries.

    Slots stay in insertion order; every query tie-break uses uids, so slot
    order never affects results.  A parallel boolean flag per slot is kept for
    callers that need to mark slots (the evolution loop uses it to hide
    archive entries that duplicate current population members).
    """

    def __init__(self, capacity: int = 256):
        self._records: list[ControllerRecord] = []
        self._uid_set: set[int] = set()
        cap = max(capacity, 16)
        self._x = np.empty(cap)
        self._y = np.empty(cap)
        self._quality = np.empty(cap)
        self._that = np.empty(cap)
        self._uids = np.empty(cap, dtype=np.int64)
        self._flag = np.zeros(cap, dtype=bool)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    def __contains__(self, uid: int) -> bool:
        return uid in self._uid_set

    @property
    def records(self) -> list:
        return self._records

    def _grow(self):
        cap = 2 * self._x.size
        for name in ("_x", "_y", "_quality", "_that", "_uids", "_flag"):
            old = getattr(self, name)
            new = np.empty(cap, dtype=old.dtype)
            new[: len(self._records)] = old[: len(self._records)]
            setattr(self, name, new)

    def _write_slot(self, i: int, record: ControllerRecord, flag: bool):
        self._x[i] = record.endpoint[0]
        self._y[i] = record.endpoint[1]
        self._quality[i] = record.quality
        self._that[i] = record.estimated_transfer
        self._uids[i] = record.uid
        self._flag[i] = flag

    def append(self, record: ControllerRecord, flag: bool = False):
        if record.uid in self._uid_set:
            raise ValueError(f"record {record.uid} is already archived")
        if len(self._records) == self._x.size:
            self._grow()
        record.novelty_at_insert = record.novelty
        self._write_slot(len(self._records), record, flag)
        self._records.append(record)
        self._uid_set.add(record.uid)

    def replace(self, index: int, record: ControllerRecord, flag: bool = False):
        if record.uid in self._uid_set:
            raise ValueError(f"record {record.uid} is already archived")
        old = self._records[index]
        self._uid_set.discard(old.uid)
        record.novelty_at_insert = record.novelty
        self._write_slot(index, record, flag)
        self._records[index] = record
        self._uid_set.add(record.uid)

    def remove(self, index: int):
        n = len(self._records)
        old = self._records.pop(index)
        self._uid_set.discard(old.uid)
        for name in ("_x", "_y", "_quality", "_that", "_uids", "_flag"):
            arr = getattr(self, name)
            arr[index : n - 1] = arr[index + 1 : n]

    def views(self):
        """Live array views (x, y, quality, estimated transfer, uid, flag)."""
        n = len(self._records)
        return (
            self._x[:n],
            self._y[:n],
            self._quality[:n],
            self._that[:n],
            self._uids[:n],
            self._flag[:n],
        )

    def set_flags(self, values):
        self._flag[: len(self._records)] = values

    def refresh_transfer_estimates(self):
        """Resync the transfer-estimate array after records were re-predicted."""
        n = len(self._records)
        for i in range(n):
            self._that[i] = self._records[i].estimated_transfer

    def nearest_index(self, x, y):
        """Slot of the member closest to (x, y); distance ties -> smaller uid."""
        n = len(self._records)
        if n == 0:
            return None
        dx = self._x[:n] - x
        dy = self._y[:n] - y
        d2 = dx * dx + dy * dy
        i = int(np.argmin(d2))
        ties = np.flatnonzero(d2 == d2[i])
        if ties.size > 1:
            i = int(ties[np.argmin(self._uids[ties])])
        return i

    def endpoints(self) -> np.ndarray:
        n = len(self._records)
        return np.column_stack([self._x[:n], self._y[:n]]).copy()


@dataclass(frozen=True)
class ArchiveEvent:
    """What one archive-management call did (for audit and bookkeeping)."""

    uid: int
    added: bool = False
    replaced_slot: int | None = None
    removed_slot: int | None = None
    loser_uid: int | None = None
    branch: str = ""


def archive_update(archive: Archive, record: ControllerRecord, *,
                   novelty_threshold, transfer_threshold) -> ArchiveEvent:
    """Novelty-gated insertion plus local replacement.

    The record enters if its novelty exceeds the threshold.  Independently,
    its nearest archive member is challenged: with a trusted transfer estimate
    (above ``transfer_threshold``) the comparison is on quality, otherwise on
    the transfer estimates themselves.  A record that is already archived
    (including one the first step just added) cannot occupy a second slot, so
    a won challenge then removes the loser instead.
    """
    added = False
    if record.novelty > novelty_threshold and record.uid not in archive:
        archive.append(record, flag=True)
        added = True

    idx = archive.nearest_index(record.endpoint[0], record.endpoint[1])
    if idx is None:
        return ArchiveEvent(uid=record.uid, added=added)
    near = archive.records[idx]
    if near.uid == record.uid:
        return ArchiveEvent(uid=record.uid, added=added)

    if record.estimated_transfer > transfer_threshold and record.quality > near.quality:
        branch = "quality"
    elif record.estimated_transfer > near.estimated_transfer:
        branch = "transfer"
    else:
        return ArchiveEvent(uid=record.uid, added=added)

    if record.uid in archive:
        archive.remove(idx)
        return ArchiveEvent(
            uid=record.uid, added=added, removed_slot=idx, loser_uid=near.uid, branch=branch
        )
    archive.replace(idx, record, flag=True)
    return ArchiveEvent(
        uid=record.uid, added=added, replaced_slot=idx, loser_uid=near.uid, branch=branch
    )
