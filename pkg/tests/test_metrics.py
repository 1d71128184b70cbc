"""Coverage, orientation, and selection metrics."""

import math

import numpy as np
import pytest

from gaitrep.gait import random_genotype
from gaitrep.geometry import RegionOfInterest, arc_length, heading_error
from gaitrep.metrics import (
    TRANSFERABLE_THRESHOLD,
    archive_orientation_error,
    endpoint_gaps,
    mean_orientation_error,
    median_orientation_error,
    orientation_errors,
    quartiles,
    region_cell,
    select_best_per_region,
    sparseness,
    transferable_count,
)
from gaitrep.simulator import (
    DEFAULT_REALITY_GAP,
    WorldParams,
    simulate,
    transferability_score,
)

ROI = RegionOfInterest()


def brute_sparseness(endpoints, grid):
    total = 0.0
    for gx, gy in grid:
        total += min(math.hypot(gx - x, gy - y) for x, y in endpoints)
    return total / len(grid)


def test_sparseness_matches_brute_force():
    rng = np.random.default_rng(2)
    grid = ROI.grid(0.05)
    for _ in range(100):
        pts = rng.uniform(-0.7, 0.7, size=(int(rng.integers(1, 40)), 2))
        assert sparseness(pts, grid) == pytest.approx(
            brute_sparseness(pts, grid), abs=1e-12
        )


def test_sparseness_never_increases_when_adding_points():
    rng = np.random.default_rng(3)
    grid = ROI.grid(0.05)
    pts = rng.uniform(-0.6, 0.6, size=(5, 2))
    prev = sparseness(pts, grid)
    for _ in range(20):
        pts = np.vstack([pts, rng.uniform(-0.6, 0.6, size=(1, 2))])
        cur = sparseness(pts, grid)
        assert cur <= prev + 1e-15
        prev = cur


def test_sparseness_zero_when_grid_is_covered():
    grid = ROI.grid(0.05)
    assert sparseness(grid, grid) == 0.0


def test_sparseness_empty_raises():
    with pytest.raises(ValueError, match="at least one"):
        sparseness(np.empty((0, 2)), ROI.grid(0.05))


def test_orientation_error_statistics():
    # two in-region endpoints with hand-set headings; yaw = bearing - err
    pts = []
    yaws = []
    for x, y, err in ((0.3, 0.0, 0.1), (0.4, 0.05, 0.3)):
        beta = 2.0 * math.atan2(y, x)
        pts.append((x, y))
        yaws.append(beta - err)
    errs = orientation_errors(pts, yaws, ROI)
    assert errs == pytest.approx([0.1, 0.3], abs=1e-12)
    assert mean_orientation_error(pts, yaws, ROI) == pytest.approx(0.2, abs=1e-12)
    assert median_orientation_error(pts, yaws, ROI) == pytest.approx(0.2, abs=1e-12)
    assert archive_orientation_error(pts, yaws, ROI) == pytest.approx(0.2, abs=1e-12)
    # a third one out of region must not change anything but the median rule
    pts.append((2.0, 2.0))
    yaws.append(0.0)
    assert len(orientation_errors(pts, yaws, ROI)) == 2
    assert mean_orientation_error(pts, yaws, ROI) == pytest.approx(0.2, abs=1e-12)


def test_orientation_error_matches_heading_error_pointwise():
    rng = np.random.default_rng(4)
    pts = ROI.grid(0.05)
    take = pts[rng.choice(len(pts), size=50, replace=False)]
    yaws = rng.uniform(-math.pi, math.pi, size=50)
    errs = orientation_errors(take, yaws, ROI)
    expected = [heading_error(x, y, w) for (x, y), w in zip(take, yaws)]
    assert np.array_equal(errs, np.array(expected))


def test_orientation_error_when_nothing_is_inside():
    pts = [(0.0, 0.5), (-0.01, 0.7)]  # sideways: outside both lobes
    yaws = [0.0, 0.0]
    assert math.isnan(mean_orientation_error(pts, yaws, ROI))
    assert math.isnan(median_orientation_error(pts, yaws, ROI))
    with pytest.raises(ValueError, match="inside"):
        archive_orientation_error(pts, yaws, ROI)


def test_orientation_error_shape_validation():
    with pytest.raises(ValueError, match="one value per endpoint"):
        orientation_errors([(0.3, 0.0)], [0.0, 0.0], ROI)


def test_transferable_count_threshold_is_strict():
    vals = [-0.10, -0.15, -0.149999, -0.3, 0.0]
    assert TRANSFERABLE_THRESHOLD == -0.15
    assert transferable_count(vals) == 3
    assert transferable_count(vals, threshold=-0.05) == 1
    assert transferable_count([]) == 0


def test_region_cell_rejects_non_members():
    assert region_cell(0.0, 0.5, ROI) == -1  # outside the lobes
    assert region_cell(0.05, 0.0, ROI) == -1  # inside region, arc below 0.2
    assert region_cell(0.19, 0.0, ROI) == -1
    assert region_cell(0.9, 0.0, ROI) == -1  # past max arc


def test_region_cell_layout():
    # straight ahead at increasing arc: same angular sector, rising band
    cells = [region_cell(x, 1e-9, ROI) for x in (0.21, 0.35, 0.55)]
    assert len(set(cells)) == 3
    assert all(0 <= c < 30 for c in cells)
    # bearing 0 sits in the middle sector (index 2 of 5) of the front lobe
    assert cells[0] == (0 * 5 + 2) * 3 + 0
    assert cells[1] == (0 * 5 + 2) * 3 + 1
    assert cells[2] == (0 * 5 + 2) * 3 + 2
    # the mirror points land in the rear lobe (cells 15..29)
    rear = [region_cell(-x, 1e-9, ROI) for x in (0.21, 0.35, 0.55)]
    assert all(15 <= c < 30 for c in rear)


def test_region_cell_boundaries_are_clamped():
    # exactly at the inner arc -> first band; exactly at max arc -> last band
    lo = region_cell(0.2, 0.0, ROI)
    hi = region_cell(0.6, 0.0, ROI)
    assert lo % 3 == 0
    assert hi % 3 == 2
    assert arc_length(0.6, 0.0) == 0.6


def test_region_cells_partition_the_annulus():
    # every grid point in the annulus gets exactly one cell, and the 30 cells
    # are all populated for a fine grid
    seen = {}
    for x, y in ROI.grid(0.01):
        c = region_cell(float(x), float(y), ROI)
        if arc_length(float(x), float(y)) < 0.2:
            assert c == -1
            continue
        assert 0 <= c < 30
        seen.setdefault(c, 0)
        seen[c] += 1
    assert len(seen) == 30


def test_select_best_per_region_rules():
    pts = [
        (0.25, 0.0),   # cell A, estimate -0.3
        (0.26, 0.0),   # cell A, better estimate -0.1 -> wins
        (0.55, 0.0),   # different cell
        (0.05, 0.0),   # below inner arc: never selected
        (-0.25, 0.0),  # rear lobe cell
    ]
    est = [-0.3, -0.1, -0.5, 99.0, -0.2]
    chosen = select_best_per_region(pts, est, ROI)
    assert chosen == [1, 2, 4]
    # tie keeps the earliest index
    chosen = select_best_per_region(
        [(0.25, 0.0), (0.26, 0.0)], [-0.1, -0.1], ROI
    )
    assert chosen == [0]
    # members inside distinct cells are each selected once
    one_per = [(0.21, 1e-9), (0.35, 1e-9), (0.55, 1e-9)]
    assert select_best_per_region(one_per, [0.0, 0.0, 0.0], ROI) == [0, 1, 2]
    with pytest.raises(ValueError, match="one value per endpoint"):
        select_best_per_region([(0.3, 0.0)], [0.0, 0.0], ROI)


def test_select_best_per_region_caps_at_thirty():
    rng = np.random.default_rng(9)
    grid = ROI.grid(0.01)
    pts = grid[rng.choice(len(grid), size=500, replace=False)]
    est = rng.uniform(-0.5, 0.0, size=500)
    chosen = select_best_per_region(pts, est, ROI)
    assert len(chosen) <= 30
    cells = [region_cell(float(x), float(y), ROI) for x, y in pts[chosen]]
    assert len(set(cells)) == len(cells)
    # each winner has the best estimate in its own cell
    for i, cell in zip(chosen, cells):
        rivals = [
            j for j, (x, y) in enumerate(pts)
            if region_cell(float(x), float(y), ROI) == cell
        ]
        assert est[i] == max(est[j] for j in rivals)


def test_endpoint_gaps_identity_world_is_zero():
    world = WorldParams()
    rng = np.random.default_rng(5)
    gs = [random_genotype(rng) for _ in range(3)]
    claimed = [simulate(g, world).endpoint for g in gs]
    gaps = endpoint_gaps(gs, claimed, world)
    assert np.all(gaps == 0.0)


def test_endpoint_gaps_equal_negated_transfer_scores():
    world = WorldParams()
    pseudo = WorldParams(profile=DEFAULT_REALITY_GAP)
    rng = np.random.default_rng(6)
    gs = [random_genotype(rng) for _ in range(4)]
    outcomes = [simulate(g, world) for g in gs]
    claimed = [o.endpoint for o in outcomes]
    gaps = endpoint_gaps(gs, claimed, pseudo)
    scores = [transferability_score(o, simulate(g, pseudo)) for g, o in zip(gs, outcomes)]
    assert gaps == pytest.approx([-s for s in scores], abs=0.0)
    with pytest.raises(ValueError, match="pair up"):
        endpoint_gaps(gs, claimed[:2], world)


def test_quartiles_frozen_example():
    q1, q2, q3 = quartiles([0.02, 0.05, 0.30])
    assert q2 == 0.05
    assert q1 == pytest.approx(0.035, abs=1e-15)
    assert q3 == pytest.approx(0.175, abs=1e-15)
    with pytest.raises(ValueError):
        quartiles([])
