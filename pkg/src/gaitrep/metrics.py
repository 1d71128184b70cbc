"""Repertoire-level measurements: coverage, orientation accuracy, transfer picks."""

import math

import numpy as np
from scipy.spatial import cKDTree

from .geometry import arc_length, heading_error, wrap_angle
from .simulator import simulate
from .validation import as_endpoint_array

TRANSFERABLE_THRESHOLD = -0.15


def sparseness(endpoints, grid):
    """Mean distance from each grid point to its closest reached endpoint.

    Lower is better (denser coverage of the region the grid samples).
    """
    pts = as_endpoint_array(endpoints)
    if len(pts) == 0:
        raise ValueError("sparseness needs at least one endpoint")
    ref = as_endpoint_array(grid)
    dists, _ = cKDTree(pts).query(ref)
    return float(dists.mean())


def orientation_errors(endpoints, yaws, roi):
    """Heading errors of the endpoints that fall inside the region of interest."""
    pts = as_endpoint_array(endpoints)
    yaw_arr = np.asarray(yaws, dtype=float)
    if yaw_arr.shape != (len(pts),):
        raise ValueError("yaws must be one value per endpoint")
    inside = roi.contains_mask(pts)
    return np.array(
        [heading_error(x, y, w) for (x, y), w in zip(pts[inside], yaw_arr[inside])]
    )


def mean_orientation_error(endpoints, yaws, roi):
    errs = orientation_errors(endpoints, yaws, roi)
    return float(errs.mean()) if len(errs) else math.nan


def archive_orientation_error(endpoints, yaws, roi):
    """Mean in-region heading error; raises when nothing lands inside the region."""
    errs = orientation_errors(endpoints, yaws, roi)
    if len(errs) == 0:
        raise ValueError("no endpoint falls inside the region of interest")
    return float(errs.mean())


def median_orientation_error(endpoints, yaws, roi):
    errs = orientation_errors(endpoints, yaws, roi)
    return float(np.median(errs)) if len(errs) else math.nan


def transferable_count(estimates, threshold=TRANSFERABLE_THRESHOLD):
    """How many estimated transferability scores clear the usability bar."""
    return int(np.sum(np.asarray(estimates, dtype=float) > threshold))


def region_cell(x, y, roi, inner_arc=0.2, angular_bins=5, radial_bins=3):
    """Cell index of (x, y) in the lobe/bearing/arc-length partition, or -1.

    Each lobe of the region of interest is split into ``angular_bins`` bearing
    sectors and ``radial_bins`` arc-length bands covering [inner_arc, max_arc];
    points closer than ``inner_arc`` along their circle are not binned.  Upper
    boundaries are inclusive (clamped into the last bin).
    """
    if not roi.contains(x, y):
        return -1
    s = arc_length(x, y)
    if s < inner_arc:
        return -1
    bearing = math.atan2(y, x)
    lobe = 0 if abs(bearing) <= math.pi / 2.0 else 1
    offset = bearing if lobe == 0 else float(wrap_angle(bearing - math.pi))
    u = (offset + roi.half_angle) / (2.0 * roi.half_angle)
    a_bin = min(int(u * angular_bins), angular_bins - 1)
    v = (s - inner_arc) / (roi.max_arc - inner_arc)
    r_bin = min(int(v * radial_bins), radial_bins - 1)
    return (lobe * angular_bins + a_bin) * radial_bins + r_bin


def select_best_per_region(
    endpoints, estimates, roi, inner_arc=0.2, angular_bins=5, radial_bins=3
):
    """Pick the best-estimated controller index for each populated region cell.

    Ties on the estimate keep the earliest index.  Returns ascending indices;
    empty cells contribute nothing, so fewer than the full cell count may come
    back.
    """
    pts = as_endpoint_array(endpoints)
    est = np.asarray(estimates, dtype=float)
    if est.shape != (len(pts),):
        raise ValueError("estimates must be one value per endpoint")
    best = {}
    for i, (x, y) in enumerate(pts):
        cell = region_cell(x, y, roi, inner_arc, angular_bins, radial_bins)
        if cell < 0:
            continue
        if cell not in best or est[i] > est[best[cell]]:
            best[cell] = i
    return sorted(best.values())


def endpoint_gaps(genotypes, sim_endpoints, world):
    """Distance between each claimed endpoint and the one reached in ``world``."""
    claimed = as_endpoint_array(sim_endpoints)
    if len(genotypes) != len(claimed):
        raise ValueError("genotypes and sim_endpoints must pair up")
    gaps = np.empty(len(claimed))
    for i, (genotype, point) in enumerate(zip(genotypes, claimed)):
        reached = simulate(genotype, world).endpoint
        gaps[i] = math.hypot(point[0] - reached[0], point[1] - reached[1])
    return gaps


def quartiles(values):
    """(q1, median, q3) of a sample."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("quartiles need at least one value")
    q1, q2, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    return float(q1), float(q2), float(q3)
