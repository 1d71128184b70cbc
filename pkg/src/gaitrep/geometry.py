"""Planar trajectory geometry for circular walking paths.

A controller that walks with a constant turning rate traces a circle through
the origin whose center sits on the lateral (y) axis; straight walking is the
infinite-radius limit.  These helpers give the heading tangent to that circle
at an endpoint, the arc length along it, and the region of interest used for
target spreading and repertoire metrics.
"""

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(angle):
    """Wrap an angle (scalar or array) into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(angle), TWO_PI)


def desired_heading(x, y):
    """Heading tangent at (x, y) to the through-origin circle centered on the y axis.

    The circle is traversed starting from the origin along +x, so the tangent
    at the origin side is 0.  Undefined at the origin itself.
    """
    if x == 0.0 and y == 0.0:
        raise ValueError("desired heading is undefined at the origin")
    return float(wrap_angle(2.0 * math.atan2(y, x)))


def heading_error(x, y, yaw):
    """Absolute angular gap between a final yaw and the endpoint's desired heading."""
    return abs(float(wrap_angle(yaw - desired_heading(x, y))))


def orientation_quality(x, y, yaw):
    """Quality of a rollout: minus the heading error (0 is perfect)."""
    return -heading_error(x, y, yaw)


def arc_length(x, y):
    """Curvilinear abscissa of (x, y) along its through-origin circle.

    Falls back to |x| on the y = 0 axis (straight line).  Undefined at the
    origin.  Always >= the Euclidean norm of (x, y).
    """
    ax, ay = abs(x), abs(y)
    if ay == 0.0:
        if ax == 0.0:
            raise ValueError("arc length is undefined at the origin")
        return ax
    # arc = chord * (phi/2)/sin(phi/2) = chord * (1 + phi^2/24 + ...); once the
    # turn angle is below ~2e-8 the correction vanishes at double precision,
    # and the radius formula would overflow for denormal y
    if ay < ax * 1e-8:
        return math.hypot(x, y)
    radius = (x * x + y * y) / (2.0 * ay)
    turn = 2.0 * math.atan2(ay, ax)
    return radius * turn


@dataclass(frozen=True)
class RegionOfInterest:
    """Two lobes around the +x and -x axes, truncated by arc length.

    A point belongs to the region when its bearing from the origin lies within
    ``half_angle`` of either axis and its curvilinear abscissa is at most
    ``max_arc``.  The origin is excluded.
    """

    half_angle: float = math.pi / 3.0
    max_arc: float = 0.6

    def __post_init__(self):
        if not 0.0 < self.half_angle <= math.pi / 2.0:
            raise ValueError("half_angle must lie in (0, pi/2]")
        if self.max_arc <= 0.0:
            raise ValueError("max_arc must be positive")

    def contains(self, x, y) -> bool:
        if x == 0.0 and y == 0.0:
            return False
        bearing = abs(math.atan2(y, x))
        in_lobe = bearing <= self.half_angle or math.pi - bearing <= self.half_angle
        return in_lobe and arc_length(x, y) <= self.max_arc

    def contains_mask(self, points) -> np.ndarray:
        """Vectorized membership test for an (n, 2) array of points."""
        pts = np.asarray(points, dtype=float)
        x, y = pts[:, 0], pts[:, 1]
        bearing = np.abs(np.arctan2(y, x))
        in_lobe = (bearing <= self.half_angle) | (np.pi - bearing <= self.half_angle)
        # vectorized arc length; the origin row is masked out explicitly
        ax, ay = np.abs(x), np.abs(y)
        nonzero = (x != 0.0) | (y != 0.0)
        near_straight = ay < ax * 1e-8  # includes ay == 0; see arc_length
        with np.errstate(divide="ignore", invalid="ignore"):
            radius = (x * x + y * y) / (2.0 * ay)
            s = np.where(near_straight, np.hypot(x, y), radius * 2.0 * np.arctan2(ay, ax))
        return nonzero & in_lobe & (s <= self.max_arc)

    def grid(self, step: float = 0.01) -> np.ndarray:
        """Origin-anchored square lattice restricted to the region.

        Points are (i*step, j*step) for integer i, j, listed in lexicographic
        (x, then y) order.
        """
        if step <= 0.0:
            raise ValueError("step must be positive")
        n = int(math.ceil(self.max_arc / step))
        idx = np.arange(-n, n + 1, dtype=float)
        xs, ys = np.meshgrid(idx * step, idx * step, indexing="ij")
        pts = np.column_stack([xs.ravel(), ys.ravel()])
        return pts[self.contains_mask(pts)]
