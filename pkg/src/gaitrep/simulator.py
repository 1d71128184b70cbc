"""Deterministic kinematic simulator for a crawling hexapod.

The body is a rigid planar frame carrying six legs.  At every control tick the
leg tips are placed by forward kinematics in the body frame; legs whose tip
would sit at or below the contact plane are in stance.  A leg entering stance
pins its tip to the ground at its current world position, and the body pose is
then the planar rigid transform that best keeps every still-grounded tip on
its pin (least squares).  There is no dynamics, no slippage model and no
randomness: a genotype and a world map to exactly one outcome.

A ``PerturbationProfile`` turns the same machinery into a "pseudo-real" robot:
per-leg femur-length scales, per-leg femur-command scales and an offset of the
contact plane.  The gap between the simulated and pseudo-real endpoint of the
same genotype defines its transferability score.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .gait import HIP_AMPLITUDE, FEMUR_AMPLITUDE, N_LEGS, control_signal, validate_genotype
from .geometry import wrap_angle

_NOMINAL_HIP_X = (0.10, 0.0, -0.10, 0.10, 0.0, -0.10)
_NOMINAL_HIP_Y = (0.06, 0.08, 0.06, -0.06, -0.08, -0.06)
_NOMINAL_YAW = (
    math.radians(60.0),
    math.radians(90.0),
    math.radians(120.0),
    -math.radians(60.0),
    -math.radians(90.0),
    -math.radians(120.0),
)


def _six(values, name):
    out = tuple(float(v) for v in values)
    if len(out) != N_LEGS:
        raise ValueError(f"{name} must have {N_LEGS} entries, got {len(out)}")
    return out


@dataclass(frozen=True)
class RobotModel:
    """Geometry of the hexapod: hip placements, leg mount yaws, segment lengths."""

    hip_x: tuple = _NOMINAL_HIP_X
    hip_y: tuple = _NOMINAL_HIP_Y
    mount_yaw: tuple = _NOMINAL_YAW
    coxa: tuple = (0.06,) * N_LEGS
    femur: tuple = (0.09,) * N_LEGS
    tibia: tuple = (0.12,) * N_LEGS
    height: float = 0.10
    amp1: float = HIP_AMPLITUDE
    amp2: float = FEMUR_AMPLITUDE

    def __post_init__(self):
        for name in ("hip_x", "hip_y", "mount_yaw", "coxa", "femur", "tibia"):
            object.__setattr__(self, name, _six(getattr(self, name), name))
        for name in ("coxa", "femur", "tibia"):
            if min(getattr(self, name)) <= 0.0:
                raise ValueError(f"{name} lengths must be positive")
        if self.height <= 0.0:
            raise ValueError("body height must be positive")

    @classmethod
    def nominal(cls) -> "RobotModel":
        return cls()

    @cached_property
    def _arrays(self):
        return tuple(
            np.array(getattr(self, name))
            for name in ("hip_x", "hip_y", "mount_yaw", "coxa", "femur", "tibia")
        )


@dataclass(frozen=True)
class PerturbationProfile:
    """Reality-gap knobs: femur-length scales, femur-command scales, contact offset."""

    femur_scale: tuple = (1.0,) * N_LEGS
    amp2_scale: tuple = (1.0,) * N_LEGS
    dh: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "femur_scale", _six(self.femur_scale, "femur_scale"))
        object.__setattr__(self, "amp2_scale", _six(self.amp2_scale, "amp2_scale"))
        if min(self.femur_scale) <= 0.0:
            raise ValueError("femur scales must be positive")
        if not math.isfinite(self.dh):
            raise ValueError("dh must be finite")

    @classmethod
    def identity(cls) -> "PerturbationProfile":
        return cls()

    @property
    def is_identity(self) -> bool:
        return self == PerturbationProfile()

    def to_dict(self) -> dict:
        return {
            "femur_scale": list(self.femur_scale),
            "amp2_scale": list(self.amp2_scale),
            "dh": self.dh,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PerturbationProfile":
        extra = set(data) - {"femur_scale", "amp2_scale", "dh"}
        if extra:
            raise ValueError(f"unknown perturbation keys: {sorted(extra)}")
        return cls(
            femur_scale=tuple(data.get("femur_scale", (1.0,) * N_LEGS)),
            amp2_scale=tuple(data.get("amp2_scale", (1.0,) * N_LEGS)),
            dh=float(data.get("dh", 0.0)),
        )

    @cached_property
    def _arrays(self):
        return np.array(self.femur_scale), np.array(self.amp2_scale)


#: default pseudo-real robot: mismatched femurs, miscalibrated femur servos,
#: contact plane 5 mm high
DEFAULT_REALITY_GAP = PerturbationProfile(
    femur_scale=(0.95, 1.06, 0.92, 1.03, 0.97, 1.08),
    amp2_scale=(1.0, 0.9, 1.0, 1.05, 0.95, 1.0),
    dh=0.005,
)


@dataclass(frozen=True)
class WorldParams:
    """A robot model plus timing and an optional perturbation profile."""

    model: RobotModel = field(default_factory=RobotModel)
    dt: float = 0.03
    episode: float = 3.0
    profile: PerturbationProfile = field(default_factory=PerturbationProfile)

    def __post_init__(self):
        if self.dt <= 0.0 or self.episode <= 0.0:
            raise ValueError("dt and episode must be positive")
        n = round(self.episode / self.dt)
        if n < 1 or abs(n * self.dt - self.episode) > 1e-9:
            raise ValueError("episode must be an integral number of ticks")

    @property
    def ticks(self) -> int:
        return round(self.episode / self.dt)


@dataclass(eq=False)
class SimOutcome:
    """Result of one rollout: where the body ended up and what touched when."""

    endpoint: np.ndarray  # (2,) displacement of the body center over the episode
    yaw: float  # final body yaw, wrapped to (-pi, pi]
    contacts: np.ndarray  # (ticks, 6) stance membership per pose-update tick
    trajectory: np.ndarray  # (ticks + 1, 3) poses (x, y, yaw), starting at zero


def leg_tip(model: RobotModel, leg: int, command):
    """Planar tip position and tip height of one leg under the nominal model.

    ``command`` is an 18-vector of joint angles (leg-major).  The tibia keeps
    the foot vertical, so the tip height is h + l2 sin(j2) - l3.
    """
    j1 = float(command[3 * leg])
    j2 = float(command[3 * leg + 1])
    yaw = model.mount_yaw[leg] + j1
    reach = model.coxa[leg] + model.femur[leg] * math.cos(j2)
    x = model.hip_x[leg] + reach * math.cos(yaw)
    y = model.hip_y[leg] + reach * math.sin(yaw)
    height = model.height + model.femur[leg] * math.sin(j2) - model.tibia[leg]
    return (x, y), height


def stance_set(world: WorldParams, command) -> frozenset:
    """Legs whose (profile-perturbed) tip height is at or below the contact plane."""
    model, prof = world.model, world.profile
    legs = []
    for leg in range(N_LEGS):
        j2 = float(command[3 * leg + 1]) * prof.amp2_scale[leg]
        l2 = model.femur[leg] * prof.femur_scale[leg]
        height = model.height + l2 * math.sin(j2) - model.tibia[leg]
        if height <= prof.dh:
            legs.append(leg)
    return frozenset(legs)


def _fit_pose(px, py, pyaw, bx, by, wx, wy):
    """Planar rigid transform mapping body points onto world anchors.

    Zero anchors: pose unchanged.  One anchor: translation only, yaw kept.
    Two or more: closed-form least-squares rotation + translation (the
    returned pose is absolute, not incremental).
    """
    n = len(bx)
    if n == 0:
        return px, py, pyaw
    if n == 1:
        c = math.cos(pyaw)
        s = math.sin(pyaw)
        return wx[0] - (c * bx[0] - s * by[0]), wy[0] - (s * bx[0] + c * by[0]), pyaw
    inv = 1.0 / n
    bcx = sum(bx) * inv
    bcy = sum(by) * inv
    wcx = sum(wx) * inv
    wcy = sum(wy) * inv
    sxx = 0.0
    sxy = 0.0
    for i in range(n):
        dbx = bx[i] - bcx
        dby = by[i] - bcy
        dwx = wx[i] - wcx
        dwy = wy[i] - wcy
        sxx += dbx * dwx + dby * dwy
        sxy += dbx * dwy - dby * dwx
    yaw = math.atan2(sxy, sxx)
    c = math.cos(yaw)
    s = math.sin(yaw)
    return wcx - (c * bcx - s * bcy), wcy - (s * bcx + c * bcy), yaw


def step_body(pose, body_points, world_points):
    """One anchored body update: fit pose so body-frame tips meet world anchors."""
    bp = np.asarray(body_points, dtype=float).reshape(-1, 2)
    wp = np.asarray(world_points, dtype=float).reshape(-1, 2)
    if bp.shape != wp.shape:
        raise ValueError("body and world point lists must have matching shapes")
    x, y, yaw = (float(v) for v in pose)
    return _fit_pose(
        x, y, yaw, bp[:, 0].tolist(), bp[:, 1].tolist(), wp[:, 0].tolist(), wp[:, 1].tolist()
    )


def _tip_grid(genotype, world: WorldParams):
    """Vectorized forward kinematics for all ticks: tips, stance matrix."""
    model, prof = world.model, world.profile
    hip_x, hip_y, mount_yaw, coxa, femur, tibia = model._arrays
    femur_scale, amp2_scale = prof._arrays
    params = np.asarray(genotype, dtype=float).reshape(N_LEGS, 4)
    n = world.ticks
    t = (np.arange(n + 1) * world.dt)[:, None]
    j1 = model.amp1 * control_signal(t, params[:, 0], params[:, 1])
    j2 = (model.amp2 * control_signal(t, params[:, 2], params[:, 3])) * amp2_scale
    l2 = femur * femur_scale
    leg_yaw = mount_yaw + j1
    reach = coxa + l2 * np.cos(j2)
    tip_x = hip_x + reach * np.cos(leg_yaw)
    tip_y = hip_y + reach * np.sin(leg_yaw)
    height = model.height + l2 * np.sin(j2) - tibia
    stance = height <= prof.dh
    return tip_x, tip_y, stance


def simulate(genotype, world: WorldParams) -> SimOutcome:
    """Roll out a genotype: anchored-crawl pose integration over the episode.

    The robot starts at the origin with zero yaw.  Tick k evaluates the
    control signal at t = k*dt; legs grounded at t = 0 are pinned where they
    stand, and each subsequent tick refits the pose over the legs that stayed
    in stance across the tick before re-pinning any leg that just landed.
    """
    g = validate_genotype(genotype)
    tip_x, tip_y, stance = _tip_grid(g, world)
    n = world.ticks

    tips_x = tip_x.tolist()
    tips_y = tip_y.tolist()
    rows = stance.tolist()

    traj = np.zeros((n + 1, 3))
    px = py = pyaw = 0.0
    ax = [0.0] * N_LEGS
    ay = [0.0] * N_LEGS

    prev = rows[0]
    rx = tips_x[0]
    ry = tips_y[0]
    for i in range(N_LEGS):
        if prev[i]:  # initial pose is the identity: world tip == body tip
            ax[i] = rx[i]
            ay[i] = ry[i]

    for k in range(1, n + 1):
        cur = rows[k]
        rx = tips_x[k]
        ry = tips_y[k]
        bx = []
        by = []
        wx = []
        wy = []
        for i in range(N_LEGS):
            if prev[i] and cur[i]:
                bx.append(rx[i])
                by.append(ry[i])
                wx.append(ax[i])
                wy.append(ay[i])
        px, py, pyaw = _fit_pose(px, py, pyaw, bx, by, wx, wy)
        c = math.cos(pyaw)
        s = math.sin(pyaw)
        for i in range(N_LEGS):
            if cur[i] and not prev[i]:  # touchdown: pin at the current world tip
                ax[i] = px + c * rx[i] - s * ry[i]
                ay[i] = py + s * rx[i] + c * ry[i]
        traj[k, 0] = px
        traj[k, 1] = py
        traj[k, 2] = pyaw
        prev = cur

    return SimOutcome(
        endpoint=traj[n, :2].copy(),
        yaw=float(wrap_angle(traj[n, 2])),
        contacts=stance[1:],
        trajectory=traj,
    )


def transferability_score(sim_outcome: SimOutcome, real_outcome: SimOutcome) -> float:
    """Minus the endpoint gap between a simulated and a pseudo-real rollout.

    Exactly 0.0 (never -0.0) when the endpoints coincide.
    """
    dx = sim_outcome.endpoint[0] - real_outcome.endpoint[0]
    dy = sim_outcome.endpoint[1] - real_outcome.endpoint[1]
    return 0.0 - math.hypot(dx, dy)
