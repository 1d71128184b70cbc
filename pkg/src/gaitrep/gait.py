"""Open-loop hexapod gait controller.

A controller is a genotype of 24 parameters, four per leg: the hip-swing
amplitude and phase, then the femur amplitude and phase.  Every parameter is
quantized to the five levels 0, 0.25, 0.5, 0.75, 1.  Each servo follows a
flattened sine of period one second; the tibia servo always mirrors the femur
servo so the foot stays vertical.
"""

import numpy as np

LEVELS = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
N_LEGS = 6
N_PARAMS = 4 * N_LEGS

# joint ranges at full amplitude, radians
HIP_AMPLITUDE = 0.5
FEMUR_AMPLITUDE = 0.7


def control_signal(t, amplitude, phase):
    """Flattened sine wave: amplitude * tanh(4 sin(2 pi (t + phase))).

    Period 1 s; the tanh(4 .) saturation holds the servo near its extreme for
    most of each half-cycle.  Accepts scalars or broadcastable arrays.
    """
    return amplitude * np.tanh(4.0 * np.sin(2.0 * np.pi * (t + phase)))


def validate_genotype(genotype) -> np.ndarray:
    g = np.asarray(genotype, dtype=float)
    if g.shape != (N_PARAMS,):
        raise ValueError(f"genotype must have shape ({N_PARAMS},), got {g.shape}")
    if not np.isin(g, LEVELS).all():
        raise ValueError("genotype values must be multiples of 0.25 in [0, 1]")
    return g


def random_genotype(rng) -> np.ndarray:
    return LEVELS[rng.integers(0, len(LEVELS), size=N_PARAMS)]


def mutate(genotype, rate, rng) -> np.ndarray:
    """Resample each parameter with probability ``rate``, uniformly over all levels.

    The redraw may land on the current value, so the realized per-position
    change probability is rate * 4/5.  The input is never modified.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("mutation rate must lie in [0, 1]")
    g = np.asarray(genotype, dtype=float)
    hit = rng.random(N_PARAMS) < rate
    drawn = LEVELS[rng.integers(0, len(LEVELS), size=N_PARAMS)]
    return np.where(hit, drawn, g)


def joint_targets(genotype, t, hip_amplitude=HIP_AMPLITUDE, femur_amplitude=FEMUR_AMPLITUDE):
    """18 joint angles (leg-major: hip, femur, tibia) at time t seconds.

    The tibia angle is the negated femur angle for every leg.
    """
    g = np.asarray(genotype, dtype=float).reshape(N_LEGS, 4)
    hip = hip_amplitude * control_signal(t, g[:, 0], g[:, 1])
    femur = femur_amplitude * control_signal(t, g[:, 2], g[:, 3])
    out = np.empty(3 * N_LEGS)
    out[0::3] = hip
    out[1::3] = femur
    out[2::3] = -femur
    return out
