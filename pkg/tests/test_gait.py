"""Genotype encoding, the periodic control signal, joint mapping, mutation."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaitrep.gait import (
    FEMUR_AMPLITUDE,
    HIP_AMPLITUDE,
    LEVELS,
    N_PARAMS,
    control_signal,
    joint_targets,
    mutate,
    random_genotype,
    validate_genotype,
)

TANH4 = math.tanh(4.0)  # 0.9993292997390670

levels = st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0])
genotypes = st.lists(levels, min_size=N_PARAMS, max_size=N_PARAMS).map(np.array)


def test_signal_frozen_values():
    assert control_signal(0.25, 1.0, 0.0) == pytest.approx(TANH4, abs=1e-12)
    assert TANH4 == pytest.approx(0.999329, abs=5e-7)
    assert control_signal(0.0, 1.0, 0.0) == 0.0
    assert control_signal(0.1, 0.0, 0.7) == 0.0


@given(st.floats(0.0, 3.0), levels, levels)
def test_signal_bounded_and_periodic(t, alpha, phi):
    v = control_signal(t, alpha, phi)
    assert abs(v) <= alpha + 1e-15
    assert control_signal(t + 1.0, alpha, phi) == pytest.approx(v, abs=1e-12)


@given(st.floats(0.0, 3.0), levels, levels)
def test_signal_half_phase_negation(t, alpha, phi):
    shifted = control_signal(t, alpha, (phi + 0.5) % 1.0)
    assert shifted + control_signal(t, alpha, phi) == pytest.approx(0.0, abs=1e-12)


def test_signal_dense_grid_bound():
    ts = np.linspace(0.0, 3.0, 1201)
    for alpha in LEVELS:
        for phi in LEVELS:
            assert np.all(np.abs(control_signal(ts, alpha, phi)) <= alpha + 1e-15)


def test_joint_targets_zero_genotype():
    cmd = joint_targets(np.zeros(N_PARAMS), 0.37)
    assert cmd.shape == (18,)
    assert np.all(cmd == 0.0)


def test_joint_targets_frozen_example():
    g = np.zeros(N_PARAMS)
    g[2] = 0.5  # leg 0 femur amplitude, phase 0
    cmd = joint_targets(g, 0.25)
    expected = FEMUR_AMPLITUDE * 0.5 * TANH4
    assert cmd[1] == pytest.approx(expected, abs=1e-12)
    assert cmd[2] == pytest.approx(-expected, abs=1e-12)
    assert cmd[0] == 0.0


@given(genotypes, st.floats(0.0, 3.0))
def test_joint_targets_tibia_mirror(genotype, t):
    cmd = joint_targets(genotype, t)
    assert np.allclose(cmd[2::3], -cmd[1::3], atol=0.0)
    assert np.all(np.abs(cmd[0::3]) <= HIP_AMPLITUDE + 1e-15)
    assert np.all(np.abs(cmd[1::3]) <= FEMUR_AMPLITUDE + 1e-15)


def test_validate_genotype():
    validate_genotype(random_genotype(np.random.default_rng(0)))
    with pytest.raises(ValueError):
        validate_genotype(np.zeros(23))
    bad = np.zeros(N_PARAMS)
    bad[5] = 0.3
    with pytest.raises(ValueError):
        validate_genotype(bad)


def test_random_genotype_levels_and_determinism():
    a = random_genotype(np.random.default_rng(42))
    b = random_genotype(np.random.default_rng(42))
    assert np.array_equal(a, b)
    assert np.isin(a, LEVELS).all()
    # all five levels show up over a few draws
    rng = np.random.default_rng(7)
    seen = np.unique(np.concatenate([random_genotype(rng) for _ in range(20)]))
    assert set(seen) == set(LEVELS.tolist())


def test_mutate_rate_zero_and_one():
    g = random_genotype(np.random.default_rng(1))
    assert np.array_equal(mutate(g, 0.0, np.random.default_rng(2)), g)
    out = mutate(g, 1.0, np.random.default_rng(3))
    assert np.isin(out, LEVELS).all()
    out2 = mutate(g, 1.0, np.random.default_rng(3))
    assert np.array_equal(out, out2)


def test_mutate_leaves_input_untouched():
    g = random_genotype(np.random.default_rng(4))
    before = g.copy()
    mutate(g, 0.5, np.random.default_rng(5))
    assert np.array_equal(g, before)


def test_mutate_change_frequency():
    # redraws include the current level, so P(change) = 0.1 * 4/5 = 0.08
    rng = np.random.default_rng(1234)
    g = random_genotype(rng)
    trials = 5000  # 5000 * 24 = 120000 position draws
    changed = 0
    for _ in range(trials):
        changed += int((mutate(g, 0.1, rng) != g).sum())
    freq = changed / (trials * N_PARAMS)
    assert freq == pytest.approx(0.08, abs=0.005)
