import math

import numpy as np
import pytest

from fluxholo import (
    BranchSheet,
    FluxConfig,
    ModeVector,
    continue_along_path,
    cut_factor,
    density,
    mode_value,
    validate,
)
from fluxholo.errors import EvaluationAtFluxon, OnCut


def test_single_fluxon_density_is_inverse_radius():
    vc = validate(FluxConfig([0.0], [0.5]))
    for z in (1.0 + 2.0j, -0.3 + 0.1j, 5.0j):
        assert abs(density(z, vc, ModeVector([1.0])) - 1.0 / abs(z)) < 1e-14 / abs(z)


def test_zero_mode_vector_rejected():
    with pytest.raises(ValueError):
        ModeVector([0.0, 0.0])


def test_density_far_field_decay_exponent():
    # |psi_0|^2 ~ |z|^(-2 Phi_T); fit the log-log slope far away
    vc = validate(FluxConfig([0.0, 1.0], [0.7, 0.8]))
    p = ModeVector([1.0])
    r1, r2 = 1e3, 1e6
    s = (math.log(density(r2 * np.exp(0.3j), vc, p))
         - math.log(density(r1 * np.exp(0.3j), vc, p))) / (math.log(r2) - math.log(r1))
    assert abs(s - (-3.0)) < 1e-3


def test_density_tail_integrability_boundary():
    # the k-th monomial mode is normalizable iff its tail power 2k - 2 Phi'_T
    # drops below -2, i.e. iff k <= D_f - 1
    vc = validate(FluxConfig([0.0, 1.0 + 0.5j, -0.5 + 1.2j], [0.9, 0.9, 0.9]))
    counts = vc.counts
    total = sum(counts.phi_prime)
    for k in range(4):
        tail_power = 2 * k - 2 * total
        if k <= counts.D_f - 1:
            assert tail_power < -2
        else:
            assert tail_power > -2


def test_evaluation_at_fluxon_rejected():
    vc = validate(FluxConfig([0.0, 1j], [0.7, 0.8]))
    with pytest.raises(EvaluationAtFluxon):
        density(1j, vc, ModeVector([1.0]))


def test_mode_value_branch_example():
    # (-1)^(-1/2) on the default sheet: arg(-1) = pi, so exp(-i pi / 2) = -i
    vc = validate(FluxConfig([0.0], [0.5]))
    assert abs(mode_value(-1.0, 0, vc) - (-1j)) < 1e-14


def test_mode_value_on_cut_rejected():
    vc = validate(FluxConfig([0.0], [0.5]))
    with pytest.raises(OnCut):
        mode_value(2.0 + 1e-12j, 0, vc)


def test_mode_value_jump_across_cut():
    # just below the cut = cut_factor times just above
    vc = validate(FluxConfig([0.0], [0.7]))
    eps = 1e-8
    above = mode_value(2.0 + eps * 1j, 0, vc)
    below = mode_value(2.0 - eps * 1j, 0, vc)
    ratio = below / above
    assert abs(ratio - cut_factor(0.7)) < 1e-6


def test_modulus_matches_density_and_ignores_sheet(rng):
    vc = validate(FluxConfig([0.0, 0.8 + 0.6j], [0.7, 0.8]))
    sheet = BranchSheet((1.3, 5.1))
    for _ in range(20):
        z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if min(abs(z - zc) for zc in vc.zeta) < 0.2:
            continue
        try:
            v0 = mode_value(z, 1, vc)
            v1 = mode_value(z, 1, vc, sheet=sheet)
        except OnCut:
            continue
        d = density(z, vc, ModeVector([0.0, 1.0]))
        assert abs(abs(v0) ** 2 - d) < 1e-12 * d
        assert abs(abs(v1) - abs(v0)) < 1e-12 * abs(v0)


def test_continuation_monodromy_single_fluxon():
    # a small circle around one fluxon multiplies the mode by its cut factor
    vc = validate(FluxConfig([0.0, 2.0 + 1.3j], [0.6, 0.7]))
    t = np.linspace(0.0, 1.0, 201)
    path = 0.5 * np.exp(2j * np.pi * t)
    vals = continue_along_path(path, 0, vc)
    assert abs(vals[-1] / vals[0] - cut_factor(0.6)) < 1e-12


def test_continuation_around_nothing_is_trivial():
    vc = validate(FluxConfig([0.0, 2.0 + 1.3j], [0.6, 0.7]))
    t = np.linspace(0.0, 1.0, 201)
    path = -4.0 + 0.5 * np.exp(2j * np.pi * t)
    vals = continue_along_path(path, 1, vc)
    assert abs(vals[-1] - vals[0]) < 1e-12 * abs(vals[0])


def test_continuation_matches_mode_value_off_cuts():
    vc = validate(FluxConfig([0.0, 2.0 + 1.3j], [0.6, 0.7]))
    t = np.linspace(0.0, 1.0, 101)
    path = -1.0 + 0.5j + (1.5j) * t  # straight run in the left half plane
    vals = continue_along_path(path, 0, vc)
    direct = np.array([mode_value(z, 0, vc) for z in path])
    assert np.abs(vals - direct).max() < 1e-12 * np.abs(direct).max()
