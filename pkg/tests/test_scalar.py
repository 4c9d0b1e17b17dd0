"""Shooting classification, nodal profiles, and the two routes to the
segregated energy."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import artifact as af


def test_shoot_soliton_amplitude_decays(grid_n1):
    shot = af.shoot(grid_n1, np.sqrt(2.0))
    assert shot.terminal_behavior == "Decayed"
    assert shot.sign_changes == 0
    # below the decay floor used by the tail classifier
    assert abs(shot.trajectory.values[-1]) < 1e-5


def test_shoot_subcritical_amplitude_oscillates(grid_n1):
    # the zero state is unstable: tiny data grows to O(1), then the
    # double-well potential confines it above zero
    shot = af.shoot(grid_n1, 1e-6)
    assert shot.terminal_behavior == "Oscillating"
    assert shot.sign_changes == 0
    assert np.max(shot.trajectory.values) > 0.5


def test_shoot_inside_well_oscillates(grid_n1):
    shot = af.shoot(grid_n1, 1.0)
    assert shot.terminal_behavior == "Oscillating"
    assert shot.sign_changes == 0


def test_shoot_rejects_nonpositive_amplitude(grid_n1):
    with pytest.raises(af.ConfigError):
        af.shoot(grid_n1, 0.0)


def test_shoot_bracket_flips_sign_count():
    g = af.build_grid(3, 1025, 20.0)
    profile = af.find_nodal_solution(g, 1)
    below = af.shoot(g, profile.amplitude * 0.98)
    above = af.shoot(g, profile.amplitude * 1.02)
    assert below.sign_changes == 0
    assert above.sign_changes >= 1


def test_count_sign_changes_deadband():
    vals = np.array([1.0, 1e-14, -1e-14, -1.0, 1e-13, 1.0])
    assert af.count_sign_changes(vals, deadband=1e-12) == 2
    assert af.count_sign_changes(-vals, deadband=1e-12) == 2


@settings(max_examples=30, deadline=None)
@given(scale=st.floats(min_value=1e-3, max_value=1e3),
       seed=st.integers(min_value=0, max_value=2**31))
def test_count_sign_changes_scale_invariant(scale, seed):
    vals = np.random.default_rng(seed).standard_normal(64)
    base = af.count_sign_changes(vals, deadband=0.0)
    assert af.count_sign_changes(scale * vals, deadband=0.0) == base


def test_soliton_energy(soliton_profile):
    assert soliton_profile.c_value == pytest.approx(4.0 / 3.0, abs=1e-3)
    assert soliton_profile.h == 1
    assert soliton_profile.node_radii == ()
    assert soliton_profile.residual < 1e-8


def test_soliton_energy_second_order():
    errs = []
    for n in (513, 1025):
        g = af.build_grid(1, n, 16.0)
        errs.append(abs(af.find_nodal_solution(g, 1).c_value - 4.0 / 3.0))
    assert 2.5 < errs[0] / errs[1] < 6.0


def test_two_bumps_on_the_line(grid_n1):
    # translation invariance makes the level 4/3 + 8/3; the truncated
    # domain pins it slightly above
    profile = af.find_nodal_solution(grid_n1, 2)
    assert len(profile.node_radii) == 1
    assert af.count_sign_changes(profile.solution, deadband=1e-12) == 1
    assert 4.0 < profile.c_value < 4.01


def test_nodal_profile_invariants(profile_h2, grid_h2):
    assert len(profile_h2.bumps) == 2
    assert len(profile_h2.energies) == 2
    for bump, energy in zip(profile_h2.bumps, profile_h2.energies):
        b = np.asarray(bump)
        assert np.all(b >= 0)
        # on the constraint set the energy is a quarter of the norm
        assert af.h1_norm_sq(grid_h2, b) == pytest.approx(4 * energy, rel=1e-7)
        assert af.lp_integral(grid_h2, b, 4) == pytest.approx(4 * energy, rel=1e-7)
    assert profile_h2.c_value == pytest.approx(sum(profile_h2.energies), rel=1e-12)


def test_routes_agree_on_plane(grid_h2, profile_h2):
    shot = af.find_nodal_solution(grid_h2, 2)
    rel = abs(shot.c_value - profile_h2.c_value) / shot.c_value
    assert rel < 1e-8
    assert abs(shot.node_radii[0] - profile_h2.node_radii[0]) < 2 * grid_h2.dr


def test_bump_constants(profile_h2, grid_h2):
    c1, c2 = af.bump_constants(profile_h2)
    assert 0 < c1 <= c2
    norms = [np.sqrt(af.h1_norm_sq(grid_h2, b)) for b in profile_h2.bumps]
    assert c1 == pytest.approx(min(norms), rel=1e-12)
    assert c2 == pytest.approx(max(norms), rel=1e-12)


def test_nehari_projection_scales(grid_n1, soliton_profile):
    u = np.asarray(soliton_profile.bumps[0])
    for t in (0.5, 2.0):
        proj = af.nehari_project_scalar(grid_n1, t * u)
        ref = af.nehari_project_scalar(grid_n1, u)
        assert np.max(np.abs(proj - ref)) < 1e-10


def test_nehari_projection_rejects_zero(grid_n1):
    with pytest.raises(af.ZeroField):
        af.nehari_project_scalar(grid_n1, np.zeros(grid_n1.n_points))


def test_annulus_matches_ground_state(grid_n1, soliton_profile):
    field, energy = af.annulus_ground_state(grid_n1, 0.0, grid_n1.r_max)
    assert energy == pytest.approx(soliton_profile.c_value, abs=1e-10)


def test_annulus_rejects_bad_interval(grid_h2):
    with pytest.raises(af.EmptyAnnulus):
        af.annulus_ground_state(grid_h2, 5.0, 5.0)
    with pytest.raises(af.ConfigError):
        af.annulus_ground_state(grid_h2, -1.0, 5.0)


def test_free_energy_of_soliton(grid_n1):
    u = np.sqrt(2.0) / np.cosh(grid_n1.nodes)
    u = u - u[-1]
    assert af.free_energy(grid_n1, u) == pytest.approx(4.0 / 3.0, abs=1e-3)


def test_partition_rejects_bad_h(grid_h2):
    with pytest.raises(af.ConfigError):
        af.compute_c_infinity(grid_h2, 0)


def test_shot_amplitude_recorded(soliton_profile):
    # the sech soliton has height sqrt(2)
    assert soliton_profile.amplitude == pytest.approx(np.sqrt(2.0), abs=1e-3)
